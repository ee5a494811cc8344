//! Influence/alignment quadrant mapping.
//!
//! Crosses a stakeholder's influence level with an analyst-supplied agenda
//! alignment annotation into one of four zones:
//!
//! ```text
//!             alignment low | alignment high
//! influence high:  Zone C   |   Zone D        (key opponents / partners)
//! influence low:   Zone A   |   Zone B        (threats / future collaborations)
//! ```
//!
//! The boundary convention is identical on both axes: a value equal to
//! the threshold classifies low.

use serde::{Deserialize, Serialize};

use crate::influence::{InfluenceLevel, InfluenceScore};
use crate::{Error, Result};

pub const DEFAULT_ALIGNMENT_THRESHOLD: f64 = 0.5;

/// Analyst judgment of how well a stakeholder's agenda aligns with the
/// focal firm's, on a unit scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentAnnotation {
    pub stakeholder: String,
    /// In `[0,1]`, low to high.
    pub alignment: f64,
    /// Free-text rationale for the judgment.
    #[serde(default)]
    pub note: String,
}

impl AlignmentAnnotation {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alignment) {
            return Err(Error::Contract(format!(
                "alignment of '{}' is {}, outside [0,1]",
                self.stakeholder, self.alignment
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Zone {
    /// Low influence, low alignment: potential threats.
    A,
    /// Low influence, high alignment: future collaboration opportunities.
    B,
    /// High influence, low alignment: key opponents.
    C,
    /// High influence, high alignment: potential partners.
    D,
}

impl Zone {
    pub fn description(self) -> &'static str {
        match self {
            Zone::A => "potential threats",
            Zone::B => "future collaboration opportunities",
            Zone::C => "key opponents",
            Zone::D => "potential partners",
        }
    }

    fn from_levels(influence: InfluenceLevel, alignment: InfluenceLevel) -> Zone {
        match (influence, alignment) {
            (InfluenceLevel::High, InfluenceLevel::High) => Zone::D,
            (InfluenceLevel::High, InfluenceLevel::Low) => Zone::C,
            (InfluenceLevel::Low, InfluenceLevel::High) => Zone::B,
            (InfluenceLevel::Low, InfluenceLevel::Low) => Zone::A,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZonePlacement {
    pub stakeholder: String,
    pub influence_level: InfluenceLevel,
    pub alignment_level: InfluenceLevel,
    pub zone: Zone,
    pub score: f64,
    pub alignment: f64,
    pub influence_threshold: f64,
    pub alignment_threshold: f64,
}

/// Places one stakeholder into the quadrant matrix.
pub fn assign_zone(
    score: &InfluenceScore,
    annotation: &AlignmentAnnotation,
    alignment_threshold: f64,
) -> Result<ZonePlacement> {
    if score.stakeholder != annotation.stakeholder {
        return Err(Error::Contract(format!(
            "score is for '{}' but annotation is for '{}'",
            score.stakeholder, annotation.stakeholder
        )));
    }
    annotation.validate()?;
    let alignment_level = if annotation.alignment <= alignment_threshold {
        InfluenceLevel::Low
    } else {
        InfluenceLevel::High
    };
    Ok(ZonePlacement {
        stakeholder: score.stakeholder.clone(),
        influence_level: score.level,
        alignment_level,
        zone: Zone::from_levels(score.level, alignment_level),
        score: score.score,
        alignment: annotation.alignment,
        influence_threshold: score.threshold,
        alignment_threshold,
    })
}

/// The rendered matrix: stakeholders grouped by zone, each zone sorted by
/// score descending; stakeholders without an annotation are reported
/// separately, never silently dropped.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MatrixReport {
    pub zone_a: Vec<ZonePlacement>,
    pub zone_b: Vec<ZonePlacement>,
    pub zone_c: Vec<ZonePlacement>,
    pub zone_d: Vec<ZonePlacement>,
    pub unannotated: Vec<String>,
}

impl MatrixReport {
    pub fn zone(&self, zone: Zone) -> &[ZonePlacement] {
        match zone {
            Zone::A => &self.zone_a,
            Zone::B => &self.zone_b,
            Zone::C => &self.zone_c,
            Zone::D => &self.zone_d,
        }
    }

    /// Plain-text four-quadrant diagram for human consumption.
    pub fn diagram(&self) -> String {
        let list = |placements: &[ZonePlacement]| -> String {
            if placements.is_empty() {
                "-".to_string()
            } else {
                placements
                    .iter()
                    .map(|p| p.stakeholder.as_str())
                    .collect::<Vec<_>>()
                    .join(", ")
            }
        };
        let mut out = String::new();
        out.push_str("influence\n");
        out.push_str(&format!("  high | C (key opponents): {}\n", list(&self.zone_c)));
        out.push_str(&format!("       | D (potential partners): {}\n", list(&self.zone_d)));
        out.push_str(&format!("  low  | A (potential threats): {}\n", list(&self.zone_a)));
        out.push_str(&format!(
            "       | B (future collaborations): {}\n",
            list(&self.zone_b)
        ));
        out.push_str("       +---- alignment: low (A/C) -> high (B/D)\n");
        if !self.unannotated.is_empty() {
            out.push_str(&format!("unannotated: {}\n", self.unannotated.join(", ")));
        }
        out
    }
}

/// Groups placements by zone, sorted by score descending (id as tie-break).
pub fn map_report(placements: &[ZonePlacement], unannotated: &[String]) -> MatrixReport {
    let mut report = MatrixReport {
        unannotated: unannotated.to_vec(),
        ..Default::default()
    };
    report.unannotated.sort();
    for placement in placements {
        let bucket = match placement.zone {
            Zone::A => &mut report.zone_a,
            Zone::B => &mut report.zone_b,
            Zone::C => &mut report.zone_c,
            Zone::D => &mut report.zone_d,
        };
        bucket.push(placement.clone());
    }
    for bucket in [
        &mut report.zone_a,
        &mut report.zone_b,
        &mut report.zone_c,
        &mut report.zone_d,
    ] {
        bucket.sort_by(|a, b| {
            b.score
                .partial_cmp(&a.score)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.stakeholder.cmp(&b.stakeholder))
        });
    }
    report
}
