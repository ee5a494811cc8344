//! Influence profiles, the aggregated influence score, and rankings.
//!
//! A profile collects a stakeholder's max-normalized centrality
//! components; the score is the arithmetic mean of the components the
//! caller selects, with scores at or below the threshold classifying as
//! low influence.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::centrality::{CentralityVector, Measure};
use crate::event::Kind;
use crate::network::{EdgeMode, WeightSemantics};
use crate::{Error, Result};

pub const DEFAULT_INFLUENCE_THRESHOLD: f64 = 0.5;

/// Identifies which network a profile was computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkRef {
    pub kind: Kind,
    pub mode: EdgeMode,
    pub semantics: WeightSemantics,
}

/// Per-stakeholder 4-tuple of normalized centralities; components are
/// absent when a measure was not computed, never imputed as zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfluenceProfile {
    pub stakeholder: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub odc: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bc: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cc: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ec: Option<f64>,
    pub network: NetworkRef,
}

impl InfluenceProfile {
    pub fn component(&self, measure: Measure) -> Option<f64> {
        match measure {
            Measure::OutDegree => self.odc,
            Measure::Betweenness => self.bc,
            Measure::Closeness => self.cc,
            Measure::Eigenvector => self.ec,
        }
    }

    pub fn present_measures(&self) -> Vec<Measure> {
        Measure::ALL
            .into_iter()
            .filter(|m| self.component(*m).is_some())
            .collect()
    }
}

/// Assembles one profile per stakeholder from computed centrality vectors,
/// taking each vector's max-normalized map.
pub fn assemble_profiles(
    vectors: &[CentralityVector],
    network: NetworkRef,
) -> Result<Vec<InfluenceProfile>> {
    if vectors.is_empty() {
        return Err(Error::Contract("at least one centrality vector required".into()));
    }
    let mut seen = BTreeSet::new();
    for v in vectors {
        if !seen.insert(v.measure) {
            return Err(Error::Contract(format!(
                "duplicate centrality vector for measure {}",
                v.measure.as_str()
            )));
        }
    }
    let stakeholders: BTreeSet<&String> = vectors.iter().flat_map(|v| v.normalized.keys()).collect();
    Ok(stakeholders
        .into_iter()
        .map(|id| {
            let get = |m: Measure| {
                vectors
                    .iter()
                    .find(|v| v.measure == m)
                    .and_then(|v| v.normalized.get(id).copied())
            };
            InfluenceProfile {
                stakeholder: id.clone(),
                odc: get(Measure::OutDegree),
                bc: get(Measure::Betweenness),
                cc: get(Measure::Closeness),
                ec: get(Measure::Eigenvector),
                network,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfluenceLevel {
    High,
    Low,
}

/// A stakeholder's aggregated influence score with its classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfluenceScore {
    pub stakeholder: String,
    /// Arithmetic mean of the selected normalized components, in `[0,1]`.
    pub score: f64,
    /// Low iff `score <= threshold`; the boundary classifies low.
    pub level: InfluenceLevel,
    pub measures_used: Vec<Measure>,
    pub threshold: f64,
    pub network: NetworkRef,
}

/// Computes the aggregated influence score of one profile.
pub fn score(
    profile: &InfluenceProfile,
    measures_used: &[Measure],
    threshold: f64,
) -> Result<InfluenceScore> {
    if measures_used.is_empty() {
        return Err(Error::Contract("measures_used must be non-empty".into()));
    }
    let mut sum = 0.0;
    for measure in measures_used {
        let value = profile.component(*measure).ok_or_else(|| {
            Error::Contract(format!(
                "profile of '{}' lacks measure {}",
                profile.stakeholder,
                measure.as_str()
            ))
        })?;
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::Contract(format!(
                "component {} of '{}' is {value}, outside [0,1]",
                measure.as_str(),
                profile.stakeholder
            )));
        }
        sum += value;
    }
    let score = sum / measures_used.len() as f64;
    let level = if score <= threshold {
        InfluenceLevel::Low
    } else {
        InfluenceLevel::High
    };
    Ok(InfluenceScore {
        stakeholder: profile.stakeholder.clone(),
        score,
        level,
        measures_used: measures_used.to_vec(),
        threshold,
        network: profile.network,
    })
}

/// Ranks scores descending, ties broken lexicographically by stakeholder
/// id; `top` truncates. All scores must share one configuration.
pub fn rank(scores: &[InfluenceScore], top: Option<usize>) -> Result<Vec<InfluenceScore>> {
    if let Some(first) = scores.first() {
        for s in scores {
            if s.measures_used != first.measures_used
                || s.threshold != first.threshold
                || s.network != first.network
            {
                return Err(Error::Contract(format!(
                    "score of '{}' comes from a different configuration than '{}'",
                    s.stakeholder, first.stakeholder
                )));
            }
        }
    }
    let mut ranked = scores.to_vec();
    ranked.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.stakeholder.cmp(&b.stakeholder))
    });
    if let Some(top) = top {
        ranked.truncate(top);
    }
    Ok(ranked)
}

/// One cell of the cross-network comparison: absent when the stakeholder
/// does not appear in that network or the measure was not computed.
pub type ComparisonCell = Option<f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    /// Column labels: `(network label, measure)` in input order.
    pub columns: Vec<(String, Measure)>,
    /// One row per stakeholder, cells aligned with `columns`.
    pub rows: BTreeMap<String, Vec<ComparisonCell>>,
}

/// Cross-compares profiles from several networks side by side.
///
/// Requires at least two networks sharing at least one stakeholder;
/// absent values stay absent, never imputed as zero.
pub fn cross_compare(
    profiles_by_network: &BTreeMap<String, Vec<InfluenceProfile>>,
) -> Result<ComparisonTable> {
    if profiles_by_network.len() < 2 {
        return Err(Error::Contract(
            "cross-comparison needs at least two networks".into(),
        ));
    }
    let stakeholder_sets: Vec<BTreeSet<&String>> = profiles_by_network
        .values()
        .map(|profiles| profiles.iter().map(|p| &p.stakeholder).collect())
        .collect();
    let shared = stakeholder_sets
        .iter()
        .enumerate()
        .any(|(i, a)| {
            stakeholder_sets
                .iter()
                .skip(i + 1)
                .any(|b| !a.is_disjoint(b))
        });
    if !shared {
        return Err(Error::Contract(
            "networks have disjoint stakeholder sets; nothing to compare".into(),
        ));
    }

    let mut columns = Vec::new();
    for (label, profiles) in profiles_by_network {
        let mut measures: BTreeSet<Measure> = BTreeSet::new();
        for p in profiles {
            measures.extend(p.present_measures());
        }
        for m in Measure::ALL {
            if measures.contains(&m) {
                columns.push((label.clone(), m));
            }
        }
    }

    let all_stakeholders: BTreeSet<String> = profiles_by_network
        .values()
        .flat_map(|ps| ps.iter().map(|p| p.stakeholder.clone()))
        .collect();

    let mut rows = BTreeMap::new();
    for id in all_stakeholders {
        let cells = columns
            .iter()
            .map(|(label, measure)| {
                profiles_by_network[label]
                    .iter()
                    .find(|p| p.stakeholder == id)
                    .and_then(|p| p.component(*measure))
            })
            .collect();
        rows.insert(id, cells);
    }
    Ok(ComparisonTable { columns, rows })
}
