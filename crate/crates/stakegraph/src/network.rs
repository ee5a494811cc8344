//! Weighted, directed stakeholder interaction networks.
//!
//! Stakeholders that co-participate in an artifact are mutually connected;
//! the outgoing edge weight from a stakeholder reflects its share of the
//! participation. Weights are exact rationals so that fixture arithmetic
//! like 50/300 survives serialization untouched.
//!
//! Two weight semantics ship:
//! - `per_artifact` - the weight of an edge is the sum over shared
//!   artifacts of the focal stakeholder's participation fraction on each.
//! - `pooled` - total focal participation on shared artifacts divided by
//!   total participation on those artifacts (ratio of sums).

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::event::{Kind, ParticipationEvent, ScopeFilter};
use crate::{Error, Result};

pub type Weight = BigRational;

pub fn weight_from_u64(n: u64) -> Weight {
    BigRational::from_integer(BigInt::from(n))
}

/// Renders a weight as a decimal with 12 significant digits.
pub fn weight_to_decimal(w: &Weight) -> String {
    format_significant(w.to_f64().unwrap_or(f64::NAN), 12)
}

pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // Trim trailing zeros but keep at least one digit.
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeMode {
    Weighted,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightSemantics {
    PerArtifact,
    Pooled,
}

impl std::str::FromStr for EdgeMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weighted" => Ok(EdgeMode::Weighted),
            "binary" => Ok(EdgeMode::Binary),
            other => Err(Error::Config(format!("unknown edge mode '{other}'"))),
        }
    }
}

impl std::str::FromStr for WeightSemantics {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per_artifact" => Ok(WeightSemantics::PerArtifact),
            "pooled" => Ok(WeightSemantics::Pooled),
            other => Err(Error::Config(format!("unknown weight semantics '{other}'"))),
        }
    }
}

/// Where a network came from: repository plus the scope it was built under.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub repository_id: String,
    #[serde(default)]
    pub scope: ScopeFilter,
}

/// A weighted directed affiliation network for one repository and kind.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionNetwork {
    /// Stakeholder ids, sorted.
    pub nodes: Vec<String>,
    /// Distinct artifact ids the network was built from.
    pub artifacts: BTreeSet<String>,
    /// `(source, target) -> weight`; iteration is lexicographic.
    pub edges: BTreeMap<(String, String), Weight>,
    pub mode: EdgeMode,
    pub weight_semantics: WeightSemantics,
    pub kind: Kind,
    pub provenance: Provenance,
}

/// The per-artifact participation fraction of one stakeholder:
/// `x_i / sum(totals)`.
pub fn artifact_weight(x_i: u64, totals: &[u64]) -> Result<Weight> {
    if !totals.contains(&x_i) {
        return Err(Error::Contract(
            "focal participation size must appear in the totals list".into(),
        ));
    }
    let sum: u64 = totals.iter().sum();
    if sum == 0 {
        return Err(Error::UndefinedWeight);
    }
    Ok(BigRational::new(BigInt::from(x_i), BigInt::from(sum)))
}

/// Builds the interaction network from projected events.
///
/// Events must all carry the requested kind and a single repository id.
/// Artifacts with a single participant (or zero total size) contribute
/// nodes but no edges; size-0 participation never creates an edge.
pub fn build(
    events: &[ParticipationEvent],
    mode: EdgeMode,
    weight_semantics: WeightSemantics,
    kind: Kind,
    scope: ScopeFilter,
) -> Result<InteractionNetwork> {
    let mut repository_id = String::new();
    for event in events {
        if event.kind != kind {
            return Err(Error::Contract(format!(
                "event on artifact '{}' has kind {} but the network is built for {}",
                event.artifact_id,
                event.kind.as_str(),
                kind.as_str()
            )));
        }
        if repository_id.is_empty() {
            repository_id = event.repository_id.clone();
        } else if event.repository_id != repository_id {
            return Err(Error::Contract(format!(
                "events span repositories '{}' and '{}'",
                repository_id, event.repository_id
            )));
        }
    }

    // artifact -> stakeholder -> total participation size
    let mut participation: BTreeMap<&str, BTreeMap<&str, u64>> = BTreeMap::new();
    let mut nodes: BTreeSet<String> = BTreeSet::new();
    for event in events {
        nodes.insert(event.actor_key.clone());
        *participation
            .entry(&event.artifact_id)
            .or_default()
            .entry(&event.actor_key)
            .or_default() += event.size;
    }
    let artifacts: BTreeSet<String> = participation.keys().map(|a| a.to_string()).collect();

    // Participants with positive size only; zero-size participation is
    // retained as a node but contributes no edges in any mode.
    let mut edges: BTreeMap<(String, String), Weight> = BTreeMap::new();
    let mut pooled_focal: BTreeMap<(String, String), u64> = BTreeMap::new();
    let mut pooled_total: BTreeMap<(String, String), u64> = BTreeMap::new();

    for sizes in participation.values() {
        let positive: Vec<(&str, u64)> = sizes
            .iter()
            .filter(|(_, &x)| x > 0)
            .map(|(&s, &x)| (s, x))
            .collect();
        if positive.len() < 2 {
            continue;
        }
        let total: u64 = positive.iter().map(|(_, x)| x).sum();
        for &(source, x_source) in &positive {
            for &(target, _) in &positive {
                if source == target {
                    continue;
                }
                let key = (source.to_string(), target.to_string());
                match (mode, weight_semantics) {
                    (EdgeMode::Binary, _) => {
                        edges.insert(key, Weight::one());
                    }
                    (EdgeMode::Weighted, WeightSemantics::PerArtifact) => {
                        let w = BigRational::new(BigInt::from(x_source), BigInt::from(total));
                        *edges.entry(key).or_insert_with(Weight::zero) += w;
                    }
                    (EdgeMode::Weighted, WeightSemantics::Pooled) => {
                        *pooled_focal.entry(key.clone()).or_default() += x_source;
                        *pooled_total.entry(key).or_default() += total;
                    }
                }
            }
        }
    }

    if mode == EdgeMode::Weighted && weight_semantics == WeightSemantics::Pooled {
        for (key, focal) in pooled_focal {
            let total = pooled_total[&key];
            edges.insert(
                key,
                BigRational::new(BigInt::from(focal), BigInt::from(total)),
            );
        }
    }

    Ok(InteractionNetwork {
        nodes: nodes.into_iter().collect(),
        artifacts,
        edges,
        mode,
        weight_semantics,
        kind,
        provenance: Provenance {
            repository_id,
            scope,
        },
    })
}

/// Network characteristics: node count, unordered connected pairs, and the
/// rounded collaborations-per-stakeholder ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSummary {
    pub stakeholders: usize,
    pub collaborations: usize,
    pub per_stakeholder: u64,
}

pub fn summarize(network: &InteractionNetwork) -> NetworkSummary {
    // Edges are mutual, so unordered pairs = ordered edges / 2.
    let collaborations = network.edges.len() / 2;
    let stakeholders = network.nodes.len();
    let per_stakeholder = if stakeholders == 0 {
        0
    } else {
        (collaborations as f64 / stakeholders as f64).round() as u64
    };
    NetworkSummary {
        stakeholders,
        collaborations,
        per_stakeholder,
    }
}

impl InteractionNetwork {
    /// Sum of outgoing edge weights per node (exact).
    pub fn weighted_out_degree(&self, node: &str) -> Weight {
        self.edges
            .iter()
            .filter(|((s, _), _)| s == node)
            .map(|(_, w)| w.clone())
            .sum()
    }

    /// Number of outgoing edges per node.
    pub fn binary_out_degree(&self, node: &str) -> usize {
        self.edges.iter().filter(|((s, _), _)| s == node).count()
    }

    pub fn out_neighbors<'a>(&'a self, node: &'a str) -> impl Iterator<Item = (&'a str, &'a Weight)> {
        self.edges
            .iter()
            .filter(move |((s, _), _)| s == node)
            .map(|((_, t), w)| (t.as_str(), w))
    }
}

// ---------------------------------------------------------------------------
// Persisted form: weights as "p/q" strings so the file stays exact.

#[derive(Debug, Serialize, Deserialize)]
pub struct NetworkDoc {
    pub nodes: Vec<String>,
    pub artifacts: Vec<String>,
    pub edges: Vec<EdgeDoc>,
    pub mode: EdgeMode,
    pub weight_semantics: WeightSemantics,
    pub kind: Kind,
    pub provenance: Provenance,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub source: String,
    pub target: String,
    /// Exact rational, e.g. "1/6".
    pub weight: String,
}

pub fn parse_weight(text: &str) -> Result<Weight> {
    let parse_int = |s: &str| -> Result<BigInt> {
        s.parse()
            .map_err(|_| Error::Contract(format!("bad rational weight '{text}'")))
    };
    match text.split_once('/') {
        Some((num, den)) => {
            let den = parse_int(den)?;
            if den.is_zero() {
                return Err(Error::Contract(format!("zero denominator in '{text}'")));
            }
            Ok(BigRational::new(parse_int(num)?, den))
        }
        None => Ok(BigRational::from_integer(parse_int(text)?)),
    }
}

impl From<&InteractionNetwork> for NetworkDoc {
    fn from(n: &InteractionNetwork) -> Self {
        NetworkDoc {
            nodes: n.nodes.clone(),
            artifacts: n.artifacts.iter().cloned().collect(),
            edges: n
                .edges
                .iter()
                .map(|((s, t), w)| EdgeDoc {
                    source: s.clone(),
                    target: t.clone(),
                    weight: w.to_string(),
                })
                .collect(),
            mode: n.mode,
            weight_semantics: n.weight_semantics,
            kind: n.kind,
            provenance: n.provenance.clone(),
        }
    }
}

impl TryFrom<NetworkDoc> for InteractionNetwork {
    type Error = Error;

    fn try_from(doc: NetworkDoc) -> Result<Self> {
        let mut edges = BTreeMap::new();
        for edge in doc.edges {
            let weight = parse_weight(&edge.weight)?;
            edges.insert((edge.source, edge.target), weight);
        }
        Ok(InteractionNetwork {
            nodes: doc.nodes,
            artifacts: doc.artifacts.into_iter().collect(),
            edges,
            mode: doc.mode,
            weight_semantics: doc.weight_semantics,
            kind: doc.kind,
            provenance: doc.provenance,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{TimeZone, Utc};

    fn event(artifact: &str, actor: &str, size: u64, kind: Kind) -> ParticipationEvent {
        ParticipationEvent {
            artifact_id: artifact.into(),
            repository_id: "repo".into(),
            kind,
            actor_key: actor.into(),
            timestamp: Utc.timestamp_opt(0, 0).unwrap(),
            size,
            metadata: BTreeMap::new(),
        }
    }

    fn ratio(n: i64, d: i64) -> Weight {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn artifact_weight_matches_loc_example() {
        let totals = [50, 100, 150];
        assert_eq!(artifact_weight(50, &totals).unwrap(), ratio(50, 300));
        assert_eq!(artifact_weight(100, &totals).unwrap(), ratio(100, 300));
        assert_eq!(artifact_weight(150, &totals).unwrap(), ratio(150, 300));
    }

    #[test]
    fn single_participant_weight_is_one() {
        assert_eq!(artifact_weight(7, &[7]).unwrap(), Weight::one());
    }

    #[test]
    fn comment_counts_follow_the_formula_with_focal_in_denominator() {
        // Denominator sums over all participants including the focal one.
        let totals = [1, 2, 3];
        assert_eq!(artifact_weight(1, &totals).unwrap(), ratio(1, 6));
        assert_eq!(artifact_weight(2, &totals).unwrap(), ratio(2, 6));
        assert_eq!(artifact_weight(3, &totals).unwrap(), ratio(3, 6));
    }

    #[test]
    fn zero_total_is_undefined_weight() {
        assert!(matches!(
            artifact_weight(0, &[0, 0]),
            Err(Error::UndefinedWeight)
        ));
    }

    fn patch_triangle() -> Vec<ParticipationEvent> {
        vec![
            event("U-1", "A", 50, Kind::Patch),
            event("U-1", "B", 100, Kind::Patch),
            event("U-1", "C", 150, Kind::Patch),
        ]
    }

    #[test]
    fn per_artifact_network_matches_fig2_weights() {
        let n = build(
            &patch_triangle(),
            EdgeMode::Weighted,
            WeightSemantics::PerArtifact,
            Kind::Patch,
            ScopeFilter::default(),
        )
        .unwrap();
        assert_eq!(n.edges[&("A".into(), "B".into())], ratio(50, 300));
        assert_eq!(n.edges[&("A".into(), "C".into())], ratio(50, 300));
        assert_eq!(n.edges[&("B".into(), "A".into())], ratio(100, 300));
        assert_eq!(n.edges[&("B".into(), "C".into())], ratio(100, 300));
        assert_eq!(n.edges[&("C".into(), "A".into())], ratio(150, 300));
        assert_eq!(n.edges[&("C".into(), "B".into())], ratio(150, 300));
    }

    #[test]
    fn stakeholders_never_sharing_an_artifact_have_no_edge() {
        let events = vec![
            event("U-1", "A", 1, Kind::Comment),
            event("U-1", "B", 1, Kind::Comment),
            event("U-2", "C", 1, Kind::Comment),
            event("U-2", "D", 1, Kind::Comment),
        ];
        let n = build(
            &events,
            EdgeMode::Weighted,
            WeightSemantics::PerArtifact,
            Kind::Comment,
            ScopeFilter::default(),
        )
        .unwrap();
        assert!(!n.edges.contains_key(&("A".into(), "C".into())));
        assert!(n.edges.contains_key(&("A".into(), "B".into())));
    }

    #[test]
    fn pooled_weight_is_ratio_of_sums() {
        // Focal made 42 comments of 79 total on the artifacts shared with
        // "other"; the pooled edge weight is 42/79, not a sum of fractions.
        let events = vec![
            event("U-1", "focal", 40, Kind::Comment),
            event("U-1", "other", 30, Kind::Comment),
            event("U-2", "focal", 2, Kind::Comment),
            event("U-2", "other", 7, Kind::Comment),
        ];
        let n = build(
            &events,
            EdgeMode::Weighted,
            WeightSemantics::Pooled,
            Kind::Comment,
            ScopeFilter::default(),
        )
        .unwrap();
        assert_eq!(n.edges[&("focal".into(), "other".into())], ratio(42, 79));
        assert_eq!(n.edges[&("other".into(), "focal".into())], ratio(37, 79));
    }

    #[test]
    fn binary_mode_replaces_positive_weights_with_one() {
        let weighted = build(
            &patch_triangle(),
            EdgeMode::Weighted,
            WeightSemantics::PerArtifact,
            Kind::Patch,
            ScopeFilter::default(),
        )
        .unwrap();
        let binary = build(
            &patch_triangle(),
            EdgeMode::Binary,
            WeightSemantics::PerArtifact,
            Kind::Patch,
            ScopeFilter::default(),
        )
        .unwrap();
        let weighted_pairs: Vec<_> = weighted.edges.keys().collect();
        let binary_pairs: Vec<_> = binary.edges.keys().collect();
        assert_eq!(weighted_pairs, binary_pairs);
        assert!(binary.edges.values().all(|w| *w == Weight::one()));
    }

    #[test]
    fn single_participant_artifact_counts_node_but_no_edges() {
        let events = vec![event("U-1", "A", 5, Kind::Comment)];
        let n = build(
            &events,
            EdgeMode::Weighted,
            WeightSemantics::PerArtifact,
            Kind::Comment,
            ScopeFilter::default(),
        )
        .unwrap();
        assert_eq!(n.nodes, vec!["A".to_string()]);
        assert!(n.edges.is_empty());
        assert_eq!(n.artifacts.len(), 1);
    }

    #[test]
    fn zero_size_participation_creates_no_edges() {
        let events = vec![
            event("U-1", "A", 0, Kind::Comment),
            event("U-1", "B", 3, Kind::Comment),
            event("U-1", "C", 1, Kind::Comment),
        ];
        let n = build(
            &events,
            EdgeMode::Weighted,
            WeightSemantics::PerArtifact,
            Kind::Comment,
            ScopeFilter::default(),
        )
        .unwrap();
        assert!(n.nodes.contains(&"A".to_string()));
        assert!(n.out_neighbors("A").next().is_none());
        assert!(!n.edges.contains_key(&("B".into(), "A".into())));
        assert_eq!(n.edges[&("B".into(), "C".into())], ratio(3, 4));
    }

    #[test]
    fn wrong_kind_event_is_contract_error() {
        let events = vec![event("U-1", "A", 1, Kind::Comment)];
        let err = build(
            &events,
            EdgeMode::Weighted,
            WeightSemantics::PerArtifact,
            Kind::Patch,
            ScopeFilter::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    #[test]
    fn empty_events_give_empty_network() {
        let n = build(
            &[],
            EdgeMode::Weighted,
            WeightSemantics::PerArtifact,
            Kind::Comment,
            ScopeFilter::default(),
        )
        .unwrap();
        assert!(n.nodes.is_empty() && n.edges.is_empty());
        assert_eq!(summarize(&n), NetworkSummary {
            stakeholders: 0,
            collaborations: 0,
            per_stakeholder: 0
        });
    }

    #[test]
    fn triangle_summary_is_hand_countable() {
        let n = build(
            &patch_triangle(),
            EdgeMode::Weighted,
            WeightSemantics::PerArtifact,
            Kind::Patch,
            ScopeFilter::default(),
        )
        .unwrap();
        assert_eq!(summarize(&n), NetworkSummary {
            stakeholders: 3,
            collaborations: 3,
            per_stakeholder: 1
        });
    }

    #[test]
    fn network_doc_round_trip_is_exact() {
        let n = build(
            &patch_triangle(),
            EdgeMode::Weighted,
            WeightSemantics::PerArtifact,
            Kind::Patch,
            ScopeFilter::default(),
        )
        .unwrap();
        let doc = NetworkDoc::from(&n);
        let json = serde_json::to_string(&doc).unwrap();
        let back: NetworkDoc = serde_json::from_str(&json).unwrap();
        let restored = InteractionNetwork::try_from(back).unwrap();
        assert_eq!(restored, n);
    }

    #[test]
    fn weight_formatting_uses_significant_digits() {
        assert_eq!(weight_to_decimal(&ratio(1, 6)), "0.166666666667");
        assert_eq!(weight_to_decimal(&ratio(1, 2)), "0.5");
        assert_eq!(weight_to_decimal(&ratio(3, 1)), "3");
    }
}
