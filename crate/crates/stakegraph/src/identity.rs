//! Affiliation resolution: classify actors by organization and aggregate
//! the unaffiliated into stakeholder units.
//!
//! Resolution order per actor: merge groups collapse aliases first, then
//! explicit overrides, then e-mail domain matching (longest suffix), then
//! the known-independents list, then the fallback policy.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::event::ParticipationEvent;
use crate::{Error, Result};

/// Stakeholder id used for the aggregated independents bucket.
pub const INDEPENDENT_GROUP_ID: &str = "independent";
/// Stakeholder id used for the aggregated unidentified bucket.
pub const UNIDENTIFIED_GROUP_ID: &str = "unidentified";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FallbackPolicy {
    /// Every unaffiliated actor stands alone as its own stakeholder.
    Individual,
    /// Unaffiliated actors aggregate into the independent/unidentified buckets.
    #[default]
    Grouped,
}

/// Affiliation rules, loaded from a single structured configuration file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffiliationRuleSet {
    /// E-mail domain (or domain suffix) to organization name.
    #[serde(default)]
    pub domain_map: BTreeMap<String, String>,
    /// Per-actor assignments; take precedence over `domain_map`.
    #[serde(default)]
    pub actor_overrides: BTreeMap<String, String>,
    /// Sets of actor keys known to be the same person.
    #[serde(default)]
    pub merge_groups: Vec<BTreeSet<String>>,
    #[serde(default)]
    pub fallback_policy: FallbackPolicy,
    /// Actors known to act independently of any organization.
    #[serde(default)]
    pub known_independents: BTreeSet<String>,
}

impl AffiliationRuleSet {
    /// Checks the rule-set invariants before any resolution happens.
    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for group in &self.merge_groups {
            for key in group {
                if !seen.insert(key.clone()) {
                    return Err(Error::Config(format!(
                        "actor '{key}' appears in two merge groups"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StakeholderCategory {
    Firm,
    IndependentIndividual,
    IndependentGroup,
    UnidentifiedGroup,
}

/// An affiliation-aggregated actor: a node of the interaction network.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stakeholder {
    /// Canonical organization or group name.
    pub id: String,
    pub category: StakeholderCategory,
    pub members: BTreeSet<String>,
}

/// Result of [`resolve`]: the stakeholder roster plus the actor map.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Resolution {
    pub stakeholders: Vec<Stakeholder>,
    pub actor_map: BTreeMap<String, String>,
}

/// Resolves every actor occurring in `events` to exactly one stakeholder.
pub fn resolve(events: &[ParticipationEvent], rules: &AffiliationRuleSet) -> Result<Resolution> {
    rules.validate()?;

    // alias -> all keys of the same person (the group it belongs to)
    let group_of = |key: &str| -> BTreeSet<String> {
        rules
            .merge_groups
            .iter()
            .find(|g| g.contains(key))
            .cloned()
            .unwrap_or_else(|| BTreeSet::from([key.to_string()]))
    };

    let actors: BTreeSet<&str> = events.iter().map(|e| e.actor_key.as_str()).collect();

    let mut buckets: BTreeMap<String, (StakeholderCategory, BTreeSet<String>)> = BTreeMap::new();
    let mut actor_map = BTreeMap::new();

    for actor in actors {
        let aliases = group_of(actor);
        let (id, category) = classify(&aliases, rules);
        let entry = buckets
            .entry(id.clone())
            .or_insert_with(|| (category, BTreeSet::new()));
        entry.1.insert(actor.to_string());
        actor_map.insert(actor.to_string(), id);
    }

    let stakeholders = buckets
        .into_iter()
        .map(|(id, (category, members))| Stakeholder {
            id,
            category,
            members,
        })
        .collect();

    Ok(Resolution {
        stakeholders,
        actor_map,
    })
}

/// Classifies one person (set of alias keys) into a stakeholder id.
fn classify(aliases: &BTreeSet<String>, rules: &AffiliationRuleSet) -> (String, StakeholderCategory) {
    // Overrides win over domain analysis.
    for key in aliases {
        if let Some(org) = rules.actor_overrides.get(key) {
            return (org.clone(), StakeholderCategory::Firm);
        }
    }

    // Longest-suffix domain match over all aliases.
    let mut best: Option<(&String, usize)> = None;
    for key in aliases {
        if let Some(domain) = key.rsplit_once('@').map(|(_, d)| d) {
            for (suffix, org) in &rules.domain_map {
                let matches = domain == suffix || domain.ends_with(&format!(".{suffix}"));
                if matches && best.is_none_or(|(_, len)| suffix.len() > len) {
                    best = Some((org, suffix.len()));
                }
            }
        }
    }
    if let Some((org, _)) = best {
        return (org.clone(), StakeholderCategory::Firm);
    }

    let representative = aliases.iter().next().expect("alias set non-empty").clone();
    let known_independent = aliases.iter().any(|k| rules.known_independents.contains(k));

    match (rules.fallback_policy, known_independent) {
        (FallbackPolicy::Individual, _) => {
            (representative, StakeholderCategory::IndependentIndividual)
        }
        (FallbackPolicy::Grouped, true) => (
            INDEPENDENT_GROUP_ID.to_string(),
            StakeholderCategory::IndependentGroup,
        ),
        (FallbackPolicy::Grouped, false) => (
            UNIDENTIFIED_GROUP_ID.to_string(),
            StakeholderCategory::UnidentifiedGroup,
        ),
    }
}

/// Replaces every event's actor key by its stakeholder id.
///
/// Event count and order are preserved; unmapped keys fail listing every
/// offender.
pub fn project_events(
    events: &[ParticipationEvent],
    actor_map: &BTreeMap<String, String>,
) -> Result<Vec<ParticipationEvent>> {
    let unmapped: Vec<String> = events
        .iter()
        .filter(|e| !actor_map.contains_key(&e.actor_key))
        .map(|e| e.actor_key.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if !unmapped.is_empty() {
        return Err(Error::UnmappedActors { keys: unmapped });
    }

    Ok(events
        .iter()
        .map(|e| {
            let mut projected = e.clone();
            projected.actor_key = actor_map[&e.actor_key].clone();
            projected
        })
        .collect())
}
