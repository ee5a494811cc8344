//! Canonical participation events and analysis-scope filtering.
//!
//! A [`ParticipationEvent`] records one actor's participation of a given
//! size in one requirements artifact (a comment counts 1, a patch counts
//! its changed lines of code). Events are the interchange format between
//! pipeline stages, persisted one JSON record per line.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Metadata keys used by the built-in adapters.
pub const META_FIX_VERSIONS: &str = "fix_versions";
pub const META_COMPONENTS: &str = "components";

/// Separator for multi-valued metadata entries (fix-versions, components).
pub const META_LIST_SEP: char = ',';

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Comment,
    Patch,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Comment => "comment",
            Kind::Patch => "patch",
        }
    }
}

impl std::str::FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "comment" | "comments" => Ok(Kind::Comment),
            "patch" | "patches" => Ok(Kind::Patch),
            other => Err(Error::Contract(format!("unknown event kind '{other}'"))),
        }
    }
}

/// One actor's participation in one requirements artifact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParticipationEvent {
    pub artifact_id: String,
    pub repository_id: String,
    pub kind: Kind,
    /// Raw identity string (e-mail address or username).
    pub actor_key: String,
    pub timestamp: DateTime<Utc>,
    /// Participation magnitude: 1 per comment, changed LOC per patch.
    /// Size 0 events are retained but contribute no weight.
    pub size: u64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
}

impl ParticipationEvent {
    /// Checks the record-level invariants (non-empty ids).
    pub fn validate(&self) -> Result<()> {
        if self.artifact_id.is_empty() {
            return Err(Error::Contract("artifact_id must be non-empty".into()));
        }
        if self.actor_key.is_empty() {
            return Err(Error::Contract("actor_key must be non-empty".into()));
        }
        Ok(())
    }

    /// Values of a multi-valued metadata entry, empty when absent.
    pub fn metadata_values(&self, key: &str) -> Vec<&str> {
        self.metadata
            .get(key)
            .map(|v| {
                v.split(META_LIST_SEP)
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .collect()
            })
            .unwrap_or_default()
    }
}

/// Analysis-scope restriction applied to an event stream.
///
/// An empty filter passes everything; all present clauses must hold.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScopeFilter {
    /// Half-open UTC interval `[from, to)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_window: Option<(DateTime<Utc>, DateTime<Utc>)>,
    /// Release tags matched against the event's fix-version metadata.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub releases: Option<Vec<String>>,
    /// Component names matched against the event's component metadata.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kinds: Option<Vec<Kind>>,
    /// Include-set of actor keys (or stakeholder ids after projection).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stakeholders: Option<Vec<String>>,
}

impl ScopeFilter {
    pub fn validate(&self) -> Result<()> {
        if let Some((from, to)) = &self.time_window {
            if from >= to {
                return Err(Error::Config(format!(
                    "time_window: from ({from}) must precede to ({to})"
                )));
            }
        }
        Ok(())
    }

    pub fn is_pass_all(&self) -> bool {
        self == &ScopeFilter::default()
    }

    pub fn matches(&self, event: &ParticipationEvent) -> bool {
        if let Some((from, to)) = &self.time_window {
            if event.timestamp < *from || event.timestamp >= *to {
                return false;
            }
        }
        if let Some(releases) = &self.releases {
            let fixed = event.metadata_values(META_FIX_VERSIONS);
            if !fixed.iter().any(|v| releases.iter().any(|r| r == v)) {
                return false;
            }
        }
        if let Some(components) = &self.components {
            let comps = event.metadata_values(META_COMPONENTS);
            if !comps.iter().any(|c| components.iter().any(|want| want == c)) {
                return false;
            }
        }
        if let Some(kinds) = &self.kinds {
            if !kinds.contains(&event.kind) {
                return false;
            }
        }
        if let Some(stakeholders) = &self.stakeholders {
            if !stakeholders.iter().any(|s| s == &event.actor_key) {
                return false;
            }
        }
        true
    }
}

/// Filters an event stream, preserving order.
///
/// Filters that match nothing yield an empty list, not an error.
pub fn apply_scope(events: &[ParticipationEvent], filter: &ScopeFilter) -> Vec<ParticipationEvent> {
    events
        .iter()
        .filter(|e| filter.matches(e))
        .cloned()
        .collect()
}

/// Writes events as the canonical stream: one JSON record per line.
pub fn write_stream<W: Write>(mut out: W, events: &[ParticipationEvent]) -> Result<()> {
    for event in events {
        let line = serde_json::to_string(event)
            .map_err(|e| Error::Contract(format!("event serialization failed: {e}")))?;
        writeln!(out, "{line}").map_err(|e| Error::io("<stream>", e))?;
    }
    Ok(())
}

/// Reads a canonical event stream, rejecting schema-invalid records with
/// the offending line number.
pub fn read_stream<R: BufRead>(input: R, source_name: &str) -> Result<Vec<ParticipationEvent>> {
    let mut events = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::io(source_name, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let event: ParticipationEvent = serde_json::from_str(&line).map_err(|e| Error::Schema {
            path: source_name.into(),
            message: format!("line {}: {e}", idx + 1),
        })?;
        event.validate().map_err(|e| Error::Schema {
            path: source_name.into(),
            message: format!("line {}: {e}", idx + 1),
        })?;
        events.push(event);
    }
    Ok(events)
}
