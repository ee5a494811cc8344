//! Adapters turning repository exports into canonical participation events.
//!
//! Two adapters ship: a tree-structured issue-export document
//! ([`jira::parse_jira_export`]) and delimited text
//! ([`csv::parse_csv_events`]). Both are pure over their input and emit a
//! [`ParseSummary`] for the per-record warnings that do not abort parsing.
//! Mailing-list/IRC adapters would slot in beside these with the same
//! signature.

pub mod csv;
pub mod jira;

use serde::{Deserialize, Serialize};

use crate::event::ParticipationEvent;

/// Counts of parsed and rejected records, reported on stderr by the CLI,
/// never mixed into the data stream.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseSummary {
    pub parsed: usize,
    pub rejected: usize,
    /// Patch records lacking diff stats, counted with fallback size 1.
    pub size_fallbacks: usize,
    /// One message per rejected or flagged record.
    pub warnings: Vec<String>,
}

impl ParseSummary {
    pub fn reject(&mut self, message: String) {
        self.rejected += 1;
        self.warnings.push(message);
    }
}

/// Parser output: events plus the warning summary.
#[derive(Debug, Clone)]
pub struct ParseOutcome {
    pub events: Vec<ParticipationEvent>,
    pub summary: ParseSummary,
}

/// Stable output order shared by all adapters: artifact, then time, then
/// actor and kind as final tie-breaks so identical inputs give identical
/// streams.
pub(crate) fn sort_events(events: &mut [ParticipationEvent]) {
    events.sort_by(|a, b| {
        (&a.artifact_id, a.timestamp, &a.actor_key, a.kind)
            .cmp(&(&b.artifact_id, b.timestamp, &b.actor_key, b.kind))
    });
}
