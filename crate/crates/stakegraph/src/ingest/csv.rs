//! Delimited-text event parser.
//!
//! The header row must declare `artifact_id`, `repository_id`, `kind`,
//! `actor_key`, `timestamp`, `size`; unknown extra columns land in the
//! event's metadata map verbatim.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};

use crate::event::{Kind, ParticipationEvent};
use crate::ingest::{sort_events, ParseOutcome, ParseSummary};
use crate::{Error, Result};

const MANDATORY: [&str; 6] = [
    "artifact_id",
    "repository_id",
    "kind",
    "actor_key",
    "timestamp",
    "size",
];

/// Parses delimited text into participation events, one per row.
///
/// Rows that fail to parse are rejected with their row number in the
/// summary; a missing mandatory column aborts with the column name.
pub fn parse_csv_events(document: &str) -> Result<ParseOutcome> {
    let mut reader = ::csv::ReaderBuilder::new()
        .trim(::csv::Trim::All)
        .from_reader(document.as_bytes());

    let headers = reader
        .headers()
        .map_err(|e| Error::Parse {
            location: "header row".into(),
            message: e.to_string(),
        })?
        .clone();

    for column in MANDATORY {
        if !headers.iter().any(|h| h == column) {
            return Err(Error::MissingColumn(column.to_string()));
        }
    }
    let extra_columns: Vec<(usize, String)> = headers
        .iter()
        .enumerate()
        .filter(|(_, h)| !MANDATORY.contains(h))
        .map(|(i, h)| (i, h.to_string()))
        .collect();
    let index_of = |name: &str| headers.iter().position(|h| h == name).unwrap();

    let mut summary = ParseSummary::default();
    let mut events = Vec::new();

    for (row_idx, record) in reader.records().enumerate() {
        let row_no = row_idx + 2; // 1-based, after the header row
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                summary.reject(format!("row {row_no}: {e}"));
                continue;
            }
        };
        match parse_row(&record, &index_of, &extra_columns) {
            Ok(event) => events.push(event),
            Err(e) => summary.reject(format!("row {row_no}: {e}")),
        }
    }

    sort_events(&mut events);
    summary.parsed = events.len();
    Ok(ParseOutcome { events, summary })
}

fn parse_row(
    record: &::csv::StringRecord,
    index_of: &dyn Fn(&str) -> usize,
    extra_columns: &[(usize, String)],
) -> std::result::Result<ParticipationEvent, String> {
    let field = |name: &str| record.get(index_of(name)).unwrap_or("");

    let timestamp: DateTime<Utc> = field("timestamp")
        .parse()
        .map_err(|e| format!("bad timestamp: {e}"))?;
    let size: u64 = field("size").parse().map_err(|e| format!("bad size: {e}"))?;
    let kind: Kind = field("kind").parse().map_err(|e| format!("{e}"))?;

    let mut metadata = BTreeMap::new();
    for (idx, name) in extra_columns {
        if let Some(value) = record.get(*idx) {
            if !value.is_empty() {
                metadata.insert(name.clone(), value.to_string());
            }
        }
    }

    let event = ParticipationEvent {
        artifact_id: field("artifact_id").to_string(),
        repository_id: field("repository_id").to_string(),
        kind,
        actor_key: field("actor_key").to_string(),
        timestamp,
        size,
        metadata,
    };
    event.validate().map_err(|e| e.to_string())?;
    Ok(event)
}
