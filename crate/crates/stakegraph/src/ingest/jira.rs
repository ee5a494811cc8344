//! Issue-tracker export parser.
//!
//! Accepts a tree-structured export document of the shape:
//!
//! ```json
//! {
//!   "repository": "hadoop-jira",
//!   "issues": [
//!     {
//!       "key": "HDFS-100",
//!       "fix_versions": ["2.2.0"],
//!       "components": ["HDFS"],
//!       "comments": [{"author": "kate@hortonworks.com", "created": "2014-01-02T10:00:00Z"}],
//!       "patches": [{"author": "john@hortonworks.com", "created": "2014-01-03T09:00:00Z",
//!                    "added_lines": 40, "deleted_lines": 10}]
//!     }
//!   ]
//! }
//! ```
//!
//! Each comment becomes one event of size 1; each patch one event sized by
//! its net changed LOC (added + deleted). Patches without diff stats fall
//! back to size 1 and are flagged in the summary. Records without a
//! timestamp are rejected with a per-record warning.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::Deserialize;

use crate::event::{Kind, ParticipationEvent, META_COMPONENTS, META_FIX_VERSIONS, META_LIST_SEP};
use crate::ingest::{sort_events, ParseOutcome, ParseSummary};
use crate::{Error, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExportDoc {
    repository: String,
    issues: Vec<IssueRecord>,
}

#[derive(Debug, Deserialize)]
struct IssueRecord {
    key: String,
    #[serde(default)]
    fix_versions: Vec<String>,
    #[serde(default)]
    components: Vec<String>,
    #[serde(default)]
    comments: Vec<CommentRecord>,
    #[serde(default)]
    patches: Vec<PatchRecord>,
}

#[derive(Debug, Deserialize)]
struct CommentRecord {
    author: String,
    created: Option<DateTime<Utc>>,
}

#[derive(Debug, Deserialize)]
struct PatchRecord {
    author: String,
    created: Option<DateTime<Utc>>,
    added_lines: Option<u64>,
    deleted_lines: Option<u64>,
}

/// Parses an issue-export document into participation events.
///
/// Output order is stable: by artifact id, then timestamp. Malformed
/// documents fail with the offending record named; missing timestamps
/// reject the single record and count a warning.
pub fn parse_jira_export(document: &str) -> Result<ParseOutcome> {
    let doc: ExportDoc = serde_json::from_str(document).map_err(|e| Error::Parse {
        location: locate_json_error(document, &e),
        message: e.to_string(),
    })?;

    let mut summary = ParseSummary::default();
    let mut events = Vec::new();

    for issue in &doc.issues {
        if issue.key.is_empty() {
            return Err(Error::Parse {
                location: "issue with empty key".into(),
                message: "issue key must be non-empty".into(),
            });
        }
        let metadata = issue_metadata(issue);

        for (idx, comment) in issue.comments.iter().enumerate() {
            let Some(created) = comment.created else {
                summary.reject(format!("{}: comment {} has no timestamp", issue.key, idx + 1));
                continue;
            };
            if comment.author.is_empty() {
                summary.reject(format!("{}: comment {} has no author", issue.key, idx + 1));
                continue;
            }
            events.push(ParticipationEvent {
                artifact_id: issue.key.clone(),
                repository_id: doc.repository.clone(),
                kind: Kind::Comment,
                actor_key: comment.author.clone(),
                timestamp: created,
                size: 1,
                metadata: metadata.clone(),
            });
        }

        for (idx, patch) in issue.patches.iter().enumerate() {
            let Some(created) = patch.created else {
                summary.reject(format!("{}: patch {} has no timestamp", issue.key, idx + 1));
                continue;
            };
            if patch.author.is_empty() {
                summary.reject(format!("{}: patch {} has no author", issue.key, idx + 1));
                continue;
            }
            // Net changed LOC; exports without diff stats fall back to 1.
            let size = match (patch.added_lines, patch.deleted_lines) {
                (None, None) => {
                    summary.size_fallbacks += 1;
                    summary
                        .warnings
                        .push(format!("{}: patch {} lacks diff stats, size set to 1", issue.key, idx + 1));
                    1
                }
                (added, deleted) => added.unwrap_or(0) + deleted.unwrap_or(0),
            };
            events.push(ParticipationEvent {
                artifact_id: issue.key.clone(),
                repository_id: doc.repository.clone(),
                kind: Kind::Patch,
                actor_key: patch.author.clone(),
                timestamp: created,
                size,
                metadata: metadata.clone(),
            });
        }
    }

    sort_events(&mut events);
    summary.parsed = events.len();
    Ok(ParseOutcome { events, summary })
}

fn issue_metadata(issue: &IssueRecord) -> BTreeMap<String, String> {
    let mut metadata = BTreeMap::new();
    if !issue.fix_versions.is_empty() {
        metadata.insert(
            META_FIX_VERSIONS.to_string(),
            issue.fix_versions.join(&META_LIST_SEP.to_string()),
        );
    }
    if !issue.components.is_empty() {
        metadata.insert(
            META_COMPONENTS.to_string(),
            issue.components.join(&META_LIST_SEP.to_string()),
        );
    }
    metadata
}

/// Names the record around a serde_json error position, for error messages.
fn locate_json_error(document: &str, err: &serde_json::Error) -> String {
    let line = err.line();
    // Look backwards from the error line for the nearest issue key.
    let upto: Vec<&str> = document.lines().take(line).collect();
    for text in upto.iter().rev() {
        if let Some(pos) = text.find("\"key\"") {
            let rest = &text[pos + 5..];
            if let Some(start) = rest.find('"') {
                if let Some(end) = rest[start + 1..].find('"') {
                    return format!("issue '{}'", &rest[start + 1..start + 1 + end]);
                }
            }
        }
    }
    format!("document line {line}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_event_per_comment() {
        let doc = r#"{"repository":"r","issues":[{"key":"A-1","comments":[
            {"author":"x","created":"2024-01-01T00:00:00Z"},
            {"author":"y","created":"2024-01-02T00:00:00Z"},
            {"author":"x","created":"2024-01-03T00:00:00Z"}]}]}"#;
        let out = parse_jira_export(doc).unwrap();
        assert_eq!(out.events.len(), 3);
        assert!(out.events.iter().all(|e| e.size == 1 && e.kind == Kind::Comment));
        assert_eq!(out.summary.rejected, 0);
    }

    #[test]
    fn empty_export_yields_empty_list() {
        let out = parse_jira_export(r#"{"repository":"r","issues":[]}"#).unwrap();
        assert!(out.events.is_empty());
        assert_eq!(out.summary, ParseSummary::default());
    }

    #[test]
    fn patch_size_is_net_changed_loc() {
        let doc = r#"{"repository":"r","issues":[{"key":"A-1","patches":[
            {"author":"x","created":"2024-01-01T00:00:00Z","added_lines":40,"deleted_lines":10}]}]}"#;
        let out = parse_jira_export(doc).unwrap();
        assert_eq!(out.events[0].size, 50);
        assert_eq!(out.events[0].kind, Kind::Patch);
    }

    #[test]
    fn patch_without_diff_stats_falls_back_to_one() {
        let doc = r#"{"repository":"r","issues":[{"key":"A-1","patches":[
            {"author":"x","created":"2024-01-01T00:00:00Z"}]}]}"#;
        let out = parse_jira_export(doc).unwrap();
        assert_eq!(out.events[0].size, 1);
        assert_eq!(out.summary.size_fallbacks, 1);
    }

    #[test]
    fn missing_timestamp_rejects_record_with_warning() {
        let doc = r#"{"repository":"r","issues":[{"key":"A-1","comments":[
            {"author":"x"},
            {"author":"y","created":"2024-01-01T00:00:00Z"}]}]}"#;
        let out = parse_jira_export(doc).unwrap();
        assert_eq!(out.events.len(), 1);
        assert_eq!(out.summary.rejected, 1);
        assert!(out.summary.warnings[0].contains("A-1"));
    }

    #[test]
    fn malformed_document_names_offending_record() {
        let doc = r#"{"repository":"r","issues":[{"key":"A-7","comments":[
            {"author":"x","created":"not-a-date"}]}]}"#;
        let err = parse_jira_export(doc).unwrap_err();
        match err {
            Error::Parse { location, .. } => assert!(location.contains("A-7"), "{location}"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn output_order_is_stable_by_artifact_then_time() {
        let doc = r#"{"repository":"r","issues":[
            {"key":"B-1","comments":[{"author":"x","created":"2024-01-01T00:00:00Z"}]},
            {"key":"A-1","comments":[
                {"author":"y","created":"2024-01-02T00:00:00Z"},
                {"author":"x","created":"2024-01-01T00:00:00Z"}]}]}"#;
        let out = parse_jira_export(doc).unwrap();
        let order: Vec<(&str, &str)> = out
            .events
            .iter()
            .map(|e| (e.artifact_id.as_str(), e.actor_key.as_str()))
            .collect();
        assert_eq!(order, vec![("A-1", "x"), ("A-1", "y"), ("B-1", "x")]);
    }
}
