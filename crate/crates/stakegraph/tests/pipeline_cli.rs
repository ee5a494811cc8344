//! End-to-end tests of the command-line pipeline against the shipped
//! fixture export.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use stakegraph::centrality::{self, DistanceTransform, EdgeOrientation, Measure};
use stakegraph::event::{Kind, ScopeFilter};
use stakegraph::identity::{self, AffiliationRuleSet};
use stakegraph::ingest::jira::parse_jira_export;
use stakegraph::network::{self, format_significant, EdgeMode, WeightSemantics};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stakegraph"))
}

fn run_ok(args: &[&str]) -> Output {
    let output = bin().args(args).output().expect("spawn");
    assert!(
        output.status.success(),
        "command {:?} failed:\n{}",
        args,
        String::from_utf8_lossy(&output.stderr)
    );
    output
}

/// Runs the full chain into `dir` and returns the produced file names.
fn run_pipeline(dir: &Path) -> Vec<String> {
    let p = |name: &str| dir.join(name).display().to_string();
    let export = fixture("export.json").display().to_string();
    let rules = fixture("rules.json").display().to_string();
    let annotations = fixture("annotations.json").display().to_string();

    run_ok(&["ingest", &export, "--format", "jira", "--out", &p("events.jsonl")]);
    run_ok(&["resolve", &p("events.jsonl"), "--rules", &rules, "--out", &p("resolution.json")]);
    run_ok(&[
        "build", &p("events.jsonl"), "--resolution", &p("resolution.json"),
        "--kind", "comment", "--mode", "weighted", "--semantics", "per_artifact",
        "--out", &p("network.json"),
    ]);
    run_ok(&["analyze", &p("network.json"), "--out", &p("centrality.csv")]);
    run_ok(&[
        "rank", &p("centrality.csv"), "--network", &p("network.json"),
        "--out", &p("ranking.json"),
    ]);
    run_ok(&[
        "map", &p("ranking.json"), "--annotations", &annotations,
        "--out", &p("map.json"),
    ]);
    run_ok(&[
        "export", &p("network.json"), "--artifact", "network",
        "--format", "graphml", "--out", &p("network.graphml"),
    ]);
    run_ok(&[
        "export", &p("ranking.json"), "--artifact", "ranking",
        "--format", "csv", "--out", &p("ranking.csv"),
    ]);
    run_ok(&[
        "collaborators", &p("network.json"), "--events", &p("events.jsonl"),
        "--resolution", &p("resolution.json"), "--stakeholder", "hortonworks",
        "--out", &p("collaborators.csv"),
    ]);
    run_ok(&[
        "breakdown", &p("events.jsonl"), "--resolution", &p("resolution.json"),
        "--group-by", "components", "--stakeholder", "hortonworks",
        "--out", &p("breakdown.csv"),
    ]);

    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

#[test]
fn two_runs_produce_byte_identical_outputs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let names_a = run_pipeline(a.path());
    let names_b = run_pipeline(b.path());
    assert_eq!(names_a, names_b);
    assert!(names_a.len() >= 10, "expected outputs plus manifests, got {names_a:?}");
    for name in &names_a {
        let left = fs::read(a.path().join(name)).unwrap();
        let right = fs::read(b.path().join(name)).unwrap();
        assert_eq!(left, right, "output {name} differs between runs");
    }
}

#[test]
fn cli_centralities_match_direct_library_calls() {
    let dir = tempfile::tempdir().unwrap();
    run_pipeline(dir.path());

    // Same chain through the library, no files involved.
    let document = fs::read_to_string(fixture("export.json")).unwrap();
    let outcome = parse_jira_export(&document).unwrap();
    let rules: AffiliationRuleSet =
        serde_json::from_str(&fs::read_to_string(fixture("rules.json")).unwrap()).unwrap();
    let resolution = identity::resolve(&outcome.events, &rules).unwrap();
    let projected = identity::project_events(&outcome.events, &resolution.actor_map).unwrap();
    let comments: Vec<_> = projected.into_iter().filter(|e| e.kind == Kind::Comment).collect();
    let network = network::build(
        &comments,
        EdgeMode::Weighted,
        WeightSemantics::PerArtifact,
        Kind::Comment,
        ScopeFilter::default(),
    )
    .unwrap();

    let mut expected: BTreeMap<(String, String), (String, String)> = BTreeMap::new();
    for measure in Measure::ALL {
        let vector = centrality::compute(
            &network,
            measure,
            DistanceTransform::Reciprocal,
            centrality::DEFAULT_EIGENVECTOR_TOLERANCE,
            centrality::DEFAULT_EIGENVECTOR_MAX_ITERATIONS,
            EdgeOrientation::InEdges,
        )
        .unwrap();
        for (node, raw) in &vector.values {
            expected.insert(
                (node.clone(), measure.as_str().to_string()),
                (
                    format_significant(*raw, 12),
                    format_significant(vector.normalized[node], 12),
                ),
            );
        }
    }

    let csv = fs::read_to_string(dir.path().join("centrality.csv")).unwrap();
    let mut seen = 0;
    for line in csv.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let key = (cols[0].to_string(), cols[1].to_string());
        let (raw, normalized) = expected.get(&key).expect("unexpected row");
        assert_eq!(cols[3], raw, "raw mismatch for {key:?}");
        assert_eq!(cols[4], normalized, "normalized mismatch for {key:?}");
        seen += 1;
    }
    assert_eq!(seen, expected.len());
}

#[test]
fn ranking_csv_lists_all_stakeholders_in_score_order() {
    let dir = tempfile::tempdir().unwrap();
    run_pipeline(dir.path());
    let csv = fs::read_to_string(dir.path().join("ranking.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 5);
    let scores: Vec<f64> = rows
        .iter()
        .map(|r| r.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert!(scores.windows(2).all(|p| p[0] >= p[1]));
    assert!(rows[0].starts_with("1,hortonworks,"));
}

#[test]
fn exported_graphml_round_trips_to_the_same_network() {
    let dir = tempfile::tempdir().unwrap();
    run_pipeline(dir.path());
    let network = stakegraph::pipeline::read_network(&dir.path().join("network.json")).unwrap();
    let xml = fs::read_to_string(dir.path().join("network.graphml")).unwrap();
    let reread = stakegraph::graphio::read_graphml(xml.trim()).unwrap();
    assert_eq!(network.nodes, reread.nodes);
    assert_eq!(network.artifacts, reread.artifacts);
    // Weights travel as 12-significant-digit decimals, so the round trip
    // is exact on the edge set and tight on the values.
    let keys = |n: &network::InteractionNetwork| n.edges.keys().cloned().collect::<Vec<_>>();
    assert_eq!(keys(&network), keys(&reread));
    use num_traits::ToPrimitive;
    for (key, weight) in &network.edges {
        let original = weight.to_f64().unwrap();
        let round_tripped = reread.edges[key].to_f64().unwrap();
        assert!(
            (original - round_tripped).abs() < 1e-9,
            "weight drift on {key:?}: {original} vs {round_tripped}"
        );
    }
}

#[test]
fn building_an_absent_kind_warns_and_writes_an_empty_network() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).display().to_string();
    let export = fixture("export.json").display().to_string();
    let rules = fixture("rules.json").display().to_string();
    // Keep only comments at ingest, then ask for the patch network.
    run_ok(&[
        "ingest", &export, "--format", "jira", "--only-kind", "comment",
        "--out", &p("events.jsonl"),
    ]);
    run_ok(&["resolve", &p("events.jsonl"), "--rules", &rules, "--out", &p("resolution.json")]);
    let output = run_ok(&[
        "build", &p("events.jsonl"), "--resolution", &p("resolution.json"),
        "--kind", "patch", "--out", &p("network.json"),
    ]);
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("warning"), "expected a warning, got: {stderr}");
    let network = stakegraph::pipeline::read_network(&dir.path().join("network.json")).unwrap();
    assert!(network.nodes.is_empty());
    assert!(network.edges.is_empty());
}

#[test]
fn unknown_stakeholder_is_a_data_error_with_near_matches() {
    let dir = tempfile::tempdir().unwrap();
    run_pipeline(dir.path());
    let p = |name: &str| dir.path().join(name).display().to_string();
    let output = bin()
        .args([
            "collaborators", &p("network.json"), "--events", &p("events.jsonl"),
            "--resolution", &p("resolution.json"), "--stakeholder", "horton",
            "--out", &p("nope.csv"),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("hortonworks"), "no near-match hint in: {stderr}");
}

#[test]
fn invalid_config_file_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    fs::write(&config, r#"{"influence_threshold": 1.5}"#).unwrap();
    let output = bin()
        .args([
            "--config", &config.display().to_string(),
            "ingest", &fixture("export.json").display().to_string(),
            "--format", "jira", "--out", &dir.path().join("e.jsonl").display().to_string(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let output = bin().arg("frobnicate").output().unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn time_window_scope_drops_out_of_range_events() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).display().to_string();
    let export = fixture("export.json").display().to_string();
    let output = run_ok(&[
        "ingest", &export, "--format", "jira",
        "--from", "2014-01-01T00:00:00Z", "--to", "2014-03-01T00:00:00Z",
        "--out", &p("events.jsonl"),
    ]);
    let stderr = String::from_utf8_lossy(&output.stderr);
    // Fixture has 8 events before March 2014 (6 comments + 2 patches).
    assert!(stderr.contains("8 events written"), "unexpected summary: {stderr}");
}
