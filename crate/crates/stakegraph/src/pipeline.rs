//! File-based pipeline commands.
//!
//! Each command reads validated upstream artifacts, writes exactly one
//! primary output file (atomically: temp file + rename) plus a
//! `<output>.manifest.json` recording a hash of its parameters and digests
//! of its inputs. Outputs are deterministic: identical config and inputs
//! reproduce byte-identical files. Human summaries go to standard error in
//! the CLI layer, never into the data files.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::centrality::{
    self, CentralityVector, DistanceTransform, EdgeOrientation, Measure,
    DEFAULT_EIGENVECTOR_MAX_ITERATIONS, DEFAULT_EIGENVECTOR_TOLERANCE,
};
use crate::event::{self, Kind, ParticipationEvent, ScopeFilter};
use crate::graphio;
use crate::identity::{self, AffiliationRuleSet, Resolution};
use crate::influence::{self, InfluenceScore, NetworkRef};
use crate::ingest::{csv::parse_csv_events, jira::parse_jira_export, ParseSummary};
use crate::mapping::{self, AlignmentAnnotation, MatrixReport};
use crate::network::{
    self, format_significant, EdgeMode, InteractionNetwork, NetworkDoc, NetworkSummary,
    WeightSemantics,
};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Configuration

/// Pipeline defaults loadable from a single JSON file via `--config`.
/// Command-line flags override individual fields.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub scope: ScopeFilter,
    pub rules_path: Option<PathBuf>,
    pub mode: Option<EdgeMode>,
    pub weight_semantics: Option<WeightSemantics>,
    pub kind: Option<Kind>,
    pub measures: Option<Vec<Measure>>,
    pub distance_transform: Option<DistanceTransform>,
    pub eigenvector_tolerance: Option<f64>,
    pub eigenvector_max_iterations: Option<usize>,
    pub eigenvector_orientation: Option<EdgeOrientation>,
    pub influence_threshold: Option<f64>,
    pub alignment_threshold: Option<f64>,
    pub output_dir: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = read_to_string(path)?;
        let config: PipelineConfig = serde_json::from_str(&text).map_err(|e| {
            Error::Config(format!("{}: {e}", path.display()))
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.scope.validate()?;
        for (name, value) in [
            ("influence_threshold", self.influence_threshold),
            ("alignment_threshold", self.alignment_threshold),
        ] {
            if let Some(value) = value {
                if !(0.0..=1.0).contains(&value) {
                    return Err(Error::Config(format!("{name} must lie in [0,1], got {value}")));
                }
            }
        }
        if let Some(path) = &self.rules_path {
            if !path.exists() {
                return Err(Error::Config(format!(
                    "rules_path {} does not exist",
                    path.display()
                )));
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// File plumbing

pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Writes atomically: temp file in the same directory, then rename.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| Error::io(dir.display().to_string(), e))?;
    tmp.write_all(bytes)
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    tmp.persist(path)
        .map_err(|e| Error::io(path.display().to_string(), e.error))?;
    Ok(())
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    format!("{:x}", hasher.finalize())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Digest of the command's parameters, canonical JSON.
    pub config_hash: String,
    /// Input file name -> content digest. File names rather than full
    /// paths, so reruns in a different directory stay byte-identical.
    pub inputs: BTreeMap<String, String>,
    pub output: String,
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Writes `<output>.manifest.json` beside the primary output.
fn write_manifest(
    output: &Path,
    command: &str,
    params: &serde_json::Value,
    inputs: &[&Path],
) -> Result<()> {
    let mut input_digests = BTreeMap::new();
    for path in inputs {
        let bytes = fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        input_digests.insert(file_name(path), sha256_hex(&bytes));
    }
    let manifest = RunManifest {
        command: command.to_string(),
        config_hash: sha256_hex(serde_json::to_string(params).unwrap().as_bytes()),
        inputs: input_digests,
        output: file_name(output),
    };
    let manifest_path = output.with_extension(format!(
        "{}manifest.json",
        output
            .extension()
            .map(|e| format!("{}.", e.to_string_lossy()))
            .unwrap_or_default()
    ));
    let mut text = serde_json::to_string_pretty(&manifest).unwrap();
    text.push('\n');
    atomic_write(&manifest_path, text.as_bytes())
}

pub fn read_events(path: &Path) -> Result<Vec<ParticipationEvent>> {
    let text = read_to_string(path)?;
    event::read_stream(text.as_bytes(), &path.display().to_string())
}

pub fn read_resolution(path: &Path) -> Result<Resolution> {
    let text = read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Schema {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn read_network(path: &Path) -> Result<InteractionNetwork> {
    let text = read_to_string(path)?;
    let doc: NetworkDoc = serde_json::from_str(&text).map_err(|e| Error::Schema {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    InteractionNetwork::try_from(doc)
}

// ---------------------------------------------------------------------------
// Commands

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputFormat {
    Jira,
    Csv,
}

impl std::str::FromStr for InputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jira" => Ok(InputFormat::Jira),
            "csv" => Ok(InputFormat::Csv),
            other => Err(Error::Config(format!("unknown input format '{other}'"))),
        }
    }
}

/// Parses a repository export and writes the scope-filtered canonical
/// event stream.
pub fn cmd_ingest(
    input: &Path,
    format: InputFormat,
    scope: &ScopeFilter,
    output: &Path,
) -> Result<ParseSummary> {
    scope.validate()?;
    let document = read_to_string(input)?;
    let outcome = match format {
        InputFormat::Jira => parse_jira_export(&document)?,
        InputFormat::Csv => parse_csv_events(&document)?,
    };
    let filtered = event::apply_scope(&outcome.events, scope);
    let mut buf = Vec::new();
    event::write_stream(&mut buf, &filtered)?;
    atomic_write(output, &buf)?;
    write_manifest(
        output,
        "ingest",
        &serde_json::json!({"format": format, "scope": scope}),
        &[input],
    )?;
    let mut summary = outcome.summary;
    summary.parsed = filtered.len();
    Ok(summary)
}

/// Resolves affiliations over an event stream and writes the stakeholder
/// roster plus actor map.
pub fn cmd_resolve(events_path: &Path, rules_path: &Path, output: &Path) -> Result<Resolution> {
    let events = read_events(events_path)?;
    let rules_text = read_to_string(rules_path)?;
    let rules: AffiliationRuleSet = serde_json::from_str(&rules_text).map_err(|e| Error::Schema {
        path: rules_path.display().to_string(),
        message: e.to_string(),
    })?;
    let resolution = identity::resolve(&events, &rules)?;
    let mut text = serde_json::to_string_pretty(&resolution).unwrap();
    text.push('\n');
    atomic_write(output, text.as_bytes())?;
    write_manifest(
        output,
        "resolve",
        &serde_json::json!({}),
        &[events_path, rules_path],
    )?;
    Ok(resolution)
}

/// Builds the interaction network for one kind from an event stream and a
/// resolution, and writes it as a network document.
///
/// Events of other kinds are filtered out here (an empty result is a
/// warning, not an error).
pub fn cmd_build(
    events_path: &Path,
    resolution_path: &Path,
    kind: Kind,
    mode: EdgeMode,
    semantics: WeightSemantics,
    scope: &ScopeFilter,
    output: &Path,
) -> Result<(NetworkSummary, Option<String>)> {
    let events = read_events(events_path)?;
    let resolution = read_resolution(resolution_path)?;
    let projected = identity::project_events(&events, &resolution.actor_map)?;
    let of_kind: Vec<ParticipationEvent> = projected
        .into_iter()
        .filter(|e| e.kind == kind)
        .collect();
    let warning = if of_kind.is_empty() {
        Some(format!("no {} events in {}", kind.as_str(), events_path.display()))
    } else {
        None
    };
    let network = network::build(&of_kind, mode, semantics, kind, scope.clone())?;
    let doc = NetworkDoc::from(&network);
    let mut text = serde_json::to_string_pretty(&doc).unwrap();
    text.push('\n');
    atomic_write(output, text.as_bytes())?;
    write_manifest(
        output,
        "build",
        &serde_json::json!({"kind": kind, "mode": mode, "semantics": semantics, "scope": scope}),
        &[events_path, resolution_path],
    )?;
    Ok((network::summarize(&network), warning))
}

/// Parameters for the centrality measures of `cmd_analyze`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalyzeParams {
    pub measures: Vec<Measure>,
    pub distance_transform: DistanceTransform,
    pub eigenvector_tolerance: f64,
    pub eigenvector_max_iterations: usize,
    pub eigenvector_orientation: EdgeOrientation,
}

impl Default for AnalyzeParams {
    fn default() -> Self {
        AnalyzeParams {
            measures: Measure::ALL.to_vec(),
            distance_transform: DistanceTransform::default(),
            eigenvector_tolerance: DEFAULT_EIGENVECTOR_TOLERANCE,
            eigenvector_max_iterations: DEFAULT_EIGENVECTOR_MAX_ITERATIONS,
            eigenvector_orientation: EdgeOrientation::default(),
        }
    }
}

/// Computes centrality vectors and writes them as delimited text with
/// columns `stakeholder,measure,mode,raw,normalized`.
pub fn cmd_analyze(
    network_path: &Path,
    params: &AnalyzeParams,
    output: &Path,
) -> Result<Vec<CentralityVector>> {
    let network = read_network(network_path)?;
    let mut vectors = Vec::new();
    for measure in &params.measures {
        vectors.push(centrality::compute(
            &network,
            *measure,
            params.distance_transform,
            params.eigenvector_tolerance,
            params.eigenvector_max_iterations,
            params.eigenvector_orientation,
        )?);
    }
    let mut buf = String::from("stakeholder,measure,mode,raw,normalized\n");
    for vector in &vectors {
        let mode = match vector.mode {
            EdgeMode::Weighted => "weighted",
            EdgeMode::Binary => "binary",
        };
        for (stakeholder, raw) in &vector.values {
            buf.push_str(&format!(
                "{},{},{},{},{}\n",
                csv_field(stakeholder),
                vector.measure.as_str(),
                mode,
                format_significant(*raw, 12),
                format_significant(vector.normalized[stakeholder], 12),
            ));
        }
    }
    atomic_write(output, buf.as_bytes())?;
    write_manifest(
        output,
        "analyze",
        &serde_json::to_value(params).unwrap(),
        &[network_path],
    )?;
    Ok(vectors)
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Normalized centrality values grouped by measure.
type MeasureTable = BTreeMap<Measure, BTreeMap<String, f64>>;

/// Parses the delimited centrality file back into per-measure maps.
fn read_centrality_csv(path: &Path) -> Result<(MeasureTable, Option<EdgeMode>)> {
    let text = read_to_string(path)?;
    let mut reader = ::csv::Reader::from_reader(text.as_bytes());
    let schema = |message: String| Error::Schema {
        path: path.display().to_string(),
        message,
    };
    let mut by_measure: BTreeMap<Measure, BTreeMap<String, f64>> = BTreeMap::new();
    let mut mode = None;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| schema(format!("row {}: {e}", i + 2)))?;
        if record.len() < 5 {
            return Err(schema(format!("row {}: expected 5 columns", i + 2)));
        }
        let measure: Measure = record[1]
            .parse()
            .map_err(|_| schema(format!("row {}: unknown measure '{}'", i + 2, &record[1])))?;
        let row_mode = match &record[2] {
            "weighted" => EdgeMode::Weighted,
            "binary" => EdgeMode::Binary,
            other => return Err(schema(format!("row {}: unknown mode '{other}'", i + 2))),
        };
        if *mode.get_or_insert(row_mode) != row_mode {
            return Err(schema(format!("row {}: mixed edge modes in one file", i + 2)));
        }
        let normalized: f64 = record[4]
            .parse()
            .map_err(|e| schema(format!("row {}: bad normalized value: {e}", i + 2)))?;
        by_measure
            .entry(measure)
            .or_default()
            .insert(record[0].to_string(), normalized);
    }
    Ok((by_measure, mode))
}

/// The persisted ranking document.
#[derive(Debug, Serialize, Deserialize)]
pub struct RankingDoc {
    pub scores: Vec<InfluenceScore>,
}

/// Scores and ranks stakeholders from a centrality file; the network file
/// supplies the configuration stamp carried on every score.
pub fn cmd_rank(
    centrality_path: &Path,
    network_path: &Path,
    measures_used: &[Measure],
    threshold: f64,
    top: Option<usize>,
    output: &Path,
) -> Result<Vec<InfluenceScore>> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::Config(format!(
            "influence threshold must lie in [0,1], got {threshold}"
        )));
    }
    let (by_measure, _) = read_centrality_csv(centrality_path)?;
    let network = read_network(network_path)?;
    let network_ref = NetworkRef {
        kind: network.kind,
        mode: network.mode,
        semantics: network.weight_semantics,
    };
    let vectors: Vec<CentralityVector> = by_measure
        .iter()
        .map(|(measure, normalized)| CentralityVector {
            measure: *measure,
            mode: network.mode,
            values: normalized.clone(),
            normalized: normalized.clone(),
            diagnostics: Default::default(),
        })
        .collect();
    let profiles = influence::assemble_profiles(&vectors, network_ref)?;
    let scores: Vec<InfluenceScore> = profiles
        .iter()
        .map(|p| influence::score(p, measures_used, threshold))
        .collect::<Result<_>>()?;
    let ranked = influence::rank(&scores, top)?;
    let mut text = serde_json::to_string_pretty(&RankingDoc { scores: ranked.clone() }).unwrap();
    text.push('\n');
    atomic_write(output, text.as_bytes())?;
    write_manifest(
        output,
        "rank",
        &serde_json::json!({"measures_used": measures_used, "threshold": threshold, "top": top}),
        &[centrality_path, network_path],
    )?;
    Ok(ranked)
}

pub fn read_ranking(path: &Path) -> Result<RankingDoc> {
    let text = read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Schema {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Places ranked stakeholders into the influence/alignment matrix using
/// an annotations file; unannotated stakeholders are reported, not dropped.
pub fn cmd_map(
    ranking_path: &Path,
    annotations_path: &Path,
    alignment_threshold: f64,
    output: &Path,
) -> Result<MatrixReport> {
    if !(0.0..=1.0).contains(&alignment_threshold) {
        return Err(Error::Config(format!(
            "alignment threshold must lie in [0,1], got {alignment_threshold}"
        )));
    }
    let ranking = read_ranking(ranking_path)?;
    let text = read_to_string(annotations_path)?;
    let annotations: Vec<AlignmentAnnotation> =
        serde_json::from_str(&text).map_err(|e| Error::Schema {
            path: annotations_path.display().to_string(),
            message: e.to_string(),
        })?;
    let by_id: BTreeMap<&str, &AlignmentAnnotation> = annotations
        .iter()
        .map(|a| (a.stakeholder.as_str(), a))
        .collect();

    let mut placements = Vec::new();
    let mut unannotated = Vec::new();
    for score in &ranking.scores {
        match by_id.get(score.stakeholder.as_str()) {
            Some(annotation) => {
                placements.push(mapping::assign_zone(score, annotation, alignment_threshold)?)
            }
            None => unannotated.push(score.stakeholder.clone()),
        }
    }
    let report = mapping::map_report(&placements, &unannotated);
    let mut text = serde_json::to_string_pretty(&report).unwrap();
    text.push('\n');
    atomic_write(output, text.as_bytes())?;
    write_manifest(
        output,
        "map",
        &serde_json::json!({"alignment_threshold": alignment_threshold}),
        &[ranking_path, annotations_path],
    )?;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    Graphml,
    Dot,
    Csv,
}

impl std::str::FromStr for ExportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "graphml" => Ok(ExportFormat::Graphml),
            "dot" => Ok(ExportFormat::Dot),
            "csv" => Ok(ExportFormat::Csv),
            other => Err(Error::Config(format!("unknown export format '{other}'"))),
        }
    }
}

/// Exports a network document to GraphML or DOT.
pub fn cmd_export_network(
    network_path: &Path,
    format: ExportFormat,
    output: &Path,
) -> Result<()> {
    let network = read_network(network_path)?;
    let mut buf = Vec::new();
    match format {
        ExportFormat::Graphml => graphio::write_graphml(&mut buf, &network)?,
        ExportFormat::Dot => graphio::write_dot(&mut buf, &network)?,
        ExportFormat::Csv => {
            return Err(Error::Config("networks export to graphml or dot".into()))
        }
    }
    buf.push(b'\n');
    atomic_write(output, &buf)?;
    write_manifest(
        output,
        "export",
        &serde_json::json!({"format": format}),
        &[network_path],
    )?;
    Ok(())
}

/// Renders a ranking document as delimited text with fixed column order
/// `rank,stakeholder,score,level,threshold`.
pub fn cmd_export_ranking(ranking_path: &Path, output: &Path) -> Result<()> {
    let ranking = read_ranking(ranking_path)?;
    let mut buf = String::from("rank,stakeholder,score,level,threshold\n");
    for (i, s) in ranking.scores.iter().enumerate() {
        buf.push_str(&format!(
            "{},{},{},{},{}\n",
            i + 1,
            csv_field(&s.stakeholder),
            format_significant(s.score, 12),
            match s.level {
                influence::InfluenceLevel::High => "high",
                influence::InfluenceLevel::Low => "low",
            },
            format_significant(s.threshold, 12),
        ));
    }
    atomic_write(output, buf.as_bytes())?;
    write_manifest(output, "export", &serde_json::json!({"format": "csv"}), &[ranking_path])
}

/// Renders a matrix report as delimited text with fixed column order
/// `zone,stakeholder,score,alignment`.
pub fn cmd_export_report(report_path: &Path, output: &Path) -> Result<()> {
    let text = read_to_string(report_path)?;
    let report: MatrixReport = serde_json::from_str(&text).map_err(|e| Error::Schema {
        path: report_path.display().to_string(),
        message: e.to_string(),
    })?;
    let mut buf = String::from("zone,stakeholder,score,alignment\n");
    for zone in [mapping::Zone::A, mapping::Zone::B, mapping::Zone::C, mapping::Zone::D] {
        for p in report.zone(zone) {
            buf.push_str(&format!(
                "{:?},{},{},{}\n",
                zone,
                csv_field(&p.stakeholder),
                format_significant(p.score, 12),
                format_significant(p.alignment, 12),
            ));
        }
    }
    for id in &report.unannotated {
        buf.push_str(&format!("unannotated,{},,\n", csv_field(id)));
    }
    atomic_write(output, buf.as_bytes())?;
    write_manifest(output, "export", &serde_json::json!({"format": "csv"}), &[report_path])
}

/// One row of the top-collaborators table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollaboratorRow {
    pub collaborator: String,
    /// Focal stakeholder's participation on the shared artifacts.
    pub participation: u64,
    /// Total participation on those artifacts, all stakeholders.
    pub total: u64,
    /// Outgoing edge weight per the network's semantics.
    pub weight: f64,
}

/// Computes the focal stakeholder's top collaborators.
///
/// The participation tallies come from the projected events the network
/// was built from; the weight column is the network's edge weight.
pub fn collaborators(
    network: &InteractionNetwork,
    projected_events: &[ParticipationEvent],
    stakeholder: &str,
    top: Option<usize>,
) -> Result<Vec<CollaboratorRow>> {
    if !network.nodes.iter().any(|n| n == stakeholder) {
        let near: Vec<String> = network
            .nodes
            .iter()
            .filter(|n| {
                let a = n.to_lowercase();
                let b = stakeholder.to_lowercase();
                a.contains(&b) || b.contains(&a)
            })
            .cloned()
            .collect();
        return Err(Error::UnknownStakeholder {
            name: stakeholder.to_string(),
            near,
        });
    }

    // artifact -> stakeholder -> summed size, restricted to the network kind
    let mut participation: BTreeMap<&str, BTreeMap<&str, u64>> = BTreeMap::new();
    for e in projected_events.iter().filter(|e| e.kind == network.kind) {
        *participation
            .entry(&e.artifact_id)
            .or_default()
            .entry(&e.actor_key)
            .or_default() += e.size;
    }

    let mut rows: Vec<CollaboratorRow> = Vec::new();
    for ((source, target), weight) in &network.edges {
        if source != stakeholder {
            continue;
        }
        let mut focal = 0u64;
        let mut total = 0u64;
        for sizes in participation.values() {
            let focal_size = sizes.get(stakeholder).copied().unwrap_or(0);
            let target_size = sizes.get(target.as_str()).copied().unwrap_or(0);
            if focal_size > 0 && target_size > 0 {
                focal += focal_size;
                total += sizes.values().sum::<u64>();
            }
        }
        rows.push(CollaboratorRow {
            collaborator: target.clone(),
            participation: focal,
            total,
            weight: num_traits::ToPrimitive::to_f64(weight).unwrap_or(f64::NAN),
        });
    }
    rows.sort_by(|a, b| {
        b.participation
            .cmp(&a.participation)
            .then_with(|| a.collaborator.cmp(&b.collaborator))
    });
    if let Some(top) = top {
        rows.truncate(top);
    }
    Ok(rows)
}

/// Writes the top-collaborators table as delimited text with columns
/// `collaborator,participation,total,weight` (weight at 2 decimals, as
/// in the usual reporting convention).
pub fn cmd_collaborators(
    network_path: &Path,
    events_path: &Path,
    resolution_path: &Path,
    stakeholder: &str,
    top: Option<usize>,
    output: &Path,
) -> Result<Vec<CollaboratorRow>> {
    let network = read_network(network_path)?;
    let events = read_events(events_path)?;
    let resolution = read_resolution(resolution_path)?;
    let projected = identity::project_events(&events, &resolution.actor_map)?;
    let rows = collaborators(&network, &projected, stakeholder, top)?;
    let mut buf = String::from("collaborator,participation,total,weight\n");
    for row in &rows {
        buf.push_str(&format!(
            "{},{},{},{:.2}\n",
            csv_field(&row.collaborator),
            row.participation,
            row.total,
            row.weight
        ));
    }
    atomic_write(output, buf.as_bytes())?;
    write_manifest(
        output,
        "collaborators",
        &serde_json::json!({"stakeholder": stakeholder, "top": top}),
        &[network_path, events_path, resolution_path],
    )?;
    Ok(rows)
}

/// One row of the per-group breakdown: out-degrees of the focal
/// stakeholder in the network built from one metadata group, with its
/// competition rank among the group's stakeholders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakdownRow {
    pub group: String,
    pub binary_out_degree: u64,
    /// `"r/n"`, empty when the stakeholder is absent from the group.
    pub binary_rank: String,
    pub weighted_out_degree: f64,
    pub weighted_rank: String,
}

/// Builds one network per value of a metadata key and reports the focal
/// stakeholder's binary and weighted out-degree with relative rank.
pub fn breakdown(
    projected_events: &[ParticipationEvent],
    group_by: &str,
    stakeholder: &str,
    kind: Kind,
    semantics: WeightSemantics,
) -> Result<Vec<BreakdownRow>> {
    let of_kind: Vec<&ParticipationEvent> =
        projected_events.iter().filter(|e| e.kind == kind).collect();
    let mut groups: BTreeMap<String, Vec<ParticipationEvent>> = BTreeMap::new();
    for e in &of_kind {
        for value in e.metadata_values(group_by) {
            groups.entry(value.to_string()).or_default().push((*e).clone());
        }
    }
    if groups.is_empty() {
        let available: BTreeSet<String> = of_kind
            .iter()
            .flat_map(|e| e.metadata.keys().cloned())
            .collect();
        return Err(Error::UnknownMetadataKey {
            key: group_by.to_string(),
            available: available.into_iter().collect(),
        });
    }

    let mut rows = Vec::new();
    for (group, events) in &groups {
        let weighted = network::build(events, EdgeMode::Weighted, semantics, kind, Default::default())?;
        let binary = network::build(events, EdgeMode::Binary, semantics, kind, Default::default())?;

        let present = weighted.nodes.iter().any(|n| n == stakeholder);
        let (binary_value, weighted_value) = if present {
            (
                binary.binary_out_degree(stakeholder) as u64,
                num_traits::ToPrimitive::to_f64(&weighted.weighted_out_degree(stakeholder))
                    .unwrap_or(0.0),
            )
        } else {
            (0, 0.0)
        };

        let rank_of = |values: &[f64], focal: f64| -> String {
            let better = values.iter().filter(|&&v| v > focal).count();
            format!("{}/{}", better + 1, values.len())
        };
        let (binary_rank, weighted_rank) = if present {
            let binary_values: Vec<f64> = binary
                .nodes
                .iter()
                .map(|n| binary.binary_out_degree(n) as f64)
                .collect();
            let weighted_values: Vec<f64> = weighted
                .nodes
                .iter()
                .map(|n| {
                    num_traits::ToPrimitive::to_f64(&weighted.weighted_out_degree(n)).unwrap_or(0.0)
                })
                .collect();
            (
                rank_of(&binary_values, binary_value as f64),
                rank_of(&weighted_values, weighted_value),
            )
        } else {
            (String::new(), String::new())
        };

        rows.push(BreakdownRow {
            group: group.clone(),
            binary_out_degree: binary_value,
            binary_rank,
            weighted_out_degree: weighted_value,
            weighted_rank,
        });
    }
    Ok(rows)
}

/// Writes the per-group breakdown as delimited text with columns
/// `group,binary_out_degree,binary_rank,weighted_out_degree,weighted_rank`.
#[allow(clippy::too_many_arguments)]
pub fn cmd_breakdown(
    events_path: &Path,
    resolution_path: &Path,
    group_by: &str,
    stakeholder: &str,
    kind: Kind,
    semantics: WeightSemantics,
    output: &Path,
) -> Result<Vec<BreakdownRow>> {
    let events = read_events(events_path)?;
    let resolution = read_resolution(resolution_path)?;
    let projected = identity::project_events(&events, &resolution.actor_map)?;
    let rows = breakdown(&projected, group_by, stakeholder, kind, semantics)?;
    let mut buf = String::from("group,binary_out_degree,binary_rank,weighted_out_degree,weighted_rank\n");
    for row in &rows {
        buf.push_str(&format!(
            "{},{},{},{},{}\n",
            csv_field(&row.group),
            row.binary_out_degree,
            row.binary_rank,
            format_significant(row.weighted_out_degree, 12),
            row.weighted_rank
        ));
    }
    atomic_write(output, buf.as_bytes())?;
    write_manifest(
        output,
        "breakdown",
        &serde_json::json!({
            "group_by": group_by,
            "stakeholder": stakeholder,
            "kind": kind,
            "semantics": semantics
        }),
        &[events_path, resolution_path],
    )?;
    Ok(rows)
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
            metadata: Default::default(),
        }
    }

    #[test]
    fn collaborators_pooled_weights_match_ratio_of_sums() {
        // Focal shares disjoint artifact sets with three others.
        let events = vec![
            event("U-1", "focal", 227, Kind::Comment),
            event("U-1", "p1", 882, Kind::Comment),
            event("U-2", "focal", 98, Kind::Comment),
            event("U-2", "p2", 565, Kind::Comment),
            event("U-3", "focal", 42, Kind::Comment),
            event("U-3", "p3", 37, Kind::Comment),
        ];
        let network = network::build(
            &events,
            EdgeMode::Weighted,
            WeightSemantics::Pooled,
            Kind::Comment,
            Default::default(),
        )
        .unwrap();
        let rows = collaborators(&network, &events, "focal", None).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].collaborator, "p1");
        assert_eq!((rows[0].participation, rows[0].total), (227, 1109));
        assert_eq!(format!("{:.2}", rows[0].weight), "0.20");
        assert_eq!(format!("{:.2}", rows[1].weight), "0.15");
        assert_eq!((rows[2].participation, rows[2].total), (42, 79));
        assert_eq!(format!("{:.2}", rows[2].weight), "0.53");
    }

    #[test]
    fn collaborators_top_larger_than_count_returns_all() {
        let events = vec![
            event("U-1", "focal", 1, Kind::Comment),
            event("U-1", "other", 1, Kind::Comment),
        ];
        let network = network::build(
            &events,
            EdgeMode::Weighted,
            WeightSemantics::Pooled,
            Kind::Comment,
            Default::default(),
        )
        .unwrap();
        let rows = collaborators(&network, &events, "focal", Some(10)).unwrap();
        assert_eq!(rows.len(), 1);
    }

    #[test]
    fn unknown_stakeholder_lists_near_matches() {
        let events = vec![
            event("U-1", "wandisco", 1, Kind::Comment),
            event("U-1", "pivotal", 1, Kind::Comment),
        ];
        let network = network::build(
            &events,
            EdgeMode::Weighted,
            WeightSemantics::Pooled,
            Kind::Comment,
            Default::default(),
        )
        .unwrap();
        let err = collaborators(&network, &events, "wandis", None).unwrap_err();
        match err {
            Error::UnknownStakeholder { near, .. } => {
                assert_eq!(near, vec!["wandisco".to_string()])
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    fn with_component(mut e: ParticipationEvent, component: &str) -> ParticipationEvent {
        e.metadata
            .insert(crate::event::META_COMPONENTS.into(), component.into());
        e
    }

    #[test]
    fn breakdown_reports_zero_outside_active_groups() {
        let events = vec![
            with_component(event("U-1", "focal", 5, Kind::Patch), "HDFS"),
            with_component(event("U-1", "other", 3, Kind::Patch), "HDFS"),
            with_component(event("U-2", "other", 2, Kind::Patch), "YARN"),
            with_component(event("U-2", "third", 2, Kind::Patch), "YARN"),
        ];
        let rows = breakdown(
            &events,
            crate::event::META_COMPONENTS,
            "focal",
            Kind::Patch,
            WeightSemantics::PerArtifact,
        )
        .unwrap();
        assert_eq!(rows.len(), 2);
        let hdfs = rows.iter().find(|r| r.group == "HDFS").unwrap();
        assert_eq!(hdfs.binary_out_degree, 1);
        assert_eq!(hdfs.binary_rank, "1/2");
        let yarn = rows.iter().find(|r| r.group == "YARN").unwrap();
        assert_eq!(yarn.binary_out_degree, 0);
        assert_eq!(yarn.binary_rank, "");
        assert_eq!(yarn.weighted_out_degree, 0.0);
    }

    #[test]
    fn breakdown_single_group_equals_whole_network() {
        let events = vec![
            with_component(event("U-1", "focal", 2, Kind::Comment), "Common"),
            with_component(event("U-1", "other", 1, Kind::Comment), "Common"),
        ];
        let rows = breakdown(
            &events,
            crate::event::META_COMPONENTS,
            "focal",
            Kind::Comment,
            WeightSemantics::PerArtifact,
        )
        .unwrap();
        assert_eq!(rows.len(), 1);
        assert!((rows[0].weighted_out_degree - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn breakdown_unknown_key_lists_available() {
        let events = vec![with_component(event("U-1", "a", 1, Kind::Comment), "HDFS")];
        let err = breakdown(
            &events,
            "nope",
            "a",
            Kind::Comment,
            WeightSemantics::PerArtifact,
        )
        .unwrap_err();
        match err {
            Error::UnknownMetadataKey { available, .. } => {
                assert_eq!(available, vec![crate::event::META_COMPONENTS.to_string()])
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn breakdown_ranks_match_per_group_sort() {
        // Four stakeholders, one group; ranks recomputed independently.
        let events = vec![
            with_component(event("U-1", "a", 10, Kind::Comment), "G"),
            with_component(event("U-1", "b", 5, Kind::Comment), "G"),
            with_component(event("U-1", "c", 3, Kind::Comment), "G"),
            with_component(event("U-2", "a", 1, Kind::Comment), "G"),
            with_component(event("U-2", "d", 9, Kind::Comment), "G"),
        ];
        for focal in ["a", "b", "c", "d"] {
            let rows = breakdown(
                &events,
                crate::event::META_COMPONENTS,
                focal,
                Kind::Comment,
                WeightSemantics::PerArtifact,
            )
            .unwrap();
            let row = &rows[0];
            // Independent rank check: full sorted out-degree list.
            let network = network::build(
                &events,
                EdgeMode::Weighted,
                WeightSemantics::PerArtifact,
                Kind::Comment,
                Default::default(),
            )
            .unwrap();
            let mut degrees: Vec<(String, f64)> = network
                .nodes
                .iter()
                .map(|n| {
                    (
                        n.clone(),
                        num_traits::ToPrimitive::to_f64(&network.weighted_out_degree(n)).unwrap(),
                    )
                })
                .collect();
            degrees.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap());
            let expected_rank = degrees.iter().position(|(n, _)| n == focal).unwrap() + 1;
            assert_eq!(row.weighted_rank, format!("{expected_rank}/4"), "focal {focal}");
        }
    }

    #[test]
    fn atomic_write_creates_parent_dirs() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/out.txt");
        atomic_write(&path, b"hello").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "hello");
    }

    #[test]
    fn config_rejects_out_of_range_thresholds() {
        let config = PipelineConfig {
            influence_threshold: Some(1.5),
            ..Default::default()
        };
        assert!(matches!(config.validate(), Err(Error::Config(_))));
    }
}
