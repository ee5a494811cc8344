//! Command-line front end for the pipeline.
//!
//! Exit codes: 0 on success, 1 for usage/configuration problems, 2 for
//! data or contract violations. Primary outputs go to the file named by
//! `--out`; human summaries go to standard error.

use std::path::PathBuf;
use std::process::ExitCode;

use chrono::{DateTime, Utc};
use clap::{Args, Parser, Subcommand};

use stakegraph::centrality::{
    DistanceTransform, EdgeOrientation, Measure, DEFAULT_EIGENVECTOR_MAX_ITERATIONS,
    DEFAULT_EIGENVECTOR_TOLERANCE,
};
use stakegraph::event::{Kind, ScopeFilter};
use stakegraph::influence::DEFAULT_INFLUENCE_THRESHOLD;
use stakegraph::mapping::DEFAULT_ALIGNMENT_THRESHOLD;
use stakegraph::network::{EdgeMode, WeightSemantics};
use stakegraph::pipeline::{self, AnalyzeParams, ExportFormat, InputFormat, PipelineConfig};
use stakegraph::{Error, Result};

#[derive(Parser)]
#[command(
    name = "stakegraph",
    version,
    about = "Mines issue-tracker exports into stakeholder interaction networks \
             and centrality-based influence rankings"
)]
struct Cli {
    /// JSON file with pipeline defaults; flags override individual fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScopeArgs {
    /// Inclusive start of the UTC time window (RFC 3339).
    #[arg(long)]
    from: Option<DateTime<Utc>>,
    /// Exclusive end of the UTC time window (RFC 3339).
    #[arg(long)]
    to: Option<DateTime<Utc>>,
    /// Keep only events tagged with one of these releases (repeatable).
    #[arg(long = "release")]
    releases: Vec<String>,
    /// Keep only events tagged with one of these components (repeatable).
    #[arg(long = "component")]
    components: Vec<String>,
    /// Keep only events of these kinds (repeatable).
    #[arg(long = "only-kind")]
    kinds: Vec<Kind>,
    /// Keep only events by these actors/stakeholders (repeatable).
    #[arg(long = "only-stakeholder")]
    stakeholders: Vec<String>,
}

impl ScopeArgs {
    /// Flags override the corresponding config fields wholesale.
    fn merge(&self, base: &ScopeFilter) -> Result<ScopeFilter> {
        let mut scope = base.clone();
        match (self.from, self.to) {
            (Some(from), Some(to)) => scope.time_window = Some((from, to)),
            (None, None) => {}
            _ => {
                return Err(Error::Config(
                    "--from and --to must be given together".into(),
                ))
            }
        }
        if !self.releases.is_empty() {
            scope.releases = Some(self.releases.clone());
        }
        if !self.components.is_empty() {
            scope.components = Some(self.components.clone());
        }
        if !self.kinds.is_empty() {
            scope.kinds = Some(self.kinds.clone());
        }
        if !self.stakeholders.is_empty() {
            scope.stakeholders = Some(self.stakeholders.clone());
        }
        scope.validate()?;
        Ok(scope)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse a repository export into the canonical event stream.
    Ingest {
        /// Export file to parse.
        input: PathBuf,
        /// Input format: jira or csv.
        #[arg(long)]
        format: InputFormat,
        #[command(flatten)]
        scope: ScopeArgs,
        /// Event stream output (JSON Lines).
        #[arg(long)]
        out: PathBuf,
    },
    /// Resolve actors to stakeholders using an affiliation rule set.
    Resolve {
        /// Event stream from `ingest`.
        events: PathBuf,
        /// Affiliation rule set (JSON); falls back to config `rules_path`.
        #[arg(long)]
        rules: Option<PathBuf>,
        /// Resolution output (stakeholder roster + actor map).
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the stakeholder interaction network for one event kind.
    Build {
        /// Event stream from `ingest`.
        events: PathBuf,
        /// Resolution from `resolve`.
        #[arg(long)]
        resolution: PathBuf,
        /// Event kind the network is built from: comment or patch.
        #[arg(long)]
        kind: Option<Kind>,
        /// Edge mode: weighted or binary.
        #[arg(long)]
        mode: Option<EdgeMode>,
        /// Weight semantics: per_artifact or pooled.
        #[arg(long)]
        semantics: Option<WeightSemantics>,
        #[command(flatten)]
        scope: ScopeArgs,
        /// Network document output.
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute centrality vectors over a network.
    Analyze {
        /// Network document from `build`.
        network: PathBuf,
        /// Measures to compute (repeatable); defaults to all four.
        #[arg(long = "measure")]
        measures: Vec<Measure>,
        /// Weight-to-distance transform: reciprocal or literal.
        #[arg(long)]
        distance_transform: Option<DistanceTransform>,
        /// Eigenvector convergence tolerance.
        #[arg(long)]
        eigenvector_tolerance: Option<f64>,
        /// Eigenvector iteration cap.
        #[arg(long)]
        eigenvector_max_iterations: Option<usize>,
        /// Eigenvector edge orientation: in_edges or out_edges.
        #[arg(long)]
        eigenvector_orientation: Option<EdgeOrientation>,
        /// Delimited centrality output.
        #[arg(long)]
        out: PathBuf,
    },
    /// Score and rank stakeholders from a centrality file.
    Rank {
        /// Delimited centrality file from `analyze`.
        centrality: PathBuf,
        /// Network document the centralities came from.
        #[arg(long)]
        network: PathBuf,
        /// Measures averaged into the score (repeatable); defaults to all
        /// measures present in the centrality file.
        #[arg(long = "measure")]
        measures: Vec<Measure>,
        /// High/low influence cut; a score equal to it classifies low.
        #[arg(long)]
        threshold: Option<f64>,
        /// Keep only the top N stakeholders.
        #[arg(long)]
        top: Option<usize>,
        /// Ranking document output.
        #[arg(long)]
        out: PathBuf,
    },
    /// Place ranked stakeholders into the influence/alignment matrix.
    Map {
        /// Ranking document from `rank`.
        ranking: PathBuf,
        /// Alignment annotations (JSON list).
        #[arg(long)]
        annotations: PathBuf,
        /// High/low alignment cut; a value equal to it classifies low.
        #[arg(long)]
        alignment_threshold: Option<f64>,
        /// Matrix report output.
        #[arg(long)]
        out: PathBuf,
    },
    /// Export a network, ranking, or matrix report to an exchange format.
    Export {
        /// Artifact to export: a network, ranking, or matrix report file.
        input: PathBuf,
        /// What the input file is: network, ranking, or report.
        #[arg(long)]
        artifact: Artifact,
        /// Output format: graphml or dot (networks), csv (ranking/report).
        #[arg(long)]
        format: ExportFormat,
        /// Export output.
        #[arg(long)]
        out: PathBuf,
    },
    /// List a stakeholder's top collaborators with participation tallies.
    Collaborators {
        /// Network document from `build`.
        network: PathBuf,
        /// Event stream the network was built from.
        #[arg(long)]
        events: PathBuf,
        /// Resolution from `resolve`.
        #[arg(long)]
        resolution: PathBuf,
        /// Focal stakeholder id.
        #[arg(long)]
        stakeholder: String,
        /// Keep only the top N collaborators.
        #[arg(long)]
        top: Option<usize>,
        /// Delimited table output.
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-metadata-group out-degree breakdown for one stakeholder.
    Breakdown {
        /// Event stream from `ingest`.
        events: PathBuf,
        /// Resolution from `resolve`.
        #[arg(long)]
        resolution: PathBuf,
        /// Metadata key to group by (e.g. components, fix_versions).
        #[arg(long)]
        group_by: String,
        /// Focal stakeholder id.
        #[arg(long)]
        stakeholder: String,
        /// Event kind: comment or patch.
        #[arg(long)]
        kind: Option<Kind>,
        /// Weight semantics: per_artifact or pooled.
        #[arg(long)]
        semantics: Option<WeightSemantics>,
        /// Delimited table output.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Artifact {
    Network,
    Ranking,
    Report,
}

fn run(cli: Cli) -> Result<()> {
    let config = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };

    match cli.command {
        Command::Ingest {
            input,
            format,
            scope,
            out,
        } => {
            let scope = scope.merge(&config.scope)?;
            let summary = pipeline::cmd_ingest(&input, format, &scope, &out)?;
            eprintln!(
                "ingest: {} events written, {} rejected, {} size fallbacks",
                summary.parsed, summary.rejected, summary.size_fallbacks
            );
            for warning in &summary.warnings {
                eprintln!("warning: {warning}");
            }
        }
        Command::Resolve { events, rules, out } => {
            let rules = rules
                .or(config.rules_path)
                .ok_or_else(|| Error::Config("no rule set: pass --rules or set rules_path".into()))?;
            let resolution = pipeline::cmd_resolve(&events, &rules, &out)?;
            eprintln!(
                "resolve: {} stakeholders from {} actors",
                resolution.stakeholders.len(),
                resolution.actor_map.len()
            );
        }
        Command::Build {
            events,
            resolution,
            kind,
            mode,
            semantics,
            scope,
            out,
        } => {
            let scope = scope.merge(&config.scope)?;
            let kind = kind.or(config.kind).unwrap_or(Kind::Comment);
            let mode = mode.or(config.mode).unwrap_or(EdgeMode::Weighted);
            let semantics = semantics
                .or(config.weight_semantics)
                .unwrap_or(WeightSemantics::PerArtifact);
            let (summary, warning) =
                pipeline::cmd_build(&events, &resolution, kind, mode, semantics, &scope, &out)?;
            if let Some(warning) = warning {
                eprintln!("warning: {warning}");
            }
            eprintln!(
                "build: {} stakeholders, {} collaborations",
                summary.stakeholders, summary.collaborations
            );
        }
        Command::Analyze {
            network,
            measures,
            distance_transform,
            eigenvector_tolerance,
            eigenvector_max_iterations,
            eigenvector_orientation,
            out,
        } => {
            let params = AnalyzeParams {
                measures: if measures.is_empty() {
                    config.measures.unwrap_or_else(|| Measure::ALL.to_vec())
                } else {
                    measures
                },
                distance_transform: distance_transform
                    .or(config.distance_transform)
                    .unwrap_or_default(),
                eigenvector_tolerance: eigenvector_tolerance
                    .or(config.eigenvector_tolerance)
                    .unwrap_or(DEFAULT_EIGENVECTOR_TOLERANCE),
                eigenvector_max_iterations: eigenvector_max_iterations
                    .or(config.eigenvector_max_iterations)
                    .unwrap_or(DEFAULT_EIGENVECTOR_MAX_ITERATIONS),
                eigenvector_orientation: eigenvector_orientation
                    .or(config.eigenvector_orientation)
                    .unwrap_or_default(),
            };
            let vectors = pipeline::cmd_analyze(&network, &params, &out)?;
            for vector in &vectors {
                let note = match (vector.diagnostics.iterations, &vector.diagnostics.unreachable_nodes) {
                    (Some(iterations), _) => format!(" ({iterations} iterations)"),
                    (None, unreachable) if !unreachable.is_empty() => {
                        format!(" ({} nodes with unreachable peers)", unreachable.len())
                    }
                    _ => String::new(),
                };
                eprintln!("analyze: {}{note}", vector.measure.as_str());
            }
        }
        Command::Rank {
            centrality,
            network,
            measures,
            threshold,
            top,
            out,
        } => {
            let threshold = threshold
                .or(config.influence_threshold)
                .unwrap_or(DEFAULT_INFLUENCE_THRESHOLD);
            let measures = if measures.is_empty() {
                config.measures.unwrap_or_else(|| Measure::ALL.to_vec())
            } else {
                measures
            };
            let ranked = pipeline::cmd_rank(&centrality, &network, &measures, threshold, top, &out)?;
            eprintln!("rank: {} stakeholders scored", ranked.len());
        }
        Command::Map {
            ranking,
            annotations,
            alignment_threshold,
            out,
        } => {
            let alignment_threshold = alignment_threshold
                .or(config.alignment_threshold)
                .unwrap_or(DEFAULT_ALIGNMENT_THRESHOLD);
            let report = pipeline::cmd_map(&ranking, &annotations, alignment_threshold, &out)?;
            eprint!("{}", report.diagram());
        }
        Command::Export {
            input,
            artifact,
            format,
            out,
        } => match (artifact, format) {
            (Artifact::Network, ExportFormat::Graphml | ExportFormat::Dot) => {
                pipeline::cmd_export_network(&input, format, &out)?
            }
            (Artifact::Ranking, ExportFormat::Csv) => pipeline::cmd_export_ranking(&input, &out)?,
            (Artifact::Report, ExportFormat::Csv) => pipeline::cmd_export_report(&input, &out)?,
            _ => {
                return Err(Error::Config(
                    "networks export to graphml/dot; rankings and reports export to csv".into(),
                ))
            }
        },
        Command::Collaborators {
            network,
            events,
            resolution,
            stakeholder,
            top,
            out,
        } => {
            let rows = pipeline::cmd_collaborators(
                &network,
                &events,
                &resolution,
                &stakeholder,
                top,
                &out,
            )?;
            eprintln!("collaborators: {} listed for {stakeholder}", rows.len());
        }
        Command::Breakdown {
            events,
            resolution,
            group_by,
            stakeholder,
            kind,
            semantics,
            out,
        } => {
            let kind = kind.or(config.kind).unwrap_or(Kind::Comment);
            let semantics = semantics
                .or(config.weight_semantics)
                .unwrap_or(WeightSemantics::PerArtifact);
            let rows = pipeline::cmd_breakdown(
                &events,
                &resolution,
                &group_by,
                &stakeholder,
                kind,
                semantics,
                &out,
            )?;
            eprintln!("breakdown: {} groups for {stakeholder}", rows.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help / --version land here too; they are not failures.
            let code = if e.exit_code() == 0 { 0 } else { 1 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
