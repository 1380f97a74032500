//! Command-line surface for the fault-diagnosis pipeline.
//!
//! Subcommands compose through files: `parse` emits a classified snapshot,
//! `model` builds the dependency graph from it, `diagnose` ranks root
//! causes for an evidence file against a model, `simulate` runs seeded
//! fault campaigns, and `bench` times model building.
//!
//! Exit codes: 0 ok, 2 usage, 3 input/format error, 4 model invariant
//! violation, 5 inference contradiction. Set `NETDIAG_LOG` for verbosity.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use netdiag::bayes::{attach_parameters, PriorConfig, VertexState};
use netdiag::diagnosis::{
    diagnose, explain, AlarmKind, DiagnoseOptions, ObservationSet, ServiceAlarm,
};
use netdiag::graph::{
    build_model, export, import_json, topological_sort, DependencyGraph, ExportFormat,
};
use netdiag::simulator::{benchmark_build, run_campaign, BenchConfig, CampaignConfig};
use netdiag::templates::TemplateProfile;
use netdiag::topology::{classify_at, parse_dialect, Dialect, LinkDescriptor, NetworkDescriptor};
use netdiag::{Error, ErrorClass};

#[derive(Parser)]
#[command(
    name = "netdiag",
    version,
    about = "Self-modeling fault diagnosis for software-defined networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a controller topology dump into a classified snapshot.
    Parse(ParseArgs),
    /// Build the dependency-graph model from a snapshot.
    Model(ModelArgs),
    /// Rank root causes for an evidence file against a model.
    Diagnose(DiagnoseArgs),
    /// Run a seeded fault-injection campaign.
    Simulate(SimulateArgs),
    /// Benchmark model-build time over growing topologies.
    Bench(BenchArgs),
}

#[derive(Args)]
struct ParseArgs {
    /// Path or http(s) URL of the topology document.
    source: String,
    #[arg(long, default_value = "native")]
    dialect: Dialect,
    /// Overrides the controller id carried by the document.
    #[arg(long)]
    controller: Option<String>,
    /// Snapshot instant to record (default: process-monotonic now).
    #[arg(long)]
    instant: Option<u64>,
    #[arg(long, default_value_t = 10)]
    timeout_secs: u64,
    /// Output path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ModelArgs {
    /// Snapshot JSON produced by `parse`.
    snapshot: PathBuf,
    #[arg(long, default_value = "degree-adaptive")]
    profile: TemplateProfile,
    /// Export format: json or dot.
    #[arg(long, default_value = "json")]
    export: ExportFormatArg,
    /// Treat the input as a model document: re-sort if needed and re-export.
    #[arg(long)]
    reexport: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy)]
enum ExportFormatArg {
    Json,
    Dot,
}

impl FromStr for ExportFormatArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(ExportFormatArg::Json),
            "dot" => Ok(ExportFormatArg::Dot),
            other => Err(format!("unknown export format {other:?} (json or dot)")),
        }
    }
}

#[derive(Args)]
struct DiagnoseArgs {
    /// Model JSON produced by `model`.
    #[arg(long)]
    model: PathBuf,
    /// Evidence file: {"alarm": ..., "nic_states": ..., "cpu_utilization": ...}.
    #[arg(long)]
    evidence: PathBuf,
    /// Prior configuration (JSON or TOML by extension).
    #[arg(long)]
    priors: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-6)]
    tie_epsilon: f64,
    #[arg(long)]
    top_k: Option<usize>,
    /// Human-readable text instead of JSON.
    #[arg(long)]
    pretty: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Campaign config (JSON or TOML by extension).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Include wall-clock stats (breaks byte-reproducibility).
    #[arg(long)]
    timing: bool,
    /// Report JSON path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write per-trial rows as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Topology families to time (linear, tree).
    #[arg(long, value_delimiter = ',', default_values_t = ["linear".to_string(), "tree".to_string()])]
    kinds: Vec<String>,
    /// Target element counts.
    #[arg(long, value_delimiter = ',', default_values_t = [15u32, 50, 125, 250, 375, 500])]
    elements: Vec<u32>,
    #[arg(long, default_value_t = 20)]
    reps: u32,
    #[arg(long, default_value = "table-compat")]
    profile: TemplateProfile,
    /// CSV output path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Snapshot document tying the descriptor and link descriptor together.
#[derive(Serialize, Deserialize)]
struct SnapshotDocument {
    schema_version: u32,
    descriptor: NetworkDescriptor,
    links: LinkDescriptor,
}

#[derive(Serialize, Deserialize)]
struct EvidenceDocument {
    #[serde(default)]
    alarm: Option<AlarmDocument>,
    #[serde(default)]
    nic_states: BTreeMap<String, VertexState>,
    #[serde(default)]
    cpu_utilization: BTreeMap<String, f64>,
}

#[derive(Serialize, Deserialize)]
struct AlarmDocument {
    kind: AlarmKind,
    #[serde(default)]
    src: Option<String>,
    #[serde(default)]
    dst: Option<String>,
    #[serde(default)]
    raised_at: u64,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("NETDIAG_LOG")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>().map(Error::class) {
        Some(ErrorClass::Input) => 3,
        Some(ErrorClass::Model) => 4,
        Some(ErrorClass::Contradiction) => 5,
        None => 3,
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Parse(args) => cmd_parse(args),
        Command::Model(args) => cmd_model(args),
        Command::Diagnose(args) => cmd_diagnose(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

fn read_source(source: &str, timeout_secs: u64) -> Result<Vec<u8>> {
    if source.starts_with("http://") || source.starts_with("https://") {
        log::info!("fetching topology from {source}");
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(timeout_secs))
            .build()
            .context("building http client")?;
        let response = client
            .get(source)
            .send()
            .with_context(|| format!("fetching {source}"))?
            .error_for_status()
            .with_context(|| format!("fetching {source}"))?;
        let mut bytes = Vec::new();
        response
            .take(16 * 1024 * 1024)
            .read_to_end(&mut bytes)
            .context("reading http body")?;
        Ok(bytes)
    } else {
        std::fs::read(source).with_context(|| format!("reading {source}"))
    }
}

fn write_output(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            use std::io::Write;
            std::io::stdout().write_all(bytes).context("writing stdout")
        }
    }
}

fn cmd_parse(args: ParseArgs) -> Result<()> {
    let bytes = read_source(&args.source, args.timeout_secs)?;
    let mut raw = parse_dialect(&bytes, args.dialect).map_err(Error::Topology)?;
    if let Some(controller) = args.controller {
        raw.controller_id = controller;
    }
    let instant = args.instant.unwrap_or_else(now_nanos);
    let (descriptor, links) = classify_at(&raw, instant).map_err(Error::Topology)?;
    log::info!(
        "classified {} elements, control mode {}",
        descriptor.elements.len(),
        descriptor.control_mode
    );
    let doc = SnapshotDocument {
        schema_version: 1,
        descriptor,
        links,
    };
    let mut json = serde_json::to_vec_pretty(&doc)?;
    json.push(b'\n');
    write_output(args.out.as_deref(), &json)
}

fn now_nanos() -> u64 {
    use std::sync::OnceLock;
    use std::time::Instant;
    static EPOCH: OnceLock<Instant> = OnceLock::new();
    EPOCH.get_or_init(Instant::now).elapsed().as_nanos() as u64
}

fn load_snapshot(path: &Path) -> Result<SnapshotDocument> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_slice(&bytes)
        .with_context(|| format!("{} is not a snapshot document", path.display()))
}

fn cmd_model(args: ModelArgs) -> Result<()> {
    let graph: DependencyGraph = if args.reexport {
        let bytes = std::fs::read(&args.snapshot)
            .with_context(|| format!("reading {}", args.snapshot.display()))?;
        let imported = import_json(&bytes).map_err(Error::Graph)?;
        if imported.sorted {
            imported
        } else {
            topological_sort(&imported).map_err(Error::Graph)?
        }
    } else {
        let doc = load_snapshot(&args.snapshot)?;
        build_model(&doc.descriptor, &doc.links, args.profile)?
    };
    log::info!("model has {} vertices", graph.vertex_count());
    let format = match args.export {
        ExportFormatArg::Json => ExportFormat::Json,
        ExportFormatArg::Dot => ExportFormat::Dot,
    };
    let bytes = export(&graph, format).map_err(Error::Graph)?;
    write_output(args.out.as_deref(), &bytes)
}

fn load_priors(path: Option<&Path>) -> Result<PriorConfig> {
    let Some(path) = path else {
        return Ok(PriorConfig::default());
    };
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let config = if path.extension().and_then(|e| e.to_str()) == Some("toml") {
        PriorConfig::from_toml(&text)
    } else {
        PriorConfig::from_json(&text)
    };
    config.map_err(|e| Error::Bayes(e).into())
}

fn cmd_diagnose(args: DiagnoseArgs) -> Result<()> {
    let model_bytes =
        std::fs::read(&args.model).with_context(|| format!("reading {}", args.model.display()))?;
    let graph = import_json(&model_bytes).map_err(Error::Graph)?;
    let graph = if graph.sorted {
        graph
    } else {
        topological_sort(&graph).map_err(Error::Graph)?
    };
    let priors = load_priors(args.priors.as_deref())?;
    let bn = attach_parameters(&graph, &priors).map_err(Error::Bayes)?;

    let evidence_text = std::fs::read_to_string(&args.evidence)
        .with_context(|| format!("reading {}", args.evidence.display()))?;
    let doc: EvidenceDocument = serde_json::from_str(&evidence_text)
        .with_context(|| format!("{} is not an evidence document", args.evidence.display()))?;
    let alarm = doc
        .alarm
        .map(|a| -> Result<ServiceAlarm> {
            let alarm = match a.kind {
                AlarmKind::InfrastructureFailure => ServiceAlarm::infrastructure(),
                AlarmKind::ServiceDegradation => {
                    let (Some(src), Some(dst)) = (a.src, a.dst) else {
                        bail!(Error::Diagnosis(netdiag::DiagnosisError::MissingEndpoints));
                    };
                    ServiceAlarm::degradation(&src, &dst)
                }
            };
            Ok(ServiceAlarm {
                raised_at: a.raised_at,
                ..alarm
            })
        })
        .transpose()?;
    let obs = ObservationSet {
        nic_states: doc.nic_states,
        cpu_utilization: doc.cpu_utilization,
    };
    let options = DiagnoseOptions {
        tie_epsilon: args.tie_epsilon,
        top_k: args.top_k,
    };
    let report = diagnose(&bn, alarm.as_ref(), &obs, &options).map_err(Error::Diagnosis)?;
    let bytes = if args.pretty {
        explain(&report).into_bytes()
    } else {
        let mut json = serde_json::to_vec_pretty(&report)?;
        json.push(b'\n');
        json
    };
    write_output(args.out.as_deref(), &bytes)
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let mut config = if args.config.extension().and_then(|e| e.to_str()) == Some("toml") {
        CampaignConfig::from_toml(&text)
    } else {
        CampaignConfig::from_json(&text)
    }
    .map_err(Error::Simulator)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if args.timing {
        config.include_timing = true;
    }
    let report = run_campaign(&config).map_err(Error::Simulator)?;
    log::info!(
        "campaign finished: {} trials, top-1 accuracy {:?}",
        report.trials,
        report.top1_accuracy
    );
    if let Some(csv) = &args.csv {
        std::fs::write(csv, report.to_csv())
            .with_context(|| format!("writing {}", csv.display()))?;
    }
    write_output(args.out.as_deref(), report.to_json().as_bytes())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let kinds = args
        .kinds
        .iter()
        .map(|k| match k.as_str() {
            "linear" => Ok(netdiag::simulator::TopologyFamily::Linear),
            "tree" => Ok(netdiag::simulator::TopologyFamily::Tree),
            other => bail!("bench supports linear and tree, not {other:?}"),
        })
        .collect::<Result<Vec<_>>>()?;
    let config = BenchConfig {
        kinds,
        element_counts: args.elements,
        repetitions: args.reps,
        profile: args.profile,
    };
    let report = benchmark_build(&config)?;
    write_output(args.out.as_deref(), report.to_csv().as_bytes())
}
