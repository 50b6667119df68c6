//! `ganseval` subcommands.
//!
//! Exit codes: 0 on success, 1 for validation or usage errors, 2 for
//! internal or environment failures.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ganseval_core::metrics::DEFAULT_BINS;
use ganseval_core::workspace::{
    self, export, load_real, load_run, Artifact, ArtifactKey, DataSource, MANIFEST_FILE,
    REAL_FILE, RUNS_DIR,
};
use ganseval_core::{
    compute_bin_edges, fit_pca, generate_real, generate_run, DistanceMetric, Error, Regime,
    SynthConfig, ViewKind, Workspace,
};

use crate::service;

/// Environment variable overriding the cache directory.
pub const CACHE_DIR_ENV: &str = "GANSEVAL_CACHE_DIR";

/// Pair count above which COMPUTE prints a DTW cost projection first.
pub const DTW_PROJECTION_PAIRS: u64 = 1_000_000;

#[derive(Debug, Parser)]
#[command(name = "ganseval", version, about = "Evaluate generated time series against a real dataset")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check workspace integrity and print a report.
    Validate { workspace: PathBuf },
    /// Materialize every iteration view, histogram and statistic into the cache.
    Compute(ComputeArgs),
    /// Write a synthetic workspace.
    Synth(SynthArgs),
    /// Dump an artifact as CSV or JSON.
    Export(ExportArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricChoice {
    Ed,
    Dtw,
    Both,
}

impl MetricChoice {
    fn metrics(self) -> Vec<DistanceMetric> {
        match self {
            MetricChoice::Ed => vec![DistanceMetric::Euclidean],
            MetricChoice::Dtw => vec![DistanceMetric::Dtw],
            MetricChoice::Both => DistanceMetric::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    pub workspace: PathBuf,
    #[arg(long, value_enum, default_value = "both")]
    pub metric: MetricChoice,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    pub bins: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegimeArg {
    Converging,
    Collapse,
    Noise,
}

impl From<RegimeArg> for Regime {
    fn from(r: RegimeArg) -> Self {
        match r {
            RegimeArg::Converging => Regime::Converging,
            RegimeArg::Collapse => Regime::Collapse,
            RegimeArg::Noise => Regime::Noise,
        }
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Workspace directory to write (created if missing).
    #[arg(long, default_value = "workspace")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "converging")]
    pub regime: RegimeArg,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 50)]
    pub n_real: usize,
    #[arg(long, default_value_t = 64)]
    pub m_gen: usize,
    #[arg(long, default_value_t = 30)]
    pub t_len: usize,
    #[arg(long, default_value_t = 20)]
    pub iters: usize,
    #[arg(long, default_value_t = 0.05)]
    pub noise_floor: f64,
    /// Run name; defaults to the regime name.
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExportArtifact {
    IterationView,
    Colorfield,
    Histogram,
    Stats,
    Order,
    Real,
    Run,
    /// Everything a full COMPUTE materializes, into the `--out` directory.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn ext(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    pub workspace: PathBuf,
    #[arg(long, value_enum)]
    pub artifact: ExportArtifact,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Output file (directory for `run` and `all`); stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub run: Option<String>,
    /// Iteration number; omit for the real data.
    #[arg(long)]
    pub iteration: Option<u64>,
    #[arg(long, value_enum, default_value = "ed")]
    pub metric: MetricChoice,
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    pub bins: usize,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = ".")]
    pub workspace: PathBuf,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: IpAddr,
}

/// Failure of a command, classified by exit code.
#[derive(Debug)]
pub enum CliError {
    User(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::User(_) => 1,
            CliError::Internal(_) => 2,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_user_error() {
            CliError::User(e.to_string())
        } else {
            CliError::Internal(e.to_string())
        }
    }
}

type CliResult = Result<(), CliError>;

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            let msg = match &e {
                CliError::User(m) | CliError::Internal(m) => m,
            };
            eprintln!("error: {msg}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command) -> CliResult {
    match command {
        Command::Validate { workspace } => validate(&workspace),
        Command::Compute(args) => compute(&args),
        Command::Synth(args) => synth(&args),
        Command::Export(args) => export_cmd(&args),
        Command::Serve(args) => serve(&args),
    }
}

/// Opens a workspace, honoring [`CACHE_DIR_ENV`].
pub fn open_workspace(root: &Path) -> Result<Workspace, Error> {
    match std::env::var_os(CACHE_DIR_ENV) {
        Some(dir) if !dir.is_empty() => Workspace::open_with_cache_dir(root, PathBuf::from(dir)),
        _ => Workspace::open(root),
    }
}

fn validate(root: &Path) -> CliResult {
    let mut problems = Vec::new();
    let real = match load_real(root.join(REAL_FILE)) {
        Ok(r) => {
            println!("real: {} series x {} time points", r.len(), r.series_len());
            if let Err(e) = fit_pca(&r) {
                problems.push(e.to_string());
            }
            if let Err(e) = compute_bin_edges(&r, DEFAULT_BINS) {
                problems.push(e.to_string());
            }
            Some(r)
        }
        Err(e) => {
            problems.push(e.to_string());
            None
        }
    };

    let runs_dir = root.join(RUNS_DIR);
    let mut manifests: Vec<PathBuf> = fs::read_dir(&runs_dir)
        .map(|d| {
            d.filter_map(|e| e.ok().map(|e| e.path().join(MANIFEST_FILE)))
                .filter(|p| p.is_file())
                .collect()
        })
        .unwrap_or_default();
    manifests.sort();
    let mut names = std::collections::BTreeSet::new();
    for m in &manifests {
        match load_run(m, real.as_ref().map(|r| r.series_len())) {
            Ok(run) => {
                let sizes: Vec<usize> = run.snapshots().iter().map(|s| s.series.rows()).collect();
                println!(
                    "run {}: {} iterations ({}..={}), {}..={} samples per iteration",
                    run.name(),
                    sizes.len(),
                    run.snapshots()[0].iteration,
                    run.snapshots()[sizes.len() - 1].iteration,
                    sizes.iter().min().unwrap(),
                    sizes.iter().max().unwrap(),
                );
                if !names.insert(run.name().to_string()) {
                    problems.push(format!("duplicate run name '{}' in {}", run.name(), m.display()));
                }
            }
            Err(e) => problems.push(e.to_string()),
        }
    }
    if manifests.is_empty() {
        println!("no runs found under {}", runs_dir.display());
    }

    if problems.is_empty() {
        println!("ok");
        Ok(())
    } else {
        for p in &problems {
            println!("problem: {p}");
        }
        Err(CliError::User(format!("{} problem(s) found", problems.len())))
    }
}

fn dtw_pair_count(ws: &Workspace) -> u64 {
    let n = ws.real().len() as u64;
    ws.runs()
        .flat_map(|r| r.snapshots())
        .map(|s| 2 * n * s.series.rows() as u64)
        .sum()
}

fn project_dtw_cost(ws: &Workspace, pairs: u64) {
    let real = ws.real().matrix();
    let sample = 200.min(real.rows() * real.rows());
    let start = Instant::now();
    for i in 0..sample {
        let a = real.row(i % real.rows());
        let b = real.row((i / real.rows() + 1 + i) % real.rows());
        let _ = ganseval_core::dtw_distance(a, b);
    }
    let per_pair = start.elapsed().as_secs_f64() / sample.max(1) as f64;
    println!(
        "dtw: {pairs} pair distances, projected {:.1} s single-threaded",
        per_pair * pairs as f64
    );
}

fn compute(args: &ComputeArgs) -> CliResult {
    if args.bins < 2 {
        return Err(CliError::User("--bins must be at least 2".into()));
    }
    let ws = open_workspace(&args.workspace)?;
    let metrics = args.metric.metrics();
    if metrics.contains(&DistanceMetric::Dtw) {
        let pairs = dtw_pair_count(&ws);
        if pairs > DTW_PROJECTION_PAIRS {
            project_dtw_cost(&ws, pairs);
        }
    }
    let keys = ws.all_keys(&metrics, args.bins);
    let total = Instant::now();
    for key in &keys {
        let start = Instant::now();
        let fetched = ws.get_or_compute(key)?;
        if let Some(e) = fetched.storage_error {
            return Err(CliError::Internal(e.to_string()));
        }
        let status = if fetched.from_cache { "cached" } else { "computed" };
        println!("{status} {key} ({:.1} ms)", start.elapsed().as_secs_f64() * 1e3);
    }
    println!(
        "{} artifacts ready in {} ({} computed, {:.2} s)",
        keys.len(),
        ws.cache_dir().display(),
        ws.compute_count(),
        total.elapsed().as_secs_f64()
    );
    Ok(())
}

fn synth(args: &SynthArgs) -> CliResult {
    let config = SynthConfig {
        seed: args.seed,
        regime: args.regime.into(),
        n_real: args.n_real,
        m_gen: args.m_gen,
        t_len: args.t_len,
        n_iters: args.iters,
        noise_floor: args.noise_floor,
    };
    let real = generate_real(&config)?;
    let mut run = generate_run(&config, &real)?;
    if let Some(name) = &args.name {
        run = ganseval_core::GenerationRun::new(name.clone(), run.snapshots().to_vec())?;
    }
    if run.name().contains(['/', '\\']) || run.name().starts_with('.') {
        return Err(CliError::User(format!("invalid run name '{}'", run.name())));
    }

    let real_path = args.out.join(REAL_FILE);
    if real_path.exists() {
        let existing = load_real(&real_path)?;
        if existing != real {
            return Err(CliError::User(format!(
                "{} already exists with different data; use another --out or the same seed and sizes",
                real_path.display()
            )));
        }
    } else {
        workspace::write_real(&real_path, &real)?;
    }
    let manifest = workspace::write_run(args.out.join(RUNS_DIR).join(run.name()), &run)?;
    println!(
        "wrote {} real series and run '{}' ({} iterations) to {}",
        real.len(),
        run.name(),
        run.snapshots().len(),
        manifest.parent().unwrap_or(&args.out).display()
    );
    Ok(())
}

fn render(artifact: &Artifact, which: ExportArtifact, format: Format) -> Vec<u8> {
    if format == Format::Json {
        let mut v = artifact.to_json();
        v.push(b'\n');
        return v;
    }
    match (which, artifact) {
        (_, Artifact::IterationView(v)) => export::iteration_view_csv(v),
        (ExportArtifact::Histogram, Artifact::Detail(d)) => export::histogram_csv(&d.time_histogram),
        (_, Artifact::Detail(d)) => export::colorfield_csv(&d.colorfield),
        (_, Artifact::RealStats(s)) => export::stats_csv(s),
        (_, Artifact::Order(o)) => export::order_csv(o),
    }
    .into_bytes()
}

fn write_output(out: Option<&Path>, bytes: &[u8]) -> CliResult {
    match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)
                    .map_err(|e| CliError::Internal(format!("{}: {e}", dir.display())))?;
            }
            fs::write(p, bytes).map_err(|e| CliError::Internal(format!("{}: {e}", p.display())))
        }
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::Internal(e.to_string())),
    }
}

fn fetch(ws: &Workspace, key: &ArtifactKey) -> Result<Artifact, CliError> {
    let f = ws.get_or_compute(key)?;
    if let Some(e) = f.storage_error {
        eprintln!("warning: {e}");
    }
    Ok(f.artifact)
}

fn source_of(args: &ExportArgs) -> Result<DataSource, CliError> {
    match (&args.run, args.iteration) {
        (_, None) => Ok(DataSource::Real),
        (Some(run), Some(iteration)) => Ok(DataSource::Iteration {
            run: run.clone(),
            iteration,
        }),
        (None, Some(_)) => Err(CliError::User("--iteration needs --run".into())),
    }
}

fn export_cmd(args: &ExportArgs) -> CliResult {
    let ws = open_workspace(&args.workspace)?;
    let format = args.format;
    match args.artifact {
        ExportArtifact::IterationView => {
            let run = args
                .run
                .clone()
                .ok_or_else(|| CliError::User("--run is required for iteration-view".into()))?;
            let kind: ViewKind = args
                .kind
                .as_deref()
                .ok_or_else(|| CliError::User("--kind innd|onnd is required for iteration-view".into()))?
                .parse()?;
            let metric = match args.metric {
                MetricChoice::Ed => DistanceMetric::Euclidean,
                MetricChoice::Dtw => DistanceMetric::Dtw,
                MetricChoice::Both => {
                    return Err(CliError::User("--metric must be ed or dtw for a single view".into()))
                }
            };
            let a = fetch(&ws, &ArtifactKey::IterationView { run, metric, kind })?;
            write_output(args.out.as_deref(), &render(&a, args.artifact, format))
        }
        ExportArtifact::Colorfield | ExportArtifact::Histogram => {
            let key = ArtifactKey::Detail {
                source: source_of(args)?,
                bins: args.bins,
            };
            let a = fetch(&ws, &key)?;
            write_output(args.out.as_deref(), &render(&a, args.artifact, format))
        }
        ExportArtifact::Stats => {
            let a = fetch(&ws, &ArtifactKey::RealStats)?;
            write_output(args.out.as_deref(), &render(&a, args.artifact, format))
        }
        ExportArtifact::Order => {
            let a = fetch(&ws, &ArtifactKey::Order { source: source_of(args)? })?;
            write_output(args.out.as_deref(), &render(&a, args.artifact, format))
        }
        ExportArtifact::Real => write_output(
            args.out.as_deref(),
            workspace::csv::format_matrix(ws.real().matrix()).as_bytes(),
        ),
        ExportArtifact::Run => {
            let name = args
                .run
                .as_deref()
                .ok_or_else(|| CliError::User("--run is required".into()))?;
            let run = ws
                .run(name)
                .ok_or_else(|| CliError::User(format!("unknown run '{name}'")))?;
            let out = args
                .out
                .as_deref()
                .ok_or_else(|| CliError::User("--out <dir> is required for run export".into()))?;
            workspace::write_run(out, run)?;
            Ok(())
        }
        ExportArtifact::All => export_all(&ws, args),
    }
}

fn export_all(ws: &Workspace, args: &ExportArgs) -> CliResult {
    let out = args
        .out
        .as_deref()
        .ok_or_else(|| CliError::User("--out <dir> is required for --artifact all".into()))?;
    let fmt = args.format;
    let put = |rel: String, a: &Artifact, which: ExportArtifact| {
        write_output(Some(&out.join(rel)), &render(a, which, fmt))
    };

    put(format!("real/stats.{}", fmt.ext()), &fetch(ws, &ArtifactKey::RealStats)?, ExportArtifact::Stats)?;
    let detail = fetch(ws, &ArtifactKey::Detail { source: DataSource::Real, bins: args.bins })?;
    put(format!("real/colorfield.{}", fmt.ext()), &detail, ExportArtifact::Colorfield)?;
    if fmt == Format::Csv {
        put("real/histogram.csv".into(), &detail, ExportArtifact::Histogram)?;
    }

    for run in ws.runs() {
        let name = run.name();
        for metric in args.metric.metrics() {
            for kind in ViewKind::ALL {
                let key = ArtifactKey::IterationView {
                    run: name.to_string(),
                    metric,
                    kind,
                };
                put(
                    format!("{name}/{kind}_{metric}.{}", fmt.ext()),
                    &fetch(ws, &key)?,
                    ExportArtifact::IterationView,
                )?;
            }
        }
        for iteration in run.iterations() {
            let source = DataSource::Iteration {
                run: name.to_string(),
                iteration,
            };
            let detail = fetch(ws, &ArtifactKey::Detail { source, bins: args.bins })?;
            put(
                format!("{name}/iter_{iteration:06}_colorfield.{}", fmt.ext()),
                &detail,
                ExportArtifact::Colorfield,
            )?;
            if fmt == Format::Csv {
                put(
                    format!("{name}/iter_{iteration:06}_histogram.csv"),
                    &detail,
                    ExportArtifact::Histogram,
                )?;
            }
        }
    }
    Ok(())
}

fn serve(args: &ServeArgs) -> CliResult {
    let ws = Arc::new(open_workspace(&args.workspace)?);
    let addr = SocketAddr::new(args.host, args.port);
    let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Internal(e.to_string()))?;
    rt.block_on(service::serve(ws, addr))
        .map_err(|e| CliError::Internal(format!("cannot serve on {addr}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_1() {
        assert_eq!(run_cli(["ganseval", "--frobnicate"]), 1);
        assert_eq!(run_cli(["ganseval", "compute"]), 1);
        assert_eq!(run_cli(["ganseval", "synth", "--regime", "sideways"]), 1);
        assert_eq!(run_cli(["ganseval", "--help"]), 0);
    }

    #[test]
    fn parses_compute_flags() {
        let cli = Cli::try_parse_from(["ganseval", "compute", "ws", "--metric", "dtw", "--bins", "12"]).unwrap();
        match cli.command {
            Command::Compute(a) => {
                assert_eq!(a.metric, MetricChoice::Dtw);
                assert_eq!(a.bins, 12);
            }
            other => panic!("{other:?}"),
        }
    }
}
