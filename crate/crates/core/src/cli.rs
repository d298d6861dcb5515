//! Command-line front end shared by the `monisum` binary.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::fmt::sig9;
use crate::evaluation::{correlation_cdf, std_baseline, StdMode};
use crate::pipeline::{
    monitor_mode, run, sweep, write_correlation_cdf, write_monitor, write_run, write_sweep, ExperimentConfig,
    MonitorSelection, SweepAxis,
};
use crate::trace::{
    generate_synthetic, load_csv, write_csv, CsvSchema, Normalization, SignalShape, SyntheticSpec, TraceDataset,
};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "MONISUM_THREADS";

#[derive(Debug, Parser)]
#[command(name = "monisum", version, about = "Budgeted telemetry, dynamic clustering and forecasting simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic grouped trace as CSV.
    Gen(GenArgs),
    /// Run one experiment and write its artifacts.
    Run(RunArgs),
    /// Run one experiment per value of a single parameter.
    Sweep(SweepArgs),
    /// Train/test monitor-selection experiment.
    Monitor(MonitorArgs),
    /// Pairwise correlation CDF of one resource.
    Corr(CorrArgs),
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long)]
    nodes: usize,
    #[arg(long)]
    steps: usize,
    #[arg(long, default_value_t = 3)]
    groups: usize,
    #[arg(long, default_value_t = 1)]
    resources: usize,
    #[arg(long, default_value_t = 0.0)]
    switch_probability: f64,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Frequent large level jumps.
    #[arg(long)]
    bursty: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the latent group of every node at every step.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NormalizeArg {
    Strict,
    Clamp,
    MaxDivide,
}

#[derive(Debug, Args)]
struct TraceArgs {
    /// Long-form CSV with `t`, `node` and one column per resource.
    #[arg(long)]
    trace: PathBuf,
    #[arg(long, value_enum, default_value = "strict")]
    normalize: NormalizeArg,
    /// Comma-separated resource columns to keep, in order.
    #[arg(long, value_delimiter = ',')]
    columns: Option<Vec<String>>,
}

impl TraceArgs {
    fn load(&self) -> Result<TraceDataset> {
        let schema = CsvSchema {
            resource_columns: self.columns.clone(),
            normalization: match self.normalize {
                NormalizeArg::Strict => Normalization::Strict,
                NormalizeArg::Clamp => Normalization::Clamp,
                NormalizeArg::MaxDivide => Normalization::MaxDivide { pre_clamp: true },
            },
            ..CsvSchema::default()
        };
        load_csv(&self.trace, &schema)
    }
}

/// Flag overrides; each beats the config file.
#[derive(Debug, Default, Args)]
struct Overrides {
    /// Key-value config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    budget: Option<f64>,
    #[arg(long)]
    v0: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    mprime: Option<usize>,
    /// Comma-separated, e.g. `0,1,5,10`.
    #[arg(long)]
    horizons: Option<String>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    cluster_mode: Option<String>,
    #[arg(long)]
    similarity: Option<String>,
    #[arg(long)]
    forecaster: Option<String>,
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    winit: Option<usize>,
    #[arg(long)]
    wretrain: Option<usize>,
    #[arg(long)]
    transmitter: Option<String>,
    #[arg(long)]
    clustering: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    include_warmup: bool,
    #[arg(long)]
    write_assignments: bool,
    #[arg(long)]
    write_forecasts: bool,
}

fn text<T: ToString>(v: &Option<T>) -> Option<String> {
    v.as_ref().map(ToString::to_string)
}

impl Overrides {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        let pairs: [(&str, Option<String>); 17] = [
            ("budget", text(&self.budget)),
            ("v0", text(&self.v0)),
            ("gamma", text(&self.gamma)),
            ("k", text(&self.k)),
            ("m", text(&self.m)),
            ("m_prime", text(&self.mprime)),
            ("horizons", self.horizons.clone()),
            ("window", text(&self.window)),
            ("cluster_mode", self.cluster_mode.clone()),
            ("similarity", self.similarity.clone()),
            ("forecaster", self.forecaster.clone()),
            ("order", text(&self.order)),
            ("w_init", text(&self.winit)),
            ("w_retrain", text(&self.wretrain)),
            ("transmitter", self.transmitter.clone()),
            ("clustering", self.clustering.clone()),
            ("seed", text(&self.seed)),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                c.set(key, &v)?;
            }
        }
        c.include_warmup |= self.include_warmup;
        c.write_assignments |= self.write_assignments;
        c.write_forecasts |= self.write_forecasts;
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    trace: TraceArgs,
    #[command(flatten)]
    overrides: Overrides,
    /// Output directory.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    trace: TraceArgs,
    #[command(flatten)]
    overrides: Overrides,
    /// One of B, K, h, M, M'.
    #[arg(long)]
    axis: String,
    /// Comma-separated axis values.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    /// Output CSV.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct MonitorArgs {
    #[command(flatten)]
    trace: TraceArgs,
    #[command(flatten)]
    overrides: Overrides,
    #[arg(long, default_value_t = 500)]
    train_len: usize,
    #[arg(long, default_value_t = 500)]
    test_len: usize,
    /// `proposed` or `random`.
    #[arg(long, default_value = "proposed")]
    selection: String,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct CorrArgs {
    #[command(flatten)]
    trace: TraceArgs,
    /// Resource column name; defaults to the first.
    #[arg(long)]
    resource: Option<String>,
    /// Also print the standard-deviation bound (`pooled` or `per-node`).
    #[arg(long)]
    std: Option<String>,
    #[arg(short, long)]
    output: PathBuf,
}

fn resource_index(ds: &TraceDataset, name: Option<&str>) -> Result<usize> {
    match name {
        None => Ok(0),
        Some(n) => ds
            .resource_index(n)
            .ok_or_else(|| Error::Config(format!("trace has no resource `{n}`"))),
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")))?;
    // a pool may already exist when dispatch runs twice in one process
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn execute(command: Command) -> Result<()> {
    configure_threads()?;
    match command {
        Command::Gen(a) => {
            let spec = SyntheticSpec {
                n_resources: a.resources,
                switch_probability: a.switch_probability,
                noise_std: a.noise,
                shape: if a.bursty { SignalShape::bursty() } else { SignalShape::default() },
                ..SyntheticSpec::new(a.nodes, a.steps, a.groups, a.seed)
            };
            let trace = generate_synthetic(&spec)?;
            write_csv(&trace.dataset, &a.output)?;
            if let Some(path) = a.truth {
                let mut text = String::from("t,node,group\n");
                for (t, groups) in trace.ground_truth.iter().enumerate() {
                    for (i, g) in groups.iter().enumerate() {
                        text.push_str(&format!("{t},{i},{g}\n"));
                    }
                }
                std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
            }
        }
        Command::Run(a) => {
            let config = a.overrides.resolve()?;
            let ds = a.trace.load()?;
            let out = run(&config, &ds)?;
            write_run(&out, &a.output)?;
            for (name, v) in &out.aggregate.objective {
                println!("objective.{name} = {}", sig9(*v));
            }
        }
        Command::Sweep(a) => {
            let config = a.overrides.resolve()?;
            let axis: SweepAxis = a.axis.parse()?;
            let ds = a.trace.load()?;
            let points = sweep(&config, &ds, axis, &a.values)?;
            write_sweep(&points, axis, &a.output)?;
        }
        Command::Monitor(a) => {
            let config = a.overrides.resolve()?;
            let selection: MonitorSelection = a.selection.parse()?;
            let ds = a.trace.load()?;
            let report = monitor_mode(&config, &ds, a.train_len, a.test_len, selection)?;
            write_monitor(&report, &a.output)?;
            for (name, v) in &report.rmse {
                println!("test_rmse.{name} = {}", sig9(*v));
            }
        }
        Command::Corr(a) => {
            let ds = a.trace.load()?;
            let r = resource_index(&ds, a.resource.as_deref())?;
            let cdf = correlation_cdf(&ds, r)?;
            write_correlation_cdf(&cdf, &a.output)?;
            println!("excluded_constant = {}", cdf.excluded_constant);
            if let Some(mode) = a.std {
                let mode: StdMode = mode.parse()?;
                println!("std_baseline = {}", sig9(std_baseline(&ds, r, mode)?));
            }
        }
    }
    Ok(())
}

/// Parses `argv` (program name first) and runs the subcommand.
///
/// Returns 0 on success, 2 on usage errors and 1 on runtime errors; errors
/// print one `error[kind]: message` line on stderr.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                print!("{e}");
                return 0;
            }
            _ => {
                let msg = e.to_string();
                let first = msg.lines().next().unwrap_or("usage error");
                let first = first.strip_prefix("error: ").unwrap_or(first);
                eprintln!("error[usage]: {first}");
                return 2;
            }
        },
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            let code = if matches!(e, Error::Config(_)) { 2 } else { 1 };
            eprintln!("error[{}]: {}", e.kind(), e.to_string().replace('\n', " "));
            code
        }
    }
}
