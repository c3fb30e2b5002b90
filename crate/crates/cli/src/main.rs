//! `qrm-sideband`: analytic predictions, time-domain traces, chevron sweeps
//! and model comparison tables, written as CSV and JSON.

mod commands;
mod config;
mod figures;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qrm_sideband::analytic::SidebandKind;
use qrm_sideband::sweep::{DriveFamily, ScanVariable, DEFAULT_F_DC_OFFSET};

use config::{Format, RunConfig, ScanConfig};

/// Environment variable naming the default output directory.
const OUT_ENV: &str = "QRM_SIDEBAND_OUT";
const DEFAULT_OUT: &str = "qrm-sideband-out";

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or arguments; nothing was computed.
    Config(String),
    Compute(qrm_sideband::Error),
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Compute(e) => write!(f, "computation failed: {e}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<qrm_sideband::Error> for CliError {
    fn from(e: qrm_sideband::Error) -> Self {
        CliError::Compute(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Compute(_) | CliError::Io(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "qrm-sideband", version, about = "Two-photon sideband transitions in the driven quantum Rabi model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic matching frequency and sideband rates (Full and RWA).
    Predict(RunArgs),
    /// Endpoint trace versus pulse length at one drive frequency.
    Evolve(RunArgs),
    /// Chevron search and rate fit, or a comparison table when a scan is set.
    Sweep(RunArgs),
    /// Canned figure configurations.
    Reproduce(ReproduceArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration; flags override its values.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[command(flatten)]
    set: Overrides,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct CommonArgs {
    /// Output directory (default: $QRM_SIDEBAND_OUT, then ./qrm-sideband-out).
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Output formats.
    #[arg(long, value_enum, value_delimiter = ',')]
    format: Vec<Format>,
    /// Worker threads for sweeps.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args, Default)]
struct Overrides {
    #[arg(long, value_parser = parse_kind)]
    kind: Option<SidebandKind>,
    #[arg(long)]
    f_q: Option<f64>,
    #[arg(long)]
    f_c: Option<f64>,
    #[arg(long)]
    g: Option<f64>,
    /// Monochromatic drive amplitude, GHz.
    #[arg(long, conflicts_with = "eta")]
    eps: Option<f64>,
    /// Bi-chromatic drive strength parameter.
    #[arg(long)]
    eta: Option<f64>,
    /// Cavity-friendly tone offset from f_c, GHz.
    #[arg(long, allow_negative_numbers = true)]
    f_dc_offset: Option<f64>,
    /// Scan variable (eps, eta or g); needs --values.
    #[arg(long, value_parser = parse_scan_var, requires = "values")]
    scan: Option<ScanVariable>,
    #[arg(long, value_delimiter = ',')]
    values: Vec<f64>,
    #[arg(long)]
    n_fock: Option<usize>,
    /// Fixed RK4 step, ns.
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    edge_len: Option<f64>,
    #[arg(long)]
    n_grid: Option<usize>,
    /// First sweep window half-width, GHz.
    #[arg(long)]
    half_window: Option<f64>,
    #[arg(long)]
    no_refine: bool,
    /// Drive frequency for `evolve`, GHz.
    #[arg(long)]
    f_d: Option<f64>,
    /// Longest flat-top length for `evolve`, ns.
    #[arg(long)]
    max_len: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// Also write the time-resolved trajectory (`evolve`).
    #[arg(long)]
    dense: bool,
}

#[derive(Args)]
struct ReproduceArgs {
    /// fig3a..fig3d, fig4a..fig4d, fig5a..fig5d (or fig3/fig4/fig5 for all panels), fig6, fig7, fig8, fig9 or fig10.
    target: String,
    /// Skip the numerical columns of comparison tables.
    #[arg(long)]
    analytic_only: bool,
    #[command(flatten)]
    common: CommonArgs,
}

fn parse_kind(s: &str) -> Result<SidebandKind, String> {
    match s {
        "red" => Ok(SidebandKind::Red),
        "blue" => Ok(SidebandKind::Blue),
        _ => Err(format!("expected red or blue, got {s}")),
    }
}

fn parse_scan_var(s: &str) -> Result<ScanVariable, String> {
    match s {
        "eps" => Ok(ScanVariable::Eps),
        "eta" => Ok(ScanVariable::Eta),
        "g" => Ok(ScanVariable::G),
        _ => Err(format!("expected eps, eta or g, got {s}")),
    }
}

impl Overrides {
    fn apply(&self, c: &mut RunConfig) {
        if let Some(k) = self.kind {
            c.kind = k;
        }
        let sys = &mut c.system;
        self.f_q.inspect(|&v| sys.f_q = v);
        self.f_c.inspect(|&v| sys.f_c = v);
        self.g.inspect(|&v| sys.g = v);
        if let Some(eps) = self.eps {
            c.drive = DriveFamily::Mono { eps };
        }
        if self.eta.is_some() || self.f_dc_offset.is_some() {
            let (eta0, off0) = match c.drive {
                DriveFamily::Bi { eta, f_dc_offset } => (eta, f_dc_offset),
                DriveFamily::Mono { .. } => (1.0, DEFAULT_F_DC_OFFSET),
            };
            c.drive = DriveFamily::Bi {
                eta: self.eta.unwrap_or(eta0),
                f_dc_offset: self.f_dc_offset.unwrap_or(off0),
            };
        }
        if let Some(variable) = self.scan {
            c.scan = Some(ScanConfig {
                variable,
                values: self.values.clone(),
            });
        } else if !self.values.is_empty() {
            if let Some(s) = c.scan.as_mut() {
                s.values = self.values.clone();
            }
        }
        let sim = &mut c.simulation;
        self.n_fock.inspect(|&v| sim.n_fock = v);
        if self.dt.is_some() {
            sim.dt = self.dt;
        }
        self.edge_len.inspect(|&v| sim.edge_len = v);
        let sw = &mut c.sweep;
        self.n_grid.inspect(|&v| sw.n_grid = v);
        if self.half_window.is_some() {
            sw.half_window = self.half_window;
        }
        if self.no_refine {
            sw.refine = false;
        }
        let ev = &mut c.evolve;
        if self.f_d.is_some() {
            ev.f_d = self.f_d;
        }
        if self.max_len.is_some() {
            ev.max_len = self.max_len;
        }
        self.points.inspect(|&v| ev.points = v);
        ev.dense |= self.dense;
    }
}

impl CommonArgs {
    fn apply(&self, c: &mut RunConfig) {
        if self.out.is_some() {
            c.output.directory = self.out.clone();
        }
        if !self.format.is_empty() {
            c.output.formats = self.format.clone();
        }
    }

    fn init_workers(&self) -> Result<(), CliError> {
        match self.workers {
            Some(0) => Err(CliError::Config("--workers: must be at least 1".into())),
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::Config(format!("--workers: {e}"))),
            None => Ok(()),
        }
    }
}

fn out_dir(c: &RunConfig) -> PathBuf {
    c.output
        .directory
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn resolve(args: &RunArgs) -> Result<RunConfig, CliError> {
    let mut c = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    args.set.apply(&mut c);
    args.common.apply(&mut c);
    c.validate()?;
    Ok(c)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Predict(ref a) => single(a, |c, s| commands::predict(c, s, "predict")),
        Command::Evolve(ref a) => single(a, |c, s| commands::evolve(c, s, "evolve")),
        Command::Sweep(ref a) => single(a, |c, s| commands::sweep(c, s, "sweep", false)),
        Command::Reproduce(ref a) => reproduce(a),
    };
    match result {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("qrm-sideband: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

type Workflow = fn(&RunConfig, &mut output::Sink) -> Result<(), CliError>;

fn single(args: &RunArgs, workflow: Workflow) -> Result<Vec<PathBuf>, CliError> {
    let config = resolve(args)?;
    args.common.init_workers()?;
    let dir = out_dir(&config);
    let mut sink = output::Sink::new(&dir, &config)?;
    workflow(&config, &mut sink)?;
    Ok(sink.written)
}

fn reproduce(args: &ReproduceArgs) -> Result<Vec<PathBuf>, CliError> {
    let panels = figures::panels(&args.target)?;
    args.common.init_workers()?;
    let mut written = Vec::new();
    for panel in panels {
        let mut config = panel.config.clone();
        args.common.apply(&mut config);
        config.validate()?;
        let mut sink = output::Sink::new(&out_dir(&config), &config)?;
        figures::run_panel(&panel, args.analytic_only, &config, &mut sink)?;
        written.extend(sink.written);
    }
    Ok(written)
}
