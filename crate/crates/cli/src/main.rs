use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gfw::config::RunConfig;
use gfw::operator::Rational;
use gfw::tolerances::Tolerances;
use gfw::Error;

mod commands;
mod output;

use output::{Check, Report};

/// Scalar particles in inertial and gravitational fields: Hamiltonians,
/// spectra, conformal checks and classical orbits.
#[derive(Debug, Parser)]
#[command(name = "gfw", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct Common {
    /// Run configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Curvature coupling as `p/q`.
    #[arg(long, global = true, value_name = "P/Q")]
    lambda: Option<Rational>,
    #[arg(long, global = true, value_name = "X")]
    mass: Option<f64>,
    /// Feshbach-Villars parameter.
    #[arg(long = "N", global = true, value_name = "X")]
    n_param: Option<f64>,
    /// Overrides the number of radial (or per-axis) grid points.
    #[arg(long, global = true, value_name = "N")]
    grid_n: Option<usize>,
    /// CSV output; standard output when absent. Relative paths are placed
    /// under $GFW_OUT_DIR when it is set.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Tolerance override, repeatable.
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE")]
    tol: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ricci scalar at sampled points.
    Curvature,
    /// Lowest Foldy-Wouthuysen energies.
    FwSpectrum,
    /// Commutator defect and the gap between exact and approximate forms.
    FwExactness,
    /// Spectral change under the conformal factor `O`, with refinement.
    ConformalCheck,
    /// Physical spectrum for several values of `N`.
    NIndependence,
    /// Packet velocity and force against the classical values.
    EomPacket,
    /// Classical trajectory.
    Orbit,
    /// Hamilton's equations against finite differences.
    EomCheck,
    /// The full acceptance suite.
    VerifyAll {
        /// Run a single criterion.
        #[arg(long, value_name = "ID")]
        only: Option<usize>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Syntax { .. } | Error::UnboundParameter(_) | Error::Family(_) => 2,
        _ => 3,
    }
}

fn tolerances(common: &Common, base: Tolerances) -> gfw::Result<Tolerances> {
    let mut tol = base;
    for t in &common.tol {
        tol.apply(t)?;
    }
    Ok(tol)
}

fn load(common: &Common) -> gfw::Result<RunConfig> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("this command needs --config PATH".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(l) = common.lambda {
        cfg.coupling.lambda = l;
    }
    if let Some(m) = common.mass {
        cfg.coupling.mass = m;
    }
    if let Some(n) = common.n_param {
        cfg.coupling.n_param = n;
    }
    cfg.coupling.validate()?;
    cfg.tolerances = tolerances(common, cfg.tolerances.clone())?;
    Ok(cfg)
}

fn out_path(common: &Common) -> Option<PathBuf> {
    let out = common.out.clone()?;
    match std::env::var_os("GFW_OUT_DIR") {
        Some(dir) if out.is_relative() => Some(PathBuf::from(dir).join(out)),
        _ => Some(out),
    }
}

fn run(cli: &Cli) -> gfw::Result<Report> {
    let common = &cli.common;
    if let Command::VerifyAll { only } = cli.command {
        let base = match &common.config {
            Some(_) => load(common)?.tolerances,
            None => tolerances(common, Tolerances::default())?,
        };
        return commands::verify_all(&base, only);
    }
    let cfg = load(common)?;
    let n = common.grid_n;
    match cli.command {
        Command::Curvature => commands::curvature(&cfg),
        Command::FwSpectrum => commands::fw_spectrum(&cfg, n),
        Command::FwExactness => commands::fw_exactness(&cfg, n),
        Command::ConformalCheck => commands::conformal_check(&cfg, n),
        Command::NIndependence => commands::n_independence(&cfg, n),
        Command::EomPacket => commands::eom_packet(&cfg, n),
        Command::Orbit => commands::orbit(&cfg),
        Command::EomCheck => commands::eom_check(&cfg),
        Command::VerifyAll { .. } => unreachable!(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("gfw: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    if let Err(e) = report.table.write(out_path(&cli.common).as_deref()) {
        eprintln!("gfw: {e}");
        return ExitCode::from(2);
    }
    for line in &report.notes {
        eprintln!("{line}");
    }
    for c in &report.checks {
        eprintln!("{c}");
    }
    if report.checks.iter().all(Check::ok) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
