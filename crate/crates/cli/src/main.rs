//! `piezosv <derive|solve|verify|sweep> --config <path> [--out-dir <path>]`
//!
//! Exit status: 0 success, 1 configuration error, 2 degenerate material,
//! 3 solve failure or non-finite output, 4 verification threshold exceeded.

mod config;
mod report;
mod run;

use clap::{Parser, Subcommand};
use config::RunConfig;
use piezosv::Execution;
use report::Report;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("degenerate material: {0}")]
    Degenerate(String),
    #[error("solve failed: {0}")]
    Solve(String),
    #[error("io: {0}")]
    Io(String),
    #[error("verification threshold exceeded: {0}")]
    Threshold(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Degenerate(_) => 2,
            CliError::Solve(_) => 3,
            CliError::Threshold(_) => 4,
        }
    }
}

impl From<piezosv::Error> for CliError {
    fn from(e: piezosv::Error) -> Self {
        use piezosv::Error as E;
        match e {
            E::DegenerateMaterial(_) => CliError::Degenerate(e.to_string()),
            E::InvalidGeometry(_) | E::InvalidInput(_) | E::InvalidTrace(_) | E::QuadratureOrderUnavailable => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Solve(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "piezosv", version, about = "Saint-Venant/Almansi solver for piezoelectric beams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, clap::Args)]
struct Common {
    /// Run configuration (INI).
    #[arg(long)]
    config: PathBuf,
    /// Directory for output files; relative output paths resolve here.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the derived moduli.
    Derive(Common),
    /// Solve the configured case and write fields and report.
    Solve(Common),
    /// Solve, then append the residual report.
    Verify(Common),
    /// Repeat the solve over the `[sweep]` parameter values.
    Sweep(Common),
}

fn out_path(dir: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        dir.join(p)
    }
}

fn write_report(path: &Path, r: &Report) -> Result<(), CliError> {
    let bad = r.non_finite();
    if !bad.is_empty() {
        // Still write it so the failure can be inspected.
        std::fs::write(path, r.render()).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        return Err(CliError::Solve(format!("non-finite report entries: {}", bad.join(", "))));
    }
    std::fs::write(path, r.render()).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn prepare(common: &Common) -> Result<RunConfig, CliError> {
    let cfg = RunConfig::load(&common.config)?;
    std::fs::create_dir_all(&common.out_dir)
        .map_err(|e| CliError::Io(format!("{}: {e}", common.out_dir.display())))?;
    Ok(cfg)
}

fn solve_and_write(common: &Common, verify: bool) -> Result<(), CliError> {
    let cfg = prepare(common)?;
    let solved = run::solve(&cfg)?;
    if solved.solution.has_nan() {
        return Err(CliError::Solve("solution contains NaN".into()));
    }
    run::write_fields(&out_path(&common.out_dir, &cfg.output.fields), &cfg, &solved.solution, Execution::Parallel)?;
    let mut report = run::solve_report(&solved);
    let mut failures = Vec::new();
    if verify {
        let rr = run::residual_report(&cfg, &solved, Execution::Parallel)?;
        run::add_residuals(&mut report, &rr);
        if let Some(t) = cfg.verify.threshold {
            failures = run::threshold_failures(&rr, t);
        }
    }
    write_report(&out_path(&common.out_dir, &cfg.output.report), &report)?;
    if !failures.is_empty() {
        return Err(CliError::Threshold(failures.join("; ")));
    }
    Ok(())
}

const SWEEP_COLUMNS: [&str; 11] = [
    "v2_x",
    "v2_y",
    "b2",
    "axial_force",
    "d_flux",
    "potential_difference",
    "shear_x",
    "shear_y",
    "max_u_pi0",
    "max_u_pi1",
    "phi1_tilde0",
];

fn sweep_row(cfg: &RunConfig) -> Result<Vec<f64>, CliError> {
    let s = run::solve(cfg)?;
    if s.solution.has_nan() {
        return Err(CliError::Solve("solution contains NaN".into()));
    }
    let c = &s.solution.constants;
    let r = &s.resultants;
    Ok(vec![
        c.v2.x,
        c.v2.y,
        c.b2,
        r.axial_force,
        r.d_flux,
        r.potential_difference,
        r.shear.x,
        r.shear.y,
        s.solution.u_pi0.max_norm(),
        s.solution.u_pi1.max_norm(),
        c.phi1_tilde0,
    ])
}

/// Worker count from `PIEZOSV_THREADS`, if set to a positive integer.
fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var("PIEZOSV_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config(format!("PIEZOSV_THREADS must be a positive integer, got `{v}`"))),
        },
    }
}

#[cfg(feature = "parallel")]
fn map_entries(configs: &[RunConfig]) -> Result<Vec<Result<Vec<f64>, CliError>>, CliError> {
    use rayon::prelude::*;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap()? {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(|| configs.par_iter().map(sweep_row).collect()))
}

#[cfg(not(feature = "parallel"))]
fn map_entries(configs: &[RunConfig]) -> Result<Vec<Result<Vec<f64>, CliError>>, CliError> {
    thread_cap()?;
    Ok(configs.iter().map(sweep_row).collect())
}

fn sweep(common: &Common) -> Result<(), CliError> {
    let cfg = prepare(common)?;
    let spec = cfg.sweep.clone().ok_or_else(|| CliError::Config("sweep needs a [sweep] section".into()))?;
    let configs =
        spec.values.iter().map(|v| cfg.with_parameter(&spec.parameter, *v)).collect::<Result<Vec<_>, _>>()?;
    let rows = map_entries(&configs)?.into_iter().collect::<Result<Vec<_>, _>>()?;
    let path = out_path(&common.out_dir, &spec.report);
    let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(&path).map_err(io)?;
    let mut header = vec![spec.parameter.as_str()];
    header.extend(SWEEP_COLUMNS);
    w.write_record(&header).map_err(io)?;
    for (v, row) in spec.values.iter().zip(&rows) {
        if row.iter().any(|x| !x.is_finite()) {
            return Err(CliError::Solve(format!("non-finite sweep output at {} = {v}", spec.parameter)));
        }
        w.write_record(std::iter::once(v).chain(row).map(|x| format!("{x:.16e}"))).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Derive(common) => {
            let m = RunConfig::load_material(&common.config)?;
            print!("{}", run::derive(&m)?.render());
            Ok(())
        }
        Command::Solve(common) => solve_and_write(&common, false),
        Command::Verify(common) => solve_and_write(&common, true),
        Command::Sweep(common) => sweep(&common),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("piezosv: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
