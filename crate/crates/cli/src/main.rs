//! `sbm`: bound-state transition and decoherence dynamics of the ohmic
//! spin-boson model from the command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 solver non-convergence or a
//! failed verification check, 3 precondition violation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;
mod plot;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use commands::Failure;
use config::{Command, Format, GridSpec, RunConfig, Settings};
use output::{Cell, Report};

#[derive(Debug, Parser)]
#[command(
    name = "sbm",
    version,
    about = "Ohmic spin-boson model: variational ground state, bound state, dynamics"
)]
struct Cli {
    /// What to compute; may instead come from the config file.
    #[arg(value_enum)]
    command: Option<Command>,
    /// Bare tunneling Δ in units of ω_c.
    #[arg(long)]
    delta: Option<f64>,
    /// Ohmic coupling α.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    omega_c: Option<f64>,
    /// Spectral exponent; only 1 is supported.
    #[arg(long)]
    s: Option<f64>,
    /// Bias; only 0 is supported.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Final time of the dynamics, in units of 1/ω_c.
    #[arg(long)]
    tmax: Option<f64>,
    /// Time step of the dynamics.
    #[arg(long)]
    dt: Option<f64>,
    /// Relative tolerance of the η iteration and the α_c bisection.
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration cap of the η iteration.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Finite-difference step in α.
    #[arg(long)]
    dalpha: Option<f64>,
    /// α sweep as lo:hi:n.
    #[arg(long)]
    grid_alpha: Option<GridSpec>,
    /// Δ sweep as lo:hi:n.
    #[arg(long)]
    grid_delta: Option<GridSpec>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write a gnuplot script next to the data.
    #[arg(long)]
    emit_plot: bool,
    /// Worker threads for sweeps; defaults to all cores.
    #[arg(long)]
    jobs: Option<usize>,
    /// `key = value` file or a JSON output of an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Cli {
    fn settings(&self) -> Settings {
        Settings {
            command: self.command,
            delta: self.delta,
            alpha: self.alpha,
            omega_c: self.omega_c,
            s: self.s,
            epsilon: self.epsilon,
            tmax: self.tmax,
            dt: self.dt,
            tol: self.tol,
            max_iter: self.max_iter,
            dalpha: self.dalpha,
            grid_alpha: self.grid_alpha,
            grid_delta: self.grid_delta,
            out: self.out.clone(),
            format: self.format,
            emit_plot: self.emit_plot.then_some(true),
            jobs: self.jobs,
        }
    }
}

fn print_verify_table(report: &Report) {
    for t in &report.tables {
        for row in &t.rows {
            if let [Cell::Text(name), Cell::Text(status), Cell::Num(value), Cell::Num(limit)] = row.as_slice() {
                println!("{status:<4}  {name:<44} {value:>14.6e}  (limit {limit:.6e})");
            }
        }
    }
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    let file = match &cli.config {
        Some(path) => Settings::from_file(path).map_err(Failure::usage)?,
        None => Settings::default(),
    };
    let cfg = RunConfig::resolve(file.overlay(cli.settings())).map_err(Failure::usage)?;
    if cfg.emit_plot && cfg.format != Format::Csv {
        return Err(Failure::usage("--emit-plot needs --format csv"));
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.jobs {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| Failure::usage(format!("cannot start worker pool: {e}")))?;
    let report = pool.install(|| commands::run(&cfg))?;

    let io_err = |e: std::io::Error| Failure::usage(format!("cannot write output: {e}"));
    if cfg.command == Command::Verify {
        print_verify_table(&report);
        if cfg.out.is_some() {
            output::emit(&cfg, &report).map_err(io_err)?;
        }
    } else {
        let files = output::emit(&cfg, &report).map_err(io_err)?;
        if cfg.emit_plot {
            plot::write_script(&cfg, &files).map_err(io_err)?;
        }
    }
    let failed = report
        .summary
        .iter()
        .any(|(k, v)| *k == "failed_checks" && *v != Cell::Int(0));
    if failed {
        return Err(Failure {
            code: 2,
            message: "verification failed".into(),
        });
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("sbm: {}", f.message);
            ExitCode::from(f.code as u8)
        }
    }
}
