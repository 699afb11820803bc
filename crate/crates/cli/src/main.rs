//! `exceptional`: sweeps, EP searches and monodromy loops for the two-level
//! and coupled-oscillator models, written as CSV or JSON.
//!
//! Exit codes: 0 success, 2 configuration, 3 numerical / tracking failure,
//! 4 no convergence, 5 degenerate input.

mod commands;
mod config;
mod error;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{parse_complex, Format, Model, RunConfig, Scalar};
use error::CliError;
use output::Output;

#[derive(Debug, Parser)]
#[command(
    name = "exceptional",
    version,
    about = "Exceptional points of two-level and coupled-oscillator models"
)]
struct Cli {
    /// JSON run configuration; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Defaults to csv for sweeps and json for searches and loops.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Model parameter, e.g. `--param phi1=-2` (degrees) or `--param eps1=1+0.5i`.
    #[arg(long = "param", global = true, value_name = "NAME=VALUE", allow_hyphen_values = true)]
    params: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// 2x2 model diag(eps1, eps2) + lambda S diag(omega1, omega2) S^-1.
    Twolevel {
        #[command(subcommand)]
        cmd: TwoLevelCmd,
    },
    /// Two coupled damped oscillators.
    Osc {
        #[command(subcommand)]
        cmd: OscCmd,
    },
    /// Follow the spectrum once around a circle in one parameter.
    Loop(LoopArgs),
}

#[derive(Debug, Subcommand)]
enum TwoLevelCmd {
    /// Eigenvalues along a real lambda range.
    Sweep(RangeArgs),
    /// Closed-form EPs with eigenvectors and defect checks.
    Ep,
}

#[derive(Debug, Subcommand)]
enum OscCmd {
    /// Branch-tracked frequencies along f or g.
    Sweep(OscSweepArgs),
    /// Driven stationary response along a real frequency range.
    Response(ResponseArgs),
    /// Locate an EP at real f and g.
    FindEp(FindEpArgs),
}

#[derive(Debug, Args)]
struct RangeArgs {
    #[arg(long, allow_hyphen_values = true)]
    from: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    to: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Debug, Args)]
struct OscSweepArgs {
    /// f or g.
    #[arg(long)]
    variable: Option<String>,
    #[command(flatten)]
    range: RangeArgs,
}

#[derive(Debug, Args)]
struct ResponseArgs {
    /// Drive on the first oscillator, "a+bi".
    #[arg(long, allow_hyphen_values = true)]
    c1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    c2: Option<String>,
    #[command(flatten)]
    range: RangeArgs,
}

#[derive(Debug, Args)]
struct FindEpArgs {
    #[arg(long, allow_hyphen_values = true)]
    seed_f: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    seed_g: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    g_from: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    g_to: Option<f64>,
    #[arg(long)]
    g_samples: Option<usize>,
}

#[derive(Debug, Args)]
struct LoopArgs {
    #[arg(long, value_enum)]
    model: Option<Model>,
    /// Loop parameter: lambda (two-level), f or g (oscillator).
    #[arg(long)]
    variable: Option<String>,
    /// Circle center, "a+bi".
    #[arg(long, allow_hyphen_values = true)]
    center: Option<String>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
}

fn complex_flag(name: &str, v: &Option<String>) -> Result<Option<Scalar>, CliError> {
    v.as_deref()
        .map(|s| {
            parse_complex(s)
                .map(Scalar)
                .map_err(|e| CliError::Config(format!("--{name}: {e}")))
        })
        .transpose()
}

fn apply_range(dst: &mut config::SweepConfig, r: &RangeArgs) {
    dst.from = r.from.or(dst.from);
    dst.to = r.to.or(dst.to);
    dst.samples = r.samples.or(dst.samples);
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.set_params(&cli.params)?;

    let out = match &cli.command {
        Command::Twolevel { cmd } => {
            cfg.require_model(Model::TwoLevel)?;
            match cmd {
                TwoLevelCmd::Sweep(r) => {
                    apply_range(&mut cfg.sweep, r);
                    commands::twolevel_sweep(&cfg)?
                }
                TwoLevelCmd::Ep => commands::twolevel_ep(&cfg)?,
            }
        }
        Command::Osc { cmd } => {
            cfg.require_model(Model::Oscillator)?;
            match cmd {
                OscCmd::Sweep(a) => {
                    apply_range(&mut cfg.sweep, &a.range);
                    cfg.sweep.variable = a.variable.clone().or(cfg.sweep.variable.take());
                    commands::osc_sweep(&cfg)?
                }
                OscCmd::Response(a) => {
                    let d = &mut cfg.drive;
                    d.c1 = complex_flag("c1", &a.c1)?.or(d.c1);
                    d.c2 = complex_flag("c2", &a.c2)?.or(d.c2);
                    d.from = a.range.from.or(d.from);
                    d.to = a.range.to.or(d.to);
                    d.samples = a.range.samples.or(d.samples);
                    commands::osc_response(&cfg)?
                }
                OscCmd::FindEp(a) => {
                    let s = &mut cfg.search;
                    s.seed_f = a.seed_f.or(s.seed_f);
                    s.seed_g = a.seed_g.or(s.seed_g);
                    s.g_from = a.g_from.or(s.g_from);
                    s.g_to = a.g_to.or(s.g_to);
                    s.g_samples = a.g_samples.or(s.g_samples);
                    commands::osc_find_ep(&cfg)?
                }
            }
        }
        Command::Loop(a) => {
            if let Some(m) = a.model.or(cfg.model) {
                cfg.require_model(m)?;
            }
            let l = &mut cfg.loop_;
            l.param = a.variable.clone().or(l.param.take());
            l.center = complex_flag("center", &a.center)?.or(l.center);
            l.radius = a.radius.or(l.radius);
            l.steps = a.steps.or(l.steps);
            commands::run_loop(&cfg)?
        }
    };

    let format = cli.format.or(cfg.output_format).unwrap_or(match out {
        Output::Table(_) => Format::Csv,
        Output::Record(_) => Format::Json,
    });
    let text = output::render(&out, format)?;
    match cli.out.or(cfg.output_path) {
        Some(path) => {
            std::fs::write(&path, text).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
        }
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Numerical(format!("writing output: {e}"))),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
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
