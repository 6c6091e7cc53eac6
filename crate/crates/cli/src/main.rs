//! `kantorovich`: kernel audits, figure reproduction, convergence tables and
//! classical comparisons from JSON configs.
//!
//! Exit codes: 0 all checks pass, 2 invalid input, 3 audit or inequality
//! failure, 4 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kantorovich::experiments::{
    cmd_audit, cmd_compare_classical, cmd_convergence, cmd_figure, load_config, preset, ExperimentConfig,
    Outcome,
};
use kantorovich::{Error, LuxemburgConvention, Result};

#[derive(Parser)]
#[command(name = "kantorovich", version, about = "Kantorovich-type operator experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the kernel-condition audits on the config's w list.
    AuditKernel(Common),
    /// Tabulate f and S_w f on a grid; write CSV and SVG.
    Figure {
        #[command(flatten)]
        common: Common,
        /// Bundled figure preset, used instead of --config.
        #[arg(long, value_enum)]
        preset: Option<Preset>,
    },
    /// Error metrics over the w list with theorem-inequality checks.
    Convergence(Common),
    /// Gap between a Kantorovich operator and its classical counterpart.
    CompareClassical(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for CSV, SVG and report files.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Overrides the config's evaluation tolerance (the χ2 tolerance for audit-kernel).
    #[arg(long)]
    tolerance: Option<f64>,
    /// Luxemburg norm convention.
    #[arg(long, value_enum)]
    luxemburg: Option<Convention>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Fig3,
    Fig4,
    Fig5,
}

#[derive(Clone, Copy, ValueEnum)]
enum Convention {
    Standard,
    Paper,
}

fn resolve(common: &Common, preset_name: Option<Preset>, audit: bool) -> Result<ExperimentConfig> {
    let mut cfg = match (&common.config, preset_name) {
        (Some(path), None) => load_config(path)?,
        (None, Some(p)) => preset(match p {
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
        })?,
        (Some(_), Some(_)) => {
            return Err(Error::InvalidInput("give either --config or --preset, not both".into()))
        }
        (None, None) => return Err(Error::InvalidInput("--config is required".into())),
    };
    if let Some(t) = common.tolerance {
        if audit {
            cfg.audit_tolerance = Some(t);
        } else {
            cfg.tolerance = t;
        }
    }
    if let Some(c) = common.luxemburg {
        cfg.luxemburg = match c {
            Convention::Standard => LuxemburgConvention::Standard,
            Convention::Paper => LuxemburgConvention::PaperVariant,
        };
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<Outcome> {
    let (common, outcome) = match &cli.command {
        Command::AuditKernel(c) => (c, cmd_audit(&resolve(c, None, true)?)?),
        Command::Figure { common, preset } => (common, cmd_figure(&resolve(common, *preset, false)?)?),
        Command::Convergence(c) => (c, cmd_convergence(&resolve(c, None, false)?)?),
        Command::CompareClassical(c) => (c, cmd_compare_classical(&resolve(c, None, false)?)?),
    };
    outcome.write(&common.out_dir)?;
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    match run(&cli) {
        Ok(outcome) => {
            print!("{}", outcome.report.summary());
            eprintln!("elapsed {:.2} s", start.elapsed().as_secs_f64());
            if outcome.report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
