use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use medpriv_cli::{cmd_assess, cmd_compare, cmd_evaluate, cmd_protect, CliError, RunConfig};

#[derive(Parser)]
#[command(
    name = "medpriv",
    version,
    about = "Assess, protect and evaluate tabular medical data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Score each attribute's disclosure risk on the raw data.
    Assess {
        #[command(flatten)]
        common: Common,
    },
    /// Apply a protection plan and write the published data.
    Protect {
        #[command(flatten)]
        common: Common,
        /// Preset to run instead of the config's plan.
        #[arg(long)]
        preset: Option<String>,
    },
    /// Measure risk and utility of a published dataset against the raw data.
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Published CSV; defaults to published.csv in the output directory.
        #[arg(long)]
        published: Option<PathBuf>,
    },
    /// Run several presets and tabulate risk reduction against utility.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Comma-separated preset names; defaults to the config list or all presets.
        #[arg(long)]
        preset: Option<String>,
    },
}

fn load(common: &Common) -> Result<(RunConfig, PathBuf), CliError> {
    let cfg = RunConfig::load(&common.config)?;
    let out = common.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    Ok((cfg, out))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Assess { common } => {
            let (cfg, out) = load(&common)?;
            let (_, table) = cmd_assess(&cfg, &out)?;
            print!("{table}");
        }
        Command::Protect { common, preset } => {
            let (cfg, out) = load(&common)?;
            let (_, _, summary) = cmd_protect(&cfg, preset.as_deref(), &out)?;
            print!("{summary}");
        }
        Command::Evaluate { common, published } => {
            let (cfg, out) = load(&common)?;
            let eval = cmd_evaluate(&cfg, published.as_deref(), &out)?;
            print!("{}", eval.summary);
            let failed = eval.failed_rows();
            if !failed.is_empty() {
                let what: Vec<String> = failed
                    .iter()
                    .map(|r| format!("{} / {}", r.variant, r.classifier))
                    .collect();
                return Err(CliError::Degenerate(format!(
                    "could not evaluate {}",
                    what.join(", ")
                )));
            }
        }
        Command::Compare { common, preset } => {
            let (cfg, out) = load(&common)?;
            let (_, summary) = cmd_compare(&cfg, preset.as_deref(), &out)?;
            print!("{summary}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("medpriv: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
