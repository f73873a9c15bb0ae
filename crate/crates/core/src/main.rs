use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, ValueEnum};
use qdisk::cli::{run_suite, RunConfig, Suite};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Validate,
    Invert,
    Bounds,
    Classical,
    Kernels,
    Sweep,
}

impl From<Command> for Suite {
    fn from(c: Command) -> Self {
        match c {
            Command::Validate => Suite::Validate,
            Command::Invert => Suite::Invert,
            Command::Bounds => Suite::Bounds,
            Command::Classical => Suite::Classical,
            Command::Kernels => Suite::Kernels,
            Command::Sweep => Suite::Sweep,
        }
    }
}

/// Verification suites for the mode operators of the quantum punctured disk.
///
/// Exit status: 0 all checks pass, 1 a check failed, 2 bad config or I/O,
/// 3 inconclusive (an iteration did not converge).
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    #[arg(value_enum)]
    command: Command,

    /// Flat `key = value` config file; defaults apply to missing keys.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory for CSV and JSON reports.
    #[arg(long, default_value = "qdisk-out")]
    out: PathBuf,

    /// Seed for random inputs; overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn run(args: &Args) -> anyhow::Result<i32> {
    let mut cfg = match &args.config {
        Some(path) => {
            RunConfig::load(path).with_context(|| format!("loading config {}", path.display()))?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let suite = Suite::from(args.command);
    let summary =
        run_suite(suite, &cfg, &args.out).with_context(|| format!("running suite {suite}"))?;
    eprintln!(
        "{suite}: {} passed, {} failed, {} inconclusive; reports in {}",
        summary.pass_count,
        summary.fail_count,
        summary.inconclusive_count,
        args.out.display()
    );
    Ok(summary.exit_code())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
