use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cdd_refactor::pipeline::{
    build_client, cmd_analyze, cmd_bench, cmd_refactor, cmd_report, BenchOptions, PipelineError, RunConfig,
};
use cdd_refactor::refactor::Arm;

#[derive(Parser)]
#[command(name = "cddr", version, about = "Measure, refactor and verify small Python programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunFlags {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Answer from recorded responses only; never contacts the endpoint.
    #[arg(long)]
    replay: bool,
    /// Recorded responses file (JSON lines).
    #[arg(long)]
    fixtures: Option<PathBuf>,
    /// Sampling seed for APPS.
    #[arg(long)]
    seed: Option<u64>,
    /// Concurrent jobs.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Print ICP, CC and CogC per function.
    Analyze { file: PathBuf },
    /// Refactor one file: code to stdout, constraint violations to stderr.
    Refactor {
        file: PathBuf,
        #[arg(long, default_value = "cdd")]
        arm: Arm,
        /// Function the tests call; checked for renames.
        #[arg(long)]
        entry: Option<String>,
        #[command(flatten)]
        run: RunFlags,
    },
    /// Run every dataset task through the selected arms, resuming if records exist.
    Bench {
        /// Restrict to one arm.
        #[arg(long)]
        arm: Option<Arm>,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        run: RunFlags,
    },
    /// Write report.txt and report.csv for a run directory and print the text form.
    Report { run_dir: PathBuf },
}

fn load_config(flags: &RunFlags) -> Result<RunConfig, PipelineError> {
    let mut c = match &flags.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::from_toml("", std::path::Path::new("."))?,
    };
    if flags.replay {
        c.replay = true;
        c.record = false;
    }
    if let Some(f) = &flags.fixtures {
        c.fixtures = Some(f.clone());
    }
    if let Some(s) = flags.seed {
        c.seed = s;
    }
    if let Some(w) = flags.workers {
        c.workers = w;
    }
    Ok(c)
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    match cli.command {
        Command::Analyze { file } => {
            print!("{}", cmd_analyze(&file)?);
        }
        Command::Refactor { file, arm, entry, run } => {
            let config = load_config(&run)?;
            let client = build_client(&config)?;
            let (code, record) = cmd_refactor(&file, arm, entry.as_deref(), &client)?;
            for v in &record.violations {
                eprintln!("violation: {v}");
            }
            print!("{code}");
        }
        Command::Bench { arm, out, run } => {
            let mut config = load_config(&run)?;
            if let Some(arm) = arm {
                config.arms = vec![arm];
            }
            if let Some(out) = out {
                config.output_dir = out;
            }
            let s = cmd_bench(&config, BenchOptions::default())?;
            eprintln!(
                "{}: {} jobs, {} already done, {} written, {} references flagged",
                s.run_dir.display(),
                s.total_jobs,
                s.already_done,
                s.written,
                s.flagged.len()
            );
        }
        Command::Report { run_dir } => {
            print!("{}", cmd_report(&run_dir)?.to_text());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cddr: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
