use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fracbranch::driver::{exit_code, load_config, run_check, run_profile};
use fracbranch::{selftest, Error, Result};

#[derive(Parser)]
#[command(name = "fracbranch", version, about = "Branching stable-process solver for fractional semilinear problems on balls")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the solution on a radial grid and write a CSV profile.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// CSV destination; standard output when absent.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Print the existence report for the configured problem as JSON.
    Check {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run fast statistical self-checks.
    Selftest {
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
}

fn solve(
    config: PathBuf,
    samples: Option<u64>,
    seed: Option<u64>,
    output: Option<PathBuf>,
    workers: Option<usize>,
) -> Result<()> {
    let mut cfg = load_config(&config)?;
    if let Some(n) = samples {
        if n == 0 {
            return Err(Error::Config {
                key: "samples".into(),
                message: "must be at least 1".into(),
            });
        }
        cfg.samples = n;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(w) = workers {
        if w == 0 {
            return Err(Error::Config {
                key: "workers".into(),
                message: "must be at least 1".into(),
            });
        }
        cfg.workers = w;
    }
    if output.is_some() {
        cfg.output = output;
    }
    let run = run_profile(&cfg)?;
    match &cfg.output {
        Some(path) => run.write_csv_file(path)?,
        None => run.write_csv(std::io::stdout().lock())?,
    }
    eprintln!("{}", run.summary());
    Ok(())
}

fn check(config: PathBuf) -> Result<()> {
    let cfg = load_config(&config)?;
    let report = run_check(&cfg)?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(std::io::stdout(), "{json}")?;
    Ok(())
}

fn run_selftest(seed: u64) -> Result<bool> {
    let mut all = true;
    for c in selftest::run_all(seed)? {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        all &= c.passed;
    }
    Ok(all)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve {
            config,
            samples,
            seed,
            output,
            workers,
        } => solve(config, samples, seed, output, workers).map(|_| true),
        Command::Check { config } => check(config).map(|_| true),
        Command::Selftest { seed } => run_selftest(seed),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
