//! `critwave`: batch front-end over the laboratory crates.  One command per
//! invocation, configuration through a JSON document, artifacts written
//! atomically into the output directory.
//!
//! Exit codes: 0 success, 1 configuration error (nothing is written),
//! 2 numerical failure (partial artifacts are removed).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use critwave_cli::config::ExperimentConfig;
use critwave_cli::run::{self, Failure};

#[derive(Parser)]
#[command(name = "critwave", version, about = "Numerical laboratory for the critical semilinear wave equation")]
struct Cli {
    /// Experiment configuration (JSON document).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,

    /// Output directory; overrides the config's `output_dir`.
    #[arg(long, value_name = "DIR")]
    output: Option<PathBuf>,

    /// Worker-thread cap.  All current methods run sequentially, so any
    /// positive value is accepted and results do not depend on it.
    #[arg(long, value_name = "N")]
    threads: Option<usize>,

    /// Reserved for future stochastic methods; every current method is
    /// deterministic and ignores it.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
}

fn config_error(msg: &str) -> ExitCode {
    eprintln!("config error: {msg}");
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e)
            if matches!(
                e.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            ) =>
        {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            return config_error("--threads must be at least 1");
        }
    }
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(text) => text,
        Err(e) => return config_error(&format!("cannot read {}: {e}", cli.config.display())),
    };
    let cfg = match ExperimentConfig::parse(&text) {
        Ok(cfg) => cfg,
        Err(msg) => return config_error(&msg),
    };
    let out_dir = cli
        .output
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    match run::execute(&cfg, &out_dir) {
        Ok(code) => ExitCode::from(code as u8),
        Err(Failure::Config(msg)) => config_error(&msg),
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(2)
        }
    }
}
