use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use carroll::cli::{output_dir, parse_config, run_to_dir, InvariantsConfig, RunConfig, DEFAULT_SAMPLES};

/// Carroll particle dynamics, gravity and quantization runs.
#[derive(Parser)]
#[command(name = "carroll", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the job described by a configuration file.
    Run { config: PathBuf },
    /// Validate a configuration file without running it.
    Check { config: PathBuf },
    /// Run the randomized invariant sweeps.
    Invariants {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
    },
}

fn load(path: &Path) -> Result<RunConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse_config(&text).map_err(|e| e.to_string())
}

fn stem(cfg: &RunConfig, path: Option<&Path>) -> String {
    cfg.name()
        .map(str::to_string)
        .or_else(|| {
            path.and_then(|p| p.file_stem())
                .map(|s| s.to_string_lossy().into_owned())
        })
        .unwrap_or_else(|| cfg.job().as_str().to_string())
}

fn execute(cfg: &RunConfig, path: Option<&Path>) -> ExitCode {
    let dir = output_dir(cfg);
    match run_to_dir(cfg, &dir, &stem(cfg, path)) {
        Ok(w) => {
            if let Some(csv) = &w.csv {
                println!("wrote {}", csv.display());
            }
            println!("wrote {}", w.report.display());
            ExitCode::from(w.status as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => match load(&config) {
            Ok(cfg) => execute(&cfg, Some(&config)),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
        Command::Check { config } => match load(&config) {
            Ok(cfg) => {
                println!("ok: {} job", cfg.job().as_str());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
        Command::Invariants { seed, samples } => {
            let cfg = RunConfig::Invariants(InvariantsConfig {
                name: None,
                output_dir: None,
                seed,
                samples,
            });
            execute(&cfg, None)
        }
    }
}
