use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use socbec_cli::{parse_config_in, run, ExperimentConfig};

/// Spectral simulations of spin-orbit-coupled two-component condensates.
#[derive(Parser)]
#[command(name = "socbec", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute an experiment and write its artifacts.
    Run {
        config: PathBuf,
        /// Output directory, overriding `[output] dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for sweeps and multi-start solves.
        #[arg(long, env = "SOCBEC_THREADS")]
        threads: Option<usize>,
    },
    /// Parse and validate a config, printing the resolved form.
    Validate { config: PathBuf },
}

fn load(path: &Path) -> Result<(ExperimentConfig, String), String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let config = parse_config_in(&text, base).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok((config, text))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match cli.command {
        Command::Validate { config } => match load(&config) {
            Ok((c, _)) => {
                print!("{}", c.to_text());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
        Command::Run {
            config,
            out,
            threads,
        } => {
            let (c, text) = match load(&config) {
                Ok(v) => v,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            if let Some(n) = threads {
                if n == 0 {
                    eprintln!("error: --threads must be at least 1");
                    return ExitCode::from(1);
                }
                if let Err(e) = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                {
                    eprintln!("error: cannot configure thread pool: {e}");
                    return ExitCode::from(1);
                }
            }
            match run(&c, &text, out.as_deref()) {
                Ok(summary) => {
                    println!(
                        "wrote {} files to {}",
                        summary.artifacts.len(),
                        summary.out_dir.display()
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
    }
}
