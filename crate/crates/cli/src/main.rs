use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use hessianfr::analysis::ClassifyOptions;
use hessianfr_cli::report::{bench, bench_table, classify, spectrum};
use hessianfr_cli::{exit_code, EXIT_CONFIG, run_experiment, ExperimentConfig, NumericalFailure};

/// Runs and analyses min-max optimizers on configured problems.
///
/// The global seed in the config can be overridden with HFR_SEED.
#[derive(Parser)]
#[command(name = "hessianfr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured algorithm from a shared start; writes CSVs and summary.json.
    Run {
        config: PathBuf,
        /// Output directory (overrides [output] dir).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify a critical point (Nash / minimax) and print JSON.
    Classify {
        config: PathBuf,
        /// Comma-separated coordinates, x first then y. Defaults to the initial point.
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
        #[arg(long, default_value_t = 1e-8)]
        crit_tol: f64,
        /// Eigenvalue margin; defaults to 1e-8 (1 + ‖H‖₂).
        #[arg(long)]
        tau: Option<f64>,
    },
    /// Jacobian spectrum of one configured algorithm at a point, as JSON.
    Spectrum {
        config: PathBuf,
        /// Algorithm label (or name) from the config.
        #[arg(long)]
        alg: String,
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
    },
    /// Per-step operation counts and timing.
    Bench {
        config: PathBuf,
        #[arg(long, default_value_t = 100)]
        iters: usize,
        #[arg(long)]
        json: bool,
    },
}

fn print_json(v: &serde_json::Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let dir = out.unwrap_or_else(|| cfg.output.dir.clone());
            let report = run_experiment(&cfg, &dir)?;
            for a in report.summary["algorithms"].as_array().into_iter().flatten() {
                eprintln!(
                    "{:<16} {:<10} iters {:>7}  grad {:.3e}",
                    a["label"].as_str().unwrap_or(""),
                    a["status"].as_str().unwrap_or(""),
                    a["iterations"],
                    a["final_grad_norm"].as_f64().unwrap_or(f64::NAN),
                );
            }
            if !report.failed.is_empty() {
                return Err(NumericalFailure::new(format!("runs failed: {}", report.failed.join(", "))).into());
            }
        }
        Command::Classify { config, point, crit_tol, tau } => {
            let cfg = ExperimentConfig::load(&config)?;
            print_json(&classify(&cfg, point.as_deref(), &ClassifyOptions { crit_tol, tau })?)?;
        }
        Command::Spectrum { config, alg, point } => {
            let cfg = ExperimentConfig::load(&config)?;
            print_json(&spectrum(&cfg, &alg, point.as_deref())?)?;
        }
        Command::Bench { config, iters, json } => {
            let cfg = ExperimentConfig::load(&config)?;
            let v = bench(&cfg, iters)?;
            if json {
                print_json(&v)?;
            } else {
                print!("{}", bench_table(&v));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    // Usage errors share the configuration exit code; clap's default is 2.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG as u8) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = exit_code(&e);
            if let Some(d) = e.downcast_ref::<NumericalFailure>().and_then(|n| n.diagnostic.as_ref()) {
                println!("{}", serde_json::to_string_pretty(d).unwrap_or_default());
            }
            eprintln!("error: {e:#}");
            ExitCode::from(code as u8)
        }
    }
}
