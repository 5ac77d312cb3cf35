use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use stochvolterra_cli::run::{run_with_workers, workers_from_env, Subcommand};
use stochvolterra_cli::{load_config, ConfigErrors};

/// Numerical certificates for stochastic Volterra equations.
///
/// The worker count comes from STOCHVOLTERRA_WORKERS and never changes
/// the numbers written.
#[derive(Debug, Parser)]
#[command(name = "stochvolterra", version)]
struct Args {
    #[arg(value_enum)]
    command: Subcommand,
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`, default `out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Ensemble size; overrides `ensemble.paths`.
    #[arg(long)]
    paths: Option<u64>,
    /// Master seed; overrides `noise.seed`.
    #[arg(long)]
    seed: Option<u64>,
}

fn report_config_errors(errors: &ConfigErrors) {
    let list: Vec<_> = errors
        .0
        .iter()
        .map(|e| serde_json::json!({"line": e.line, "key": e.key, "message": e.message}))
        .collect();
    eprintln!("{}", serde_json::json!({"status": "config_error", "errors": list}));
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut cfg = match load_config(&args.config) {
        Ok(cfg) => cfg,
        Err(errors) => {
            report_config_errors(&errors);
            return ExitCode::from(2);
        }
    };
    if let Some(paths) = args.paths {
        if paths == 0 {
            eprintln!("{}", serde_json::json!({"status": "config_error", "errors": ["--paths must be >= 1"]}));
            return ExitCode::from(2);
        }
        cfg.ensemble.paths = paths;
    }
    if let Some(seed) = args.seed {
        cfg.noise.seed = seed;
    }
    let out = args
        .out
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));

    match run_with_workers(args.command, &cfg, &out, workers_from_env()) {
        Ok(outcome) => {
            let failures = outcome.failures();
            let status = if failures.is_empty() { "pass" } else { "fail" };
            let line = serde_json::json!({
                "status": status,
                "csv": outcome.csv_path,
                "manifest": outcome.manifest_path,
                "failures": failures,
            });
            if failures.is_empty() {
                println!("{line}");
                ExitCode::SUCCESS
            } else {
                eprintln!("{line}");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("{}", serde_json::json!({"status": "error", "message": e.to_string()}));
            ExitCode::from(1)
        }
    }
}
