mod config;
mod plots;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde_json::json;

use config::{ConfigError, Experiment, RunConfig};

/// Two-boson extended Hubbard chain in a linear field.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Cli {
    experiment: Experiment,
    /// TOML configuration; the built-in defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads for grid-level parallelism (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Also write gnuplot scripts next to the CSV files.
    #[arg(long)]
    emit_plots: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path, cli.experiment),
        None => Ok(RunConfig::defaults(cli.experiment)),
    };
    let cfg = match cfg {
        Ok(cfg) => cfg,
        Err(e) => return fail_config(&e),
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            return fail_config(&ConfigError {
                problems: vec!["--threads: must be at least 1".into()],
            });
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    let started = Instant::now();
    let outcome = run::run(cli.experiment, &cfg, &cli.out);
    let wall = started.elapsed().as_secs_f64();
    let (mut files, error) = match outcome {
        Ok(art) => (art.files, None),
        Err(e) => (Vec::new(), Some(e)),
    };
    if error.is_none() && cli.emit_plots {
        match plots::emit(cli.experiment, &cli.out) {
            Ok(name) => files.push(name),
            Err(e) => {
                eprintln!("error: {e:#}");
                return ExitCode::FAILURE;
            }
        }
    }
    let manifest = json!({
        "experiment": cli.experiment.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "threads": rayon::current_num_threads(),
        "wall_time_seconds": wall,
        "outputs": files,
        "status": match &error {
            None => "ok".to_string(),
            Some(e) => format!("error: {e:#}"),
        },
    });
    if cli.out.is_dir() {
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        if let Err(e) = std::fs::write(cli.out.join("manifest.json"), text + "\n") {
            eprintln!("error: cannot write manifest: {e}");
            return ExitCode::FAILURE;
        }
    }
    match error {
        None => ExitCode::SUCCESS,
        Some(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn fail_config(e: &ConfigError) -> ExitCode {
    eprint!("{e}");
    ExitCode::from(2)
}
