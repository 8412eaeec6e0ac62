use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use resist_harness::config::{DEFAULT_EPSILON, DEFAULT_TRIALS};
use resist_harness::{run, Mode, RunConfig};

/// Effective-resistance sparsification and Laplacian solve harness.
#[derive(Debug, Parser)]
#[command(name = "resist-sketch", version, about)]
struct Cli {
    #[arg(value_enum)]
    mode: Mode,
    /// Graph file: header `n m`, then `u v w` lines (0-based vertices).
    #[arg(long)]
    graph: PathBuf,
    /// Right-hand side, one value per line. Default: seeded zero-sum normal.
    #[arg(long)]
    b: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    c0: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,
    /// Fixed sample count; results are then outside the theorem's guarantee.
    #[arg(long)]
    r_override: Option<usize>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cfg = RunConfig {
        graph_path: Some(cli.graph),
        b_path: cli.b,
        epsilon: cli.epsilon,
        beta: cli.beta,
        c0: cli.c0,
        seed: cli.seed,
        trials: cli.trials,
        r_override: cli.r_override,
        ..RunConfig::new(cli.mode)
    };
    let report = match run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let json = report.to_json();
    match cli.out {
        Some(path) => {
            if let Err(e) = fs::write(&path, json + "\n") {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => println!("{json}"),
    }
    ExitCode::SUCCESS
}
