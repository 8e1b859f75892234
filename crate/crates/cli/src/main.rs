use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use hip_cli::commands::{execute, Command, Options, Status};
use hip_cli::config::{keys_help, RunConfig};

/// Environment variable naming the default output directory.
const OUT_ENV: &str = "HIP_OUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "hip", version, about = "Poisson hyperplane processes: simulation, reconstruction and statistics")]
#[command(after_help = keys_help())]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Config file with `key = value` lines.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override a key (repeatable), applied after the config file.
    #[arg(short, long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory [default: $HIP_OUT_DIR, else ./hip-out].
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Worker threads for replications; results do not depend on it.
    #[arg(short, long)]
    jobs: Option<usize>,
    /// Oracle validation mode: expose parent hyperplanes and compare
    /// reconstructions with the ground truth.
    #[arg(long)]
    validate: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();

    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", path.display());
                return ExitCode::from(2);
            }
        };
        if let Err(e) = cfg.apply_text(&text, &path.display().to_string()) {
            eprintln!("error: invalid configuration: {e}");
            return ExitCode::from(2);
        }
    }
    for pair in &cli.set {
        if let Err(e) = cfg.apply_override(pair) {
            eprintln!("error: invalid configuration: {e}");
            return ExitCode::from(2);
        }
    }
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            log::warn!("thread pool: {e}");
        }
    }
    let out = cli
        .out
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("hip-out"));
    let opts = Options {
        out,
        validate: cli.validate,
    };
    match execute(cli.command, &cfg, &opts) {
        Ok(Status::Done) => {
            println!("{}: artifacts written to {}", cli.command.name(), opts.out.display());
            ExitCode::SUCCESS
        }
        Ok(Status::BudgetExhausted) => {
            eprintln!("{}: budget exhausted before certification; partial result written to {}", cli.command.name(), opts.out.display());
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
