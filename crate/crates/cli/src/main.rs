use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use roughflow_cli::config::{ExperimentConfig, ExperimentKind};
use roughflow_cli::{emit, experiments};

#[derive(Parser)]
#[command(name = "roughflow", version, about = "Monotone-scheme experiments for rough transport")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment configuration (TOML)
    #[arg(long)]
    config: PathBuf,
    /// Override the config seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the output format: csv | json | svg
    #[arg(long)]
    format: Option<String>,
    /// Worker threads for independent sub-runs
    #[arg(long, default_value_t = default_threads())]
    threads: usize,
}

fn default_threads() -> usize {
    std::thread::available_parallelism().map(|n| n.get().min(8)).unwrap_or(1)
}

#[derive(Subcommand)]
enum Command {
    /// Run scheme trajectories with per-step conservation/monotonicity checks
    Simulate(CommonArgs),
    /// Log-scale semi-norm profiles, spectral equivalence, mollification
    Seminorm(CommonArgs),
    /// Commutator scaling sweeps (cancellation and control branches)
    Commutator(CommonArgs),
    /// Grid refinement studies against restrictions or oracles
    Convergence(CommonArgs),
    /// Littlewood-Paley checks and the delocalized convolution sweep
    BesovCheck(CommonArgs),
    /// Semi-norm trajectory vs the Gronwall envelope under refinement
    RegularityEnvelope(CommonArgs),
}

impl Command {
    fn kind(&self) -> ExperimentKind {
        match self {
            Command::Simulate(_) => ExperimentKind::Simulate,
            Command::Seminorm(_) => ExperimentKind::Seminorm,
            Command::Commutator(_) => ExperimentKind::Commutator,
            Command::Convergence(_) => ExperimentKind::Convergence,
            Command::BesovCheck(_) => ExperimentKind::BesovCheck,
            Command::RegularityEnvelope(_) => ExperimentKind::RegularityEnvelope,
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Command::Simulate(a)
            | Command::Seminorm(a)
            | Command::Commutator(a)
            | Command::Convergence(a)
            | Command::BesovCheck(a)
            | Command::RegularityEnvelope(a) => a,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let kind = cli.command.kind();
    let args = cli.command.args();

    let mut cfg = match ExperimentConfig::from_path(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if cfg.kind != kind {
        eprintln!(
            "error: configuration error: config kind '{}' does not match subcommand '{}'",
            cfg.kind, kind
        );
        return ExitCode::from(2);
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.output.dir = out.clone();
    }
    if let Some(format) = &args.format {
        cfg.output.format = format.clone();
        if let Err(e) = cfg.validate() {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    }

    let started = std::time::Instant::now();
    match experiments::run(&cfg, args.threads) {
        Ok(outcome) => {
            match emit::emit_outputs(&outcome, &cfg.output.dir, &cfg.output.format) {
                Ok(paths) => {
                    for p in paths {
                        println!("wrote {}", p.display());
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(e.exit_code() as u8);
                }
            }
            for line in &outcome.details {
                println!("{line}");
            }
            println!(
                "{}: {} in {:.2}s",
                outcome.kind,
                if outcome.passed { "ok" } else { "FAILED" },
                started.elapsed().as_secs_f64()
            );
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
