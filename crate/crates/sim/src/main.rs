use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use itsmc_core::metrics::evaluate;
use itsmc_sim::output::{read_csv, MetricsDoc};
use itsmc_sim::runner::{compare_to_dir, run_batch};
use itsmc_sim::{config, SimError};

/// Integral-terminal sliding mode control simulator.
#[derive(Parser)]
#[command(name = "itsmc", version)]
struct Cli {
    /// Seed recorded in the outputs; every built-in scenario is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate scenarios and write `<name>.csv` and `<name>.metrics.json`.
    Run {
        #[arg(long, required = true, num_args = 1..)]
        scenario: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute metrics from a trajectory CSV and print them as JSON.
    Metrics {
        #[arg(long)]
        trajectory: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Run two scenarios on the same plant and write a comparison report.
    Compare {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a scenario file without running it.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
}

fn load(path: &Path, seed: Option<u64>) -> Result<itsmc_core::scenario::Scenario, SimError> {
    let mut sc = config::load(path)?;
    if let Some(seed) = seed {
        sc.seed = seed;
    }
    Ok(sc)
}

fn main_inner(cli: Cli) -> Result<(), SimError> {
    match cli.command {
        Command::Run { scenario, out } => {
            let scenarios = scenario
                .iter()
                .map(|p| load(p, cli.seed))
                .collect::<Result<Vec<_>, _>>()?;
            let mut first_err = None;
            for (sc, res) in scenarios.iter().zip(run_batch(&scenarios, &out)?) {
                match res {
                    Ok(w) => println!("{}: wrote {} and {}", sc.name, w.csv.display(), w.metrics.display()),
                    Err(e) => {
                        eprintln!("{}: {e}", sc.name);
                        first_err.get_or_insert(e);
                    }
                }
            }
            first_err.map_or(Ok(()), Err)
        }
        Command::Metrics { trajectory, scenario } => {
            let sc = load(&scenario, cli.seed)?;
            let file = std::fs::File::open(&trajectory).map_err(|e| SimError::io(&trajectory, e))?;
            let tr = read_csv(file, sc.integrator.step_size, sc.horizon)?;
            let m = evaluate(&sc, &tr)?;
            print!("{}", MetricsDoc::new(&sc, &m).to_json()?);
            Ok(())
        }
        Command::Compare { a, b, out } => {
            let (sa, sb) = (load(&a, cli.seed)?, load(&b, cli.seed)?);
            let (doc, path) = compare_to_dir(&sa, &sb, &out)?;
            println!(
                "{} vs {}: sup gain {} vs {}, sup |s| after t = {} {} vs {}",
                doc.a,
                doc.b,
                doc.sup_adaptive_gain.a,
                doc.sup_adaptive_gain.b,
                doc.common_reaching_time,
                doc.sup_abs_s_post_reaching.a,
                doc.sup_abs_s_post_reaching.b
            );
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Validate { scenario } => {
            let sc = load(&scenario, cli.seed)?;
            println!("{}: ok ({}, {} samples)", sc.name, sc.controller_kind(), sc.sample_count());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
