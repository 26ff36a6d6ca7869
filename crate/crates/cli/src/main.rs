use anyhow::Result;
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use w2lab_cli::{catalog, config::ExperimentConfig, experiments, report};

/// Numerical laboratory for quadratic-Wasserstein convergence experiments
/// on the circle, flat tori, SU(2) and SO(3).
#[derive(Parser)]
#[command(name = "w2lab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a flat key-value config file.
    Run {
        /// Path to the experiment configuration.
        config: PathBuf,
        /// Override the configured seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads over the N grid (deterministic results regardless).
        #[arg(long)]
        threads: Option<usize>,
        /// Override the configured output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in acceptance experiments.
    List,
    /// Run a built-in suite: `all`, `fast`, or a single experiment id.
    Check {
        suite: String,
        /// Override worker threads (reserved; checks run sequentially).
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn main_inner() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, seed, threads, out } => {
            let mut cfg = ExperimentConfig::parse_file(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(t) = threads {
                cfg.threads = t.max(1);
            }
            if let Some(o) = out {
                cfg.out = o;
            }
            cfg.validate()?;
            let output = experiments::run(&cfg)?;
            report::write_artifacts(
                &cfg.out,
                &cfg.echo(),
                &output.rows,
                &output.timings,
                &output.plots,
            )?;
            for row in &output.rows {
                println!(
                    "{} n={} mean={:.6e} ci={:.2e} bound={}",
                    row.experiment,
                    row.n,
                    row.mc_mean,
                    row.ci_half,
                    row.bound.map(|b| format!("{b:.6e}")).unwrap_or_else(|| "-".into()),
                );
            }
            if output.violations > 0 {
                eprintln!("{} bound violation(s) beyond tolerance", output.violations);
                return Ok(ExitCode::from(2));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::List => {
            print!("{}", catalog::listing());
            Ok(ExitCode::SUCCESS)
        }
        Command::Check { suite, threads: _ } => {
            let Some(ids) = catalog::suite_ids(&suite) else {
                eprintln!("unknown suite or id '{suite}'; try `w2lab list`");
                return Ok(ExitCode::from(1));
            };
            let mut failed = 0usize;
            for id in ids {
                let outcome = catalog::run_criterion(id)?;
                println!("{} {}", if outcome.passed { "PASS" } else { "FAIL" }, outcome.id);
                for note in &outcome.notes {
                    println!("    {note}");
                }
                if !outcome.passed {
                    failed += 1;
                }
            }
            if failed > 0 {
                eprintln!("{failed} criteria failed");
                Ok(ExitCode::from(2))
            } else {
                Ok(ExitCode::SUCCESS)
            }
        }
    }
}
