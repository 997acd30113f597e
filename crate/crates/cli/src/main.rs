use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use orbitfed_core::scenario::{load_scenario, RateModeConfig, Scenario};
use orbitfed_core::sim::{access_table, compare, run_fedleo, run_star_baseline, RunResult};
use orbitfed_core::{report, Error};

/// FedLEO and star-topology federated learning over a LEO constellation.
#[derive(Parser)]
#[command(name = "orbitfed", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute ground-station access windows and write windows.csv.
    Windows(Flags),
    /// Run FedLEO and write events, metrics and per-orbit timings.
    RunFedleo(Flags),
    /// Run the sequential star-topology baseline.
    RunStar(Flags),
    /// Run both protocols on the same scenario and write a comparison table.
    Compare(Flags),
    /// Write per-satellite class histograms of the data partition.
    PartitionReport(Flags),
}

#[derive(Args)]
struct Flags {
    /// Scenario TOML file, or the name of a bundled scenario.
    #[arg(long, default_value = "paper_default")]
    scenario: PathBuf,
    /// Simulated horizon in seconds.
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overridden by ORBITFED_OUT).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Ground-link rate model: fixed-rate or shannon.
    #[arg(long)]
    mode: Option<RateModeConfig>,
}

impl Flags {
    fn out_dir(&self) -> PathBuf {
        std::env::var_os("ORBITFED_OUT").map_or_else(|| self.out.clone(), PathBuf::from)
    }

    fn scenario(&self) -> Result<Scenario, Error> {
        let mut s = load_scenario(&self.scenario)?;
        if let Some(h) = self.horizon {
            s.simulation.horizon_s = h;
        }
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        if let Some(mode) = self.mode {
            s.link.rate_mode = mode;
        }
        s.validate()?;
        Ok(s)
    }
}

/// Failure before any simulation work (exit 1) or during it (exit 2).
enum Failure {
    Validation(anyhow::Error),
    Runtime(anyhow::Error),
}

fn runtime<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Runtime(e.into())
}

fn save_run(run: &RunResult, dir: &Path) -> Result<(), Failure> {
    report::save_run(run, dir).with_context(|| format!("writing results to {}", dir.display())).map_err(runtime)?;
    for d in &run.diagnostics {
        eprintln!("{}: {d}", run.protocol);
    }
    Ok(())
}

fn summary(run: &RunResult) -> String {
    let acc = run.rounds.last().map_or_else(|| "-".into(), |r| format!("{:.4}", r.global_accuracy));
    format!(
        "{}: {} rounds in {:.1} s, final accuracy {acc}, stopped by {:?}",
        run.protocol,
        run.completed_rounds(),
        run.elapsed(),
        run.termination
    )
}

fn execute(command: Command) -> Result<(), Failure> {
    let flags = match &command {
        Command::Windows(f)
        | Command::RunFedleo(f)
        | Command::RunStar(f)
        | Command::Compare(f)
        | Command::PartitionReport(f) => f,
    };
    let scenario = flags
        .scenario()
        .with_context(|| format!("loading scenario {}", flags.scenario.display()))
        .map_err(Failure::Validation)?;
    let setup = scenario.setup().map_err(|e| Failure::Validation(e.into()))?;
    let out = flags.out_dir();
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display())).map_err(runtime)?;
    let mut stdout = io::stdout().lock();

    match command {
        Command::Windows(_) => {
            let table = access_table(&setup).map_err(runtime)?;
            report::save_windows(&table, &out).map_err(runtime)?;
            let _ = writeln!(stdout, "{} windows written to {}", table.len(), out.join("windows.csv").display());
        }
        Command::PartitionReport(_) => {
            let workload = scenario.workload().map_err(runtime)?;
            let file = fs::File::create(out.join("partition.csv")).map_err(runtime)?;
            report::write_partition(&workload.shards, file).map_err(runtime)?;
            let _ = writeln!(stdout, "partition written to {}", out.join("partition.csv").display());
        }
        Command::RunFedleo(_) | Command::RunStar(_) => {
            let workload = scenario.workload().map_err(runtime)?;
            let run = if matches!(command, Command::RunFedleo(_)) {
                run_fedleo(&setup, &workload)
            } else {
                run_star_baseline(&setup, &workload)
            }
            .map_err(runtime)?;
            report::save_windows(&access_table(&setup).map_err(runtime)?, &out).map_err(runtime)?;
            save_run(&run, &out)?;
            let _ = writeln!(stdout, "{}", summary(&run));
        }
        Command::Compare(_) => {
            let workload = scenario.workload().map_err(runtime)?;
            let fedleo = run_fedleo(&setup, &workload).map_err(runtime)?;
            let star = run_star_baseline(&setup, &workload).map_err(runtime)?;
            let cmp = compare(&fedleo, &star).map_err(runtime)?;
            report::save_windows(&access_table(&setup).map_err(runtime)?, &out).map_err(runtime)?;
            save_run(&fedleo, &out.join("fedleo"))?;
            save_run(&star, &out.join("star"))?;
            let file = fs::File::create(out.join("comparison.csv")).map_err(runtime)?;
            report::write_comparison(&cmp, file).map_err(runtime)?;
            let _ = writeln!(stdout, "{}\n{}", summary(&fedleo), summary(&star));
            let _ = write!(stdout, "{}", report::comparison_summary(&cmp));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
