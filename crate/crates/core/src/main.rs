use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use sbr_core::io::{bundled_examples, load_scenario, write_outputs};
use sbr_core::orchestrator::run;
use sbr_core::Result;

#[derive(Parser)]
#[command(name = "sbr", version, about = "Reactive settling simulator for sequencing batch reactors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write outlets.csv, fields.csv and ledger.json.
    Run {
        scenario: PathBuf,
        /// Overrides the grid size from the scenario.
        #[arg(long)]
        cells: Option<usize>,
        /// Output directory; defaults to the scenario's, else `out/<name>`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and validate a scenario without running it.
    Validate { scenario: PathBuf },
    /// Bundled example scenarios.
    Examples {
        #[command(subcommand)]
        action: ExamplesAction,
    },
}

#[derive(Subcommand)]
enum ExamplesAction {
    /// Write the bundled scenarios into a directory.
    Export { dir: PathBuf },
}

fn run_scenario(path: &Path, cells: Option<usize>, out: Option<PathBuf>) -> Result<bool> {
    let (file, mut scenario) = load_scenario(path)?;
    if let Some(n) = cells {
        scenario.numerics.cells = n;
        scenario.validate()?;
    }
    let dir = out
        .or_else(|| file.outputs.as_ref().map(|o| PathBuf::from(&o.directory)))
        .unwrap_or_else(|| PathBuf::from("out").join(&scenario.name));

    let started = Instant::now();
    let result = run(&scenario)?;
    let paths = write_outputs(&dir, &scenario.name, &result)?;
    eprintln!(
        "{}: {} samples in {:.2} s, max ledger residual {:.3e} ({})",
        scenario.name,
        result.outlets.len(),
        started.elapsed().as_secs_f64(),
        result.ledger.max_relative_residual(),
        if result.ledger.closed { "closed" } else { "NOT closed" },
    );
    if result.monitor.steps_above_x_max > 0 {
        eprintln!(
            "warning: solids exceeded X̂ = {} kg/m³ in {} steps (peak {:.4})",
            scenario.material.x_max, result.monitor.steps_above_x_max, result.monitor.max_solids
        );
    }
    eprintln!("wrote {}, {}, {}", paths.outlets.display(), paths.fields.display(), paths.ledger.display());
    Ok(result.ledger.closed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { scenario, cells, out } => run_scenario(&scenario, cells, out),
        Command::Validate { scenario } => load_scenario(&scenario).map(|(_, s)| {
            println!("{}: valid, {} stages, {} components", s.name, s.schedule.stages().len(), s.component_names().len());
            true
        }),
        Command::Examples { action: ExamplesAction::Export { dir } } => std::fs::create_dir_all(&dir)
            .and_then(|_| {
                for (name, text) in bundled_examples() {
                    std::fs::write(dir.join(name), text)?;
                    println!("{}", dir.join(name).display());
                }
                Ok(true)
            })
            .map_err(Into::into),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
