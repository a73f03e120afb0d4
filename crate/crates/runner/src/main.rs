use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use llp_runner::{bench, compare, run, sweep, RunConfig, RunnerError, SweepConfig};

#[derive(Parser)]
#[command(name = "llp", version, about = "Run LLP online-learning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write its trace and summary.
    Run {
        config: PathBuf,
        /// Also write an SVG chart of R_t/t and V_t.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Run a horizon/β sweep and fit growth exponents.
    Sweep { config: PathBuf },
    /// Run several configurations on a shared scenario and align them.
    Compare {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        /// Comparison table path. Defaults to `compare.csv` next to the first trace.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Compute the benchmark point only.
    Bench { config: PathBuf },
}

fn execute(cli: Cli) -> Result<(), RunnerError> {
    match cli.command {
        Command::Run { config, plot } => {
            let outcome = run(&RunConfig::load(&config)?, plot.as_deref())?;
            println!("{}", serde_json::to_string_pretty(&outcome.summary)?);
            if outcome.summary.solver_warnings > 0 {
                eprintln!("warning: {} solver warnings", outcome.summary.solver_warnings);
            }
        }
        Command::Sweep { config } => {
            let outcome = sweep(&SweepConfig::load(&config)?)?;
            let failed = outcome.cells.iter().filter(|c| c.error.is_some()).count();
            println!("{}", serde_json::to_string_pretty(&outcome.fits)?);
            println!("table: {}", outcome.table.display());
            if failed > 0 {
                eprintln!("warning: {failed} sweep cells failed, see {}", outcome.report.display());
            }
        }
        Command::Compare { configs, out, plot } => {
            let configs = configs
                .iter()
                .map(|p| RunConfig::load(p))
                .collect::<Result<Vec<_>, _>>()?;
            let out = out.unwrap_or_else(|| {
                let first = &configs[0].output.path;
                first.parent().unwrap_or(Path::new("")).join("compare.csv")
            });
            let outcome = compare(&configs, &out, plot.as_deref())?;
            for (label, o) in outcome.labels.iter().zip(&outcome.outcomes) {
                let t = o.summary.horizon as f64;
                let avg = o.summary.regret.map_or("undefined".into(), |r| format!("{:.6}", r / t));
                println!("{label}: R_T/T = {avg}, V_T = {:.6}", o.summary.violation);
            }
            println!("table: {}", outcome.table.display());
        }
        Command::Bench { config } => {
            let summary = bench(&RunConfig::load(&config)?)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
