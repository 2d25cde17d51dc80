use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nqcc::capacity::{self, WorksheetParams};
use nqcc::runner::{self, Overrides, RunnerError, ScenarioConfig};

#[derive(Parser)]
#[command(name = "nqcc", version, about = "Run and verify NQCC simulation scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Replace the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Replace the scenario trial count.
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Write the JSON report here; transcripts go next to it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file.
    Run { config: PathBuf },
    /// Run every scenario in a directory and aggregate pass/fail.
    Verify { dir: PathBuf },
    /// Print the capacity worksheet.
    Worksheet {
        /// Capacity scenario whose worksheet parameters replace the defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Emit JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let overrides = Overrides {
        seed: cli.seed,
        trials: cli.trials,
    };
    let result = match &cli.command {
        Command::Run { config } => run(config, overrides, cli.out.as_deref()),
        Command::Verify { dir } => verify(dir, overrides, cli.out.as_deref()),
        Command::Worksheet { config, json } => worksheet(config.as_deref(), *json),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn out_dir(path: &Path) -> &Path {
    path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."))
}

fn run(config: &Path, overrides: Overrides, out: Option<&Path>) -> Result<bool, RunnerError> {
    let mut config = ScenarioConfig::load(config)?;
    config.apply(overrides);
    let (report, transcripts) = runner::run_scenario_with_transcripts(&config)?;
    for c in &report.checks {
        eprintln!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    match out {
        Some(path) => {
            runner::emit_report(&report, path)?;
            runner::write_transcripts(&report, &transcripts, out_dir(path))?;
        }
        None => println!("{}", serde_json::to_string_pretty(&report).expect("report serializes")),
    }
    Ok(report.passed)
}

fn verify(dir: &Path, overrides: Overrides, out: Option<&Path>) -> Result<bool, RunnerError> {
    let (report, transcripts) = runner::verify_dir(dir, overrides)?;
    for e in &report.entries {
        let name = e.name.as_deref().unwrap_or("-");
        let status = if e.passed { "PASS" } else { "FAIL" };
        match (&e.error, e.failed_checks.is_empty()) {
            (Some(err), _) => println!("{status} {name} ({}): {err}", e.file),
            (None, true) => println!("{status} {name} ({})", e.file),
            (None, false) => println!("{status} {name} ({}): {}", e.file, e.failed_checks.join(", ")),
        }
    }
    let failed = report.entries.iter().filter(|e| !e.passed).count();
    println!("{} scenarios, {failed} failed", report.entries.len());
    if let Some(path) = out {
        runner::emit_verify_report(&report, path)?;
        for (r, t) in report.reports.iter().zip(&transcripts) {
            runner::write_transcripts(r, t, out_dir(path))?;
        }
    }
    Ok(report.passed)
}

fn worksheet(config: Option<&Path>, json: bool) -> Result<bool, RunnerError> {
    let params = match config {
        Some(path) => match ScenarioConfig::load(path)?.params {
            runner::ScenarioParams::Capacity(p) => p.worksheet,
            other => {
                return Err(RunnerError::Config {
                    path: "kind".into(),
                    message: format!("worksheet needs a Capacity scenario, got {:?}", other.kind()),
                })
            }
        },
        None => WorksheetParams::default(),
    };
    let sheet = capacity::worksheet(&params)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&sheet).expect("worksheet serializes"));
    } else {
        print!("{sheet}");
    }
    Ok(true)
}
