//! Command-line benchmark driver.
//!
//! Exit codes: 0 on success, 2 for configuration errors, 3 when a case
//! fails at runtime (blow-up / non-physical state). Thread count follows
//! `RAYON_NUM_THREADS`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ashll::cases::{run_case, CaseConfig, CaseId, Preset};
use ashll::SolverError;

#[derive(Parser)]
#[command(name = "ashll", version, about = "2D structured-grid finite-volume flow solver with all-speed HLL-type fluxes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Ci,
    Paper,
}

#[derive(Subcommand)]
enum Command {
    /// Run a benchmark case from a JSON config and write its artifacts.
    Run {
        /// Path to the JSON case configuration.
        #[arg(long)]
        config: PathBuf,
        /// Override the resolution preset from the config file.
        #[arg(long, value_enum)]
        preset: Option<PresetArg>,
        /// Output directory for VTK/CSV artifacts (created if missing).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the available case identifiers.
    ListCases,
    /// Parse and validate a JSON case configuration without running it.
    ValidateConfig { config: PathBuf },
}

fn load_config(path: &PathBuf) -> Result<CaseConfig, SolverError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SolverError::Config(format!("cannot read {}: {e}", path.display())))?;
    CaseConfig::from_json(&text)
}

fn run(cli: Cli) -> Result<(), SolverError> {
    match cli.command {
        Command::Run { config, preset, out } => {
            let mut case = load_config(&config)?;
            if let Some(p) = preset {
                case.preset = match p {
                    PresetArg::Ci => Preset::Ci,
                    PresetArg::Paper => Preset::Paper,
                };
            }
            if let Some(dir) = &out {
                std::fs::create_dir_all(dir)?;
            }
            let report = run_case(&case, out.as_deref())?;
            for r in &report.records {
                println!("{}\t{}\t{}", r.name, r.mesh, r.value);
            }
            Ok(())
        }
        Command::ListCases => {
            for id in CaseId::all() {
                println!("{}", id.name());
            }
            Ok(())
        }
        Command::ValidateConfig { config } => {
            let case = load_config(&config)?;
            println!("ok: {} ({})", case.case_id.name(), config.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err @ (SolverError::Config(_) | SolverError::Io(_))) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(3)
        }
    }
}
