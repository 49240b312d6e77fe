//! Command-line front end.

pub mod config;
pub mod entropy_report;
pub mod presets;
pub mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
use crate::registers::PureState;
use config::ExperimentConfig;
use entropy_report::{entropy_report, parse_cut, MagicMode};
use run::{run_experiment, write_atomic, RunOptions};

#[derive(Parser, Debug)]
#[command(name = "statedesign", version, about = "Design errors of resource-constrained state ensembles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run an experiment config (or a built-in preset) and write CSV plus JSON sidecar.
    Run {
        /// Path to an experiment config.
        #[arg(required_unless_present = "preset", conflicts_with = "preset")]
        config: Option<PathBuf>,
        /// Use a built-in preset instead of a config file.
        #[arg(long)]
        preset: Option<String>,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// CSV output path; the sidecar goes next to it with a .json extension.
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Worker threads across sweep points.
        #[arg(long, env = "STATEDESIGN_JOBS")]
        jobs: Option<usize>,
    },
    /// Print Rényi-2 resource entropies of a state stored as JSON.
    Entropy {
        state: PathBuf,
        /// Region for an entanglement entropy, e.g. `0,1`. Repeatable.
        #[arg(long = "cut")]
        cuts: Vec<String>,
        #[arg(long, value_enum, default_value = "auto")]
        magic: MagicMode,
        /// Write CSV here instead of stdout.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// List built-in presets, or print one as JSON.
    Presets {
        name: Option<String>,
    },
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, preset, seed, output, jobs } => {
            let (cfg, base_dir) = match (config, preset) {
                (Some(path), _) => ExperimentConfig::load(&path)?,
                (None, Some(name)) => {
                    let preset = presets::find(&name)?;
                    (preset.config()?, PathBuf::from("."))
                }
                (None, None) => return Err(Error::Config("a config path or --preset is required".into())),
            };
            let out = run_experiment(&cfg, &base_dir, &RunOptions { seed, output, jobs })?;
            eprintln!(
                "{}: {} points -> {} ({})",
                cfg.id,
                out.rows.len(),
                out.csv_path.display(),
                out.json_path.display()
            );
            Ok(())
        }
        Command::Entropy { state, cuts, magic, output } => {
            let text = std::fs::read_to_string(&state)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", state.display())))?;
            let state = PureState::from_json(&text)?;
            let cuts = cuts.iter().map(|c| parse_cut(c)).collect::<Result<Vec<_>>>()?;
            for cut in &cuts {
                cut.validate(state.register())?;
            }
            let rows = entropy_report(&state, &cuts, magic)?;
            let mut writer = csv::Writer::from_writer(Vec::new());
            for row in &rows {
                writer.serialize(row).map_err(|e| Error::Config(format!("CSV serialization: {e}")))?;
            }
            let bytes = writer.into_inner().map_err(|e| Error::Io(e.into_error()))?;
            match output {
                Some(path) => write_atomic(&path, &bytes),
                None => {
                    print!("{}", String::from_utf8_lossy(&bytes));
                    Ok(())
                }
            }
        }
        Command::Presets { name: None } => {
            for p in presets::PRESETS {
                println!("{:<20} {}", p.name, p.description);
            }
            Ok(())
        }
        Command::Presets { name: Some(name) } => {
            let preset = presets::find(&name)?;
            println!("{}", preset.json.trim());
            Ok(())
        }
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
