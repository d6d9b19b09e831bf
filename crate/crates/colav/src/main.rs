//! Command-line entry point: run, validate, and list encounter scenarios.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use colav::scenario::{
    bundled_scenario, bundled_scenario_names, emit_outputs, load_scenario, run, DeciderKind,
    RunMeta, ScenarioConfig, ScenarioError,
};

#[derive(Parser)]
#[command(
    name = "colav",
    version,
    about = "Deterministic COLREGs encounter simulator for autonomous surface vessels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum DeciderArg {
    Rule,
    Llm,
    Mock,
}

impl From<DeciderArg> for DeciderKind {
    fn from(value: DeciderArg) -> Self {
        match value {
            DeciderArg::Rule => DeciderKind::Rule,
            DeciderArg::Llm => DeciderKind::Llm,
            DeciderArg::Mock => DeciderKind::Mock,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write trajectory.csv, decisions.csv,
    /// summary.json, and trajectory.svg.
    Run {
        /// Scenario file path, or the name of a bundled scenario.
        #[arg(long)]
        scenario: String,
        /// Override the decider named in the scenario file.
        #[arg(long, value_enum)]
        decider: Option<DeciderArg>,
        /// Override the random seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; files land in <out>/<scenario-name>/.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Fixture file for the mock decider (JSON array of canned chat
        /// response bodies).
        #[arg(long)]
        fixtures: Option<PathBuf>,
    },
    /// Parse and validate a scenario file, reporting the first violation.
    Validate {
        /// Scenario file path, or the name of a bundled scenario.
        #[arg(long)]
        scenario: String,
    },
    /// List the bundled scenario names.
    ListScenarios,
}

fn resolve_scenario(spec: &str) -> Result<ScenarioConfig, ScenarioError> {
    let path = Path::new(spec);
    if path.exists() {
        return load_scenario(path);
    }
    match bundled_scenario(spec) {
        Some(result) => result,
        None => Err(ScenarioError::Io {
            path: path.to_path_buf(),
            source: std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!(
                    "no such file, and no bundled scenario named {spec:?} (try `colav list-scenarios`)"
                ),
            ),
        }),
    }
}

/// Exit code categories: 2 config/validation, 3 I/O, 4 simulation.
fn exit_code_for(error: &ScenarioError) -> u8 {
    match error {
        ScenarioError::Parse(_) | ScenarioError::Invalid { .. } | ScenarioError::Decider(_) => 2,
        ScenarioError::Io { .. } | ScenarioError::OutputIo { .. } => 3,
        ScenarioError::NumericalBlowUp { .. } => 4,
    }
}

fn execute(command: Command) -> Result<(), ScenarioError> {
    match command {
        Command::Run {
            scenario,
            decider,
            seed,
            out,
            fixtures,
        } => {
            let mut config = resolve_scenario(&scenario)?;
            if let Some(d) = decider {
                config.decider = d.into();
            }
            if let Some(s) = seed {
                config.seed = s;
            }
            if let Some(f) = fixtures {
                config.mock_fixtures = Some(f);
            }
            config.validate()?;

            let (log, metrics) = run(&config)?;
            let meta = RunMeta {
                scenario: config.name.clone(),
                decider: config.decider.to_string(),
                seed: config.seed,
                duration: config.duration,
            };
            let out_dir = out.join(&config.name);
            let files = emit_outputs(&log, &metrics, &meta, &config.own_route, &out_dir)?;

            println!(
                "{}: {} decision cycles, min range {:.1} m, max risk {:.2}, \
                 give-way initiations {}, collision {}",
                config.name,
                log.decisions.len(),
                metrics.min_range,
                metrics.max_risk,
                metrics.give_way_initiations,
                metrics.collision
            );
            for file in files {
                println!("  wrote {}", file.display());
            }
            Ok(())
        }
        Command::Validate { scenario } => {
            let config = resolve_scenario(&scenario)?;
            println!(
                "{}: valid ({} waypoints, duration {} s, decider {})",
                config.name,
                config.own_route.len(),
                config.duration,
                config.decider
            );
            Ok(())
        }
        Command::ListScenarios => {
            for name in bundled_scenario_names() {
                println!("{name}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            let mut source = std::error::Error::source(&error);
            while let Some(cause) = source {
                eprintln!("  caused by: {cause}");
                source = cause.source();
            }
            ExitCode::from(exit_code_for(&error))
        }
    }
}
