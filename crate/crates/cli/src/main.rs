use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;
use scpg_core::error::Error;
use scpg_core::scenario::{run_scenario, Backend, ScenarioConfig, ScenarioId};

#[derive(Debug, Parser)]
#[command(name = "scpg", version, about = "Spiking CPG swimming simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the scenario described by a TOML config.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (overrides `output_dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_parser = parse_backend)]
        backend: Option<Backend>,
        /// Print the fully resolved config and exit.
        #[arg(long)]
        print_config: bool,
    },
    /// Print the default config of a scenario.
    Preset { scenario: String },
}

fn parse_backend(s: &str) -> Result<Backend, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Preset { scenario } => {
            let id = ScenarioId::ALL
                .into_iter()
                .find(|id| id.name() == scenario)
                .ok_or_else(|| Error::Config(format!("unknown scenario `{scenario}`")))?;
            print!("{}", ScenarioConfig::preset(id).to_toml()?);
            Ok(())
        }
        Command::Run {
            config,
            seed,
            out,
            backend,
            print_config,
        } => {
            let mut cfg = ScenarioConfig::load(&config)?;
            if let Some(seed) = seed {
                cfg = cfg.with_seed(seed);
            }
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            if let Some(b) = backend {
                cfg.backend = b;
            }
            cfg.validate()?;
            if print_config {
                print!("{}", cfg.to_toml()?);
                return Ok(());
            }
            info!("running {} on the {:?} backend for {} s", cfg.scenario, cfg.backend, cfg.duration);
            let report = run_scenario(&cfg)?;
            println!(
                "{} ({:?}, seed {}): build {:.2} s, {:.3} s per simulated second",
                report.scenario, report.backend, report.seed, report.build_seconds, report.step_seconds_per_sim_second
            );
            for (k, v) in &report.metrics {
                println!("  {k} = {v:.6}");
            }
            for m in &report.members {
                println!("  [{}] build {:.2} s, psi_rmse = {:.6}", m.label, m.build_seconds, m.metrics.get("psi_rmse").copied().unwrap_or(f64::NAN));
            }
            println!("wrote {}", cfg.output_dir.join("report.json").display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
