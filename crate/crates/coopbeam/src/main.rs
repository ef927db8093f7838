//! Command-line front end: solve a single scenario, run a Monte-Carlo sweep,
//! or run one of the named figure presets, emitting CSV or JSON.

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

use coopbeam::config::{dbm_to_watts, parse_config};
use coopbeam::montecarlo::{run_sweep, run_trial, trial_seed, Strategy, SweepConfig, SweepResult};
use coopbeam::output::{emit_csv, emit_json, RunManifest};
use coopbeam::channel::sample_scenario;
use coopbeam::design::{CsiMode, DesignProblem};
use coopbeam::numerics::CMatrix;

const EXIT_CONFIG: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;

#[derive(Parser)]
#[command(name = "coopbeam", version, about = "Cooperative beamforming designs for secure wireless links")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// Transmit power vs. number of eavesdroppers at C_s⁰ = 3 b/s/Hz.
    Fig2,
    /// Transmit power vs. number of cooperating nodes at C_s⁰ = 3 b/s/Hz.
    Fig3,
    /// Secrecy capacity vs. number of eavesdroppers at P₀ = 5 dBm.
    Fig4,
    /// Secrecy capacity vs. number of cooperating nodes at P₀ = 5 dBm.
    Fig5,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one sampled scenario and print the weights and capacities.
    Solve {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the Monte-Carlo sweep described by the config file.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Run a named experiment preset (cooperative and direct curves).
    Figure {
        #[arg(long, value_enum)]
        preset: Preset,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
}

fn load_config(path: &Option<PathBuf>) -> Result<SweepConfig, String> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?,
        None => String::new(),
    };
    parse_config(&text).map_err(|e| e.to_string())
}

fn apply_overrides(config: &mut SweepConfig, seed: Option<u64>, trials: Option<usize>) {
    if let Some(s) = seed {
        config.base_seed = s;
    }
    if let Some(t) = trials {
        config.trials = t;
    }
}

/// The preset experiment setups: min-power sweeps at C_s⁰ = 3 b/s/Hz (figs 2-3)
/// and fixed-power sweeps at P₀ = 5 dBm (figs 4-5), each with the matching
/// direct-transmission baseline.
fn preset_configs(preset: Preset, seed: u64, trials: usize) -> Vec<SweepConfig> {
    let base = parse_config("").expect("defaults are valid");
    let (strategies, n_values, j_values, fixed_value): (Vec<Strategy>, Vec<usize>, Vec<usize>, f64) =
        match preset {
            Preset::Fig2 => (
                vec![Strategy::CoopMinPower, Strategy::DirectMinPower],
                vec![10, 30, 50],
                (1..=6).collect(),
                3.0,
            ),
            Preset::Fig3 => (
                vec![Strategy::CoopMinPower, Strategy::DirectMinPower],
                vec![10, 20, 30, 40, 50],
                vec![1, 3, 6],
                3.0,
            ),
            Preset::Fig4 => (
                vec![Strategy::CoopMaxSecrecy, Strategy::DirectMaxSecrecy],
                vec![10, 30, 50],
                (1..=6).collect(),
                dbm_to_watts(5.0),
            ),
            Preset::Fig5 => (
                vec![Strategy::CoopMaxSecrecy, Strategy::DirectMaxSecrecy],
                vec![10, 20, 30, 40, 50],
                vec![1, 3, 6],
                dbm_to_watts(5.0),
            ),
        };
    strategies
        .into_iter()
        .map(|strategy| SweepConfig {
            strategy,
            n_values: n_values.clone(),
            j_values: j_values.clone(),
            fixed_value,
            trials,
            base_seed: seed,
            ..base.clone()
        })
        .collect()
}

fn write_output(
    result: &SweepResult,
    config_path: Option<String>,
    out: &Option<PathBuf>,
    format: Format,
) -> Result<(), String> {
    let outputs = out
        .iter()
        .map(|p| p.display().to_string())
        .collect::<Vec<_>>();
    let manifest = RunManifest::new(config_path, result, outputs);
    let body = match format {
        Format::Csv => emit_csv(result),
        Format::Json => emit_json(result, &manifest).map_err(|e| e.to_string())?,
    };
    match out {
        Some(path) => {
            std::fs::write(path, body).map_err(|e| format!("{}: {e}", path.display()))?;
            let manifest_path = format!("{}.manifest.json", path.display());
            let manifest_body =
                serde_json::to_string_pretty(&manifest).map_err(|e| e.to_string())?;
            std::fs::write(&manifest_path, manifest_body + "\n")
                .map_err(|e| format!("{manifest_path}: {e}"))?;
            eprintln!("wrote {} and {manifest_path}", path.display());
        }
        None => print!("{body}"),
    }
    Ok(())
}

fn all_infeasible(result: &SweepResult) -> bool {
    !result.rows.is_empty() && result.rows.iter().all(|r| r.infeasible == r.trials)
}

fn run_solve(config_path: Option<PathBuf>, seed: Option<u64>) -> Result<ExitCode, String> {
    let config = load_config(&config_path).map_err(|e| format!("config: {e}"))?;
    let seed = seed.unwrap_or(config.base_seed);
    let n = config.geometry.n_nodes;
    let j = config.geometry.n_eavesdroppers;
    let scenario_seed = trial_seed(seed, n, j, 0);
    let scenario =
        sample_scenario(&config.geometry, scenario_seed).map_err(|e| e.to_string())?;
    let problem = DesignProblem {
        objective: config.strategy.objective(),
        budget: config.fixed_value,
        csi: match config.csi_error_variance {
            Some(eps) if eps > 0.0 => {
                CsiMode::Imperfect { r_delta: CMatrix::identity(n, n).scale(eps) }
            }
            _ => CsiMode::Perfect,
        },
        stage1: config.stage1,
    };

    println!("strategy: {}", config.strategy.as_str());
    println!("seed: {seed} (scenario seed {scenario_seed})");
    println!("N = {n}, J = {j}, sigma^2 = {:.6e} W", scenario.noise_power);
    match run_trial(&scenario, &problem, config.strategy) {
        coopbeam::montecarlo::TrialOutcome::Feasible { metric, solution } => {
            println!("metric ({}): {metric:.12e}", config.strategy.metric_name());
            if let Some(sol) = solution {
                println!("transmit power: {:.12e} W", sol.transmit_power);
                println!("C_d: {:.9} b/s/Hz", sol.c_dest);
                for (idx, ce) in sol.c_eav.iter().enumerate() {
                    println!("C_e[{idx}]: {ce:.9} b/s/Hz");
                }
                println!(
                    "C_s: {:.9} b/s/Hz{}",
                    sol.secrecy_capacity,
                    if sol.objective_is_bound { " (ergodic lower bound)" } else { "" }
                );
                println!("weights:");
                for (idx, w) in sol.w.iter().enumerate() {
                    println!("  w[{idx}] = {:+.9e} {:+.9e}j", w.re, w.im);
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        coopbeam::montecarlo::TrialOutcome::Infeasible(reason) => {
            println!("infeasible: {reason}");
            Ok(ExitCode::from(EXIT_INFEASIBLE))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Solve { config, seed } => match run_solve(config, seed) {
            Ok(code) => code,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_CONFIG)
            }
        },
        Command::Sweep { config, seed, trials, out, format } => {
            let mut sweep_config = match load_config(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_CONFIG);
                }
            };
            apply_overrides(&mut sweep_config, seed, trials);
            let result = match run_sweep(&sweep_config) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_CONFIG);
                }
            };
            let config_path = config.map(|p| p.display().to_string());
            if let Err(e) = write_output(&result, config_path, &out, format) {
                eprintln!("error: {e}");
                return ExitCode::FAILURE;
            }
            if all_infeasible(&result) {
                ExitCode::from(EXIT_INFEASIBLE)
            } else {
                ExitCode::SUCCESS
            }
        }
        Command::Figure { preset, seed, trials, out, format } => {
            let seed = seed.unwrap_or(1);
            let trials = trials.unwrap_or(1000);
            let configs = preset_configs(preset, seed, trials);
            let mut rows = Vec::new();
            let mut metadata = None;
            for cfg in &configs {
                match run_sweep(cfg) {
                    Ok(mut result) => {
                        rows.append(&mut result.rows);
                        metadata.get_or_insert(result.metadata);
                    }
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(EXIT_CONFIG);
                    }
                }
            }
            let result = SweepResult { rows, metadata: metadata.expect("at least one sweep") };
            if let Err(e) = write_output(&result, None, &out, format) {
                eprintln!("error: {e}");
                return ExitCode::FAILURE;
            }
            if all_infeasible(&result) {
                ExitCode::from(EXIT_INFEASIBLE)
            } else {
                ExitCode::SUCCESS
            }
        }
    }
}
