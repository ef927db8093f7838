//! Seeded trial runner and sweep aggregator for the Monte-Carlo experiments.
//!
//! Every trial is a pure function of a seed derived from
//! `(base_seed, N, J, trial index)`, so sweeps are reproducible across runs
//! and across worker counts; the aggregation walks trials in index order and
//! is therefore scheduling-invariant.

use rayon::prelude::*;
use thiserror::Error;

use crate::channel::{sample_scenario, GeometryConfig, PRNG_ID};
use crate::design::{
    imperfect_min_power, imperfect_multi_max, imperfect_single_max, matched_filter_max,
    matched_filter_min_power, max_secrecy_single, min_power_single, null_max_secrecy_multi,
    null_min_power_multi, CsiMode, DesignProblem, Objective, DEFAULT_MAX_ITER,
    DEFAULT_POWER_THRESHOLD,
};
use crate::numerics::CMatrix;
use crate::secrecy::{direct_min_power, direct_secrecy, BeamformerSolution, Stage1Accounting};
use crate::channel::Scenario;
use crate::design::evaluate_solution;

/// Environment variable capping the number of sweep workers.
pub const THREADS_ENV: &str = "SECRECY_THREADS";

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    CoopMinPower,
    CoopMaxSecrecy,
    DirectMinPower,
    DirectMaxSecrecy,
}

impl Strategy {
    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::CoopMinPower => "coop_min_power",
            Strategy::CoopMaxSecrecy => "coop_max_secrecy",
            Strategy::DirectMinPower => "direct_min_power",
            Strategy::DirectMaxSecrecy => "direct_max_secrecy",
        }
    }

    pub fn parse(s: &str) -> Option<Strategy> {
        match s {
            "coop_min_power" => Some(Strategy::CoopMinPower),
            "coop_max_secrecy" => Some(Strategy::CoopMaxSecrecy),
            "direct_min_power" => Some(Strategy::DirectMinPower),
            "direct_max_secrecy" => Some(Strategy::DirectMaxSecrecy),
            _ => None,
        }
    }

    pub fn is_direct(&self) -> bool {
        matches!(self, Strategy::DirectMinPower | Strategy::DirectMaxSecrecy)
    }

    pub fn is_min_power(&self) -> bool {
        matches!(self, Strategy::CoopMinPower | Strategy::DirectMinPower)
    }

    /// Name of the per-trial metric this strategy produces.
    pub fn metric_name(&self) -> &'static str {
        if self.is_min_power() {
            "transmit_power_w"
        } else {
            "secrecy_capacity_bps_hz"
        }
    }

    pub fn objective(&self) -> Objective {
        if self.is_min_power() {
            Objective::MinPowerFixedSecrecy
        } else {
            Objective::MaxSecrecyFixedPower
        }
    }
}

/// Full description of one Monte-Carlo sweep.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub geometry: GeometryConfig,
    pub n_values: Vec<usize>,
    pub j_values: Vec<usize>,
    pub strategy: Strategy,
    /// C_s⁰ in bits/s/Hz for min-power strategies, P₀ in watts otherwise.
    pub fixed_value: f64,
    pub trials: usize,
    pub base_seed: u64,
    /// When set, eavesdropper CSI is imperfect with `R_Δ = εI`.
    pub csi_error_variance: Option<f64>,
    pub stage1: Stage1Accounting,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), SweepError> {
        self.geometry
            .validate()
            .map_err(|e| SweepError::InvalidConfig(e.to_string()))?;
        if self.trials < 1 {
            return Err(SweepError::InvalidConfig("trials must be >= 1".into()));
        }
        if self.n_values.is_empty() || self.j_values.is_empty() {
            return Err(SweepError::InvalidConfig("grid must be non-empty".into()));
        }
        if self.n_values.iter().any(|&n| n < 1) {
            return Err(SweepError::InvalidConfig("n_values entries must be >= 1".into()));
        }
        if !(self.fixed_value > 0.0) {
            return Err(SweepError::InvalidConfig(format!(
                "fixed_value must be > 0, got {}",
                self.fixed_value
            )));
        }
        if let Some(eps) = self.csi_error_variance {
            if !(eps >= 0.0) {
                return Err(SweepError::InvalidConfig(format!(
                    "csi_error_variance must be >= 0, got {eps}"
                )));
            }
        }
        Ok(())
    }
}

/// One aggregated grid point.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SweepRow {
    pub n_nodes: usize,
    pub n_eavesdroppers: usize,
    pub strategy: Strategy,
    pub metric_name: String,
    /// Mean over contributing (feasible) trials; `None` if every trial was
    /// infeasible.
    pub mean: Option<f64>,
    pub stderr: Option<f64>,
    pub infeasible: usize,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SweepMetadata {
    pub base_seed: u64,
    pub prng: String,
    pub artifact_version: String,
    pub config_echo: String,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub metadata: SweepMetadata,
}

/// Outcome of a single trial.
#[derive(Debug)]
pub enum TrialOutcome {
    Feasible { metric: f64, solution: Option<BeamformerSolution> },
    Infeasible(String),
}

impl TrialOutcome {
    pub fn metric(&self) -> Option<f64> {
        match self {
            TrialOutcome::Feasible { metric, .. } => Some(*metric),
            TrialOutcome::Infeasible(_) => None,
        }
    }
}

const SPLITMIX_GAMMA: u64 = 0x9e3779b97f4a7c15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(SPLITMIX_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Deterministic per-trial seed; depends only on the tuple, not on execution
/// order.
pub fn trial_seed(base_seed: u64, n: usize, j: usize, trial: usize) -> u64 {
    let mut s = splitmix64(base_seed);
    s = splitmix64(s ^ (n as u64).wrapping_mul(SPLITMIX_GAMMA));
    s = splitmix64(s ^ (j as u64).wrapping_mul(0xc2b2ae3d27d4eb4f));
    splitmix64(s ^ trial as u64)
}

fn direct_gains(scenario: &Scenario) -> (num_complex::Complex64, Vec<num_complex::Complex64>) {
    let h0 = scenario.h[0];
    let g0 = (0..scenario.g.ncols()).map(|j| scenario.g[(0, j)]).collect();
    (h0, g0)
}

/// Run one trial: dispatch the strategy to the appropriate solver and report
/// the per-trial metric. Solver failures become `Infeasible` records rather
/// than aborting the sweep.
pub fn run_trial(scenario: &Scenario, problem: &DesignProblem, strategy: Strategy) -> TrialOutcome {
    let h = &scenario.h;
    let g = &scenario.g;
    let j = g.ncols();
    let sigma2 = scenario.noise_power;

    let result: Result<BeamformerSolution, String> = match strategy {
        Strategy::DirectMaxSecrecy => {
            let (h0, g0) = direct_gains(scenario);
            let cs = direct_secrecy(problem.budget, h0, &g0, sigma2);
            return TrialOutcome::Feasible { metric: cs, solution: None };
        }
        Strategy::DirectMinPower => {
            let (h0, g0) = direct_gains(scenario);
            return match direct_min_power(problem.budget, h0, &g0, sigma2) {
                Ok(p) => TrialOutcome::Feasible { metric: p, solution: None },
                Err(e) => TrialOutcome::Infeasible(e.to_string()),
            };
        }
        Strategy::CoopMaxSecrecy => match (&problem.csi, j) {
            (_, 0) => matched_filter_max(h, sigma2, problem.budget).map_err(|e| e.to_string()),
            (CsiMode::Perfect, 1) => {
                max_secrecy_single(h, &scenario.g_col(0), sigma2, problem.budget)
                    .map_err(|e| e.to_string())
            }
            (CsiMode::Perfect, _) => {
                null_max_secrecy_multi(h, g, sigma2, problem.budget).map_err(|e| e.to_string())
            }
            (CsiMode::Imperfect { r_delta }, 1) => {
                imperfect_single_max(h, &scenario.g_col(0), r_delta, sigma2, problem.budget)
                    .map_err(|e| e.to_string())
            }
            (CsiMode::Imperfect { r_delta }, _) => {
                imperfect_multi_max(h, g, r_delta, sigma2, problem.budget)
                    .map_err(|e| e.to_string())
            }
        },
        Strategy::CoopMinPower => match (&problem.csi, j) {
            (_, 0) => {
                matched_filter_min_power(h, sigma2, problem.budget).map_err(|e| e.to_string())
            }
            (CsiMode::Perfect, 1) => min_power_single(
                h,
                &scenario.g_col(0),
                sigma2,
                problem.budget,
                DEFAULT_POWER_THRESHOLD,
                DEFAULT_MAX_ITER,
            )
            .map(|(sol, _)| sol)
            .map_err(|e| e.to_string()),
            (CsiMode::Perfect, _) => {
                null_min_power_multi(h, g, sigma2, problem.budget).map_err(|e| e.to_string())
            }
            (CsiMode::Imperfect { r_delta }, _) => imperfect_min_power(
                h,
                g,
                r_delta,
                sigma2,
                problem.budget,
                DEFAULT_POWER_THRESHOLD,
                DEFAULT_MAX_ITER,
            )
            .map(|(sol, _)| sol)
            .map_err(|e| e.to_string()),
        },
    };

    match result {
        Ok(mut solution) => {
            // Stage-1 MRC accounting changes the reported capacities only.
            if problem.stage1.enabled {
                if let Ok(re) = evaluate_solution(
                    &solution.w,
                    h,
                    &(0..j).map(|col| scenario.g_col(col)).collect::<Vec<_>>(),
                    sigma2,
                    &problem.stage1,
                ) {
                    solution.c_dest = re.c_dest;
                    solution.c_eav = re.c_eav;
                    solution.secrecy_capacity = re.secrecy_capacity;
                }
            }
            let metric = match strategy.objective() {
                Objective::MinPowerFixedSecrecy => solution.transmit_power,
                Objective::MaxSecrecyFixedPower => solution.secrecy_capacity,
            };
            TrialOutcome::Feasible { metric, solution: Some(solution) }
        }
        Err(msg) => TrialOutcome::Infeasible(msg),
    }
}

fn aggregate(metrics: &[Option<f64>]) -> (Option<f64>, Option<f64>, usize) {
    let contributing: Vec<f64> = metrics.iter().flatten().copied().collect();
    let infeasible = metrics.len() - contributing.len();
    if contributing.is_empty() {
        return (None, None, infeasible);
    }
    let m = contributing.len() as f64;
    let mean = contributing.iter().sum::<f64>() / m;
    let stderr = if contributing.len() < 2 {
        0.0
    } else {
        let var = contributing.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
        (var / m).sqrt()
    };
    (Some(mean), Some(stderr), infeasible)
}

fn problem_for(config: &SweepConfig, n: usize) -> DesignProblem {
    let csi = match config.csi_error_variance {
        Some(eps) if eps > 0.0 => {
            CsiMode::Imperfect { r_delta: CMatrix::identity(n, n).scale(eps) }
        }
        _ => CsiMode::Perfect,
    };
    DesignProblem {
        objective: config.strategy.objective(),
        budget: config.fixed_value,
        csi,
        stage1: config.stage1,
    }
}

fn sweep_point(config: &SweepConfig, n: usize, j: usize) -> SweepRow {
    // Direct transmission involves only the source, so its trials reuse an
    // N = 1 geometry and seed; the metric is then identical across grid N.
    let eff_n = if config.strategy.is_direct() { 1 } else { n };
    let geometry = GeometryConfig {
        n_nodes: eff_n,
        n_eavesdroppers: j,
        ..config.geometry.clone()
    };
    let problem = problem_for(config, eff_n);

    let metrics: Vec<Option<f64>> = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let seed = trial_seed(config.base_seed, eff_n, j, trial);
            match sample_scenario(&geometry, seed) {
                Ok(scenario) => run_trial(&scenario, &problem, config.strategy).metric(),
                Err(_) => None,
            }
        })
        .collect();

    let (mean, stderr, infeasible) = aggregate(&metrics);
    SweepRow {
        n_nodes: n,
        n_eavesdroppers: j,
        strategy: config.strategy,
        metric_name: config.strategy.metric_name().to_string(),
        mean,
        stderr,
        infeasible,
        trials: config.trials,
    }
}

/// Run the full grid. Deterministic for a fixed config, regardless of the
/// number of workers.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult, SweepError> {
    config.validate()?;

    let run = || {
        let mut rows = Vec::new();
        for &n in &config.n_values {
            for &j in &config.j_values {
                rows.push(sweep_point(config, n, j));
            }
        }
        rows
    };

    let rows = match thread_cap() {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| SweepError::InvalidConfig(format!("{THREADS_ENV}: {e}")))?
            .install(run),
        None => run(),
    };

    Ok(SweepResult {
        rows,
        metadata: SweepMetadata {
            base_seed: config.base_seed,
            prng: PRNG_ID.to_string(),
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            config_echo: format!("{config:?}"),
        },
    })
}

fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.parse::<usize>().ok().filter(|&t| t >= 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_config(strategy: Strategy, fixed_value: f64) -> SweepConfig {
        SweepConfig {
            geometry: GeometryConfig::default(),
            n_values: vec![10],
            j_values: vec![1],
            strategy,
            fixed_value,
            trials: 4,
            base_seed: 99,
            csi_error_variance: None,
            stage1: Stage1Accounting::off(),
        }
    }

    #[test]
    fn trial_seed_is_order_free_and_spread() {
        let a = trial_seed(1, 10, 2, 0);
        let b = trial_seed(1, 10, 2, 1);
        let c = trial_seed(1, 10, 3, 0);
        let d = trial_seed(1, 11, 2, 0);
        assert!(a != b && a != c && a != d && b != c);
        assert_eq!(a, trial_seed(1, 10, 2, 0));
    }

    #[test]
    fn coop_metric_matches_solution_recomputation() {
        let geometry = GeometryConfig { n_nodes: 6, n_eavesdroppers: 1, ..Default::default() };
        let scenario = sample_scenario(&geometry, 7).unwrap();
        let problem = DesignProblem {
            objective: Objective::MaxSecrecyFixedPower,
            budget: 3.16e-3,
            csi: CsiMode::Perfect,
            stage1: Stage1Accounting::off(),
        };
        match run_trial(&scenario, &problem, Strategy::CoopMaxSecrecy) {
            TrialOutcome::Feasible { metric, solution: Some(sol) } => {
                assert_eq!(metric, sol.secrecy_capacity);
                let re = evaluate_solution(
                    &sol.w,
                    &scenario.h,
                    &[scenario.g_col(0)],
                    scenario.noise_power,
                    &Stage1Accounting::off(),
                )
                .unwrap();
                assert!((re.secrecy_capacity - metric).abs() < 1e-12);
            }
            other => panic!("unexpected outcome {other:?}"),
        }
    }

    #[test]
    fn insufficient_nodes_is_infeasible_not_fatal() {
        let geometry = GeometryConfig { n_nodes: 2, n_eavesdroppers: 3, ..Default::default() };
        let scenario = sample_scenario(&geometry, 3).unwrap();
        let problem = DesignProblem {
            objective: Objective::MinPowerFixedSecrecy,
            budget: 3.0,
            csi: CsiMode::Perfect,
            stage1: Stage1Accounting::off(),
        };
        let outcome = run_trial(&scenario, &problem, Strategy::CoopMinPower);
        assert!(matches!(outcome, TrialOutcome::Infeasible(_)));
    }

    #[test]
    fn cooperation_beats_direct_when_eavesdropper_is_near() {
        // eavesdroppers inside the destination range: direct secrecy is zero
        let geometry = GeometryConfig {
            n_nodes: 10,
            n_eavesdroppers: 1,
            eav_distance_min: 3.0,
            eav_distance_max: 20.0,
            ..Default::default()
        };
        let p0 = 3.16e-3;
        let problem = DesignProblem {
            objective: Objective::MaxSecrecyFixedPower,
            budget: p0,
            csi: CsiMode::Perfect,
            stage1: Stage1Accounting::off(),
        };
        for seed in 0..10 {
            let scenario = sample_scenario(&geometry, seed).unwrap();
            let direct = run_trial(&scenario, &problem, Strategy::DirectMaxSecrecy);
            assert_eq!(direct.metric(), Some(0.0));
            let coop = run_trial(&scenario, &problem, Strategy::CoopMaxSecrecy);
            assert!(coop.metric().unwrap() > 0.0);
        }
    }

    #[test]
    fn single_trial_row_equals_run_trial_metric() {
        let mut config = base_config(Strategy::CoopMaxSecrecy, 3.16e-3);
        config.trials = 1;
        let result = run_sweep(&config).unwrap();
        assert_eq!(result.rows.len(), 1);

        let geometry = GeometryConfig {
            n_nodes: 10,
            n_eavesdroppers: 1,
            ..config.geometry.clone()
        };
        let seed = trial_seed(config.base_seed, 10, 1, 0);
        let scenario = sample_scenario(&geometry, seed).unwrap();
        let problem = problem_for(&config, 10);
        let metric = run_trial(&scenario, &problem, config.strategy).metric().unwrap();
        assert_eq!(result.rows[0].mean, Some(metric));
        assert_eq!(result.rows[0].stderr, Some(0.0));
    }

    #[test]
    fn sweep_is_reproducible() {
        let config = base_config(Strategy::CoopMinPower, 3.0);
        let a = run_sweep(&config).unwrap();
        let b = run_sweep(&config).unwrap();
        assert_eq!(a.rows, b.rows);
    }

    #[test]
    fn direct_rows_constant_in_n() {
        let mut config = base_config(Strategy::DirectMinPower, 1.0);
        config.n_values = vec![5, 20, 50];
        config.trials = 16;
        let result = run_sweep(&config).unwrap();
        assert_eq!(result.rows.len(), 3);
        for row in &result.rows[1..] {
            assert_eq!(row.mean, result.rows[0].mean);
            assert_eq!(row.stderr, result.rows[0].stderr);
            assert_eq!(row.infeasible, result.rows[0].infeasible);
        }
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut config = base_config(Strategy::CoopMinPower, 3.0);
        config.trials = 0;
        assert!(run_sweep(&config).is_err());
        let mut config = base_config(Strategy::CoopMinPower, 3.0);
        config.n_values.clear();
        assert!(run_sweep(&config).is_err());
        let mut config = base_config(Strategy::CoopMinPower, 0.0);
        config.fixed_value = 0.0;
        assert!(run_sweep(&config).is_err());
    }
}
