//! Repeated seeded runs comparing estimator configurations.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::log::Outcome;
use super::runner::{prepare_map, run_scenario_with_map, RunFailure};
use super::scenario::{Estimator, Scenario};

/// Seed of run `index` derived from a base seed (SplitMix64 finalizer).
pub fn run_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub seed: u64,
    pub final_position_error: f64,
    pub trajectory_rmse: f64,
    pub mean_nees: Option<f64>,
    pub goal_reached: bool,
    pub duration: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSummary {
    pub estimator: String,
    pub runs: Vec<RunMetrics>,
    /// RMS over runs of the final planar estimation error.
    pub final_position_rmse: f64,
    /// RMS over runs of each run's trajectory RMSE.
    pub trajectory_rmse: f64,
    /// Mean over runs of the time-averaged NEES, when defined.
    pub mean_nees: Option<f64>,
    pub goal_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub scenario: String,
    pub base_seed: u64,
    pub n_runs: usize,
    pub estimators: Vec<EstimatorSummary>,
}

fn rms(vals: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = vals.fold((0.0, 0usize), |(s, n), v| (s + v * v, n + 1));
    if n == 0 {
        0.0
    } else {
        (s / n as f64).sqrt()
    }
}

/// Runs `n_runs` seeded episodes for each estimator. Run `i` uses the same
/// seed under every estimator, so the truth noise sequences coincide until
/// the trajectories diverge. Results do not depend on thread scheduling.
pub fn monte_carlo(scenario: &Scenario, estimators: &[Estimator], n_runs: usize) -> Result<MonteCarloSummary, RunFailure> {
    let map = prepare_map(scenario).map_err(|error| RunFailure {
        error,
        partial: Box::new(super::log::TrajectoryLog::new(scenario)),
    })?;
    let mut out = Vec::with_capacity(estimators.len());
    for est in estimators {
        let base = scenario.with_estimator(est.clone());
        let runs: Vec<RunMetrics> = (0..n_runs as u64)
            .into_par_iter()
            .map(|i| {
                let s = base.with_seed(run_seed(scenario.seed, i));
                let log = run_scenario_with_map(&s, map.as_ref())?;
                Ok(RunMetrics {
                    seed: s.seed,
                    final_position_error: log.final_position_error().unwrap_or(0.0),
                    trajectory_rmse: log.trajectory_rmse().unwrap_or(0.0),
                    mean_nees: log.mean_nees(),
                    goal_reached: log.outcome == Outcome::GoalReached,
                    duration: log.duration(),
                })
            })
            .collect::<Result<_, RunFailure>>()?;
        let nees: Vec<f64> = runs.iter().filter_map(|r| r.mean_nees).collect();
        out.push(EstimatorSummary {
            estimator: est.label(),
            final_position_rmse: rms(runs.iter().map(|r| r.final_position_error)),
            trajectory_rmse: rms(runs.iter().map(|r| r.trajectory_rmse)),
            mean_nees: (!nees.is_empty()).then(|| nees.iter().sum::<f64>() / nees.len() as f64),
            goal_rate: runs.iter().filter(|r| r.goal_reached).count() as f64 / n_runs.max(1) as f64,
            runs,
        });
    }
    Ok(MonteCarloSummary {
        scenario: scenario.name.clone(),
        base_seed: scenario.seed,
        n_runs,
        estimators: out,
    })
}
