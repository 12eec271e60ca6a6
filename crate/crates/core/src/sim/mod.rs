//! Deterministic closed-loop simulator.

pub mod log;
pub mod monte_carlo;
pub mod runner;
pub mod scenario;
pub mod sensors;

pub use log::{parse_csv, CsvError, CsvRow, Outcome, StepRecord, TrajectoryLog, CSV_HEADER};
pub use monte_carlo::{monte_carlo, run_seed, EstimatorSummary, MonteCarloSummary, RunMetrics};
pub use runner::{integrate_truth, prepare_map, run_scenario, run_scenario_with_map, RunFailure, TRUTH_SUBSTEP};
pub use scenario::{Estimator, EstimatorFile, NoiseSpec, PoseDeg, Scenario, ScenarioError, ScenarioFile};
