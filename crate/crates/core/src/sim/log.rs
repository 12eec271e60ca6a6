//! Per-step trajectory log and its CSV form.

use std::fmt::Write as _;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use super::scenario::Scenario;
use crate::control::{GuidanceMode, NavVariables, VelocityCommand};
use crate::ekf::Measurement;
use crate::geometry::Pose;
use crate::odometry::WheelSpeeds;

pub const CSV_HEADER: &str = "t,x_true,y_true,theta_true,x_est,y_est,theta_est,cov_trace,v,omega,rho,alpha,phi,V,mode";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    GoalReached,
    #[default]
    TimeLimit,
}

/// State at time `t` and the command held until the next step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub truth: Pose,
    pub estimate: Pose,
    pub cov: Matrix3<f64>,
    pub command: VelocityCommand,
    pub wheel_cmd: WheelSpeeds,
    /// Navigation variables of the active target, from the estimate.
    pub nav: NavVariables,
    pub lyapunov: f64,
    pub mode: GuidanceMode,
    pub target_index: usize,
    /// True body clearance to the nearest obstacle; negative means contact.
    pub clearance: f64,
    pub nees: Option<f64>,
    /// Measurements taken at the end of this step and fused into the next estimate.
    pub measurements: Vec<Measurement>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryLog {
    pub scenario_name: String,
    pub seed: u64,
    pub goal: Pose,
    pub records: Vec<StepRecord>,
    pub outcome: Outcome,
}

impl TrajectoryLog {
    pub fn new(scenario: &Scenario) -> Self {
        Self {
            scenario_name: scenario.name.clone(),
            seed: scenario.seed,
            goal: scenario.goal,
            records: Vec::new(),
            outcome: Outcome::TimeLimit,
        }
    }

    pub fn last(&self) -> Option<&StepRecord> {
        self.records.last()
    }

    pub fn duration(&self) -> f64 {
        self.last().map_or(0.0, |r| r.t)
    }

    pub fn min_clearance(&self) -> f64 {
        self.records.iter().map(|r| r.clearance).fold(f64::INFINITY, f64::min)
    }

    /// Time-averaged NEES over steps with an invertible covariance.
    pub fn mean_nees(&self) -> Option<f64> {
        let vals: Vec<f64> = self.records.iter().filter_map(|r| r.nees).collect();
        if vals.is_empty() {
            return None;
        }
        Some(vals.iter().sum::<f64>() / vals.len() as f64)
    }

    /// Final planar distance between estimate and truth.
    pub fn final_position_error(&self) -> Option<f64> {
        self.last().map(|r| r.truth.position().distance(&r.estimate.position()))
    }

    /// Root-mean-square planar estimation error over the whole run.
    pub fn trajectory_rmse(&self) -> Option<f64> {
        if self.records.is_empty() {
            return None;
        }
        let ss: f64 = self
            .records
            .iter()
            .map(|r| r.truth.position().distance(&r.estimate.position()).powi(2))
            .sum();
        Some((ss / self.records.len() as f64).sqrt())
    }

    /// CSV with [`CSV_HEADER`]; numbers use shortest round-trip formatting,
    /// so equal logs give byte-identical text.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.records.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.t,
                r.truth.x,
                r.truth.y,
                r.truth.theta.radians(),
                r.estimate.x,
                r.estimate.y,
                r.estimate.theta.radians(),
                r.cov.trace(),
                r.command.v,
                r.command.omega,
                r.nav.rho,
                r.nav.alpha.radians(),
                r.nav.phi.radians(),
                r.lyapunov,
                r.mode.as_str()
            );
        }
        out
    }
}

/// One parsed CSV row.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub t: f64,
    pub x_true: f64,
    pub y_true: f64,
    pub theta_true: f64,
    pub x_est: f64,
    pub y_est: f64,
    pub theta_est: f64,
    pub cov_trace: f64,
    pub v: f64,
    pub omega: f64,
    pub rho: f64,
    pub alpha: f64,
    pub phi: f64,
    pub lyapunov: f64,
    pub mode: GuidanceMode,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct CsvError {
    pub line: usize,
    pub message: String,
}

/// Parses CSV produced by [`TrajectoryLog::to_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>, CsvError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => {
            return Err(CsvError {
                line: 1,
                message: format!("expected header `{CSV_HEADER}`"),
            })
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| CsvError { line: i + 1, message };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 15 {
            return Err(err(format!("expected 15 fields, got {}", fields.len())));
        }
        let mut nums = [0.0f64; 14];
        for (k, f) in fields[..14].iter().enumerate() {
            nums[k] = f
                .trim()
                .parse()
                .map_err(|_| err(format!("field {} is not a number: `{f}`", k + 1)))?;
        }
        let mode = match fields[14].trim() {
            "GOAL_SEEK" => GuidanceMode::GoalSeek,
            "AVOID" => GuidanceMode::Avoid,
            other => return Err(err(format!("unknown mode `{other}`"))),
        };
        let [t, x_true, y_true, theta_true, x_est, y_est, theta_est, cov_trace, v, omega, rho, alpha, phi, lyapunov] = nums;
        rows.push(CsvRow {
            t,
            x_true,
            y_true,
            theta_true,
            x_est,
            y_est,
            theta_est,
            cov_trace,
            v,
            omega,
            rho,
            alpha,
            phi,
            lyapunov,
            mode,
        });
    }
    Ok(rows)
}
