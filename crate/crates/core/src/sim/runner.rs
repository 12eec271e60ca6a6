//! Closed-loop simulation: truth integration, sensing, estimation, guidance
//! and control, advanced in lockstep at a fixed sample interval.

use std::fmt;

use nalgebra::Matrix3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::log::{Outcome, StepRecord, TrajectoryLog};
use super::scenario::{Estimator, Scenario};
use super::sensors::{map_readings, synthesize_measurements, ultrasonic_readings};
use crate::control::{
    detour_command, lyapunov_control, lyapunov_value, navigation_variables, nearest_frontal, terminal_command, Guidance,
    GuidanceMode, NavVariables, VelocityCommand, EPS_GOAL,
};
use crate::ekf::{correct, predict, GaussianBelief, ProcessNoiseParams};
use crate::error::{NavError, Result};
use crate::geometry::Pose;
use crate::scan::{simulate_tilt_scan, slice_reduce, ObstacleMap};

/// Largest sub-step used when integrating the true motion.
pub const TRUTH_SUBSTEP: f64 = 0.01;

/// Integrates the unicycle `ẋ = v cos θ, ẏ = v sin θ, θ̇ = ω` over `dt` with
/// classical fourth-order Runge–Kutta, splitting `dt` into sub-steps no
/// longer than [`TRUTH_SUBSTEP`].
pub fn integrate_truth(pose: &Pose, v: f64, omega: f64, dt: f64) -> Result<Pose> {
    if !(v.is_finite() && omega.is_finite()) {
        return Err(NavError::NonFinite("body velocity"));
    }
    if !(dt.is_finite() && dt >= 0.0) {
        return Err(NavError::invalid("dt", format!("must be >= 0, got {dt}")));
    }
    if dt == 0.0 {
        return Ok(*pose);
    }
    let n = (dt / TRUTH_SUBSTEP).ceil().max(1.0) as usize;
    let h = dt / n as f64;
    let f = |th: f64| (v * th.cos(), v * th.sin(), omega);
    let (mut x, mut y, mut th) = (pose.x, pose.y, pose.theta.radians());
    for _ in 0..n {
        let k1 = f(th);
        let k2 = f(th + 0.5 * h * k1.2);
        let k3 = f(th + 0.5 * h * k2.2);
        let k4 = f(th + h * k3.2);
        x += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        y += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        th += h * omega;
    }
    Pose::new(x, y, th)
}

/// A run that stopped on an error, with everything logged up to that point.
#[derive(Clone, Debug)]
pub struct RunFailure {
    pub error: NavError,
    pub partial: Box<TrajectoryLog>,
}

impl fmt::Display for RunFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "simulation failed after {} steps: {}",
            self.partial.records.len(),
            self.error
        )
    }
}

impl std::error::Error for RunFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

/// Builds the slice-reduced obstacle map from the scenario's pre-run scan,
/// if it has one.
pub fn prepare_map(scenario: &Scenario) -> Result<Option<ObstacleMap>> {
    match &scenario.mapping {
        None => Ok(None),
        Some(m) => {
            let frames = simulate_tilt_scan(&scenario.world, &m.mount, &m.scan, &m.scan_pose)?;
            Ok(Some(slice_reduce(&frames, &m.band)?))
        }
    }
}

pub fn run_scenario(scenario: &Scenario) -> std::result::Result<TrajectoryLog, RunFailure> {
    let map = prepare_map(scenario).map_err(|error| RunFailure {
        error,
        partial: Box::new(TrajectoryLog::new(scenario)),
    })?;
    run_scenario_with_map(scenario, map.as_ref())
}

fn gaussian(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    let z: f64 = rng.sample(StandardNormal);
    sigma * z
}

/// Whether the estimate satisfies the goal tolerance for the final goal.
/// Inside [`EPS_GOAL`] the bearings are pinned to zero, so the heading is
/// checked directly.
fn at_goal(scenario: &Scenario, est: &Pose, nav: &NavVariables) -> bool {
    let tol = &scenario.tolerance;
    if nav.rho >= tol.rho {
        return false;
    }
    if nav.rho < EPS_GOAL {
        return scenario.goal.theta.diff(est.theta).radians().abs() < tol.alpha;
    }
    nav.alpha.radians().abs() < tol.alpha && nav.phi.radians().abs() < tol.phi
}

/// Runs one closed-loop episode with a precomputed obstacle map.
///
/// Each step logs the state at time `t` and the command held over
/// `[t, t + dt)`; the controller only ever sees the estimator's output.
pub fn run_scenario_with_map(scenario: &Scenario, map: Option<&ObstacleMap>) -> std::result::Result<TrajectoryLog, RunFailure> {
    let mut log = TrajectoryLog::new(scenario);
    let fail = |error: NavError, log: TrajectoryLog| RunFailure {
        error,
        partial: Box::new(log),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let noise = &scenario.noise;
    let geom = &scenario.robot;
    let dt = scenario.dt;

    let s0 = scenario.start;
    let truth0 = Pose::new(
        s0.x + gaussian(&mut rng, noise.initial_position_sigma),
        s0.y + gaussian(&mut rng, noise.initial_position_sigma),
        s0.theta.radians() + gaussian(&mut rng, noise.initial_heading_sigma),
    );
    let mut truth = match truth0 {
        Ok(p) => p,
        Err(e) => return Err(fail(e, log)),
    };
    let p0 = Matrix3::from_diagonal(&nalgebra::Vector3::new(
        noise.initial_position_sigma.powi(2),
        noise.initial_position_sigma.powi(2),
        noise.initial_heading_sigma.powi(2),
    ));
    let mut belief = GaussianBelief { mean: s0, cov: p0 };
    let process = ProcessNoiseParams {
        delta: noise.wheel_delta,
    };

    let mut guidance = Guidance::new(scenario.hysteresis);
    let targets: Vec<Pose> = scenario
        .waypoints
        .iter()
        .copied()
        .chain(std::iter::once(scenario.goal))
        .collect();
    let mut target_idx = 0;
    let n_steps = (scenario.t_max / dt).round() as usize;
    let body_clearance = |p: &Pose| scenario.world.clearance(p.position(), 0.0, geom.body_height) - geom.body_radius;

    for k in 0..=n_steps {
        let t = k as f64 * dt;
        let est = belief.mean;

        while target_idx + 1 < targets.len()
            && navigation_variables(&est, &targets[target_idx]).rho < scenario.tolerance.waypoint_radius
        {
            target_idx += 1;
        }
        let target = targets[target_idx];
        let final_leg = target_idx + 1 == targets.len();
        let nav = navigation_variables(&est, &target);

        let mut readings = Vec::new();
        if scenario.avoidance {
            readings = ultrasonic_readings(
                &truth,
                &scenario.world,
                &scenario.sensors.ultrasonic,
                noise.ultrasonic_sigma,
                &mut rng,
            );
            if let Some(m) = map {
                readings.extend(map_readings(&est, m, scenario.sensors.map_reading_range));
            }
        }
        let mode = if scenario.avoidance {
            guidance.update(&readings, &nav, &scenario.pf)
        } else {
            GuidanceMode::GoalSeek
        };

        let reached = final_leg && at_goal(scenario, &est, &nav);
        let command = if reached {
            VelocityCommand::STOP
        } else {
            match mode {
                GuidanceMode::GoalSeek if nav.rho < EPS_GOAL => {
                    terminal_command(&est, &target, &scenario.gains, &scenario.limits, 0.0)
                }
                GuidanceMode::GoalSeek => lyapunov_control(&nav, &scenario.gains, &scenario.limits),
                GuidanceMode::Avoid => {
                    let nearest = nearest_frontal(&readings, &scenario.pf).map(|r| r.distance);
                    detour_command(
                        &est,
                        target.position(),
                        guidance.side(),
                        nearest,
                        &scenario.pf,
                        &scenario.limits,
                    )
                }
            }
        };
        let wheel_cmd = geom.wheel_speeds_for(command.v, command.omega);

        let mut record = StepRecord {
            t,
            truth,
            estimate: est,
            cov: belief.cov,
            command,
            wheel_cmd,
            nav,
            lyapunov: lyapunov_value(&nav, &scenario.gains),
            mode,
            target_index: target_idx,
            clearance: body_clearance(&truth),
            nees: belief.nees(&truth),
            measurements: Vec::new(),
        };

        if reached || k == n_steps {
            log.records.push(record);
            log.outcome = if reached { Outcome::GoalReached } else { Outcome::TimeLimit };
            return Ok(log);
        }

        // actuation noise: each wheel deviates with variance δ·ω²
        let actual = crate::odometry::WheelSpeeds {
            omega_l: wheel_cmd.omega_l + gaussian(&mut rng, (noise.wheel_delta).sqrt() * wheel_cmd.omega_l.abs()),
            omega_r: wheel_cmd.omega_r + gaussian(&mut rng, (noise.wheel_delta).sqrt() * wheel_cmd.omega_r.abs()),
        };
        let (v_true, w_true) = geom.body_velocity(&actual);
        let next_truth = integrate_truth(&truth, v_true, w_true, dt);

        let step = next_truth.and_then(|nt| {
            let predicted = predict(&belief, &wheel_cmd, dt, geom, &process)?;
            let (updated, ms) = match &scenario.estimator {
                Estimator::OdometryOnly => (predicted, Vec::new()),
                Estimator::Ekf { channels } => {
                    let ms = synthesize_measurements(&nt, channels, &scenario.landmarks, &scenario.sensors, noise, &mut rng);
                    (correct(&predicted, &ms, &scenario.landmarks)?, ms)
                }
            };
            Ok((nt, updated, ms))
        });
        match step {
            Ok((nt, updated, ms)) => {
                record.measurements = ms;
                log.records.push(record);
                truth = nt;
                belief = updated;
            }
            Err(e) => {
                log.records.push(record);
                return Err(fail(e, log));
            }
        }
    }
    unreachable!("loop returns at the last step")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ekf::Channel;
    use crate::sim::scenario::ScenarioFile;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn scenario(json: &str) -> Scenario {
        ScenarioFile::from_json(json).unwrap().resolve().unwrap()
    }

    #[test]
    fn quarter_circle_example() {
        let p = integrate_truth(&Pose::default(), 1.0, 1.0, FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(p.x, 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(p.y, 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(p.theta.radians(), FRAC_PI_2, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn rk4_matches_analytic_arc(th in -3.0f64..3.0, v in -1.0f64..1.0, w in -2.0f64..2.0, dt in 1e-4f64..0.05) {
            let p = Pose::new(0.3, -0.2, th).unwrap();
            let q = integrate_truth(&p, v, w, dt).unwrap();
            let (ex, ey) = if w.abs() < 1e-9 {
                (p.x + v * dt * th.cos(), p.y + v * dt * th.sin())
            } else {
                let r = v / w;
                (p.x + r * ((th + w * dt).sin() - th.sin()), p.y - r * ((th + w * dt).cos() - th.cos()))
            };
            prop_assert!((q.x - ex).abs() < 1e-8 && (q.y - ey).abs() < 1e-8);
        }
    }

    const STRAIGHT: &str = r#"{
        "goal": {"x": 3, "y": 0, "theta_deg": 0},
        "estimator": {"type": "odometry_only"},
        "avoidance": false,
        "noise": {"wheel_delta": 0},
        "t_max": 60
    }"#;

    #[test]
    fn noiseless_straight_run_tracks_truth_exactly() {
        let log = run_scenario(&scenario(STRAIGHT)).unwrap();
        assert_eq!(log.outcome, Outcome::GoalReached);
        for r in &log.records {
            assert!((r.truth.x - r.estimate.x).abs() < 1e-6);
            assert!((r.truth.y - r.estimate.y).abs() < 1e-6);
        }
    }

    #[test]
    fn seeded_runs_are_identical() {
        let json = r#"{
            "goal": {"x": 2, "y": 2, "theta_deg": 60},
            "landmarks": [{"id": 1, "position": {"x": 3, "y": 1}}],
            "noise": {"wheel_delta": 0.01, "compass_sigma_deg": 2, "lrf_range_sigma": 0.05, "lrf_bearing_sigma_deg": 1,
                      "initial_position_sigma": 0.02, "initial_heading_sigma_deg": 1},
            "seed": 9
        }"#;
        let s = scenario(json);
        let a = run_scenario(&s).unwrap();
        let b = run_scenario(&s).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        let c = run_scenario(&s.with_seed(10)).unwrap();
        assert_ne!(a.to_csv(), c.to_csv());
    }

    #[test]
    fn controller_consumes_the_filter_output() {
        let json = r#"{
            "goal": {"x": 2, "y": 2, "theta_deg": 30},
            "landmarks": [{"id": 1, "position": {"x": 3, "y": 1}}],
            "noise": {"wheel_delta": 0.01, "compass_sigma_deg": 2, "lrf_range_sigma": 0.05, "lrf_bearing_sigma_deg": 1},
            "avoidance": false
        }"#;
        let s = scenario(json);
        let log = run_scenario(&s).unwrap();
        let process = ProcessNoiseParams {
            delta: s.noise.wheel_delta,
        };
        // replay the filter from the logged inputs
        let mut b = GaussianBelief {
            mean: s.start,
            cov: log.records[0].cov,
        };
        for r in &log.records {
            assert_eq!(r.estimate, b.mean, "t = {}", r.t);
            let nav = navigation_variables(&r.estimate, &s.goal);
            if nav.rho >= EPS_GOAL && r.command != VelocityCommand::STOP {
                assert_eq!(r.command, lyapunov_control(&nav, &s.gains, &s.limits));
            }
            b = predict(&b, &r.wheel_cmd, s.dt, &s.robot, &process).unwrap();
            b = correct(&b, &r.measurements, &s.landmarks).unwrap();
        }
    }

    #[test]
    fn covariance_stays_symmetric_psd() {
        let json = r#"{
            "goal": {"x": 2, "y": 2, "theta_deg": 90},
            "landmarks": [{"id": 1, "position": {"x": 3, "y": 1}}],
            "estimator": {"type": "ekf", "channels": ["compass_heading", "lrf_range", "lrf_bearing", "camera_bearing"]},
            "noise": {"wheel_delta": 0.01, "compass_sigma_deg": 2, "lrf_range_sigma": 0.05, "lrf_bearing_sigma_deg": 1,
                      "camera_bearing_sigma_deg": 1, "initial_position_sigma": 0.05, "initial_heading_sigma_deg": 2}
        }"#;
        let log = run_scenario(&scenario(json)).unwrap();
        for r in &log.records {
            GaussianBelief {
                mean: r.estimate,
                cov: r.cov,
            }
            .check()
            .unwrap();
        }
    }

    #[test]
    fn filter_error_returns_partial_log() {
        // an exact compass next to a hopeless range sensor: S is ill-conditioned
        let json = r#"{
            "goal": {"x": 2, "y": 0},
            "landmarks": [{"id": 1, "position": {"x": 3, "y": 0.5}}],
            "estimator": {"type": "ekf", "channels": ["compass_heading", "lrf_range"]},
            "noise": {"wheel_delta": 0, "lrf_range_sigma": 1000}
        }"#;
        let err = run_scenario(&scenario(json)).unwrap_err();
        assert!(matches!(err.error, NavError::IllConditionedInnovation { .. }));
        assert_eq!(err.partial.records.len(), 1);
        assert!(err.to_string().contains("simulation failed"));
    }

    #[test]
    fn time_limit_outcome() {
        let mut s = scenario(STRAIGHT);
        s.t_max = 1.0;
        let log = run_scenario(&s).unwrap();
        assert_eq!(log.outcome, Outcome::TimeLimit);
        assert_eq!(log.records.len(), 51);
    }

    #[test]
    fn channel_set_changes_measurements() {
        let json = r#"{
            "goal": {"x": 2, "y": 0},
            "landmarks": [{"id": 1, "position": {"x": 3, "y": 1}}],
            "estimator": {"type": "ekf", "channels": ["compass_heading"]},
            "noise": {"wheel_delta": 0.01, "compass_sigma_deg": 2}
        }"#;
        let log = run_scenario(&scenario(json)).unwrap();
        assert!(log.records[..log.records.len() - 1]
            .iter()
            .all(|r| r.measurements.len() == 1 && r.measurements[0].channel == Channel::CompassHeading));
    }
}
