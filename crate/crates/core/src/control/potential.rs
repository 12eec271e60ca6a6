//! Potential-field velocity commands: goal attraction and obstacle repulsion.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::lyapunov::{VelocityCommand, VelocityLimits};
use crate::error::{NavError, Result};
use crate::geometry::{bearing_to, Angle, Point2, Pose};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialFieldParams {
    pub k_att: f64,
    pub k_rep: f64,
    /// Influence radius; obstacles farther than this exert no repulsion.
    pub d0: f64,
    /// Half-width of the frontal sector in which obstacles are considered.
    /// Also the detour offset from the goal line.
    pub sector_half_angle: f64,
    /// Distances below this are clamped before evaluating the repulsion.
    pub d_min: f64,
}

impl Default for PotentialFieldParams {
    fn default() -> Self {
        Self {
            k_att: 10.0,
            k_rep: 10.0,
            d0: 0.7,
            sector_half_angle: PI / 3.0,
            d_min: 0.05,
        }
    }
}

impl PotentialFieldParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("k_att", self.k_att),
            ("k_rep", self.k_rep),
            ("d0", self.d0),
            ("sector_half_angle", self.sector_half_angle),
            ("d_min", self.d_min),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(NavError::invalid(name, format!("must be > 0, got {v}")));
            }
        }
        if self.d_min >= self.d0 {
            return Err(NavError::invalid("d_min", "must be smaller than d0"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReadingSource {
    Ultrasonic,
    Laser,
}

/// A range return in the robot frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObstacleReading {
    pub distance: f64,
    /// Bearing relative to the robot heading, positive to the left.
    pub bearing: Angle,
    pub source: ReadingSource,
}

/// Which side of the robot's centerline an obstacle lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    /// Bearings exactly on the centerline count as right, so the detour
    /// goes left.
    pub fn of(bearing: Angle) -> Side {
        if bearing.radians() > 0.0 {
            Side::Left
        } else {
            Side::Right
        }
    }
}

pub fn in_sector(bearing: Angle, center: Angle, half_angle: f64) -> bool {
    bearing.diff(center).radians().abs() <= half_angle
}

/// Nearest reading inside the frontal sector, regardless of distance.
pub fn nearest_frontal(readings: &[ObstacleReading], params: &PotentialFieldParams) -> Option<ObstacleReading> {
    readings
        .iter()
        .filter(|r| in_sector(r.bearing, Angle::ZERO, params.sector_half_angle))
        .min_by(|a, b| a.distance.total_cmp(&b.distance))
        .copied()
}

/// Unsaturated attraction toward `goal`; zero when the robot is on it.
pub fn attractive_command_raw(robot: &Pose, goal: Point2, params: &PotentialFieldParams) -> VelocityCommand {
    let Ok(theta_goal) = bearing_to(robot.position(), goal) else {
        return VelocityCommand::STOP;
    };
    let (s, c) = theta_goal.radians().sin_cos();
    let v = -params.k_att * ((robot.x - goal.x) * c + (robot.y - goal.y) * s);
    let omega = -params.k_att * robot.theta.diff(theta_goal).radians();
    VelocityCommand { v, omega }
}

/// Attraction with each component clamped to its limit.
pub fn attractive_command(robot: &Pose, goal: Point2, params: &PotentialFieldParams, limits: &VelocityLimits) -> VelocityCommand {
    attractive_command_raw(robot, goal, params).clamp(limits)
}

pub fn repulsive_magnitude(d_obs: f64, params: &PotentialFieldParams) -> f64 {
    let d = d_obs.max(params.d_min);
    if d >= params.d0 {
        return 0.0;
    }
    0.5 * params.k_rep * (1.0 / d - 1.0 / params.d0) / (d * d)
}

/// Detour heading: the goal line rotated 60° (the sector half-angle) away
/// from the obstacle side.
pub fn detour_heading(robot: &Pose, goal: Point2, side: Side, params: &PotentialFieldParams) -> Angle {
    let line = bearing_to(robot.position(), goal).unwrap_or(robot.theta);
    match side {
        Side::Right => Angle::wrap(line.radians() + params.sector_half_angle),
        Side::Left => Angle::wrap(line.radians() - params.sector_half_angle),
    }
}

/// Steering toward the detour heading with forward speed reduced by the
/// repulsion of the nearest frontal obstacle at `nearest_distance`.
///
/// The repulsion is subtracted from the unsaturated attraction and the
/// result is clamped afterwards, so the robot only slows once repulsion
/// outweighs the pull of the goal.
pub fn detour_command(
    robot: &Pose,
    goal: Point2,
    side: Side,
    nearest_distance: Option<f64>,
    params: &PotentialFieldParams,
    limits: &VelocityLimits,
) -> VelocityCommand {
    let att = attractive_command_raw(robot, goal, params);
    let target = detour_heading(robot, goal, side, params);
    let omega = -params.k_att * robot.theta.diff(target).radians();
    let rep = nearest_distance.map_or(0.0, |d| repulsive_magnitude(d, params));
    VelocityCommand {
        v: (att.v - rep).max(0.0),
        omega,
    }
    .clamp(limits)
}

/// Reactive command: attraction in free space, otherwise a detour away from
/// the nearest frontal obstacle closer than `d0`.
pub fn avoidance_command(
    robot: &Pose,
    goal: Point2,
    readings: &[ObstacleReading],
    params: &PotentialFieldParams,
    limits: &VelocityLimits,
) -> VelocityCommand {
    match nearest_frontal(readings, params) {
        Some(r) if r.distance < params.d0 => detour_command(robot, goal, Side::of(r.bearing), Some(r.distance), params, limits),
        _ => attractive_command(robot, goal, params, limits),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_4;

    fn reading(d: f64, deg: f64) -> ObstacleReading {
        ObstacleReading {
            distance: d,
            bearing: Angle::from_degrees(deg).unwrap(),
            source: ReadingSource::Ultrasonic,
        }
    }

    #[test]
    fn attractive_example() {
        let p = PotentialFieldParams::default();
        let c = attractive_command_raw(&Pose::default(), Point2::new(1.0, 1.0), &p);
        assert_abs_diff_eq!(c.v, 10.0 * 2f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(c.omega, 10.0 * FRAC_PI_4, epsilon = 1e-12);
        assert_abs_diff_eq!(c.omega, 7.854, epsilon = 1e-3);

        let aligned = Pose::new(0.0, 0.0, FRAC_PI_4).unwrap();
        assert_eq!(attractive_command_raw(&aligned, Point2::new(1.0, 1.0), &p).omega, 0.0);
        assert_eq!(
            attractive_command_raw(&aligned, Point2::new(0.0, 0.0), &p),
            VelocityCommand::STOP
        );

        let sat = attractive_command(&Pose::default(), Point2::new(1.0, 1.0), &p, &VelocityLimits::default());
        assert_eq!((sat.v, sat.omega), (0.5, 1.5));
    }

    #[test]
    fn repulsion_examples() {
        let p = PotentialFieldParams::default();
        assert_eq!(repulsive_magnitude(0.7, &p), 0.0);
        assert_eq!(repulsive_magnitude(1.0, &p), 0.0);
        let expected = 0.5 * 10.0 * (1.0 / 0.35 - 1.0 / 0.7) / (0.35 * 0.35);
        assert_abs_diff_eq!(repulsive_magnitude(0.35, &p), expected, epsilon = 1e-12);
        assert_abs_diff_eq!(repulsive_magnitude(0.35, &p), 58.31, epsilon = 0.01);
        assert_eq!(repulsive_magnitude(0.01, &p), repulsive_magnitude(0.05, &p));
    }

    #[test]
    fn free_space_is_pure_attraction() {
        let p = PotentialFieldParams::default();
        let lim = VelocityLimits::default();
        let robot = Pose::new(0.3, -0.2, 0.4).unwrap();
        let goal = Point2::new(3.0, 2.0);
        let att = attractive_command(&robot, goal, &p, &lim);
        assert_eq!(avoidance_command(&robot, goal, &[], &p, &lim), att);
        assert_eq!(avoidance_command(&robot, goal, &[reading(0.9, 0.0)], &p, &lim), att);
        // close but behind the sector
        assert_eq!(avoidance_command(&robot, goal, &[reading(0.3, 120.0)], &p, &lim), att);
    }

    #[test]
    fn obstacle_right_of_center_turns_left() {
        let p = PotentialFieldParams::default();
        let lim = VelocityLimits::default();
        let robot = Pose::default();
        let goal = Point2::new(5.0, 0.0);
        let att = attractive_command(&robot, goal, &p, &lim);
        let c = avoidance_command(&robot, goal, &[reading(0.35, -3.0)], &p, &lim);
        assert!(c.omega > 0.0);
        assert!(c.v < att.v);
        let c = avoidance_command(&robot, goal, &[reading(0.35, 3.0)], &p, &lim);
        assert!(c.omega < 0.0);
    }

    #[test]
    fn repulsion_subtracts_from_raw_attraction() {
        let p = PotentialFieldParams::default();
        let lim = VelocityLimits::default();
        let robot = Pose::default();
        // raw attraction 10·5 = 50, repulsion at 0.35 m ≈ 58.3 → stop
        let c = detour_command(&robot, Point2::new(5.0, 0.0), Side::Right, Some(0.35), &p, &lim);
        assert_eq!(c.v, 0.0);
        // raw attraction 10·8 = 80 outweighs it → full speed
        let c = detour_command(&robot, Point2::new(8.0, 0.0), Side::Right, Some(0.35), &p, &lim);
        assert_eq!(c.v, lim.v_max);
        // goal 1 m away: 10 − 58.3 < 0
        let c = detour_command(&robot, Point2::new(1.0, 0.0), Side::Right, Some(0.35), &p, &lim);
        assert_eq!(c.v, 0.0);
    }

    proptest! {
        #[test]
        fn repulsion_monotone_decreasing(a in 0.05f64..0.7, b in 0.05f64..0.7) {
            let p = PotentialFieldParams::default();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(hi - lo > 1e-9);
            prop_assert!(repulsive_magnitude(lo, &p) > repulsive_magnitude(hi, &p));
        }

        #[test]
        fn repulsion_continuous_at_d0(eps in 1e-12f64..1e-6) {
            let p = PotentialFieldParams::default();
            prop_assert!(repulsive_magnitude(p.d0 - eps, &p) < 1e-4);
        }

        #[test]
        fn outside_influence_degenerates_to_attraction(
            x in -3.0f64..3.0, y in -3.0f64..3.0, t in -3.0f64..3.0,
            readings in prop::collection::vec((0.01f64..5.0, -180.0f64..180.0), 0..8),
        ) {
            let p = PotentialFieldParams::default();
            let lim = VelocityLimits::default();
            let robot = Pose::new(x, y, t).unwrap();
            let goal = Point2::new(4.0, 4.0);
            let rs: Vec<_> = readings.iter().map(|&(d, b)| reading(d, b)).collect();
            let active = rs.iter().any(|r| r.distance < p.d0 && in_sector(r.bearing, Angle::ZERO, p.sector_half_angle));
            let cmd = avoidance_command(&robot, goal, &rs, &p, &lim);
            if !active {
                prop_assert_eq!(cmd, attractive_command(&robot, goal, &p, &lim));
            }
        }
    }
}
