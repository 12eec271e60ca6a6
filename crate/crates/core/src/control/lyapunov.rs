//! Polar-coordinate pose stabilization.
//!
//! With `ρ` the distance to the goal, `α` the heading error to the goal
//! line and `φ` the goal-line angle relative to the goal heading, the
//! closed loop under
//!
//! ```text
//! v = k_v·ρ·cos α
//! ω = k_α·α + k_v·cos α·(sin α / α)·(α + h·φ)
//! ```
//!
//! has `V = ρ²/2 + (α² + h·φ²)/2` with `V̇ = −k_v·ρ²·cos²α − k_α·α² ≤ 0`.

use serde::{Deserialize, Serialize};

use crate::error::{NavError, Result};
use crate::geometry::{Angle, Pose};

/// Radius inside which the polar dynamics are treated as singular.
pub const EPS_GOAL: f64 = 0.02;
const SINC_SERIES_BELOW: f64 = 1e-6;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NavVariables {
    pub rho: f64,
    pub alpha: Angle,
    pub phi: Angle,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct LyapunovGains {
    pub k_v: f64,
    pub k_alpha: f64,
    pub h_weight: f64,
}

impl Default for LyapunovGains {
    fn default() -> Self {
        Self {
            k_v: 0.3,
            k_alpha: 1.0,
            h_weight: 1.0,
        }
    }
}

impl LyapunovGains {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("k_v", self.k_v), ("k_alpha", self.k_alpha), ("h_weight", self.h_weight)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(NavError::invalid(name, format!("must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Saturation limits for body velocity commands.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct VelocityLimits {
    pub v_max: f64,
    pub omega_max: f64,
}

impl Default for VelocityLimits {
    fn default() -> Self {
        Self {
            v_max: 0.5,
            omega_max: 1.5,
        }
    }
}

impl VelocityLimits {
    pub fn validate(&self) -> Result<()> {
        if !(self.v_max.is_finite() && self.v_max > 0.0) {
            return Err(NavError::invalid("v_max", "must be > 0"));
        }
        if !(self.omega_max.is_finite() && self.omega_max > 0.0) {
            return Err(NavError::invalid("omega_max", "must be > 0"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VelocityCommand {
    pub v: f64,
    pub omega: f64,
}

impl VelocityCommand {
    pub const STOP: VelocityCommand = VelocityCommand { v: 0.0, omega: 0.0 };

    /// Scales both components by the same factor so that neither exceeds
    /// its limit; the curvature `ω/v` is unchanged.
    pub fn saturate(self, limits: &VelocityLimits) -> Self {
        let mut scale: f64 = 1.0;
        if self.v.abs() > limits.v_max {
            scale = scale.min(limits.v_max / self.v.abs());
        }
        if self.omega.abs() > limits.omega_max {
            scale = scale.min(limits.omega_max / self.omega.abs());
        }
        Self {
            v: self.v * scale,
            omega: self.omega * scale,
        }
    }

    /// Clamps each component independently.
    pub fn clamp(self, limits: &VelocityLimits) -> Self {
        Self {
            v: self.v.clamp(-limits.v_max, limits.v_max),
            omega: self.omega.clamp(-limits.omega_max, limits.omega_max),
        }
    }
}

/// Polar navigation variables of `goal` relative to `current`.
pub fn navigation_variables(current: &Pose, goal: &Pose) -> NavVariables {
    let dx = goal.x - current.x;
    let dy = goal.y - current.y;
    let rho = dx.hypot(dy);
    if rho < EPS_GOAL {
        return NavVariables {
            rho,
            alpha: Angle::ZERO,
            phi: Angle::ZERO,
        };
    }
    let line = dy.atan2(dx);
    NavVariables {
        rho,
        alpha: Angle::wrap(line - current.theta.radians()),
        phi: Angle::wrap(line - goal.theta.radians()),
    }
}

pub fn lyapunov_value(nv: &NavVariables, gains: &LyapunovGains) -> f64 {
    let a = nv.alpha.radians();
    let p = nv.phi.radians();
    0.5 * nv.rho * nv.rho + 0.5 * (a * a + gains.h_weight * p * p)
}

/// `sin(a)/a` with the series expansion near zero.
pub fn sinc(a: f64) -> f64 {
    if a.abs() < SINC_SERIES_BELOW {
        1.0 - a * a / 6.0
    } else {
        a.sin() / a
    }
}

/// Unsaturated control law.
pub fn lyapunov_control_raw(nv: &NavVariables, gains: &LyapunovGains) -> VelocityCommand {
    let a = nv.alpha.radians();
    let p = nv.phi.radians();
    let c = a.cos();
    VelocityCommand {
        v: gains.k_v * nv.rho * c,
        omega: gains.k_alpha * a + gains.k_v * c * sinc(a) * (a + gains.h_weight * p),
    }
}

pub fn lyapunov_control(nv: &NavVariables, gains: &LyapunovGains, limits: &VelocityLimits) -> VelocityCommand {
    lyapunov_control_raw(nv, gains).saturate(limits)
}

/// Time derivatives `(ρ̇, α̇, φ̇)` of the navigation variables under `cmd`.
pub fn closed_loop_nav_dynamics(nv: &NavVariables, cmd: &VelocityCommand) -> Result<(f64, f64, f64)> {
    if nv.rho <= EPS_GOAL {
        return Err(NavError::SingularDynamics { rho: nv.rho });
    }
    let (s, c) = nv.alpha.radians().sin_cos();
    let drift = cmd.v * s / nv.rho;
    Ok((-cmd.v * c, -cmd.omega + drift, drift))
}

/// `V̇` along the closed-loop dynamics for a given command.
pub fn lyapunov_rate(nv: &NavVariables, cmd: &VelocityCommand, gains: &LyapunovGains) -> Result<f64> {
    let (dr, da, dp) = closed_loop_nav_dynamics(nv, cmd)?;
    Ok(nv.rho * dr + nv.alpha.radians() * da + gains.h_weight * nv.phi.radians() * dp)
}

/// Terminal behavior inside [`EPS_GOAL`]: rotate in place toward the goal
/// heading, then stop once within `heading_tol`.
pub fn terminal_command(
    current: &Pose,
    goal: &Pose,
    gains: &LyapunovGains,
    limits: &VelocityLimits,
    heading_tol: f64,
) -> VelocityCommand {
    let err = goal.theta.diff(current.theta).radians();
    if err.abs() <= heading_tol {
        return VelocityCommand::STOP;
    }
    VelocityCommand {
        v: 0.0,
        omega: gains.k_alpha * err,
    }
    .clamp(limits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn nv(rho: f64, alpha: f64, phi: f64) -> NavVariables {
        NavVariables {
            rho,
            alpha: Angle::wrap(alpha),
            phi: Angle::wrap(phi),
        }
    }

    #[test]
    fn navigation_variable_examples() {
        let o = Pose::default();
        let n = navigation_variables(&o, &Pose::new(1.0, 0.0, 0.0).unwrap());
        assert_eq!((n.rho, n.alpha.radians(), n.phi.radians()), (1.0, 0.0, 0.0));

        let n = navigation_variables(&o, &Pose::new(0.0, 1.0, FRAC_PI_2).unwrap());
        assert_abs_diff_eq!(n.rho, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(n.phi.radians(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(n.alpha.radians(), FRAC_PI_2, epsilon = 1e-15);

        let n = navigation_variables(&o, &o);
        assert_eq!((n.rho, n.alpha.radians(), n.phi.radians()), (0.0, 0.0, 0.0));
    }

    #[test]
    fn lyapunov_value_examples() {
        let g = LyapunovGains::default();
        assert_eq!(lyapunov_value(&nv(0.0, 0.0, 0.0), &g), 0.0);
        assert_eq!(lyapunov_value(&nv(1.0, 0.0, 0.0), &g), 0.5);
        assert_abs_diff_eq!(
            lyapunov_value(&nv(0.0, FRAC_PI_2, FRAC_PI_2), &g),
            PI * PI / 4.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn control_examples() {
        let g = LyapunovGains {
            k_v: 1.0,
            k_alpha: 1.0,
            h_weight: 1.0,
        };
        assert_eq!(lyapunov_control_raw(&nv(0.0, 0.0, 0.0), &g), VelocityCommand::STOP);
        let c = lyapunov_control_raw(&nv(1.0, 0.0, 0.0), &g);
        assert_eq!((c.v, c.omega), (1.0, 0.0));
        let c = lyapunov_control_raw(&nv(1.0, FRAC_PI_2, 0.0), &g);
        assert_abs_diff_eq!(c.v, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.omega, FRAC_PI_2, epsilon = 1e-15);
    }

    #[test]
    fn sinc_limit_is_smooth() {
        assert_eq!(sinc(0.0), 1.0);
        assert_abs_diff_eq!(sinc(1e-7), (1e-7f64).sin() / 1e-7, epsilon = 1e-15);
        assert_abs_diff_eq!(sinc(2e-6), (2e-6f64).sin() / 2e-6, epsilon = 1e-15);
    }

    #[test]
    fn dynamics_examples() {
        let (dr, da, dp) = closed_loop_nav_dynamics(&nv(1.0, 0.0, 0.3), &VelocityCommand { v: 0.4, omega: 0.2 }).unwrap();
        assert_eq!((dr, da, dp), (-0.4, -0.2, 0.0));
        let (dr, da, dp) = closed_loop_nav_dynamics(&nv(1.0, 0.7, 0.3), &VelocityCommand { v: 0.0, omega: 0.2 }).unwrap();
        assert_eq!((dr, da, dp), (0.0, -0.2, 0.0));
        let (dr, da, dp) = closed_loop_nav_dynamics(&nv(2.0, FRAC_PI_4, 0.0), &VelocityCommand { v: 1.0, omega: 0.0 }).unwrap();
        assert_abs_diff_eq!(dr, -(0.5f64).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(da, 0.3535533905932738, epsilon = 1e-12);
        assert_abs_diff_eq!(dp, 0.3535533905932738, epsilon = 1e-12);
        assert!(closed_loop_nav_dynamics(&nv(0.01, 0.1, 0.1), &VelocityCommand::STOP).is_err());
    }

    #[test]
    fn saturation_preserves_curvature() {
        let lim = VelocityLimits::default();
        let c = VelocityCommand { v: 2.0, omega: 1.0 }.saturate(&lim);
        assert_abs_diff_eq!(c.v, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(c.omega / c.v, 0.5, epsilon = 1e-15);
        let c = VelocityCommand { v: 0.1, omega: -3.0 }.saturate(&lim);
        assert_abs_diff_eq!(c.omega, -1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(c.v, 0.05, epsilon = 1e-15);
    }

    #[test]
    fn terminal_rotates_then_stops() {
        let g = LyapunovGains::default();
        let lim = VelocityLimits::default();
        let goal = Pose::new(0.0, 0.0, 1.0).unwrap();
        let c = terminal_command(&Pose::default(), &goal, &g, &lim, 0.01);
        assert_eq!(c.v, 0.0);
        assert!(c.omega > 0.0);
        assert_eq!(terminal_command(&goal, &goal, &g, &lim, 0.01), VelocityCommand::STOP);
    }

    proptest! {
        #[test]
        fn v_vanishes_at_right_angle(rho in 0.0f64..10.0, phi in -3.0f64..3.0, kv in 0.01f64..5.0, ka in 0.01f64..5.0) {
            let g = LyapunovGains { k_v: kv, k_alpha: ka, h_weight: 1.0 };
            for a in [FRAC_PI_2, -FRAC_PI_2] {
                let c = lyapunov_control_raw(&nv(rho, a, phi), &g);
                prop_assert!(c.v.abs() < 1e-15 * (1.0 + kv * rho));
            }
        }

        #[test]
        fn descent_rate_closed_form(
            rho in 0.05f64..10.0, a in -3.1f64..3.1, p in -3.1f64..3.1,
            kv in 0.01f64..3.0, ka in 0.01f64..3.0, h in 0.1f64..5.0,
        ) {
            let g = LyapunovGains { k_v: kv, k_alpha: ka, h_weight: h };
            let n = nv(rho, a, p);
            let vdot = lyapunov_rate(&n, &lyapunov_control_raw(&n, &g), &g).unwrap();
            let closed = -kv * rho * rho * a.cos().powi(2) - ka * a * a;
            prop_assert!((vdot - closed).abs() <= 1e-9 * (1.0 + closed.abs()));
            prop_assert!(vdot <= 1e-12);
        }
    }
}
