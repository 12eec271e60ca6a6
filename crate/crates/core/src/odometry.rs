//! Differential-drive dead reckoning.
//!
//! Wheel angular speeds held over a sample interval give wheel displacements,
//! which are propagated with the midpoint-heading model
//!
//! ```text
//! x' = x + Δs·cos(θ + Δθ/2)
//! y' = y + Δs·sin(θ + Δθ/2)
//! θ' = θ + Δθ
//! ```
//!
//! The Jacobians of this map with respect to the state and to the wheel
//! displacements are what the EKF linearizes around.

use nalgebra::{Matrix3, Matrix3x2};
use serde::{Deserialize, Serialize};

use crate::error::{NavError, Result};
use crate::geometry::Pose;

/// Robot bodies must fit under the top of the mapping slice band.
pub const MAX_BODY_HEIGHT: f64 = 1.2;
pub const DEFAULT_MAX_WHEEL_SPEED: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RobotGeometry {
    pub wheel_radius: f64,
    pub wheelbase: f64,
    pub body_radius: f64,
    pub body_height: f64,
}

impl Default for RobotGeometry {
    fn default() -> Self {
        Self {
            wheel_radius: 0.1,
            wheelbase: 0.5,
            body_radius: 0.25,
            body_height: 1.0,
        }
    }
}

impl RobotGeometry {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("wheel_radius", self.wheel_radius),
            ("wheelbase", self.wheelbase),
            ("body_radius", self.body_radius),
            ("body_height", self.body_height),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(NavError::invalid(name, format!("must be > 0, got {v}")));
            }
        }
        if self.body_height >= MAX_BODY_HEIGHT {
            return Err(NavError::invalid(
                "body_height",
                format!("must be < {MAX_BODY_HEIGHT} m, got {}", self.body_height),
            ));
        }
        Ok(())
    }

    /// Body velocity (v, ω) to wheel angular speeds (ω_L, ω_R).
    pub fn wheel_speeds_for(&self, v: f64, omega: f64) -> WheelSpeeds {
        let half = 0.5 * omega * self.wheelbase;
        WheelSpeeds {
            omega_l: (v - half) / self.wheel_radius,
            omega_r: (v + half) / self.wheel_radius,
        }
    }

    /// Wheel angular speeds to body velocity (v, ω).
    pub fn body_velocity(&self, u: &WheelSpeeds) -> (f64, f64) {
        let v = 0.5 * self.wheel_radius * (u.omega_r + u.omega_l);
        let omega = self.wheel_radius * (u.omega_r - u.omega_l) / self.wheelbase;
        (v, omega)
    }
}

/// Left/right wheel angular speeds in rad/s.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WheelSpeeds {
    pub omega_l: f64,
    pub omega_r: f64,
}

impl WheelSpeeds {
    pub fn new(omega_l: f64, omega_r: f64) -> Result<Self> {
        let u = Self { omega_l, omega_r };
        u.validate(DEFAULT_MAX_WHEEL_SPEED)?;
        Ok(u)
    }

    pub fn validate(&self, max_speed: f64) -> Result<()> {
        if !(self.omega_l.is_finite() && self.omega_r.is_finite()) {
            return Err(NavError::NonFinite("wheel speeds"));
        }
        if self.omega_l.abs() > max_speed || self.omega_r.abs() > max_speed {
            return Err(NavError::invalid(
                "wheel_speeds",
                format!("|omega| exceeds {max_speed} rad/s: ({}, {})", self.omega_l, self.omega_r),
            ));
        }
        Ok(())
    }
}

/// Wheel and body displacements over one sample interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdometryIncrement {
    ds_l: f64,
    ds_r: f64,
    ds: f64,
    dtheta: f64,
}

impl OdometryIncrement {
    pub fn from_wheel_displacements(ds_l: f64, ds_r: f64, wheelbase: f64) -> Self {
        Self {
            ds_l,
            ds_r,
            ds: (ds_l + ds_r) / 2.0,
            dtheta: (ds_r - ds_l) / wheelbase,
        }
    }

    /// Builds an increment from body motion; the wheel displacements are
    /// back-computed, so the defining identities hold only to rounding.
    pub fn from_body_motion(ds: f64, dtheta: f64, wheelbase: f64) -> Self {
        let half = 0.5 * dtheta * wheelbase;
        Self {
            ds_l: ds - half,
            ds_r: ds + half,
            ds,
            dtheta,
        }
    }

    pub fn ds_l(&self) -> f64 {
        self.ds_l
    }
    pub fn ds_r(&self) -> f64 {
        self.ds_r
    }
    pub fn ds(&self) -> f64 {
        self.ds
    }
    pub fn dtheta(&self) -> f64 {
        self.dtheta
    }

    pub fn is_finite(&self) -> bool {
        self.ds_l.is_finite() && self.ds_r.is_finite() && self.ds.is_finite() && self.dtheta.is_finite()
    }
}

pub fn wheel_increment(u: &WheelSpeeds, dt: f64, geom: &RobotGeometry) -> Result<OdometryIncrement> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(NavError::invalid("dt", format!("must be > 0, got {dt}")));
    }
    let ds_l = dt * geom.wheel_radius * u.omega_l;
    let ds_r = dt * geom.wheel_radius * u.omega_r;
    Ok(OdometryIncrement::from_wheel_displacements(ds_l, ds_r, geom.wheelbase))
}

pub fn pose_update(p: &Pose, inc: &OdometryIncrement) -> Result<Pose> {
    if !inc.is_finite() {
        return Err(NavError::NonFinite("odometry increment"));
    }
    let mid = p.theta.radians() + 0.5 * inc.dtheta;
    let x = p.x + inc.ds * mid.cos();
    let y = p.y + inc.ds * mid.sin();
    Pose::new(x, y, p.theta.radians() + inc.dtheta)
}

/// Process-model Jacobians at `(p, inc)`.
///
/// `A = ∂f/∂(x, y, θ)` and `W = ∂f/∂(Δs_R, Δs_L)`; noise is taken to enter
/// through the wheel displacements, so `W` is 3×2 with columns ordered
/// right wheel, left wheel.
pub fn process_jacobians(p: &Pose, inc: &OdometryIncrement, geom: &RobotGeometry) -> (Matrix3<f64>, Matrix3x2<f64>) {
    let mid = p.theta.radians() + 0.5 * inc.dtheta;
    let (s, c) = mid.sin_cos();
    let ds = inc.ds;
    let a = Matrix3::new(
        1.0,
        0.0,
        -ds * s, //
        0.0,
        1.0,
        ds * c, //
        0.0,
        0.0,
        1.0,
    );
    let half_l = 0.5 / geom.wheelbase;
    let w = Matrix3x2::new(
        0.5 * c - ds * s * half_l,
        0.5 * c + ds * s * half_l,
        0.5 * s + ds * c * half_l,
        0.5 * s - ds * c * half_l,
        1.0 / geom.wheelbase,
        -1.0 / geom.wheelbase,
    );
    (a, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn geom(r: f64, l: f64) -> RobotGeometry {
        RobotGeometry {
            wheel_radius: r,
            wheelbase: l,
            ..RobotGeometry::default()
        }
    }

    #[test]
    fn increment_examples() {
        let g = geom(0.1, 0.5);
        let inc = wheel_increment(&WheelSpeeds::new(1.0, 1.0).unwrap(), 1.0, &g).unwrap();
        assert_abs_diff_eq!(inc.ds(), 0.1, epsilon = 1e-15);
        assert_eq!(inc.dtheta(), 0.0);

        let inc = wheel_increment(&WheelSpeeds::new(-1.0, 1.0).unwrap(), 1.0, &g).unwrap();
        assert_eq!(inc.ds(), 0.0);
        assert_abs_diff_eq!(inc.dtheta(), 0.4, epsilon = 1e-15);

        let inc = wheel_increment(&WheelSpeeds::default(), 1.0, &g).unwrap();
        assert_eq!((inc.ds(), inc.dtheta()), (0.0, 0.0));
    }

    #[test]
    fn increment_identities_exact() {
        let g = geom(0.07, 0.43);
        let inc = wheel_increment(&WheelSpeeds::new(2.3, -0.7).unwrap(), 0.02, &g).unwrap();
        assert_eq!(inc.ds(), (inc.ds_l() + inc.ds_r()) / 2.0);
        assert_eq!(inc.dtheta(), (inc.ds_r() - inc.ds_l()) / g.wheelbase);
    }

    #[test]
    fn nonpositive_dt_rejected() {
        let g = RobotGeometry::default();
        assert!(wheel_increment(&WheelSpeeds::default(), 0.0, &g).is_err());
        assert!(wheel_increment(&WheelSpeeds::default(), -0.1, &g).is_err());
    }

    #[test]
    fn wheel_speed_limit() {
        assert!(WheelSpeeds::new(10.0, -10.0).is_ok());
        assert!(WheelSpeeds::new(10.5, 0.0).is_err());
        assert!(WheelSpeeds::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn geometry_validation() {
        assert!(RobotGeometry::default().validate().is_ok());
        let tall = RobotGeometry {
            body_height: 1.2,
            ..RobotGeometry::default()
        };
        assert!(tall.validate().is_err());
        let flat = RobotGeometry {
            wheel_radius: 0.0,
            ..RobotGeometry::default()
        };
        assert!(flat.validate().is_err());
    }

    #[test]
    fn inverse_kinematics_round_trip() {
        let g = RobotGeometry::default();
        let u = g.wheel_speeds_for(0.3, -0.8);
        let (v, w) = g.body_velocity(&u);
        assert_abs_diff_eq!(v, 0.3, epsilon = 1e-14);
        assert_abs_diff_eq!(w, -0.8, epsilon = 1e-14);
    }

    #[test]
    fn pose_update_examples() {
        let o = Pose::default();
        let p = pose_update(&o, &OdometryIncrement::from_body_motion(1.0, 0.0, 0.5)).unwrap();
        assert_eq!((p.x, p.y, p.theta.radians()), (1.0, 0.0, 0.0));

        let p = pose_update(&o, &OdometryIncrement::from_body_motion(0.0, FRAC_PI_2, 0.5)).unwrap();
        assert_eq!((p.x, p.y), (0.0, 0.0));
        assert_abs_diff_eq!(p.theta.radians(), FRAC_PI_2, epsilon = 1e-15);

        let p = pose_update(&o, &OdometryIncrement::from_body_motion(1.0, FRAC_PI_2, 0.5)).unwrap();
        assert_abs_diff_eq!(p.x, FRAC_PI_4.cos(), epsilon = 1e-12);
        assert_abs_diff_eq!(p.y, FRAC_PI_4.sin(), epsilon = 1e-12);
        assert_abs_diff_eq!(p.theta.radians(), FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn jacobian_examples() {
        let g = RobotGeometry::default();
        let (a, _) = process_jacobians(
            &Pose::default(),
            &OdometryIncrement::from_body_motion(0.0, 0.0, g.wheelbase),
            &g,
        );
        assert_eq!(a, Matrix3::identity());

        let (a, _) = process_jacobians(
            &Pose::default(),
            &OdometryIncrement::from_body_motion(1.0, 0.0, g.wheelbase),
            &g,
        );
        let expected = Matrix3::new(1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0);
        assert_eq!(a, expected);
    }

    /// Central finite differences of `pose_update`, independent of the analytic path.
    fn fd_jacobians(p: &Pose, ds_l: f64, ds_r: f64, l: f64) -> (Matrix3<f64>, Matrix3x2<f64>) {
        let f = |x: f64, y: f64, th: f64, dl: f64, dr: f64| -> [f64; 3] {
            let ds = (dl + dr) / 2.0;
            let dth = (dr - dl) / l;
            [x + ds * (th + dth / 2.0).cos(), y + ds * (th + dth / 2.0).sin(), th + dth]
        };
        let h = 1e-6;
        let th = p.theta.radians();
        let mut a = Matrix3::zeros();
        for j in 0..3 {
            let mut xp = [p.x, p.y, th];
            let mut xm = xp;
            xp[j] += h;
            xm[j] -= h;
            let fp = f(xp[0], xp[1], xp[2], ds_l, ds_r);
            let fm = f(xm[0], xm[1], xm[2], ds_l, ds_r);
            for i in 0..3 {
                a[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        let mut w = Matrix3x2::zeros();
        // column 0: right wheel, column 1: left wheel
        let fp = f(p.x, p.y, th, ds_l, ds_r + h);
        let fm = f(p.x, p.y, th, ds_l, ds_r - h);
        for i in 0..3 {
            w[(i, 0)] = (fp[i] - fm[i]) / (2.0 * h);
        }
        let fp = f(p.x, p.y, th, ds_l + h, ds_r);
        let fm = f(p.x, p.y, th, ds_l - h, ds_r);
        for i in 0..3 {
            w[(i, 1)] = (fp[i] - fm[i]) / (2.0 * h);
        }
        (a, w)
    }

    fn scaled_err<const C: usize>(an: &nalgebra::SMatrix<f64, 3, C>, fd: &nalgebra::SMatrix<f64, 3, C>) -> f64 {
        (an - fd).amax() / fd.amax().max(1.0)
    }

    proptest! {
        #[test]
        fn jacobians_match_finite_differences(
            x in -10.0f64..10.0, y in -10.0f64..10.0, th in -3.1f64..3.1,
            ds_l in -0.5f64..0.5, ds_r in -0.5f64..0.5, l in 0.2f64..1.0,
        ) {
            let g = RobotGeometry { wheelbase: l, ..RobotGeometry::default() };
            let p = Pose::new(x, y, th).unwrap();
            let inc = OdometryIncrement::from_wheel_displacements(ds_l, ds_r, l);
            let (a, w) = process_jacobians(&p, &inc, &g);
            let (a_fd, w_fd) = fd_jacobians(&p, ds_l, ds_r, l);
            prop_assert!(scaled_err(&a, &a_fd) < 1e-6);
            prop_assert!(scaled_err(&w, &w_fd) < 1e-6);
        }

        #[test]
        fn pure_rotation_and_translation(x in -5.0f64..5.0, y in -5.0f64..5.0, th in -3.0f64..3.0, d in -1.0f64..1.0) {
            let p = Pose::new(x, y, th).unwrap();
            let r = pose_update(&p, &OdometryIncrement::from_body_motion(0.0, d, 0.5)).unwrap();
            prop_assert_eq!((r.x, r.y), (x, y));
            let t = pose_update(&p, &OdometryIncrement::from_body_motion(d, 0.0, 0.5)).unwrap();
            prop_assert_eq!(t.theta, p.theta);
        }
    }

    #[test]
    fn step_halving_converges_second_order() {
        // Constant wheel speeds over 1 s, integrated with n midpoint steps,
        // compared against a 2^14-step reference.
        let g = RobotGeometry::default();
        let u = WheelSpeeds::new(2.0, 4.0).unwrap();
        let run = |n: usize| {
            let dt = 1.0 / n as f64;
            let inc = wheel_increment(&u, dt, &g).unwrap();
            let mut p = Pose::default();
            for _ in 0..n {
                p = pose_update(&p, &inc).unwrap();
            }
            p
        };
        let reference = run(1 << 14);
        let err = |p: Pose| (p.x - reference.x).hypot(p.y - reference.y);
        let e1 = err(run(8));
        let e2 = err(run(16));
        let e3 = err(run(32));
        let r1 = e1 / e2;
        let r2 = e2 / e3;
        assert!((3.5..4.5).contains(&r1), "ratio {r1}");
        assert!((3.5..4.5).contains(&r2), "ratio {r2}");
    }
}
