//! Extended Kalman filter over the planar pose.
//!
//! Odometry drives the prediction step; compass heading, laser range/bearing
//! to known landmarks, and camera bearing to known landmarks drive the
//! correction step. Noise on the measurements is additive, so the
//! measurement-noise Jacobian is the identity.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix3, Matrix3x2, RowVector3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{NavError, Result};
use crate::geometry::{bearing_to, normalize_angle, Point2, Pose};
use crate::odometry::{pose_update, process_jacobians, wheel_increment, RobotGeometry, WheelSpeeds};

pub const SYMMETRY_TOL: f64 = 1e-9;
pub const PSD_TOL: f64 = 1e-12;
pub const MAX_INNOVATION_CONDITION: f64 = 1e12;
/// 99% quantile of χ² with one degree of freedom.
pub const CHI2_1DOF_99: f64 = 6.634896601021214;

/// Pose estimate with its 3×3 covariance (x, y, θ ordering).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianBelief {
    pub mean: Pose,
    pub cov: Matrix3<f64>,
}

impl GaussianBelief {
    pub fn new(mean: Pose, cov: Matrix3<f64>) -> Result<Self> {
        let b = Self { mean, cov };
        b.check()?;
        Ok(b)
    }

    pub fn certain(mean: Pose) -> Self {
        Self {
            mean,
            cov: Matrix3::zeros(),
        }
    }

    /// Verifies symmetry and positive semidefiniteness of the covariance.
    pub fn check(&self) -> Result<()> {
        if !self.mean.is_finite() || self.cov.iter().any(|v| !v.is_finite()) {
            return Err(NavError::NonFinite("belief"));
        }
        let asym = (self.cov - self.cov.transpose()).amax();
        if asym > SYMMETRY_TOL {
            return Err(NavError::invalid("cov", format!("asymmetric by {asym:e}")));
        }
        let min_eig = min_eigenvalue(&self.cov);
        if min_eig < -PSD_TOL {
            return Err(NavError::CovarianceNotPsd { min_eigenvalue: min_eig });
        }
        Ok(())
    }

    /// Normalized estimation error squared against a reference pose.
    pub fn nees(&self, truth: &Pose) -> Option<f64> {
        let e = pose_error(truth, &self.mean);
        let inv = self.cov.try_inverse()?;
        Some((e.transpose() * inv * e)[(0, 0)])
    }
}

/// `truth − estimate` with the heading component wrapped.
pub fn pose_error(truth: &Pose, estimate: &Pose) -> Vector3<f64> {
    Vector3::new(
        truth.x - estimate.x,
        truth.y - estimate.y,
        truth.theta.diff(estimate.theta).radians(),
    )
}

pub fn min_eigenvalue(m: &Matrix3<f64>) -> f64 {
    SymmetricEigen::new(*m).eigenvalues.min()
}

fn symmetrize(m: &Matrix3<f64>) -> Matrix3<f64> {
    (m + m.transpose()) * 0.5
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessNoiseParams {
    /// Wheel-speed variance per unit squared speed.
    pub delta: f64,
}

impl Default for ProcessNoiseParams {
    fn default() -> Self {
        Self { delta: 0.01 }
    }
}

impl ProcessNoiseParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return Err(NavError::invalid("delta", format!("must be >= 0, got {}", self.delta)));
        }
        Ok(())
    }
}

/// Wheel-speed noise covariance, ordered (right, left).
pub fn process_noise_q(u: &WheelSpeeds, params: &ProcessNoiseParams) -> Matrix2<f64> {
    Matrix2::new(
        params.delta * u.omega_r * u.omega_r,
        0.0,
        0.0,
        params.delta * u.omega_l * u.omega_l,
    )
}

/// Jacobian of the process model with respect to wheel-speed noise,
/// columns ordered (right, left) to match [`process_noise_q`].
///
/// Wheel displacement is `Δt·R·ω`, so this is the displacement Jacobian
/// scaled by `Δt·R`.
pub fn wheel_speed_noise_jacobian(p: &Pose, u: &WheelSpeeds, dt: f64, geom: &RobotGeometry) -> Result<Matrix3x2<f64>> {
    let inc = wheel_increment(u, dt, geom)?;
    let (_, w) = process_jacobians(p, &inc, geom);
    Ok(w * (dt * geom.wheel_radius))
}

pub fn predict(
    belief: &GaussianBelief,
    u: &WheelSpeeds,
    dt: f64,
    geom: &RobotGeometry,
    params: &ProcessNoiseParams,
) -> Result<GaussianBelief> {
    let inc = wheel_increment(u, dt, geom)?;
    let mean = pose_update(&belief.mean, &inc)?;
    let (a, w_disp) = process_jacobians(&belief.mean, &inc, geom);
    let w = w_disp * (dt * geom.wheel_radius);
    let q = process_noise_q(u, params);
    let cov = symmetrize(&(a * belief.cov * a.transpose() + w * q * w.transpose()));
    let out = GaussianBelief { mean, cov };
    out.check()?;
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    CompassHeading,
    LrfRange,
    LrfBearing,
    CameraBearing,
}

impl Channel {
    pub fn name(self) -> &'static str {
        match self {
            Channel::CompassHeading => "compass_heading",
            Channel::LrfRange => "lrf_range",
            Channel::LrfBearing => "lrf_bearing",
            Channel::CameraBearing => "camera_bearing",
        }
    }

    pub fn is_angular(self) -> bool {
        !matches!(self, Channel::LrfRange)
    }

    pub fn needs_landmark(self) -> bool {
        !matches!(self, Channel::CompassHeading)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub channel: Channel,
    /// Radians for angular channels, meters for range.
    pub value: f64,
    pub variance: f64,
    pub landmark_id: Option<u32>,
}

impl Measurement {
    pub fn compass(value: f64, variance: f64) -> Self {
        Self {
            channel: Channel::CompassHeading,
            value,
            variance,
            landmark_id: None,
        }
    }

    pub fn landmark(channel: Channel, landmark_id: u32, value: f64, variance: f64) -> Self {
        Self {
            channel,
            value,
            variance,
            landmark_id: Some(landmark_id),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.value.is_finite() {
            return Err(NavError::NonFinite("measurement value"));
        }
        if !(self.variance.is_finite() && self.variance > 0.0) {
            return Err(NavError::invalid(
                "variance",
                format!("{} variance must be > 0, got {}", self.channel.name(), self.variance),
            ));
        }
        if self.channel.needs_landmark() && self.landmark_id.is_none() {
            return Err(NavError::MissingLandmark(self.channel.name()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Landmark {
    pub id: u32,
    pub position: Point2,
}

/// Predicted measurement and its 1×3 Jacobian row at `mean`.
pub fn measurement_predict(mean: &Pose, channel: Channel, landmark: Option<&Landmark>) -> Result<(f64, RowVector3<f64>)> {
    if channel == Channel::CompassHeading {
        return Ok((mean.theta.radians(), RowVector3::new(0.0, 0.0, 1.0)));
    }
    let lm = landmark.ok_or(NavError::MissingLandmark(channel.name()))?;
    let dx = lm.position.x - mean.x;
    let dy = lm.position.y - mean.y;
    let q = dx * dx + dy * dy;
    match channel {
        Channel::LrfRange => {
            let r = q.sqrt();
            if r < crate::geometry::EPS_POS {
                return Err(NavError::UndefinedBearing);
            }
            Ok((r, RowVector3::new(-dx / r, -dy / r, 0.0)))
        }
        Channel::LrfBearing | Channel::CameraBearing => {
            let b = bearing_to(mean.position(), lm.position)?;
            let h = b.diff(mean.theta).radians();
            Ok((h, RowVector3::new(dy / q, -dx / q, -1.0)))
        }
        Channel::CompassHeading => unreachable!(),
    }
}

/// Diagonal noise matrix from per-entry variances, in the given order.
pub fn diagonal_noise(variances: &[f64]) -> Result<DMatrix<f64>> {
    if let Some(v) = variances.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(NavError::invalid("variance", format!("must be > 0, got {v}")));
    }
    Ok(DMatrix::from_diagonal(&DVector::from_column_slice(variances)))
}

/// Measurement-noise covariance for a stacked measurement vector.
pub fn build_r(measurements: &[Measurement]) -> Result<DMatrix<f64>> {
    let vars: Vec<f64> = measurements.iter().map(|m| m.variance).collect();
    diagonal_noise(&vars)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceForm {
    /// `(I − KH)P`
    #[default]
    Plain,
    /// `(I − KH)P(I − KH)ᵀ + KRKᵀ`
    Joseph,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CorrectionOptions {
    pub form: CovarianceForm,
    /// Per-channel Mahalanobis gate; channels whose squared normalized
    /// innovation exceeds it are dropped. `None` disables gating.
    pub gate: Option<f64>,
}

pub fn correct(belief: &GaussianBelief, measurements: &[Measurement], map: &[Landmark]) -> Result<GaussianBelief> {
    correct_with(belief, measurements, map, &CorrectionOptions::default())
}

pub fn correct_with(
    belief: &GaussianBelief,
    measurements: &[Measurement],
    map: &[Landmark],
    opts: &CorrectionOptions,
) -> Result<GaussianBelief> {
    let mut rows: Vec<(RowVector3<f64>, f64, f64)> = Vec::with_capacity(measurements.len());
    for m in measurements {
        m.validate()?;
        let lm = match m.landmark_id {
            Some(id) if m.channel.needs_landmark() => Some(map.iter().find(|l| l.id == id).ok_or(NavError::UnknownLandmark(id))?),
            _ => None,
        };
        let (h, row) = measurement_predict(&belief.mean, m.channel, lm)?;
        let residual = if m.channel.is_angular() {
            normalize_angle(m.value - h)?.radians()
        } else {
            m.value - h
        };
        if let Some(gate) = opts.gate {
            let s = (row * belief.cov * row.transpose())[(0, 0)] + m.variance;
            if residual * residual / s > gate {
                continue;
            }
        }
        rows.push((row, residual, m.variance));
    }
    if rows.is_empty() {
        return Ok(*belief);
    }

    let n = rows.len();
    let mut h = DMatrix::<f64>::zeros(n, 3);
    let mut innov = DVector::<f64>::zeros(n);
    let mut vars = Vec::with_capacity(n);
    for (i, (row, res, var)) in rows.iter().enumerate() {
        h.row_mut(i).copy_from(row);
        innov[i] = *res;
        vars.push(*var);
    }
    let r = diagonal_noise(&vars)?;
    let p = DMatrix::from_column_slice(3, 3, belief.cov.as_slice());
    let s = &h * &p * h.transpose() + &r;

    let sv = s.clone().svd(false, false).singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition.is_nan() || condition > MAX_INNOVATION_CONDITION {
        return Err(NavError::IllConditionedInnovation { condition });
    }
    let s_inv = s.try_inverse().ok_or(NavError::IllConditionedInnovation { condition })?;
    let k = &p * h.transpose() * s_inv;

    let dx = &k * innov;
    let mean = Pose::new(
        belief.mean.x + dx[0],
        belief.mean.y + dx[1],
        belief.mean.theta.radians() + dx[2],
    )?;

    let i_kh = DMatrix::<f64>::identity(3, 3) - &k * &h;
    let cov_d = match opts.form {
        CovarianceForm::Plain => &i_kh * &p,
        CovarianceForm::Joseph => &i_kh * &p * i_kh.transpose() + &k * &r * k.transpose(),
    };
    let cov = symmetrize(&Matrix3::from_iterator(cov_d.iter().copied()));
    let out = GaussianBelief { mean, cov };
    out.check()?;
    Ok(out)
}
