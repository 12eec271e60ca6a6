//! Planar angle arithmetic and the value types shared by the rest of the stack.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{NavError, Result};

/// Distance below which two points are treated as coincident by [`bearing_to`].
pub const EPS_POS: f64 = 1e-12;

/// Heading in radians, always in the half-open interval (−π, π].
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);

    /// Wraps a finite angle into (−π, π].
    pub fn new(radians: f64) -> Result<Self> {
        normalize_angle(radians)
    }

    /// Like [`Angle::new`] but for values already known to be finite.
    ///
    /// Non-finite input yields a NaN angle; callers that cannot guarantee
    /// finiteness should use [`Angle::new`].
    pub fn wrap(radians: f64) -> Self {
        Angle(wrap_to_pi(radians))
    }

    pub fn from_degrees(deg: f64) -> Result<Self> {
        normalize_angle(deg.to_radians())
    }

    #[inline]
    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn degrees(self) -> f64 {
        self.0.to_degrees()
    }

    /// Normalized difference `self − other`.
    pub fn diff(self, other: Angle) -> Angle {
        Angle::wrap(self.0 - other.0)
    }

    pub fn cos(self) -> f64 {
        self.0.cos()
    }

    pub fn sin(self) -> f64 {
        self.0.sin()
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6} rad", self.0)
    }
}

fn wrap_to_pi(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let two_pi = 2.0 * PI;
    // rem_euclid lands in [0, 2π); shift into (−π, π].
    let r = (a + PI).rem_euclid(two_pi) - PI;
    if r <= -PI {
        r + two_pi
    } else {
        r
    }
}

/// Reduces `a` modulo 2π into (−π, π].
pub fn normalize_angle(a: f64) -> Result<Angle> {
    if !a.is_finite() {
        return Err(NavError::NonFinite("angle"));
    }
    Ok(Angle(wrap_to_pi(a)))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (other.x - self.x).hypot(other.y - self.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn xy(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// Planar robot pose in the global frame.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: Angle,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Result<Self> {
        if !x.is_finite() || !y.is_finite() {
            return Err(NavError::NonFinite("pose position"));
        }
        Ok(Self {
            x,
            y,
            theta: normalize_angle(theta)?,
        })
    }

    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.theta.radians().is_finite()
    }

    /// Maps a point given in this pose's body frame into the global frame.
    pub fn transform_point(&self, local: Point2) -> Point2 {
        let (s, c) = self.theta.radians().sin_cos();
        Point2::new(self.x + c * local.x - s * local.y, self.y + s * local.x + c * local.y)
    }
}

/// Four-quadrant bearing of `to` as seen from `from`.
pub fn bearing_to(from: Point2, to: Point2) -> Result<Angle> {
    let dx = to.x - from.x;
    let dy = to.y - from.y;
    if dx.hypot(dy) < EPS_POS {
        return Err(NavError::UndefinedBearing);
    }
    normalize_angle(dy.atan2(dx))
}
