//! Tilt-mounted 2D laser scanner producing stacks of planar sweeps.
//!
//! The scanner sweeps horizontally across its field of view while the mount
//! pitches through the tilt range, one sweep per tilt step. Each frame keeps
//! its hit points in 3D so that height can be tested per point.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::world::World;
use crate::error::{NavError, Result};
use crate::geometry::{Point3, Pose};

/// Mount geometry.
///
/// `tilt_alpha` is a downward tilt used for the floor-intersection formula.
/// `tilt_min`/`tilt_max` bound the sweep in elevation (positive pitches the
/// beam plane upward); the stock mount pitches from 5° down to 30° up.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TiltMount {
    pub height: f64,
    pub tilt_alpha: f64,
    pub tilt_min: f64,
    pub tilt_max: f64,
}

impl Default for TiltMount {
    fn default() -> Self {
        Self {
            height: 0.40,
            tilt_alpha: 0.1f64.atan(),
            tilt_min: (-5.0f64).to_radians(),
            tilt_max: 30.0f64.to_radians(),
        }
    }
}

impl TiltMount {
    pub fn validate(&self) -> Result<()> {
        if !(self.height.is_finite() && self.height > 0.0) {
            return Err(NavError::invalid("height", "must be > 0"));
        }
        if !(self.tilt_min.is_finite() && self.tilt_max.is_finite()) || self.tilt_min > self.tilt_max {
            return Err(NavError::invalid("tilt_range", "need finite tilt_min <= tilt_max"));
        }
        let (lo, hi) = ((-5.0f64).to_radians(), 30.0f64.to_radians());
        if self.tilt_min < lo - 1e-12 || self.tilt_max > hi + 1e-12 {
            return Err(NavError::invalid("tilt_range", "must lie within [-5°, 30°]"));
        }
        Ok(())
    }

    /// Elevation of frame `k` out of `n` evenly spaced over the tilt range.
    pub fn elevation(&self, k: usize, n: usize) -> f64 {
        if n <= 1 {
            return self.tilt_min;
        }
        self.tilt_min + (self.tilt_max - self.tilt_min) * k as f64 / (n - 1) as f64
    }
}

/// Horizontal distance at which a beam tilted down by `tilt_alpha` meets the floor.
pub fn ground_intersection_distance(mount: &TiltMount) -> Result<f64> {
    if !(mount.tilt_alpha.is_finite() && mount.tilt_alpha > 0.0) {
        return Err(NavError::invalid(
            "tilt_alpha",
            "beam never meets the floor unless tilted down",
        ));
    }
    Ok(mount.height / mount.tilt_alpha.tan())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub max_range: f64,
    pub fov: f64,
    pub angular_resolution: f64,
    pub n_frames: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            max_range: 8.0,
            fov: 100.0f64.to_radians(),
            angular_resolution: 1.0f64.to_radians(),
            n_frames: 81,
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.max_range.is_finite() && self.max_range > 0.0) {
            return Err(NavError::invalid("max_range", "must be > 0"));
        }
        if !(self.angular_resolution.is_finite() && self.angular_resolution > 0.0) {
            return Err(NavError::invalid("angular_resolution", "must be > 0"));
        }
        if !(self.fov.is_finite() && self.fov > 0.0) {
            return Err(NavError::invalid("fov", "must be > 0"));
        }
        let ratio = self.fov / self.angular_resolution;
        if (ratio - ratio.round()).abs() > 1e-6 {
            return Err(NavError::invalid(
                "fov",
                "must be an integer multiple of the angular resolution",
            ));
        }
        if self.n_frames == 0 {
            return Err(NavError::invalid("n_frames", "must be >= 1"));
        }
        Ok(())
    }

    pub fn beam_count(&self) -> usize {
        (self.fov / self.angular_resolution).round() as usize
    }

    /// In-plane angle of beam `i`, measured from boresight, positive left.
    /// Beams sit at the centers of `beam_count` equal slots across the field of view.
    pub fn beam_angle(&self, i: usize) -> f64 {
        -0.5 * self.fov + (i as f64 + 0.5) * self.angular_resolution
    }
}

/// One horizontal sweep at a fixed tilt.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScanFrame {
    /// Mount elevation for this sweep, when known.
    pub elevation: Option<f64>,
    pub points: Vec<Point3>,
}

impl ScanFrame {
    /// Mean hit height, the frame's nominal z.
    pub fn nominal_height(&self) -> Option<f64> {
        if self.points.is_empty() {
            return None;
        }
        Some(self.points.iter().map(|p| p.z).sum::<f64>() / self.points.len() as f64)
    }
}

/// Unit beam direction in the world frame for a sensor at `pose`.
pub fn beam_direction(pose: &Pose, elevation: f64, beam_angle: f64) -> [f64; 3] {
    let (sp, cp) = elevation.sin_cos();
    let (sb, cb) = beam_angle.sin_cos();
    let (lx, ly, lz) = (cb * cp, sb, cb * sp);
    let (st, ct) = pose.theta.radians().sin_cos();
    [ct * lx - st * ly, st * lx + ct * ly, lz]
}

/// Ray-casts one frame per tilt step from a scanner resting at `sensor_pose`.
///
/// Frames are computed in parallel; output order is by frame index, then
/// beam index.
pub fn simulate_tilt_scan(world: &World, mount: &TiltMount, config: &ScanConfig, sensor_pose: &Pose) -> Result<Vec<ScanFrame>> {
    mount.validate()?;
    config.validate()?;
    world.validate()?;
    let origin = Point3::new(sensor_pose.x, sensor_pose.y, mount.height);
    let n = config.n_frames;
    let frames = (0..n)
        .into_par_iter()
        .map(|k| {
            let elevation = mount.elevation(k, n);
            let points = (0..config.beam_count())
                .filter_map(|i| {
                    let d = beam_direction(sensor_pose, elevation, config.beam_angle(i));
                    world
                        .raycast(origin, d, config.max_range)
                        .map(|(t, _)| Point3::new(origin.x + t * d[0], origin.y + t * d[1], origin.z + t * d[2]))
                })
                .collect();
            ScanFrame {
                elevation: Some(elevation),
                points,
            }
        })
        .collect();
    Ok(frames)
}
