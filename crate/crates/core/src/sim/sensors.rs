//! Synthetic sensor returns generated from the true pose.

use rand::Rng;
use rand_distr::StandardNormal;

use super::scenario::{NoiseSpec, Sensors, UltrasonicRing};
use crate::control::{ObstacleReading, ReadingSource};
use crate::ekf::{Channel, Landmark, Measurement};
use crate::geometry::{bearing_to, Angle, Point3, Pose};
use crate::scan::{ObstacleMap, World};

/// Variance reported for a channel whose noise is zero; keeps the
/// innovation covariance invertible.
pub const VARIANCE_FLOOR: f64 = 1e-12;

fn gaussian<R: Rng>(rng: &mut R, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    let z: f64 = rng.sample(StandardNormal);
    sigma * z
}

fn variance(sigma: f64) -> f64 {
    (sigma * sigma).max(VARIANCE_FLOOR)
}

/// Measurements on the enabled channels. Landmark channels fire only for
/// landmarks inside the sensor's range and field of view.
pub fn synthesize_measurements<R: Rng>(
    truth: &Pose,
    channels: &[Channel],
    landmarks: &[Landmark],
    sensors: &Sensors,
    noise: &NoiseSpec,
    rng: &mut R,
) -> Vec<Measurement> {
    let mut out = Vec::new();
    if channels.contains(&Channel::CompassHeading) {
        let z = truth.theta.radians() + gaussian(rng, noise.compass_sigma);
        out.push(Measurement::compass(Angle::wrap(z).radians(), variance(noise.compass_sigma)));
    }
    for lm in landmarks {
        let range = truth.position().distance(&lm.position);
        let Ok(b) = bearing_to(truth.position(), lm.position) else {
            continue;
        };
        let rel = b.diff(truth.theta).radians();
        let lrf_visible = range <= sensors.lrf_max_range && rel.abs() <= 0.5 * sensors.lrf_fov;
        if lrf_visible && channels.contains(&Channel::LrfRange) {
            let z = range + gaussian(rng, noise.lrf_range_sigma);
            out.push(Measurement::landmark(
                Channel::LrfRange,
                lm.id,
                z,
                variance(noise.lrf_range_sigma),
            ));
        }
        if lrf_visible && channels.contains(&Channel::LrfBearing) {
            let z = Angle::wrap(rel + gaussian(rng, noise.lrf_bearing_sigma)).radians();
            out.push(Measurement::landmark(
                Channel::LrfBearing,
                lm.id,
                z,
                variance(noise.lrf_bearing_sigma),
            ));
        }
        if rel.abs() <= 0.5 * sensors.camera_fov && channels.contains(&Channel::CameraBearing) {
            let z = Angle::wrap(rel + gaussian(rng, noise.camera_bearing_sigma)).radians();
            out.push(Measurement::landmark(
                Channel::CameraBearing,
                lm.id,
                z,
                variance(noise.camera_bearing_sigma),
            ));
        }
    }
    out
}

/// One reading per sensor: the shortest return among the rays of its cone,
/// reported at that ray's bearing. Rays are cast horizontally at the mount
/// height from the body center.
pub fn ultrasonic_readings<R: Rng>(
    truth: &Pose,
    world: &World,
    ring: &UltrasonicRing,
    sigma: f64,
    rng: &mut R,
) -> Vec<ObstacleReading> {
    let origin = Point3::new(truth.x, truth.y, ring.mount_height);
    let mut out = Vec::with_capacity(ring.bearings.len());
    for &center in &ring.bearings {
        let mut best: Option<(f64, f64)> = None;
        for k in 0..ring.rays_per_cone {
            let off = if ring.rays_per_cone == 1 {
                0.0
            } else {
                -ring.cone_half_angle + 2.0 * ring.cone_half_angle * k as f64 / (ring.rays_per_cone - 1) as f64
            };
            let rel = center + off;
            let heading = truth.theta.radians() + rel;
            let dir = [heading.cos(), heading.sin(), 0.0];
            if let Some((t, _)) = world.raycast(origin, dir, ring.max_range) {
                if best.is_none_or(|(d, _)| t < d) {
                    best = Some((t, rel));
                }
            }
        }
        if let Some((d, rel)) = best {
            out.push(ObstacleReading {
                distance: (d + gaussian(rng, sigma)).max(0.0),
                bearing: Angle::wrap(rel),
                source: ReadingSource::Ultrasonic,
            });
        }
    }
    out
}

/// Map points within `max_range` of the estimated pose, as robot-frame readings.
pub fn map_readings(estimate: &Pose, map: &ObstacleMap, max_range: f64) -> Vec<ObstacleReading> {
    let here = estimate.position();
    map.points
        .iter()
        .filter_map(|p| {
            let d = here.distance(p);
            if d > max_range {
                return None;
            }
            let b = bearing_to(here, *p).ok()?;
            Some(ObstacleReading {
                distance: d,
                bearing: b.diff(estimate.theta),
                source: ReadingSource::Laser,
            })
        })
        .collect()
}
