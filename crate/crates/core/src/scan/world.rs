//! Static world geometry: axis-aligned boxes and vertical cylinders.

use serde::{Deserialize, Serialize};

use crate::error::{NavError, Result};
use crate::geometry::{Point2, Point3};

/// Ray parameters below this are treated as self-intersections.
const T_MIN: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Primitive {
    Box {
        min: [f64; 3],
        max: [f64; 3],
    },
    Cylinder {
        center: [f64; 2],
        radius: f64,
        z_min: f64,
        z_max: f64,
    },
}

impl Primitive {
    pub fn aabb(min: Point3, max: Point3) -> Self {
        Primitive::Box {
            min: [min.x, min.y, min.z],
            max: [max.x, max.y, max.z],
        }
    }

    pub fn cylinder(center: Point2, radius: f64, z_min: f64, z_max: f64) -> Self {
        Primitive::Cylinder {
            center: [center.x, center.y],
            radius,
            z_min,
            z_max,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Primitive::Box { min, max } => {
                if min.iter().chain(max).any(|v| !v.is_finite()) {
                    return Err(NavError::NonFinite("box corner"));
                }
                if (0..3).any(|i| min[i] >= max[i]) {
                    return Err(NavError::invalid("box", "min must be < max on every axis"));
                }
            }
            Primitive::Cylinder {
                center,
                radius,
                z_min,
                z_max,
            } => {
                if !(center[0].is_finite() && center[1].is_finite() && z_min.is_finite() && z_max.is_finite()) {
                    return Err(NavError::NonFinite("cylinder"));
                }
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(NavError::invalid("radius", "must be > 0"));
                }
                if z_min >= z_max {
                    return Err(NavError::invalid("cylinder", "z_min must be < z_max"));
                }
            }
        }
        Ok(())
    }

    pub fn z_range(&self) -> (f64, f64) {
        match self {
            Primitive::Box { min, max } => (min[2], max[2]),
            Primitive::Cylinder { z_min, z_max, .. } => (*z_min, *z_max),
        }
    }

    /// Whether the primitive occupies any height in `[lo, hi]`.
    pub fn overlaps_height(&self, lo: f64, hi: f64) -> bool {
        let (a, b) = self.z_range();
        a <= hi && b >= lo
    }

    /// Planar distance from `p` to the primitive's footprint (0 inside).
    pub fn footprint_distance(&self, p: Point2) -> f64 {
        match self {
            Primitive::Box { min, max } => {
                let dx = (min[0] - p.x).max(0.0).max(p.x - max[0]);
                let dy = (min[1] - p.y).max(0.0).max(p.y - max[1]);
                dx.hypot(dy)
            }
            Primitive::Cylinder { center, radius, .. } => ((p.x - center[0]).hypot(p.y - center[1]) - radius).max(0.0),
        }
    }

    /// Smallest ray parameter `t > 0` at which `origin + t·dir` meets the surface.
    pub fn raycast(&self, origin: Point3, dir: [f64; 3]) -> Option<f64> {
        match self {
            Primitive::Box { min, max } => ray_box(origin, dir, min, max),
            Primitive::Cylinder {
                center,
                radius,
                z_min,
                z_max,
            } => ray_cylinder(origin, dir, *center, *radius, *z_min, *z_max),
        }
    }
}

fn ray_box(o: Point3, d: [f64; 3], min: &[f64; 3], max: &[f64; 3]) -> Option<f64> {
    let o = [o.x, o.y, o.z];
    let mut t_near = f64::NEG_INFINITY;
    let mut t_far = f64::INFINITY;
    for i in 0..3 {
        if d[i] == 0.0 {
            if o[i] < min[i] || o[i] > max[i] {
                return None;
            }
            continue;
        }
        let inv = 1.0 / d[i];
        let (mut t0, mut t1) = ((min[i] - o[i]) * inv, (max[i] - o[i]) * inv);
        if t0 > t1 {
            std::mem::swap(&mut t0, &mut t1);
        }
        t_near = t_near.max(t0);
        t_far = t_far.min(t1);
        if t_near > t_far {
            return None;
        }
    }
    if t_near > T_MIN {
        Some(t_near)
    } else if t_far > T_MIN {
        // origin inside the box
        Some(t_far)
    } else {
        None
    }
}

fn ray_cylinder(o: Point3, d: [f64; 3], c: [f64; 2], r: f64, z_min: f64, z_max: f64) -> Option<f64> {
    let mut best: Option<f64> = None;
    let mut consider = |t: f64| {
        if t > T_MIN && best.is_none_or(|b| t < b) {
            best = Some(t);
        }
    };
    // lateral surface
    let ox = o.x - c[0];
    let oy = o.y - c[1];
    let a = d[0] * d[0] + d[1] * d[1];
    if a > 0.0 {
        let b = 2.0 * (ox * d[0] + oy * d[1]);
        let cc = ox * ox + oy * oy - r * r;
        let disc = b * b - 4.0 * a * cc;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            // numerically stable roots
            let q = -0.5 * (b + b.signum() * sq);
            let mut roots = [q / a, if q != 0.0 { cc / q } else { q / a }];
            roots.sort_by(f64::total_cmp);
            for t in roots {
                let z = o.z + t * d[2];
                if z >= z_min && z <= z_max {
                    consider(t);
                }
            }
        }
    }
    // caps
    if d[2] != 0.0 {
        for zc in [z_min, z_max] {
            let t = (zc - o.z) / d[2];
            let x = ox + t * d[0];
            let y = oy + t * d[1];
            if x * x + y * y <= r * r {
                consider(t);
            }
        }
    }
    best
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct World {
    #[serde(default)]
    pub primitives: Vec<Primitive>,
}

impl World {
    pub fn new(primitives: Vec<Primitive>) -> Self {
        Self { primitives }
    }

    pub fn validate(&self) -> Result<()> {
        self.primitives.iter().try_for_each(Primitive::validate)
    }

    /// Nearest hit along the ray within `max_range`, as `(t, primitive index)`.
    pub fn raycast(&self, origin: Point3, dir: [f64; 3], max_range: f64) -> Option<(f64, usize)> {
        self.primitives
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.raycast(origin, dir).map(|t| (t, i)))
            .filter(|(t, _)| *t <= max_range)
            .min_by(|a, b| a.0.total_cmp(&b.0))
    }

    /// Planar clearance from `p` to every primitive overlapping `[z_lo, z_hi]`.
    pub fn clearance(&self, p: Point2, z_lo: f64, z_hi: f64) -> f64 {
        self.primitives
            .iter()
            .filter(|q| q.overlaps_height(z_lo, z_hi))
            .map(|q| q.footprint_distance(p))
            .fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn box_hits_front_face() {
        let b = Primitive::aabb(Point3::new(2.0, -1.0, 0.0), Point3::new(3.0, 1.0, 1.0));
        let t = b.raycast(Point3::new(0.0, 0.0, 0.5), [1.0, 0.0, 0.0]).unwrap();
        assert_eq!(t, 2.0);
        assert!(b.raycast(Point3::new(0.0, 0.0, 1.5), [1.0, 0.0, 0.0]).is_none());
        assert!(b.raycast(Point3::new(0.0, 0.0, 0.5), [-1.0, 0.0, 0.0]).is_none());
    }

    #[test]
    fn ray_from_inside_box_exits() {
        let b = Primitive::aabb(Point3::new(-1.0, -1.0, -1.0), Point3::new(1.0, 1.0, 1.0));
        assert_eq!(b.raycast(Point3::new(0.0, 0.0, 0.0), [0.0, 1.0, 0.0]), Some(1.0));
    }

    #[test]
    fn cylinder_side_and_cap() {
        let c = Primitive::cylinder(Point2::new(3.0, 0.0), 0.5, 0.0, 1.0);
        let t = c.raycast(Point3::new(0.0, 0.0, 0.5), [1.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(t, 2.5, epsilon = 1e-12);
        // from above, straight down onto the top cap
        let t = c.raycast(Point3::new(3.1, 0.0, 2.0), [0.0, 0.0, -1.0]).unwrap();
        assert_abs_diff_eq!(t, 1.0, epsilon = 1e-12);
        // passes over the top
        assert!(c.raycast(Point3::new(0.0, 0.0, 1.5), [1.0, 0.0, 0.0]).is_none());
    }

    #[test]
    fn footprint_distances() {
        let b = Primitive::aabb(Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 1.0, 1.0));
        assert_eq!(b.footprint_distance(Point2::new(0.5, 0.5)), 0.0);
        assert_abs_diff_eq!(b.footprint_distance(Point2::new(2.0, 2.0)), 2f64.sqrt(), epsilon = 1e-15);
        let c = Primitive::cylinder(Point2::new(0.0, 0.0), 1.0, 0.0, 1.0);
        assert_eq!(c.footprint_distance(Point2::new(3.0, 0.0)), 2.0);
    }

    #[test]
    fn world_picks_nearest() {
        let w = World::new(vec![
            Primitive::aabb(Point3::new(5.0, -1.0, 0.0), Point3::new(6.0, 1.0, 1.0)),
            Primitive::aabb(Point3::new(2.0, -1.0, 0.0), Point3::new(3.0, 1.0, 1.0)),
        ]);
        assert_eq!(w.raycast(Point3::new(0.0, 0.0, 0.5), [1.0, 0.0, 0.0], 8.0), Some((2.0, 1)));
        assert_eq!(w.raycast(Point3::new(0.0, 0.0, 0.5), [1.0, 0.0, 0.0], 1.5), None);
    }

    #[test]
    fn validation() {
        assert!(Primitive::aabb(Point3::new(1.0, 0.0, 0.0), Point3::new(0.0, 1.0, 1.0))
            .validate()
            .is_err());
        assert!(Primitive::cylinder(Point2::new(0.0, 0.0), -1.0, 0.0, 1.0).validate().is_err());
    }
}
