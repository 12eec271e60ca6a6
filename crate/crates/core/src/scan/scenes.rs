//! Built-in synthetic scenes for the mapping pipeline.

use super::world::{Primitive, World};
use crate::geometry::{Point2, Point3};

/// Rectangular table with four square legs, viewed from the origin along +x.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Table {
    /// x of the leading (near) edge.
    pub near_x: f64,
    pub depth: f64,
    /// Extent along y, centered on y = 0.
    pub width: f64,
    pub leg_size: f64,
    pub top_thickness: f64,
    pub height: f64,
}

impl Default for Table {
    fn default() -> Self {
        Self {
            near_x: 1.5,
            depth: 0.6,
            width: 1.2,
            leg_size: 0.05,
            top_thickness: 0.04,
            height: 1.0,
        }
    }
}

impl Table {
    pub fn primitives(&self) -> Vec<Primitive> {
        let (x0, x1) = (self.near_x, self.near_x + self.depth);
        let (y0, y1) = (-0.5 * self.width, 0.5 * self.width);
        let under = self.height - self.top_thickness;
        let s = self.leg_size;
        let mut out = vec![Primitive::aabb(Point3::new(x0, y0, under), Point3::new(x1, y1, self.height))];
        for (lx, ly) in [(x0, y0), (x0, y1 - s), (x1 - s, y0), (x1 - s, y1 - s)] {
            out.push(Primitive::aabb(Point3::new(lx, ly, 0.0), Point3::new(lx + s, ly + s, under)));
        }
        out
    }

    pub fn leg_centers(&self) -> [Point2; 4] {
        let (x0, x1) = (self.near_x, self.near_x + self.depth);
        let (y0, y1) = (-0.5 * self.width, 0.5 * self.width);
        let h = 0.5 * self.leg_size;
        [
            Point2::new(x0 + h, y0 + h),
            Point2::new(x0 + h, y1 - h),
            Point2::new(x1 - h, y0 + h),
            Point2::new(x1 - h, y1 - h),
        ]
    }
}

pub fn table() -> World {
    World::new(Table::default().primitives())
}

/// Overhead crossbar 2.5 m ahead along +x: its underside is at 0.85 m and
/// its top at 1.0 m, so it sits inside the slice band and above the
/// ultrasonic ring.
pub fn gate() -> World {
    World::new(vec![Primitive::aabb(
        Point3::new(2.5, -0.8, 0.85),
        Point3::new(2.7, 0.8, 1.0),
    )])
}

pub fn by_name(name: &str) -> Option<World> {
    match name {
        "table" => Some(table()),
        "gate" => Some(gate()),
        "empty" => Some(World::default()),
        _ => None,
    }
}

pub const SCENE_NAMES: [&str; 3] = ["table", "gate", "empty"];
