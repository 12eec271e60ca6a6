//! Reduction of a stack of scan frames to a 2D obstacle map.
//!
//! Every hit whose height lies strictly inside the slice band is kept and
//! projected to the floor plane; the kept points of all frames are unioned.
//! Obstacles below the band are left to the ultrasonic ring, and anything
//! above it is high enough for the robot to pass under.

use serde::{Deserialize, Serialize};

use super::tilt::ScanFrame;
use crate::error::{NavError, Result};
use crate::geometry::Point2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct SliceBand {
    pub z_min: f64,
    pub z_max: f64,
}

impl Default for SliceBand {
    fn default() -> Self {
        Self { z_min: 0.8, z_max: 1.2 }
    }
}

impl SliceBand {
    pub fn new(z_min: f64, z_max: f64) -> Result<Self> {
        let b = Self { z_min, z_max };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.z_min.is_finite() && self.z_max.is_finite() && self.z_min < self.z_max) {
            return Err(NavError::invalid(
                "band",
                format!("need z_min < z_max, got ({}, {})", self.z_min, self.z_max),
            ));
        }
        Ok(())
    }

    /// Open-interval membership.
    pub fn contains(&self, z: f64) -> bool {
        self.z_min < z && z < self.z_max
    }
}

/// Axis-aligned occupancy raster. Cell `(i, j)` covers
/// `[i·cell, (i+1)·cell) × [j·cell, (j+1)·cell)`; indices are global, so a
/// point on a cell boundary belongs to the cell above/right of it.
#[derive(Clone, Debug, PartialEq)]
pub struct OccupancyGrid {
    pub cell_size: f64,
    pub i0: i64,
    pub j0: i64,
    pub width: usize,
    pub height: usize,
    occupied: Vec<bool>,
}

impl OccupancyGrid {
    pub fn empty(cell_size: f64) -> Self {
        Self {
            cell_size,
            i0: 0,
            j0: 0,
            width: 0,
            height: 0,
            occupied: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.width == 0 || self.height == 0
    }

    pub fn cell_index(&self, p: Point2) -> (i64, i64) {
        ((p.x / self.cell_size).floor() as i64, (p.y / self.cell_size).floor() as i64)
    }

    pub fn is_occupied(&self, i: i64, j: i64) -> bool {
        let (di, dj) = (i - self.i0, j - self.j0);
        if di < 0 || dj < 0 || di as usize >= self.width || dj as usize >= self.height {
            return false;
        }
        self.occupied[dj as usize * self.width + di as usize]
    }

    pub fn occupied_count(&self) -> usize {
        self.occupied.iter().filter(|o| **o).count()
    }

    /// Occupied cells as global `(i, j)` indices, row-major from the lowest row.
    pub fn occupied_cells(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        self.occupied
            .iter()
            .enumerate()
            .filter(|(_, o)| **o)
            .map(move |(k, _)| (self.i0 + (k % self.width) as i64, self.j0 + (k / self.width) as i64))
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ObstacleMap {
    pub points: Vec<Point2>,
    pub raster: Option<OccupancyGrid>,
}

impl ObstacleMap {
    pub fn from_points(points: Vec<Point2>) -> Self {
        Self { points, raster: None }
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn with_raster(mut self, cell_size: f64) -> Result<Self> {
        self.raster = Some(rasterize(&self, cell_size)?);
        Ok(self)
    }

    /// Every point falls in an occupied raster cell.
    pub fn is_consistent(&self) -> bool {
        match &self.raster {
            None => true,
            Some(g) => self.points.iter().all(|p| {
                let (i, j) = g.cell_index(*p);
                g.is_occupied(i, j)
            }),
        }
    }
}

/// Unions the floor projections of all in-band hits. The output is sorted
/// and free of exact duplicates, so it does not depend on frame order.
pub fn slice_reduce(frames: &[ScanFrame], band: &SliceBand) -> Result<ObstacleMap> {
    band.validate()?;
    let mut points: Vec<Point2> = frames
        .iter()
        .flat_map(|f| f.points.iter())
        .filter(|p| band.contains(p.z))
        .map(|p| p.xy())
        .collect();
    points.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    points.dedup();
    Ok(ObstacleMap::from_points(points))
}

pub fn rasterize(map: &ObstacleMap, cell_size: f64) -> Result<OccupancyGrid> {
    if !(cell_size.is_finite() && cell_size > 0.0) {
        return Err(NavError::invalid("cell_size", "must be > 0"));
    }
    let mut grid = OccupancyGrid::empty(cell_size);
    if map.points.is_empty() {
        return Ok(grid);
    }
    let idx: Vec<(i64, i64)> = map.points.iter().map(|p| grid.cell_index(*p)).collect();
    let (imin, imax) = idx.iter().fold((i64::MAX, i64::MIN), |(a, b), (i, _)| (a.min(*i), b.max(*i)));
    let (jmin, jmax) = idx.iter().fold((i64::MAX, i64::MIN), |(a, b), (_, j)| (a.min(*j), b.max(*j)));
    grid.i0 = imin;
    grid.j0 = jmin;
    grid.width = (imax - imin + 1) as usize;
    grid.height = (jmax - jmin + 1) as usize;
    grid.occupied = vec![false; grid.width * grid.height];
    for (i, j) in idx {
        let k = (j - jmin) as usize * grid.width + (i - imin) as usize;
        grid.occupied[k] = true;
    }
    Ok(grid)
}

/// Single-linkage clusters: points closer than `link` end up together.
/// Clusters are returned in order of first appearance.
pub fn cluster_points(points: &[Point2], link: f64) -> Vec<Vec<Point2>> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for a in 0..n {
        for b in a + 1..n {
            if points[a].distance(&points[b]) < link {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[rb] = ra;
                }
            }
        }
    }
    let mut order: Vec<usize> = Vec::new();
    let mut groups: Vec<Vec<Point2>> = Vec::new();
    for (i, &p) in points.iter().enumerate() {
        let r = find(&mut parent, i);
        match order.iter().position(|&o| o == r) {
            Some(k) => groups[k].push(p),
            None => {
                order.push(r);
                groups.push(vec![p]);
            }
        }
    }
    groups
}
