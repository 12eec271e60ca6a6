//! Plain-text interchange for point clouds and obstacle maps.
//!
//! Point clouds are one `x y z` line per point in meters, each frame
//! terminated by a blank line. Maps are one `x y` line per point. Rasters
//! export as ASCII portable graymaps (P2), occupied cells black.

use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

use super::reduce::{ObstacleMap, OccupancyGrid};
use super::tilt::ScanFrame;
use crate::geometry::Point3;

fn invalid(line: usize, msg: impl std::fmt::Display) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, format!("line {line}: {msg}"))
}

fn parse_fields<const N: usize>(line: &str, lineno: usize) -> io::Result<[f64; N]> {
    let mut out = [0.0f64; N];
    let mut it = line.split_whitespace();
    for slot in out.iter_mut() {
        let tok = it.next().ok_or_else(|| invalid(lineno, format!("expected {N} numbers")))?;
        *slot = tok.parse().map_err(|e| invalid(lineno, format!("{tok:?}: {e}")))?;
        if !slot.is_finite() {
            return Err(invalid(lineno, "non-finite coordinate"));
        }
    }
    if it.next().is_some() {
        return Err(invalid(lineno, format!("expected {N} numbers")));
    }
    Ok(out)
}

pub fn write_point_cloud<W: Write>(mut w: W, frames: &[ScanFrame]) -> io::Result<()> {
    for f in frames {
        for p in &f.points {
            writeln!(w, "{} {} {}", p.x, p.y, p.z)?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Reads frames back; lines starting with `#` are ignored.
pub fn read_point_cloud<R: BufRead>(r: R) -> io::Result<Vec<ScanFrame>> {
    let mut frames = Vec::new();
    let mut current: Vec<Point3> = Vec::new();
    let mut pending = false;
    for (n, line) in r.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.starts_with('#') {
            continue;
        }
        if t.is_empty() {
            frames.push(ScanFrame {
                elevation: None,
                points: std::mem::take(&mut current),
            });
            pending = false;
            continue;
        }
        let [x, y, z] = parse_fields::<3>(t, n + 1)?;
        current.push(Point3::new(x, y, z));
        pending = true;
    }
    if pending {
        frames.push(ScanFrame {
            elevation: None,
            points: current,
        });
    }
    Ok(frames)
}

pub fn write_map<W: Write>(mut w: W, map: &ObstacleMap) -> io::Result<()> {
    for p in &map.points {
        writeln!(w, "{} {}", p.x, p.y)?;
    }
    Ok(())
}

pub fn read_map<R: BufRead>(r: R) -> io::Result<ObstacleMap> {
    let mut points = Vec::new();
    for (n, line) in r.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let [x, y] = parse_fields::<2>(t, n + 1)?;
        points.push(crate::geometry::Point2::new(x, y));
    }
    Ok(ObstacleMap::from_points(points))
}

/// ASCII graymap with the highest row first, so north is up.
pub fn grid_to_pgm(grid: &OccupancyGrid) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "P2");
    let _ = writeln!(s, "# cell_size {} origin_cell {} {}", grid.cell_size, grid.i0, grid.j0);
    let _ = writeln!(s, "{} {}", grid.width, grid.height);
    let _ = writeln!(s, "255");
    for row in (0..grid.height).rev() {
        let line: Vec<&str> = (0..grid.width)
            .map(|col| {
                if grid.is_occupied(grid.i0 + col as i64, grid.j0 + row as i64) {
                    "0"
                } else {
                    "255"
                }
            })
            .collect();
        let _ = writeln!(s, "{}", line.join(" "));
    }
    s
}
