//! Tilt-scan acquisition and reduction of 3D scans to a 2D navigation map.

pub mod io;
pub mod reduce;
pub mod scenes;
pub mod tilt;
pub mod world;

pub use reduce::{cluster_points, rasterize, slice_reduce, ObstacleMap, OccupancyGrid, SliceBand};
pub use tilt::{ground_intersection_distance, simulate_tilt_scan, ScanConfig, ScanFrame, TiltMount};
pub use world::{Primitive, World};
