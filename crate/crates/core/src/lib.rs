//! Mobile-robot navigation stack: differential-drive odometry, EKF
//! localization, tilt-scan 3D→2D obstacle mapping, potential-field
//! avoidance, polar-coordinate pose control, and a deterministic
//! closed-loop simulator tying them together.

pub mod control;
pub mod ekf;
pub mod error;
pub mod geometry;
pub mod odometry;
pub mod scan;
pub mod sim;

pub use error::{NavError, Result};
pub use geometry::{bearing_to, normalize_angle, Angle, Point2, Point3, Pose};
