//! Velocity-command generators and the mode logic that switches between them.

pub mod guidance;
pub mod lyapunov;
pub mod potential;

pub use guidance::{guidance_mode, Guidance, GuidanceMode};
pub use lyapunov::{
    closed_loop_nav_dynamics, lyapunov_control, lyapunov_rate, lyapunov_value, navigation_variables, terminal_command,
    LyapunovGains, NavVariables, VelocityCommand, VelocityLimits, EPS_GOAL,
};
pub use potential::{
    attractive_command, avoidance_command, detour_command, detour_heading, nearest_frontal, repulsive_magnitude, ObstacleReading,
    PotentialFieldParams, ReadingSource, Side,
};
