//! Mode switching between goal seeking and obstacle avoidance.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::lyapunov::NavVariables;
use super::potential::{in_sector, nearest_frontal, ObstacleReading, PotentialFieldParams, Side};
use crate::geometry::Angle;

pub const DEFAULT_HYSTERESIS: f64 = 0.05;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GuidanceMode {
    #[default]
    GoalSeek,
    Avoid,
}

impl GuidanceMode {
    pub fn as_str(self) -> &'static str {
        match self {
            GuidanceMode::GoalSeek => "GOAL_SEEK",
            GuidanceMode::Avoid => "AVOID",
        }
    }
}

impl fmt::Display for GuidanceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Stateless mode decision: avoid iff a frontal reading is inside `d0`.
pub fn guidance_mode(readings: &[ObstacleReading], _nav: &NavVariables, params: &PotentialFieldParams) -> GuidanceMode {
    match nearest_frontal(readings, params) {
        Some(r) if r.distance < params.d0 => GuidanceMode::Avoid,
        _ => GuidanceMode::GoalSeek,
    }
}

/// Hysteresis automaton over [`guidance_mode`].
///
/// Entry into `Avoid` happens when a reading inside the frontal sector is
/// closer than `d0`. Leaving requires every reading in both the frontal
/// sector and the sector around the goal line to be farther than
/// `d0 + hysteresis`. The detour side is latched on entry.
#[derive(Clone, Debug, PartialEq)]
pub struct Guidance {
    mode: GuidanceMode,
    side: Side,
    hysteresis: f64,
}

impl Default for Guidance {
    fn default() -> Self {
        Self::new(DEFAULT_HYSTERESIS)
    }
}

impl Guidance {
    pub fn new(hysteresis: f64) -> Self {
        Self {
            mode: GuidanceMode::GoalSeek,
            side: Side::Right,
            hysteresis,
        }
    }

    pub fn mode(&self) -> GuidanceMode {
        self.mode
    }

    /// Obstacle side latched at the most recent entry into `Avoid`.
    pub fn side(&self) -> Side {
        self.side
    }

    pub fn update(&mut self, readings: &[ObstacleReading], nav: &NavVariables, params: &PotentialFieldParams) -> GuidanceMode {
        match self.mode {
            GuidanceMode::GoalSeek => {
                if let Some(r) = nearest_frontal(readings, params).filter(|r| r.distance < params.d0) {
                    self.mode = GuidanceMode::Avoid;
                    self.side = Side::of(r.bearing);
                }
            }
            GuidanceMode::Avoid => {
                let release = params.d0 + self.hysteresis;
                let blocked = readings.iter().any(|r| {
                    r.distance <= release
                        && (in_sector(r.bearing, Angle::ZERO, params.sector_half_angle)
                            || in_sector(r.bearing, nav.alpha, params.sector_half_angle))
                });
                if !blocked {
                    self.mode = GuidanceMode::GoalSeek;
                }
            }
        }
        self.mode
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::potential::ReadingSource;

    fn ahead(d: f64) -> ObstacleReading {
        ObstacleReading {
            distance: d,
            bearing: Angle::ZERO,
            source: ReadingSource::Ultrasonic,
        }
    }

    #[test]
    fn stateless_examples() {
        let p = PotentialFieldParams::default();
        let nav = NavVariables::default();
        assert_eq!(guidance_mode(&[ahead(0.5)], &nav, &p), GuidanceMode::Avoid);
        assert_eq!(guidance_mode(&[ahead(2.0)], &nav, &p), GuidanceMode::GoalSeek);
        assert_eq!(guidance_mode(&[], &nav, &p), GuidanceMode::GoalSeek);
    }

    #[test]
    fn oscillation_inside_band_switches_once() {
        let p = PotentialFieldParams::default();
        let nav = NavVariables::default();
        let mut g = Guidance::default();
        let mut changes = 0;
        let mut last = g.mode();
        for i in 0..40 {
            let d = if i % 2 == 0 { 0.69 } else { 0.71 };
            let m = g.update(&[ahead(d)], &nav, &p);
            if m != last {
                changes += 1;
                last = m;
            }
        }
        assert_eq!(changes, 1);
        assert_eq!(g.mode(), GuidanceMode::Avoid);
        // leaving needs the band cleared
        assert_eq!(g.update(&[ahead(0.74)], &nav, &p), GuidanceMode::Avoid);
        assert_eq!(g.update(&[ahead(0.76)], &nav, &p), GuidanceMode::GoalSeek);
    }

    #[test]
    fn latches_side_on_entry() {
        let p = PotentialFieldParams::default();
        let nav = NavVariables::default();
        let mut g = Guidance::default();
        let left = ObstacleReading {
            bearing: Angle::from_degrees(10.0).unwrap(),
            ..ahead(0.5)
        };
        g.update(&[left], &nav, &p);
        assert_eq!(g.side(), Side::Left);
        let right = ObstacleReading {
            bearing: Angle::from_degrees(-10.0).unwrap(),
            ..ahead(0.4)
        };
        g.update(&[right], &nav, &p);
        assert_eq!(g.side(), Side::Left);
    }
}
