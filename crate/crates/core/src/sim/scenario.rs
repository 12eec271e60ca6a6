//! Scenario files.
//!
//! A scenario is a JSON document. Lengths are meters, times seconds, and
//! every angle is written in degrees under a key ending in `_deg`; nothing
//! else is interpreted as degrees. [`ScenarioFile`] mirrors the document and
//! [`Scenario`] is the validated, SI-unit form the simulator runs.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::control::{LyapunovGains, PotentialFieldParams, VelocityLimits};
use crate::ekf::{Channel, Landmark};
use crate::error::NavError;
use crate::geometry::{Point2, Pose};
use crate::odometry::RobotGeometry;
use crate::scan::{ScanConfig, SliceBand, TiltMount, World};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct PoseDeg {
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub theta_deg: f64,
}

impl PoseDeg {
    pub fn to_pose(&self, field: &str) -> Result<Pose, ScenarioError> {
        Pose::new(self.x, self.y, self.theta_deg.to_radians()).map_err(|e| ScenarioError::field(field, e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct NoiseFile {
    #[serde(default = "d_wheel_delta")]
    pub wheel_delta: f64,
    #[serde(default)]
    pub compass_sigma_deg: f64,
    #[serde(default)]
    pub lrf_range_sigma: f64,
    #[serde(default)]
    pub lrf_bearing_sigma_deg: f64,
    #[serde(default)]
    pub camera_bearing_sigma_deg: f64,
    #[serde(default)]
    pub ultrasonic_sigma: f64,
    #[serde(default)]
    pub initial_position_sigma: f64,
    #[serde(default)]
    pub initial_heading_sigma_deg: f64,
}

fn d_wheel_delta() -> f64 {
    0.01
}

impl Default for NoiseFile {
    fn default() -> Self {
        Self {
            wheel_delta: d_wheel_delta(),
            compass_sigma_deg: 0.0,
            lrf_range_sigma: 0.0,
            lrf_bearing_sigma_deg: 0.0,
            camera_bearing_sigma_deg: 0.0,
            ultrasonic_sigma: 0.0,
            initial_position_sigma: 0.0,
            initial_heading_sigma_deg: 0.0,
        }
    }
}

/// Truth noise, also used as the filter's noise model. Angles in radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    pub wheel_delta: f64,
    pub compass_sigma: f64,
    pub lrf_range_sigma: f64,
    pub lrf_bearing_sigma: f64,
    pub camera_bearing_sigma: f64,
    pub ultrasonic_sigma: f64,
    pub initial_position_sigma: f64,
    pub initial_heading_sigma: f64,
}

impl NoiseSpec {
    pub fn noiseless() -> Self {
        Self {
            wheel_delta: 0.0,
            compass_sigma: 0.0,
            lrf_range_sigma: 0.0,
            lrf_bearing_sigma: 0.0,
            camera_bearing_sigma: 0.0,
            ultrasonic_sigma: 0.0,
            initial_position_sigma: 0.0,
            initial_heading_sigma: 0.0,
        }
    }

    pub fn is_noiseless(&self) -> bool {
        *self == Self::noiseless()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct UltrasonicFile {
    #[serde(default = "d_us_bearings")]
    pub bearings_deg: Vec<f64>,
    #[serde(default = "d_us_range")]
    pub max_range: f64,
    #[serde(default = "d_us_cone")]
    pub cone_half_angle_deg: f64,
    #[serde(default = "d_us_rays")]
    pub rays_per_cone: usize,
    #[serde(default = "d_us_height")]
    pub mount_height: f64,
}

fn d_us_bearings() -> Vec<f64> {
    vec![-90.0, -50.0, -25.0, -8.0, 8.0, 25.0, 50.0, 90.0]
}
fn d_us_range() -> f64 {
    2.0
}
fn d_us_cone() -> f64 {
    12.0
}
fn d_us_rays() -> usize {
    5
}
fn d_us_height() -> f64 {
    0.3
}

impl Default for UltrasonicFile {
    fn default() -> Self {
        Self {
            bearings_deg: d_us_bearings(),
            max_range: d_us_range(),
            cone_half_angle_deg: d_us_cone(),
            rays_per_cone: d_us_rays(),
            mount_height: d_us_height(),
        }
    }
}

/// Fixed ring of range sensors around the body; bearings relative to heading.
#[derive(Clone, Debug, PartialEq)]
pub struct UltrasonicRing {
    pub bearings: Vec<f64>,
    pub max_range: f64,
    pub cone_half_angle: f64,
    pub rays_per_cone: usize,
    pub mount_height: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct SensorsFile {
    #[serde(default = "d_lrf_range")]
    pub lrf_max_range: f64,
    #[serde(default = "d_lrf_fov")]
    pub lrf_fov_deg: f64,
    #[serde(default = "d_cam_fov")]
    pub camera_fov_deg: f64,
    /// Map points farther than this from the robot are not turned into readings.
    #[serde(default = "d_map_range")]
    pub map_reading_range: f64,
    #[serde(default)]
    pub ultrasonic: UltrasonicFile,
}

fn d_lrf_range() -> f64 {
    8.0
}
fn d_lrf_fov() -> f64 {
    180.0
}
fn d_cam_fov() -> f64 {
    60.0
}
fn d_map_range() -> f64 {
    3.0
}

impl Default for SensorsFile {
    fn default() -> Self {
        Self {
            lrf_max_range: d_lrf_range(),
            lrf_fov_deg: d_lrf_fov(),
            camera_fov_deg: d_cam_fov(),
            map_reading_range: d_map_range(),
            ultrasonic: UltrasonicFile::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sensors {
    pub lrf_max_range: f64,
    pub lrf_fov: f64,
    pub camera_fov: f64,
    pub map_reading_range: f64,
    pub ultrasonic: UltrasonicRing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct PotentialFieldFile {
    #[serde(default = "d_katt")]
    pub k_att: f64,
    #[serde(default = "d_krep")]
    pub k_rep: f64,
    #[serde(default = "d_d0")]
    pub d0: f64,
    #[serde(default = "d_sector")]
    pub sector_half_angle_deg: f64,
    #[serde(default = "d_dmin")]
    pub d_min: f64,
    #[serde(default = "d_hyst")]
    pub hysteresis: f64,
}

fn d_katt() -> f64 {
    10.0
}
fn d_krep() -> f64 {
    10.0
}
fn d_d0() -> f64 {
    0.7
}
fn d_sector() -> f64 {
    60.0
}
fn d_dmin() -> f64 {
    0.05
}
fn d_hyst() -> f64 {
    crate::control::guidance::DEFAULT_HYSTERESIS
}

impl Default for PotentialFieldFile {
    fn default() -> Self {
        Self {
            k_att: d_katt(),
            k_rep: d_krep(),
            d0: d_d0(),
            sector_half_angle_deg: d_sector(),
            d_min: d_dmin(),
            hysteresis: d_hyst(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum EstimatorFile {
    OdometryOnly,
    Ekf { channels: Vec<Channel> },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Estimator {
    OdometryOnly,
    Ekf { channels: Vec<Channel> },
}

impl Estimator {
    pub fn label(&self) -> String {
        match self {
            Estimator::OdometryOnly => "odometry_only".into(),
            Estimator::Ekf { channels } => {
                let names: Vec<&str> = channels.iter().map(|c| c.name()).collect();
                format!("ekf({})", names.join("+"))
            }
        }
    }

    pub fn to_file(&self) -> EstimatorFile {
        match self {
            Estimator::OdometryOnly => EstimatorFile::OdometryOnly,
            Estimator::Ekf { channels } => EstimatorFile::Ekf {
                channels: channels.clone(),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct MountFile {
    #[serde(default = "d_mount_h")]
    pub height: f64,
    #[serde(default = "d_tilt_min")]
    pub tilt_min_deg: f64,
    #[serde(default = "d_tilt_max")]
    pub tilt_max_deg: f64,
}

fn d_mount_h() -> f64 {
    0.4
}
fn d_tilt_min() -> f64 {
    -5.0
}
fn d_tilt_max() -> f64 {
    30.0
}

impl Default for MountFile {
    fn default() -> Self {
        Self {
            height: d_mount_h(),
            tilt_min_deg: d_tilt_min(),
            tilt_max_deg: d_tilt_max(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ScanFile {
    #[serde(default = "d_lrf_range")]
    pub max_range: f64,
    #[serde(default = "d_scan_fov")]
    pub fov_deg: f64,
    #[serde(default = "d_scan_res")]
    pub resolution_deg: f64,
    #[serde(default = "d_frames")]
    pub n_frames: usize,
}

fn d_scan_fov() -> f64 {
    100.0
}
fn d_scan_res() -> f64 {
    1.0
}
fn d_frames() -> usize {
    81
}

impl Default for ScanFile {
    fn default() -> Self {
        Self {
            max_range: d_lrf_range(),
            fov_deg: d_scan_fov(),
            resolution_deg: d_scan_res(),
            n_frames: d_frames(),
        }
    }
}

/// Pre-run 3D scan taken at rest; its slice-reduced map feeds avoidance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct MappingFile {
    pub scan_pose: PoseDeg,
    #[serde(default)]
    pub mount: MountFile,
    #[serde(default)]
    pub scan: ScanFile,
    #[serde(default)]
    pub band: SliceBand,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mapping {
    pub scan_pose: Pose,
    pub mount: TiltMount,
    pub scan: ScanConfig,
    pub band: SliceBand,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ToleranceFile {
    #[serde(default = "d_tol_rho")]
    pub rho: f64,
    #[serde(default = "d_tol_alpha")]
    pub alpha_deg: f64,
    #[serde(default = "d_tol_phi")]
    pub phi_deg: f64,
    /// Switching radius for intermediate waypoints.
    #[serde(default = "d_tol_wp")]
    pub waypoint_radius: f64,
}

fn d_tol_rho() -> f64 {
    0.05
}
fn d_tol_alpha() -> f64 {
    3.0
}
fn d_tol_phi() -> f64 {
    5.0
}
fn d_tol_wp() -> f64 {
    0.25
}

impl Default for ToleranceFile {
    fn default() -> Self {
        Self {
            rho: d_tol_rho(),
            alpha_deg: d_tol_alpha(),
            phi_deg: d_tol_phi(),
            waypoint_radius: d_tol_wp(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GoalTolerance {
    pub rho: f64,
    pub alpha: f64,
    pub phi: f64,
    pub waypoint_radius: f64,
}

/// The on-disk scenario document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub robot: RobotGeometry,
    #[serde(default)]
    pub world: World,
    #[serde(default)]
    pub landmarks: Vec<Landmark>,
    #[serde(default = "d_start")]
    pub start: PoseDeg,
    /// Intermediate poses visited in order before `goal`.
    #[serde(default)]
    pub waypoints: Vec<PoseDeg>,
    pub goal: PoseDeg,
    #[serde(default)]
    pub gains: LyapunovGains,
    #[serde(default)]
    pub limits: VelocityLimits,
    #[serde(default)]
    pub potential_field: PotentialFieldFile,
    /// Obstacle avoidance on/off; when off the Lyapunov controller runs alone.
    #[serde(default = "d_true")]
    pub avoidance: bool,
    #[serde(default)]
    pub noise: NoiseFile,
    #[serde(default)]
    pub sensors: SensorsFile,
    #[serde(default = "d_estimator")]
    pub estimator: EstimatorFile,
    #[serde(default)]
    pub mapping: Option<MappingFile>,
    #[serde(default)]
    pub tolerance: ToleranceFile,
    #[serde(default = "d_dt")]
    pub dt: f64,
    #[serde(default = "d_tmax")]
    pub t_max: f64,
    #[serde(default = "d_seed")]
    pub seed: u64,
}

fn d_start() -> PoseDeg {
    PoseDeg {
        x: 0.0,
        y: 0.0,
        theta_deg: 0.0,
    }
}
fn d_true() -> bool {
    true
}
fn d_estimator() -> EstimatorFile {
    EstimatorFile::Ekf {
        channels: vec![Channel::CompassHeading, Channel::LrfRange, Channel::LrfBearing],
    }
}
fn d_dt() -> f64 {
    0.02
}
fn d_tmax() -> f64 {
    60.0
}
fn d_seed() -> u64 {
    1
}

/// Validated scenario in SI units.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub robot: RobotGeometry,
    pub world: World,
    pub landmarks: Vec<Landmark>,
    pub start: Pose,
    pub waypoints: Vec<Pose>,
    pub goal: Pose,
    pub gains: LyapunovGains,
    pub limits: VelocityLimits,
    pub pf: PotentialFieldParams,
    pub hysteresis: f64,
    pub avoidance: bool,
    pub noise: NoiseSpec,
    pub sensors: Sensors,
    pub estimator: Estimator,
    pub mapping: Option<Mapping>,
    pub tolerance: GoalTolerance,
    pub dt: f64,
    pub t_max: f64,
    pub seed: u64,
}

/// Validation failure naming the offending field and, when it can be
/// located in the source text, its line.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioError {
    pub field: String,
    pub message: String,
    pub line: Option<usize>,
}

impl ScenarioError {
    pub fn field(field: &str, message: impl Into<String>) -> Self {
        Self {
            field: field.to_string(),
            message: message.into(),
            line: None,
        }
    }

    fn from_nav(prefix: &str, e: NavError) -> Self {
        match e {
            NavError::InvalidParameter { field, reason } => Self::field(&format!("{prefix}.{field}"), reason),
            other => Self::field(prefix, other.to_string()),
        }
    }

    /// Fills in the line of the offending key in `text` when it is unknown.
    pub fn locate(mut self, text: &str) -> Self {
        if self.line.is_none() {
            let key = self.field.rsplit('.').next().unwrap_or(&self.field);
            let key = key.split('[').next().unwrap_or(key);
            let needle = format!("\"{key}\"");
            self.line = text.lines().position(|l| l.contains(&needle)).map(|i| i + 1);
        }
        self
    }
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: field `{}`: {}", self.field, self.message),
            None => write!(f, "field `{}`: {}", self.field, self.message),
        }
    }
}

impl std::error::Error for ScenarioError {}

fn positive(field: &str, v: f64) -> Result<f64, ScenarioError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(ScenarioError::field(field, format!("must be > 0, got {v}")))
    }
}

fn nonneg(field: &str, v: f64) -> Result<f64, ScenarioError> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(ScenarioError::field(field, format!("must be >= 0, got {v}")))
    }
}

impl ScenarioFile {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            // serde reports "unknown field `x`" / "missing field `x`" / type errors
            let field = msg
                .split('`')
                .nth(1)
                .filter(|_| msg.contains("field"))
                .unwrap_or("<document>")
                .to_string();
            ScenarioError {
                field,
                message: msg,
                line: Some(e.line()),
            }
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// JSON Schema of the scenario document, pretty-printed.
    pub fn json_schema() -> String {
        let schema = schemars::schema_for!(ScenarioFile);
        serde_json::to_string_pretty(&schema).expect("schema serializes") + "\n"
    }

    pub fn resolve(&self) -> Result<Scenario, ScenarioError> {
        self.robot.validate().map_err(|e| ScenarioError::from_nav("robot", e))?;
        self.world.validate().map_err(|e| ScenarioError::from_nav("world", e))?;
        for (i, lm) in self.landmarks.iter().enumerate() {
            if !lm.position.is_finite() {
                return Err(ScenarioError::field(&format!("landmarks[{i}].position"), "must be finite"));
            }
            if self.landmarks[..i].iter().any(|o| o.id == lm.id) {
                return Err(ScenarioError::field(
                    &format!("landmarks[{i}].id"),
                    format!("duplicate id {}", lm.id),
                ));
            }
        }
        let start = self.start.to_pose("start")?;
        let goal = self.goal.to_pose("goal")?;
        let waypoints = self
            .waypoints
            .iter()
            .enumerate()
            .map(|(i, w)| w.to_pose(&format!("waypoints[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        self.gains.validate().map_err(|e| ScenarioError::from_nav("gains", e))?;
        self.limits.validate().map_err(|e| ScenarioError::from_nav("limits", e))?;

        let pf_file = &self.potential_field;
        let pf = PotentialFieldParams {
            k_att: pf_file.k_att,
            k_rep: pf_file.k_rep,
            d0: pf_file.d0,
            sector_half_angle: pf_file.sector_half_angle_deg.to_radians(),
            d_min: pf_file.d_min,
        };
        pf.validate().map_err(|e| ScenarioError::from_nav("potential_field", e))?;
        let hysteresis = nonneg("potential_field.hysteresis", pf_file.hysteresis)?;

        let n = &self.noise;
        let noise = NoiseSpec {
            wheel_delta: nonneg("noise.wheel_delta", n.wheel_delta)?,
            compass_sigma: nonneg("noise.compass_sigma_deg", n.compass_sigma_deg)?.to_radians(),
            lrf_range_sigma: nonneg("noise.lrf_range_sigma", n.lrf_range_sigma)?,
            lrf_bearing_sigma: nonneg("noise.lrf_bearing_sigma_deg", n.lrf_bearing_sigma_deg)?.to_radians(),
            camera_bearing_sigma: nonneg("noise.camera_bearing_sigma_deg", n.camera_bearing_sigma_deg)?.to_radians(),
            ultrasonic_sigma: nonneg("noise.ultrasonic_sigma", n.ultrasonic_sigma)?,
            initial_position_sigma: nonneg("noise.initial_position_sigma", n.initial_position_sigma)?,
            initial_heading_sigma: nonneg("noise.initial_heading_sigma_deg", n.initial_heading_sigma_deg)?.to_radians(),
        };

        let s = &self.sensors;
        let us = &s.ultrasonic;
        if us.rays_per_cone == 0 {
            return Err(ScenarioError::field("sensors.ultrasonic.rays_per_cone", "must be >= 1"));
        }
        if let Some(b) = us.bearings_deg.iter().find(|b| !b.is_finite()) {
            return Err(ScenarioError::field(
                "sensors.ultrasonic.bearings_deg",
                format!("non-finite bearing {b}"),
            ));
        }
        let sensors = Sensors {
            lrf_max_range: positive("sensors.lrf_max_range", s.lrf_max_range)?,
            lrf_fov: positive("sensors.lrf_fov_deg", s.lrf_fov_deg)?.to_radians(),
            camera_fov: positive("sensors.camera_fov_deg", s.camera_fov_deg)?.to_radians(),
            map_reading_range: positive("sensors.map_reading_range", s.map_reading_range)?,
            ultrasonic: UltrasonicRing {
                bearings: us.bearings_deg.iter().map(|b| b.to_radians()).collect(),
                max_range: positive("sensors.ultrasonic.max_range", us.max_range)?,
                cone_half_angle: nonneg("sensors.ultrasonic.cone_half_angle_deg", us.cone_half_angle_deg)?.to_radians(),
                rays_per_cone: us.rays_per_cone,
                mount_height: nonneg("sensors.ultrasonic.mount_height", us.mount_height)?,
            },
        };

        let estimator = match &self.estimator {
            EstimatorFile::OdometryOnly => Estimator::OdometryOnly,
            EstimatorFile::Ekf { channels } => {
                if channels.is_empty() {
                    return Err(ScenarioError::field("estimator.channels", "EKF needs at least one channel"));
                }
                if channels.iter().any(|c| c.needs_landmark()) && self.landmarks.is_empty() {
                    return Err(ScenarioError::field(
                        "estimator.channels",
                        "landmark channels need at least one landmark",
                    ));
                }
                Estimator::Ekf {
                    channels: channels.clone(),
                }
            }
        };

        let mapping = match &self.mapping {
            None => None,
            Some(m) => {
                let mount = TiltMount {
                    height: m.mount.height,
                    tilt_min: m.mount.tilt_min_deg.to_radians(),
                    tilt_max: m.mount.tilt_max_deg.to_radians(),
                    ..TiltMount::default()
                };
                mount.validate().map_err(|e| ScenarioError::from_nav("mapping.mount", e))?;
                let scan = ScanConfig {
                    max_range: m.scan.max_range,
                    fov: m.scan.fov_deg.to_radians(),
                    angular_resolution: m.scan.resolution_deg.to_radians(),
                    n_frames: m.scan.n_frames,
                };
                scan.validate().map_err(|e| ScenarioError::from_nav("mapping.scan", e))?;
                m.band.validate().map_err(|e| ScenarioError::from_nav("mapping", e))?;
                Some(Mapping {
                    scan_pose: m.scan_pose.to_pose("mapping.scan_pose")?,
                    mount,
                    scan,
                    band: m.band,
                })
            }
        };

        let t = &self.tolerance;
        let tolerance = GoalTolerance {
            rho: positive("tolerance.rho", t.rho)?,
            alpha: positive("tolerance.alpha_deg", t.alpha_deg)?.to_radians(),
            phi: positive("tolerance.phi_deg", t.phi_deg)?.to_radians(),
            waypoint_radius: positive("tolerance.waypoint_radius", t.waypoint_radius)?,
        };

        if !(self.dt.is_finite() && self.dt > 0.0 && self.dt <= 0.1) {
            return Err(ScenarioError::field("dt", format!("must be in (0, 0.1], got {}", self.dt)));
        }
        let t_max = positive("t_max", self.t_max)?;

        Ok(Scenario {
            name: self.name.clone(),
            robot: self.robot,
            world: self.world.clone(),
            landmarks: self.landmarks.clone(),
            start,
            waypoints,
            goal,
            gains: self.gains,
            limits: self.limits,
            pf,
            hysteresis,
            avoidance: self.avoidance,
            noise,
            sensors,
            estimator,
            mapping,
            tolerance,
            dt: self.dt,
            t_max,
            seed: self.seed,
        })
    }
}

impl Scenario {
    /// Parses and validates a scenario document, attaching line numbers to
    /// field errors where possible.
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        ScenarioFile::from_json(text)?.resolve().map_err(|e| e.locate(text))
    }

    /// Goal position as a point.
    pub fn goal_point(&self) -> Point2 {
        self.goal.position()
    }

    pub fn with_estimator(&self, estimator: Estimator) -> Self {
        Self {
            estimator,
            ..self.clone()
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }
}
