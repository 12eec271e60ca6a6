//! Subcommand bodies. Each writes its outputs and a manifest into one directory.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use navstack::ekf::Channel;
use navstack::scan::io::{grid_to_pgm, read_map, read_point_cloud, write_map, write_point_cloud};
use navstack::scan::{rasterize, scenes, simulate_tilt_scan, ObstacleMap, Primitive, ScanConfig, TiltMount};
use navstack::sim::{
    monte_carlo, parse_csv, prepare_map, run_scenario_with_map, run_seed, CsvRow, Estimator, Outcome, Scenario, ScenarioFile,
};
use navstack::Pose;

use crate::manifest::{CommandName, MapArgs, RunManifest};
use crate::svg::{self, Panel, Series, Shape};

pub const DEFAULT_OUT: &str = "navstack-out";
pub const OUT_ENV: &str = "NAVSTACK_OUT";

/// `--out` wins over the environment, which wins over `fallback`.
pub fn resolve_out(flag: Option<&Path>, fallback: &Path) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    match std::env::var_os(OUT_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => fallback.to_path_buf(),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub t_max: Option<f64>,
    pub dt: Option<f64>,
}

impl Overrides {
    fn apply(&self, file: &mut ScenarioFile) {
        if let Some(s) = self.seed {
            file.seed = s;
        }
        if let Some(t) = self.t_max {
            file.t_max = t;
        }
        if let Some(dt) = self.dt {
            file.dt = dt;
        }
    }
}

/// A parsed scenario document with its source text, for error locations.
#[derive(Clone, Debug)]
pub struct LoadedScenario {
    pub file: ScenarioFile,
    pub text: String,
    pub origin: String,
}

impl LoadedScenario {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let file = ScenarioFile::from_json(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
        Ok(Self {
            file,
            text,
            origin: path.display().to_string(),
        })
    }

    /// A scenario taken from a manifest; errors cannot be traced to a line.
    pub fn from_file(file: ScenarioFile, origin: &str) -> Self {
        Self {
            text: file.to_json(),
            file,
            origin: origin.to_string(),
        }
    }

    pub fn resolve(&self) -> Result<Scenario> {
        self.file
            .resolve()
            .map_err(|e| anyhow::anyhow!("{}: {}", self.origin, e.locate(&self.text)))
    }
}

fn prepare_dir(dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    std::path::absolute(dir).with_context(|| format!("resolving {}", dir.display()))
}

fn write_file(dir: &Path, name: &str, contents: &str, files: &mut Vec<String>) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    files.push(name.to_string());
    Ok(())
}

fn read_text(dir: &Path, name: &str) -> Result<String> {
    let path = dir.join(name);
    fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))
}

fn read_rows(dir: &Path, name: &str) -> Result<Vec<CsvRow>> {
    parse_csv(&read_text(dir, name)?).with_context(|| format!("parsing {}", dir.join(name).display()))
}

fn map_text(map: &ObstacleMap) -> String {
    let mut buf = Vec::new();
    write_map(&mut buf, map).expect("writing to memory");
    String::from_utf8(buf).expect("map text is ASCII")
}

/// Obstacle footprints, landmarks, and start/goal markers for a plan view.
fn world_shapes(s: &ScenarioFile) -> Vec<Shape> {
    let mut shapes: Vec<Shape> = s
        .world
        .primitives
        .iter()
        .map(|p| match p {
            Primitive::Box { min, max } => Shape::Rect {
                min: (min[0], min[1]),
                max: (max[0], max[1]),
                fill: svg::GRAY,
            },
            Primitive::Cylinder { center, radius, .. } => Shape::Circle {
                center: (center[0], center[1]),
                radius: *radius,
                fill: svg::GRAY,
            },
        })
        .collect();
    for lm in &s.landmarks {
        shapes.push(Shape::Marker {
            at: (lm.position.x, lm.position.y),
            label: format!("L{}", lm.id),
            color: svg::GREEN,
        });
    }
    shapes.push(Shape::Marker {
        at: (s.start.x, s.start.y),
        label: "start".into(),
        color: svg::BLACK,
    });
    for (k, w) in s.waypoints.iter().enumerate() {
        shapes.push(Shape::Marker {
            at: (w.x, w.y),
            label: format!("wp{}", k + 1),
            color: svg::ORANGE,
        });
    }
    shapes.push(Shape::Marker {
        at: (s.goal.x, s.goal.y),
        label: "goal".into(),
        color: svg::RED,
    });
    shapes
}

fn series(rows: &[CsvRow], f: impl Fn(&CsvRow) -> (f64, f64)) -> Vec<(f64, f64)> {
    rows.iter().map(f).collect()
}

fn trajectory_svg(title: &str, rows: &[CsvRow], scenario: &ScenarioFile, map: Option<&ObstacleMap>) -> String {
    let mut p = Panel::new(title, "x [m]", "y [m]");
    p.equal_aspect = true;
    p.shapes = world_shapes(scenario);
    if let Some(m) = map {
        p.shapes.push(Shape::Dots {
            points: m.points.iter().map(|q| (q.x, q.y)).collect(),
            color: svg::RED,
            size: 2.5,
        });
    }
    p.series
        .push(Series::new("true", series(rows, |r| (r.x_true, r.y_true)), svg::BLACK));
    p.series
        .push(Series::new("estimated", series(rows, |r| (r.x_est, r.y_est)), svg::BLUE).dashed());
    svg::render(&[p], 720.0, 640.0)
}

fn velocities_svg(rows: &[CsvRow]) -> String {
    let mut v = Panel::new("Linear velocity", "t [s]", "v [m/s]");
    v.series.push(Series::new("", series(rows, |r| (r.t, r.v)), svg::BLUE));
    let mut w = Panel::new("Angular velocity", "t [s]", "omega [rad/s]");
    w.series.push(Series::new("", series(rows, |r| (r.t, r.omega)), svg::ORANGE));
    svg::render(&[v, w], 720.0, 300.0)
}

fn lyapunov_svg(rows: &[CsvRow]) -> String {
    let mut p = Panel::new("Lyapunov function", "t [s]", "V");
    p.series
        .push(Series::new("", series(rows, |r| (r.t, r.lyapunov)), svg::GREEN));
    svg::render(&[p], 720.0, 320.0)
}

/// Simulates one scenario, writing the log, plots, and manifest.
pub fn cmd_run(scenario: &LoadedScenario, overrides: Overrides, out: &Path) -> Result<Outcome> {
    let mut loaded = scenario.clone();
    overrides.apply(&mut loaded.file);
    let resolved = loaded.resolve()?;
    let dir = prepare_dir(out)?;
    let mut manifest = RunManifest::new(CommandName::Run, &dir);
    manifest.seed = Some(resolved.seed);
    manifest.scenario = Some(loaded.file.clone());

    let map = prepare_map(&resolved).context("building the obstacle map")?;
    if let Some(m) = &map {
        write_file(&dir, "map.txt", &map_text(m), &mut manifest.files)?;
    }
    let log = match run_scenario_with_map(&resolved, map.as_ref()) {
        Ok(log) => log,
        Err(failure) => {
            write_file(&dir, "trajectory.csv", &failure.partial.to_csv(), &mut manifest.files)?;
            manifest.write(&dir)?;
            return Err(failure).context("simulation aborted; partial log written");
        }
    };
    write_file(&dir, "trajectory.csv", &log.to_csv(), &mut manifest.files)?;

    let rows = read_rows(&dir, "trajectory.csv")?;
    let logged_map = match map {
        Some(_) => Some(read_map(BufReader::new(read_text(&dir, "map.txt")?.as_bytes()))?),
        None => None,
    };
    let title = format!("Trajectory: {}", display_name(&loaded.file));
    write_file(
        &dir,
        "trajectory.svg",
        &trajectory_svg(&title, &rows, &loaded.file, logged_map.as_ref()),
        &mut manifest.files,
    )?;
    write_file(&dir, "velocities.svg", &velocities_svg(&rows), &mut manifest.files)?;
    write_file(&dir, "lyapunov.svg", &lyapunov_svg(&rows), &mut manifest.files)?;
    manifest.write(&dir)?;
    Ok(log.outcome)
}

fn display_name(file: &ScenarioFile) -> &str {
    if file.name.is_empty() {
        "unnamed scenario"
    } else {
        &file.name
    }
}

/// Odometry alone, the compass alone, and the scenario's own fusion set.
pub fn comparison_set(scenario: &Scenario) -> Vec<Estimator> {
    let full = match &scenario.estimator {
        Estimator::Ekf { channels } => channels.clone(),
        Estimator::OdometryOnly => vec![Channel::CompassHeading, Channel::LrfRange, Channel::LrfBearing],
    };
    let mut set = vec![
        Estimator::OdometryOnly,
        Estimator::Ekf {
            channels: vec![Channel::CompassHeading],
        },
    ];
    let full = Estimator::Ekf { channels: full };
    if !set.contains(&full) {
        set.push(full);
    }
    set
}

fn slug(label: &str) -> String {
    let mut s: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect();
    while s.ends_with('_') {
        s.pop();
    }
    s
}

pub const RMSE_HEADER: &str = "estimator,runs,final_position_rmse,trajectory_rmse,mean_nees,goal_rate";

/// Monte-Carlo comparison of estimator configurations.
pub fn cmd_compare(scenario: &LoadedScenario, n_runs: usize, out: &Path) -> Result<()> {
    if n_runs < 2 {
        bail!("usage: --n-runs must be at least 2, got {n_runs}");
    }
    let resolved = scenario.resolve()?;
    let dir = prepare_dir(out)?;
    let mut manifest = RunManifest::new(CommandName::Compare, &dir);
    manifest.seed = Some(resolved.seed);
    manifest.scenario = Some(scenario.file.clone());
    manifest.n_runs = Some(n_runs);

    let estimators = comparison_set(&resolved);
    let summary = monte_carlo(&resolved, &estimators, n_runs).context("Monte-Carlo run failed")?;
    let mut csv = format!("{RMSE_HEADER}\n");
    for e in &summary.estimators {
        let nees = e.mean_nees.map_or(String::new(), |v| v.to_string());
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            e.estimator,
            e.runs.len(),
            e.final_position_rmse,
            e.trajectory_rmse,
            nees,
            e.goal_rate
        ));
    }
    write_file(&dir, "rmse.csv", &csv, &mut manifest.files)?;
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
    write_file(&dir, "runs.json", &json, &mut manifest.files)?;

    let map = prepare_map(&resolved).context("building the obstacle map")?;
    let first = resolved.with_seed(run_seed(resolved.seed, 0));
    let mut names = Vec::new();
    for est in &estimators {
        let log = run_scenario_with_map(&first.with_estimator(est.clone()), map.as_ref()).map_err(|f| anyhow::anyhow!("{f}"))?;
        let name = format!("first_run_{}.csv", slug(&est.label()));
        write_file(&dir, &name, &log.to_csv(), &mut manifest.files)?;
        names.push((est.label(), name));
    }

    let mut p = Panel::new(format!("First seed: {}", display_name(&scenario.file)), "x [m]", "y [m]");
    p.equal_aspect = true;
    p.shapes = world_shapes(&scenario.file);
    let colors = [svg::ORANGE, svg::GREEN, svg::BLUE, svg::RED];
    // truth of the run with the richest sensor set
    let rows = read_rows(&dir, &names.last().expect("at least one estimator").1)?;
    p.series
        .push(Series::new("true", series(&rows, |r| (r.x_true, r.y_true)), svg::BLACK));
    for (k, (label, name)) in names.iter().enumerate() {
        let rows = read_rows(&dir, name)?;
        p.series
            .push(Series::new(label.clone(), series(&rows, |r| (r.x_est, r.y_est)), colors[k % colors.len()]).dashed());
    }
    write_file(&dir, "overlay.svg", &svg::render(&[p], 720.0, 640.0), &mut manifest.files)?;
    manifest.write(&dir)?;
    Ok(())
}

/// Slices a synthetic or recorded 3D scan to a 2D map.
pub fn cmd_map(args: &MapArgs, out: &Path) -> Result<()> {
    args.band.validate().context("--band")?;
    if !(args.cell.is_finite() && args.cell > 0.0) {
        bail!("--cell must be > 0, got {}", args.cell);
    }
    let dir = prepare_dir(out)?;
    let mut manifest = RunManifest::new(CommandName::Map, &dir);
    let mut recorded = args.clone();

    let cloud_path = match (&args.scene, &args.cloud) {
        (Some(name), None) => {
            let world = scenes::by_name(name)
                .with_context(|| format!("unknown scene `{name}` (known: {})", scenes::SCENE_NAMES.join(", ")))?;
            let frames = simulate_tilt_scan(&world, &TiltMount::default(), &ScanConfig::default(), &Pose::default())?;
            let mut buf = Vec::new();
            write_point_cloud(&mut buf, &frames)?;
            write_file(
                &dir,
                "cloud.txt",
                &String::from_utf8(buf).expect("cloud text is ASCII"),
                &mut manifest.files,
            )?;
            dir.join("cloud.txt")
        }
        (None, Some(path)) => {
            let abs = std::path::absolute(path).with_context(|| format!("resolving {}", path.display()))?;
            recorded.cloud = Some(abs.clone());
            abs
        }
        _ => bail!("give exactly one of --scene or --cloud"),
    };
    manifest.map = Some(recorded);

    let file = fs::File::open(&cloud_path).with_context(|| format!("opening {}", cloud_path.display()))?;
    let frames = read_point_cloud(BufReader::new(file)).with_context(|| format!("reading {}", cloud_path.display()))?;
    let n_points: usize = frames.iter().map(|f| f.points.len()).sum();
    if n_points == 0 {
        eprintln!("warning: {} holds no points; writing an empty map", cloud_path.display());
    }
    let map = navstack::scan::slice_reduce(&frames, &args.band)?;
    if n_points > 0 && map.is_empty() {
        eprintln!(
            "warning: no points inside band ({}, {}); the map is empty",
            args.band.z_min, args.band.z_max
        );
    }
    write_file(&dir, "map.txt", &map_text(&map), &mut manifest.files)?;

    let logged = read_map(BufReader::new(read_text(&dir, "map.txt")?.as_bytes()))?;
    let grid = rasterize(&logged, args.cell)?;
    write_file(&dir, "map.pgm", &grid_to_pgm(&grid), &mut manifest.files)?;

    let all: Vec<(f64, f64)> = frames.iter().flat_map(|f| f.points.iter()).map(|p| (p.x, p.z)).collect();
    let in_band: Vec<(f64, f64)> = all.iter().copied().filter(|(_, z)| args.band.contains(*z)).collect();
    let mut side = Panel::new("Side view of the scan", "x [m]", "z [m]");
    let (xlo, xhi) = all.iter().fold((0.0f64, 1.0f64), |(a, b), p| (a.min(p.0), b.max(p.0)));
    side.shapes.push(Shape::Dots {
        points: all,
        color: svg::GRAY,
        size: 2.0,
    });
    side.shapes.push(Shape::Dots {
        points: in_band,
        color: svg::RED,
        size: 2.5,
    });
    for z in [args.band.z_min, args.band.z_max] {
        side.series
            .push(Series::new("", vec![(xlo, z), (xhi, z)], svg::BLUE).dashed());
    }
    let mut top = Panel::new("2D map from the slice band", "x [m]", "y [m]");
    top.equal_aspect = true;
    let c = grid.cell_size;
    for (i, j) in grid.occupied_cells() {
        top.shapes.push(Shape::Rect {
            min: (i as f64 * c, j as f64 * c),
            max: ((i + 1) as f64 * c, (j + 1) as f64 * c),
            fill: svg::BLUE,
        });
    }
    top.shapes.push(Shape::Dots {
        points: logged.points.iter().map(|p| (p.x, p.y)).collect(),
        color: svg::RED,
        size: 2.5,
    });
    write_file(&dir, "map.svg", &svg::render(&[side, top], 720.0, 420.0), &mut manifest.files)?;
    manifest.write(&dir)?;
    Ok(())
}

/// Parses and validates scenarios without running them.
pub fn cmd_validate(paths: &[PathBuf]) -> Result<()> {
    let mut failed = 0;
    for p in paths {
        match LoadedScenario::read(p).and_then(|s| s.resolve().map(|r| (s, r))) {
            Ok((_, r)) => println!(
                "ok: {} ({})",
                p.display(),
                if r.name.is_empty() { "unnamed" } else { &r.name }
            ),
            Err(e) => {
                eprintln!("error: {e:#}");
                failed += 1;
            }
        }
    }
    if failed > 0 {
        bail!("{failed} of {} scenario files invalid", paths.len());
    }
    Ok(())
}
