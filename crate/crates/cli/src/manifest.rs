//! The record written next to every output set, sufficient to regenerate it.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use navstack::scan::SliceBand;
use navstack::sim::ScenarioFile;
use serde::{Deserialize, Serialize};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandName {
    Run,
    Map,
    Compare,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapArgs {
    /// Built-in scene name, or `None` when reading a point-cloud file.
    pub scene: Option<String>,
    pub cloud: Option<PathBuf>,
    pub band: SliceBand,
    pub cell: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub command: CommandName,
    pub tool_version: String,
    pub out_dir: PathBuf,
    pub seed: Option<u64>,
    /// Scenario with all defaults and command-line overrides applied.
    pub scenario: Option<ScenarioFile>,
    pub n_runs: Option<usize>,
    pub map: Option<MapArgs>,
    /// Files written, relative to `out_dir`.
    pub files: Vec<String>,
}

impl RunManifest {
    pub fn new(command: CommandName, out_dir: &Path) -> Self {
        Self {
            command,
            tool_version: TOOL_VERSION.to_string(),
            out_dir: out_dir.to_path_buf(),
            seed: None,
            scenario: None,
            n_runs: None,
            map: None,
            files: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }

    pub fn write(&self, dir: &Path) -> anyhow::Result<()> {
        let path = dir.join(MANIFEST_FILE);
        std::fs::write(&path, self.to_json()).with_context(|| format!("writing {}", path.display()))
    }

    /// Reads a manifest and checks that the fields its command needs are present.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let m: Self = serde_json::from_str(&text).with_context(|| format!("{}: not a valid manifest", path.display()))?;
        match m.command {
            CommandName::Run if m.scenario.is_none() => bail!("{}: run manifest lacks `scenario`", path.display()),
            CommandName::Compare if m.scenario.is_none() || m.n_runs.is_none() => {
                bail!("{}: compare manifest needs `scenario` and `n_runs`", path.display())
            }
            CommandName::Map if m.map.is_none() => bail!("{}: map manifest lacks `map`", path.display()),
            _ => Ok(m),
        }
    }
}
