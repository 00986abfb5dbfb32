use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use serde::Serialize;
use serde_json::Value;

/// Written next to every output so the run can be repeated exactly.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    /// Every parameter after defaulting.
    pub config: Value,
    /// Arguments that regenerate the outputs, defaults spelled out.
    pub replay: Vec<String>,
    pub outputs: Vec<String>,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    pub fn new(
        command: &'static str,
        config: Value,
        replay: Vec<String>,
        outputs: Vec<PathBuf>,
        started: Instant,
    ) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            config,
            replay,
            outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
            wall_clock_seconds: started.elapsed().as_secs_f64(),
        }
    }

    /// `<primary>.manifest.json`
    pub fn path_for(primary: &Path) -> PathBuf {
        let mut name = primary.as_os_str().to_owned();
        name.push(".manifest.json");
        PathBuf::from(name)
    }

    pub fn write_beside(&self, primary: &Path) -> anyhow::Result<PathBuf> {
        let path = Self::path_for(primary);
        let text = serde_json::to_string_pretty(self)?;
        fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
