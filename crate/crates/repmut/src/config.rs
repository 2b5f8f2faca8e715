//! TOML run files for the command-line tool.
//!
//! Every field is optional; omitted values fall back to the built-in defaults
//! and command-line flags override anything set here. Unknown keys are
//! rejected, and parse errors carry the line and column from the TOML reader.
//! Numeric constraints are enforced later, when the merged configuration is
//! turned into the validated domain types.

use serde::Deserialize;
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub game: GameSection,
    #[serde(default)]
    pub mutation: MutationSection,
    #[serde(default)]
    pub generator: GeneratorSection,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSection {
    pub b1: Option<f64>,
    pub b2: Option<f64>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MutationSection {
    pub mu1: Option<f64>,
    pub mu2: Option<f64>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSection {
    pub q12: Option<f64>,
    pub q21: Option<f64>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub dt: Option<f64>,
    pub horizon: Option<f64>,
    pub sample_every: Option<f64>,
    pub boundary_guard: Option<f64>,
    pub seed: Option<u64>,
    pub paths: Option<usize>,
}

/// Command-specific options; each command reads only the keys it understands.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub x0: Option<f64>,
    pub i0: Option<u8>,
    /// Numeric value or one of the tokens auto-a1, auto-a2, auto-a3, auto-ahat.
    pub threshold: Option<String>,
    /// "from-left" or "from-right".
    pub direction: Option<String>,
    pub max_horizon: Option<f64>,
    pub bins: Option<usize>,
    pub burn_in: Option<f64>,
    pub p: Option<f64>,
    /// "start:end:step" inclusive grid of initial conditions.
    pub x0_grid: Option<String>,
}

#[derive(Debug)]
pub enum ConfigError {
    Io { path: PathBuf, source: std::io::Error },
    Parse { path: PathBuf, source: toml::de::Error },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io { path, source } => {
                write!(f, "cannot read config {}: {source}", path.display())
            }
            ConfigError::Parse { path, source } => {
                write!(f, "cannot parse config {}: {source}", path.display())
            }
        }
    }
}

impl std::error::Error for ConfigError {}

pub fn load(path: &Path) -> Result<FileConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    toml::from_str(&text).map_err(|source| ConfigError::Parse {
        path: path.to_path_buf(),
        source,
    })
}
