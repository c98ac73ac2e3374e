use std::fmt;
use std::path::{Path, PathBuf};

use cherednik_tf::families::{SymbolSpec, WindowSpec};
use cherednik_tf::measure_grid::Geometry;
use cherednik_tf::Params;
use serde::{Deserialize, Serialize};

use crate::checks::CHECKS;

/// The configuration shipped with the binary and used when `--config` is absent.
pub const DEFAULT_CONFIG: &str = include_str!("../config/default.toml");

/// Anything wrong with the configuration or command-line overrides. Maps to exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "configuration error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub alpha: f64,
    pub beta: f64,
}

/// One run: parameters, grids, window, test function, symbol and the checks `verify` runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: ParamsConfig,
    #[serde(default)]
    pub geometry: Geometry,
    /// Analysis window g (and g₁ = g₂ for `localize`).
    #[serde(default)]
    pub window: WindowSpec,
    /// Test function f for `transform` and `wct`.
    #[serde(default = "default_function")]
    pub function: WindowSpec,
    #[serde(default)]
    pub symbol: SymbolSpec,
    #[serde(default = "default_suite")]
    pub suite: Vec<String>,
    #[serde(default = "default_cache_dir")]
    pub cache_dir: PathBuf,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    /// Randomized (ς, g₁, g₂) draws added to the canonical bound suite.
    #[serde(default = "default_random_draws")]
    pub random_draws: usize,
}

fn default_function() -> WindowSpec {
    WindowSpec::DampedGaussian { center: 0.3, width: 0.8 }
}

fn default_suite() -> Vec<String> {
    ["bounds", "assembly_paths", "adjoint", "positivity", "linearity"].map(String::from).to_vec()
}

fn default_cache_dir() -> PathBuf {
    PathBuf::from(".cherednik-cache")
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_random_draws() -> usize {
    20
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
}

impl RunConfig {
    /// Parses and validates a TOML document. Syntax errors carry line and column; unknown or
    /// mistyped keys name the field.
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError(e.to_string().trim_end().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| ConfigError(format!("{}: {}", path.display(), e.0)))
    }

    /// The file at `path` (or the shipped default) with overrides applied.
    pub fn resolve(path: Option<&Path>, ov: &Overrides) -> Result<Self, ConfigError> {
        let mut cfg = match path {
            Some(p) => Self::load(p)?,
            None => Self::from_toml(DEFAULT_CONFIG)?,
        };
        if let Some(s) = ov.seed {
            cfg.seed = s;
        }
        if let Some(d) = &ov.output_dir {
            cfg.output_dir = d.clone();
        }
        if let Some(d) = &ov.cache_dir {
            cfg.cache_dir = d.clone();
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        Params::new(self.params.alpha, self.params.beta).map_err(|e| ConfigError(format!("params: {e}")))?;
        self.geometry.validate().map_err(|e| ConfigError(format!("geometry: {e}")))?;
        for name in &self.suite {
            if !CHECKS.contains(&name.as_str()) {
                return Err(ConfigError(format!("suite: unknown check `{name}`, expected one of {}", CHECKS.join(", "))));
            }
        }
        let p = self.params();
        let (tg, xg) = (self.geometry.time_grid(), self.geometry.xi_grid());
        let (tg, xg) = (tg.map_err(|e| ConfigError(format!("geometry: {e}")))?, xg.map_err(|e| ConfigError(format!("geometry: {e}")))?);
        self.window.sample(&tg, &p).map_err(|e| ConfigError(format!("window: {e}")))?;
        self.function.sample(&tg, &p).map_err(|e| ConfigError(format!("function: {e}")))?;
        self.symbol.sample(&tg, &xg, &p).map_err(|e| ConfigError(format!("symbol: {e}")))?;
        Ok(())
    }

    pub fn params(&self) -> Params {
        Params::new(self.params.alpha, self.params.beta).expect("validated")
    }
}
