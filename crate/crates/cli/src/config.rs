use std::path::{Path, PathBuf};

use kaonlab::{default_constants, ConstantsOverrides, DecayMode, PhysicalConstants};
use serde::Deserialize;

use crate::args::{ConstantsArgs, Decay, Format, GlobalArgs};
use crate::error::CliError;

/// Config file layout:
///
/// ```toml
/// format = "csv"
/// out = "result.csv"
///
/// [constants]
/// epsilon_abs = 2.23e-3
///
/// [grid]
/// steps = 32
/// region_step = 0.05
/// ```
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    format: Option<Format>,
    out: Option<PathBuf>,
    #[serde(default)]
    constants: ConstantsOverrides,
    #[serde(default)]
    grid: GridConfig,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub steps: Option<usize>,
    pub refine_iters: Option<usize>,
    pub seeds: Option<usize>,
    pub region_step: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub constants: PhysicalConstants,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub grid: GridConfig,
    pub with_metadata: bool,
}

fn read_config(path: &Path) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    toml::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))
}

impl ConstantsArgs {
    fn overrides(&self) -> ConstantsOverrides {
        ConstantsOverrides {
            tau_s: self.tau_s,
            tau_l: self.tau_l,
            delta_m: self.delta_m,
            epsilon_abs: self.epsilon_abs,
            epsilon_arg_deg: self.epsilon_arg_deg,
            decay: self.decay.map(|d| match d {
                Decay::Full => DecayMode::Full,
                Decay::StableLong => DecayMode::StableLong,
                Decay::NoDecay => DecayMode::NoDecay,
            }),
        }
    }
}

/// Command-line flags override the config file, which overrides defaults.
pub fn resolve(global: &GlobalArgs) -> Result<RunConfig, CliError> {
    let file = match &global.config {
        Some(path) => read_config(path)?,
        None => ConfigFile::default(),
    };
    if let Some(s) = file.grid.steps {
        if s < 2 {
            return Err(CliError::Config(format!(
                "grid.steps must be at least 2, got {s}"
            )));
        }
    }
    if let Some(h) = file.grid.region_step {
        if h.is_nan() || h <= 0.0 {
            return Err(CliError::Config(format!(
                "grid.region_step must be positive, got {h}"
            )));
        }
    }
    let overrides = file.constants.merge(&global.constants.overrides());
    let constants = overrides.apply(default_constants())?;
    Ok(RunConfig {
        constants,
        format: global.format.or(file.format).unwrap_or(Format::Table),
        out: global.out.clone().or(file.out),
        grid: file.grid,
        with_metadata: global.with_metadata,
    })
}
