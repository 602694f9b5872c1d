//! Wave-packet run description read by `evolve`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub center: f64,
    pub width: f64,
    pub momentum: f64,
    pub tau_list: Vec<f64>,
    #[serde(default)]
    pub grids: Grids,
    /// Blocks of the cliff.
    #[serde(default = "default_blocks")]
    pub blocks: usize,
    /// Deepest bound state included; `null` drops the discrete part.
    #[serde(default = "default_bound_min")]
    pub bound_min: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub sigma_points: usize,
    pub k_max: f64,
    pub k_points: usize,
}

impl Default for Grids {
    fn default() -> Self {
        Self { sigma_min: 2f64.powi(-10), sigma_max: 8.0, sigma_points: 1 << 14, k_max: 28.0, k_points: 4096 }
    }
}

fn default_blocks() -> usize {
    bungee_core::DEFAULT_BLOCKS
}

fn default_bound_min() -> Option<f64> {
    Some(-2e5)
}

impl EvolveConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        let config: Self = serde_json::from_str(&text).map_err(|source| CliError::Config { path: path.to_path_buf(), source })?;
        if config.tau_list.is_empty() || config.tau_list.iter().any(|t| !t.is_finite()) {
            return Err(CliError::Usage("tau_list must hold at least one finite time".into()));
        }
        Ok(config)
    }
}
