use std::path::Path;

use grasp_core::heuristic::HeuristicParams;
use grasp_core::inference::InferenceConfig;
use grasp_core::model::ModelConfig;
use serde::{Deserialize, Serialize};

use crate::errors::CliError;

/// The TOML configuration file: every section optional, defaults documented
/// on the underlying types.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct CliConfig {
    pub model: ModelConfig,
    pub inference: InferenceConfig,
    pub heuristic: HeuristicParams,
}

impl CliConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
                toml::from_str(&text)
                    .map_err(|e| CliError::data(format!("{}: {e}", path.display())))
            }
        }
    }
}
