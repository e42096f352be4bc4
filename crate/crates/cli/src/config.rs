use std::path::Path;

use serde::Deserialize;

use crate::error::CliError;

/// Optional TOML run file. Keys mirror the long flags.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FileConfig {
    pub problem: Option<String>,
    pub expr: Option<Vec<String>>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub seed_a: Option<Vec<f64>>,
    pub seed_b: Option<Vec<f64>>,
    #[serde(rename = "box")]
    pub region: Option<String>,
    pub grid: Option<String>,
    pub at: Option<Vec<Vec<f64>>>,
    pub target: Option<Vec<Vec<f64>>>,
    pub budget: Option<usize>,
    pub rng_seed: Option<u64>,
    pub pairs: Option<usize>,
    pub tol_residual: Option<f64>,
    pub tol_width: Option<f64>,
    pub max_iter: Option<usize>,
    pub bracket_r0: Option<Vec<f64>>,
    pub accel: Option<String>,
    pub out: Option<String>,
    pub format: Option<String>,
    pub threads: Option<usize>,
    pub continuation: Option<bool>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::invalid("config", format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::invalid("config", format!("{}: {e}", path.display())))
    }
}
