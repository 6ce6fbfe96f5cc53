//! Results and manifest files (JSON).
//!
//! A results file is self-contained: it carries the resolved query, so every
//! stored combined scan can be re-fed to the model and checked without the
//! original inputs. It holds no timestamps, so reruns with the same inputs
//! produce identical bytes. Timing lives in the manifest.

use std::path::Path;

use lidar_cfe::cfe::{CfeBatch, CfeQuery, CfeResult};
use lidar_cfe::ga::GaConfig;
use serde::{Deserialize, Serialize};

use crate::error::{read_text, CliError, CliResult};
use crate::model_spec::ModelId;

pub const RESULTS_FORMAT: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsFile {
    pub format: u32,
    pub model: ModelId,
    pub query: CfeQuery,
    pub ga: GaConfig,
    pub requested: usize,
    pub satisfied: usize,
    pub warning: Option<String>,
    pub results: Vec<CfeResult>,
}

impl ResultsFile {
    pub fn new(model: ModelId, query: CfeQuery, ga: GaConfig, batch: CfeBatch) -> Self {
        Self {
            format: RESULTS_FORMAT,
            model,
            requested: query.n_cfes,
            query,
            ga,
            satisfied: batch.satisfied(),
            warning: batch.warning,
            results: batch.results,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("results serialize") + "\n"
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let file: ResultsFile = serde_json::from_str(&read_text(path)?)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        if file.format != RESULTS_FORMAT {
            return Err(CliError::Input(format!("{}: unsupported results format {}", path.display(), file.format)));
        }
        Ok(file)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: Vec<String>,
    pub query_file: String,
    pub query_sha256: String,
    pub base_source: String,
    pub model: ModelId,
    pub query: CfeQuery,
    pub ga: GaConfig,
    pub seeds: Vec<u64>,
    pub workers: Option<usize>,
    pub parallel: bool,
    pub results_file: String,
    pub results_sha256: String,
    pub started_unix_s: u64,
    /// Wall-clock time for the CFE search alone.
    pub duration_s: f64,
}

impl Manifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }
}
