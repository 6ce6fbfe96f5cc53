//! `--model` specifications.
//!
//! * `scripted:goal_seeker`, `scripted:left_preferrer`
//! * `weights:<path>`: a TOML weight file
//! * `exec:<command>`: an external process speaking the line protocol

use std::path::PathBuf;
use std::str::FromStr;
use std::time::Duration;

use lidar_cfe::model::{
    scripted_policy, BridgeConfig, ExternalPolicy, Network, NetworkPolicy, PolicyModel, ScriptedKind, ScriptedParams,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelSpec {
    Scripted(ScriptedKind),
    Weights(PathBuf),
    Exec(String),
}

impl FromStr for ModelSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (scheme, rest) = s
            .split_once(':')
            .ok_or_else(|| format!("`{s}`: expected scripted:<name>, weights:<path>, or exec:<command>"))?;
        match scheme {
            "scripted" => rest.parse().map(ModelSpec::Scripted),
            "weights" if !rest.is_empty() => Ok(ModelSpec::Weights(rest.into())),
            "exec" if !rest.trim().is_empty() => Ok(ModelSpec::Exec(rest.to_string())),
            "weights" | "exec" => Err(format!("`{s}`: missing {scheme} argument")),
            other => Err(format!("unknown model scheme `{other}`")),
        }
    }
}

impl std::fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelSpec::Scripted(ScriptedKind::GoalSeeker) => write!(f, "scripted:goal_seeker"),
            ModelSpec::Scripted(ScriptedKind::LeftPreferrer) => write!(f, "scripted:left_preferrer"),
            ModelSpec::Weights(p) => write!(f, "weights:{}", p.display()),
            ModelSpec::Exec(c) => write!(f, "exec:{c}"),
        }
    }
}

/// Shape the caller expects, used for scripted and external models.
#[derive(Debug, Clone, Copy)]
pub struct ModelShape {
    pub n_rays: usize,
    pub max_range: f64,
    pub outputs: usize,
    pub timeout: Duration,
}

/// Model identity recorded in manifests and results.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelId {
    pub spec: String,
    pub description: String,
    /// SHA-256 of the weight file, the executable, or the scripted
    /// policy's parameters.
    pub sha256: String,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_sha256(path: &std::path::Path) -> CliResult<String> {
    std::fs::read(path).map(|b| sha256_hex(&b)).map_err(|e| CliError::read(path, e))
}

pub struct LoadedModel {
    pub model: Box<dyn PolicyModel>,
    pub id: ModelId,
}

impl ModelSpec {
    pub fn load(&self, shape: ModelShape) -> CliResult<LoadedModel> {
        let (model, sha256): (Box<dyn PolicyModel>, String) = match self {
            ModelSpec::Scripted(kind) => {
                let params = ScriptedParams { n_rays: shape.n_rays, max_range: shape.max_range, ..Default::default() };
                let digest = sha256_hex(serde_json::to_string(&params).expect("params serialize").as_bytes());
                (Box::new(scripted_policy(*kind, params)?), digest)
            }
            ModelSpec::Weights(path) => {
                let net = Network::load(path)?;
                let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                (Box::new(NetworkPolicy::new(net, name)?), file_sha256(path)?)
            }
            ModelSpec::Exec(command) => {
                let config = BridgeConfig { timeout: shape.timeout, ..BridgeConfig::new(command.clone(), shape.n_rays + 3, shape.outputs) };
                let program = command.split_whitespace().next().unwrap_or_default();
                let digest = file_sha256(program.as_ref()).unwrap_or_else(|_| sha256_hex(command.as_bytes()));
                (Box::new(ExternalPolicy::spawn(config)?), digest)
            }
        };
        let id = ModelId { spec: self.to_string(), description: model.describe(), sha256 };
        Ok(LoadedModel { model, id })
    }
}

pub fn parse_model(s: &str) -> CliResult<ModelSpec> {
    s.parse().map_err(CliError::Input)
}
