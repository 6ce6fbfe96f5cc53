//! Black-box policies being explained.
//!
//! Three implementations of [`PolicyModel`] ship with the crate: a small
//! feed-forward/1D-convolution inference engine ([`net`]), scripted reactive
//! controllers used as reference models ([`scripted`]), and a bridge to an
//! external process speaking a line protocol ([`bridge`]).

pub mod bridge;
pub mod net;
pub mod scripted;

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scan::ModelState;

pub use bridge::{BridgeConfig, ExternalPolicy};
pub use net::{LayerSpec, Network, NetworkPolicy, NetworkSpec, Params};
pub use scripted::{scripted_policy, ScriptedKind, ScriptedParams, ScriptedPolicy};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("layer {index} ({kind}): {reason}")]
    Layer { index: usize, kind: &'static str, reason: String },

    #[error("network: {0}")]
    Config(String),

    #[error("input length {found} does not match model input length {expected}")]
    InputLength { expected: usize, found: usize },

    #[error("weight file: {0}")]
    Parse(String),

    #[error("unsupported weight file format {0} (expected 1)")]
    Format(u32),

    #[error("bridge: failed to start `{command}`: {source}")]
    Spawn { command: String, source: std::io::Error },

    #[error("bridge handshake: {0}")]
    Handshake(String),

    #[error("bridge: malformed response {line:?}: {reason}")]
    Malformed { line: String, reason: String },

    #[error("bridge: no response within {0:?}")]
    Timeout(Duration),

    #[error("bridge: process exited")]
    Exited,

    #[error("bridge: {0}")]
    Io(#[from] std::io::Error),
}

/// Policy output, every element in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<f64>", try_from = "Vec<f64>")]
pub struct ActionVector(Vec<f64>);

impl TryFrom<Vec<f64>> for ActionVector {
    type Error = ModelError;

    fn try_from(values: Vec<f64>) -> Result<Self, ModelError> {
        ActionVector::new(values)
    }
}

impl From<ActionVector> for Vec<f64> {
    fn from(a: ActionVector) -> Self {
        a.0
    }
}

impl ActionVector {
    pub fn new(values: Vec<f64>) -> Result<Self, ModelError> {
        if let Some(v) = values.iter().find(|v| !(-1.0..=1.0).contains(*v)) {
            return Err(ModelError::Config(format!("action value {v} outside [-1, 1]")));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// How an instance may be shared between worker threads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Concurrency {
    /// Pure; any number of concurrent `act` calls.
    Shared,
    /// Calls are funneled through one lane internally.
    Serialized,
}

/// Deterministic map from a normalized state to a bounded action.
pub trait PolicyModel: Send + Sync {
    fn input_len(&self) -> usize;

    fn output_len(&self) -> usize;

    fn act(&self, state: &ModelState) -> Result<ActionVector, ModelError>;

    fn concurrency(&self) -> Concurrency {
        Concurrency::Shared
    }

    /// Short human-readable identifier.
    fn describe(&self) -> String;
}

impl<P: PolicyModel + ?Sized> PolicyModel for Box<P> {
    fn input_len(&self) -> usize {
        (**self).input_len()
    }

    fn output_len(&self) -> usize {
        (**self).output_len()
    }

    fn act(&self, state: &ModelState) -> Result<ActionVector, ModelError> {
        (**self).act(state)
    }

    fn concurrency(&self) -> Concurrency {
        (**self).concurrency()
    }

    fn describe(&self) -> String {
        (**self).describe()
    }
}

pub(crate) fn check_input(expected: usize, state: &ModelState) -> Result<(), ModelError> {
    if state.len() == expected {
        Ok(())
    } else {
        Err(ModelError::InputLength { expected, found: state.len() })
    }
}
