//! Inference-only network engine: 1D convolutions over the range slice,
//! then dense layers over the flattened feature map plus the goal features.
//!
//! Convolution output length follows `(len + 2·padding − kernel) / stride + 1`,
//! so a 180-ray scan through a kernel-5, stride-2, padding-2 layer yields 90
//! positions. Feature maps flatten channel-major.
//!
//! # Weight file
//!
//! TOML, versioned by a leading `format = 1`:
//!
//! ```toml
//! format = 1
//! lidar_inputs = 180
//! extra_inputs = 3
//!
//! [[layer]]
//! type = "conv1d"          # weights: [out][in][kernel] row-major
//! in_channels = 1
//! out_channels = 4
//! kernel = 5
//! stride = 1
//! padding = 2
//! circular = true
//! weights = [...]
//! bias = [...]
//!
//! [[layer]]
//! type = "relu"            # or "tanh"
//!
//! [[layer]]
//! type = "dense"           # weights: [out][in] row-major
//! inputs = 723
//! outputs = 128
//! weights = [...]
//! bias = [...]
//! ```

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_input, ActionVector, ModelError, PolicyModel};
use crate::scan::ModelState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LayerSpec {
    Conv1d {
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        stride: usize,
        padding: usize,
        #[serde(default = "default_circular")]
        circular: bool,
    },
    Dense {
        inputs: usize,
        outputs: usize,
    },
    Relu,
    Tanh,
}

fn default_circular() -> bool {
    true
}

impl LayerSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            LayerSpec::Conv1d { .. } => "conv1d",
            LayerSpec::Dense { .. } => "dense",
            LayerSpec::Relu => "relu",
            LayerSpec::Tanh => "tanh",
        }
    }

    /// `(weights, bias)` element counts.
    pub fn param_counts(&self) -> (usize, usize) {
        match *self {
            LayerSpec::Conv1d { in_channels, out_channels, kernel, .. } => {
                (out_channels * in_channels * kernel, out_channels)
            }
            LayerSpec::Dense { inputs, outputs } => (inputs * outputs, outputs),
            LayerSpec::Relu | LayerSpec::Tanh => (0, 0),
        }
    }
}

/// Layer list plus the input split: the first `lidar_inputs` values go
/// through the convolutional stack, the remaining `extra_inputs` join at the
/// first dense layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub lidar_inputs: usize,
    pub extra_inputs: usize,
    pub layers: Vec<LayerSpec>,
}

pub fn conv_output_len(len: usize, kernel: usize, stride: usize, padding: usize) -> Option<usize> {
    let padded = len + 2 * padding;
    (stride > 0 && kernel > 0 && padded >= kernel).then(|| (padded - kernel) / stride + 1)
}

impl NetworkSpec {
    /// Two circular conv layers (4 then 8 channels, kernel 5), two 128-unit
    /// dense layers with ReLU, and a tanh head.
    pub fn conv_policy(n_rays: usize, outputs: usize) -> Self {
        let conv1 = conv_output_len(n_rays, 5, 1, 2).unwrap_or(0);
        let conv2 = conv_output_len(conv1, 5, 2, 2).unwrap_or(0);
        NetworkSpec {
            lidar_inputs: n_rays,
            extra_inputs: 3,
            layers: vec![
                LayerSpec::Conv1d { in_channels: 1, out_channels: 4, kernel: 5, stride: 1, padding: 2, circular: true },
                LayerSpec::Relu,
                LayerSpec::Conv1d { in_channels: 4, out_channels: 8, kernel: 5, stride: 2, padding: 2, circular: true },
                LayerSpec::Relu,
                LayerSpec::Dense { inputs: 8 * conv2 + 3, outputs: 128 },
                LayerSpec::Relu,
                LayerSpec::Dense { inputs: 128, outputs: 128 },
                LayerSpec::Relu,
                LayerSpec::Dense { inputs: 128, outputs },
                LayerSpec::Tanh,
            ],
        }
    }

    pub fn input_len(&self) -> usize {
        self.lidar_inputs + self.extra_inputs
    }

    /// Walks the layer list checking dimensions; returns the output length.
    pub fn validate(&self) -> Result<usize, ModelError> {
        if self.lidar_inputs == 0 {
            return Err(ModelError::Config("lidar_inputs must be positive".into()));
        }
        let mut channels = 1;
        let mut len = self.lidar_inputs;
        let mut flat: Option<usize> = None;
        for (index, layer) in self.layers.iter().enumerate() {
            let err = |reason: String| ModelError::Layer { index, kind: layer.kind(), reason };
            match *layer {
                LayerSpec::Conv1d { in_channels, out_channels, kernel, stride, padding, circular } => {
                    if flat.is_some() {
                        return Err(err("convolution after a dense layer".into()));
                    }
                    if in_channels != channels {
                        return Err(err(format!("expects {in_channels} input channels, previous stage has {channels}")));
                    }
                    if out_channels == 0 {
                        return Err(err("zero output channels".into()));
                    }
                    if circular && padding > len {
                        return Err(err(format!("circular padding {padding} exceeds sequence length {len}")));
                    }
                    len = conv_output_len(len, kernel, stride, padding)
                        .ok_or_else(|| err(format!("kernel {kernel}/stride {stride} invalid for length {len}")))?;
                    channels = out_channels;
                }
                LayerSpec::Dense { inputs, outputs } => {
                    let have = flat.unwrap_or(channels * len + self.extra_inputs);
                    if inputs != have {
                        return Err(err(format!("expects {inputs} inputs, previous stage provides {have}")));
                    }
                    if outputs == 0 {
                        return Err(err("zero outputs".into()));
                    }
                    flat = Some(outputs);
                }
                LayerSpec::Relu | LayerSpec::Tanh => {}
            }
        }
        Ok(flat.unwrap_or(channels * len + self.extra_inputs))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    spec: NetworkSpec,
    params: Vec<Params>,
    output_len: usize,
}

impl Network {
    /// `params` has one entry per layer; activation layers take empty params.
    pub fn new(spec: NetworkSpec, params: Vec<Params>) -> Result<Self, ModelError> {
        let output_len = spec.validate()?;
        if params.len() != spec.layers.len() {
            return Err(ModelError::Config(format!(
                "{} parameter blocks for {} layers",
                params.len(),
                spec.layers.len()
            )));
        }
        for (index, (layer, p)) in spec.layers.iter().zip(&params).enumerate() {
            let (nw, nb) = layer.param_counts();
            let err = |reason: String| ModelError::Layer { index, kind: layer.kind(), reason };
            if p.weights.len() != nw {
                return Err(err(format!("expected {nw} weights, found {}", p.weights.len())));
            }
            if p.bias.len() != nb {
                return Err(err(format!("expected {nb} bias values, found {}", p.bias.len())));
            }
            if p.weights.iter().chain(&p.bias).any(|v| !v.is_finite()) {
                return Err(err("non-finite parameter".into()));
            }
        }
        Ok(Self { spec, params, output_len })
    }

    /// Uniform weights in `[-scale, scale]`, reproducible from `seed`.
    pub fn random(spec: NetworkSpec, seed: u64, scale: f64) -> Result<Self, ModelError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = spec
            .layers
            .iter()
            .map(|l| {
                let (nw, nb) = l.param_counts();
                let mut draw = |n| (0..n).map(|_| rng.random_range(-scale..=scale)).collect::<Vec<f64>>();
                Params { weights: draw(nw), bias: draw(nb) }
            })
            .collect();
        Network::new(spec, params)
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn params(&self) -> &[Params] {
        &self.params
    }

    pub fn input_len(&self) -> usize {
        self.spec.input_len()
    }

    pub fn output_len(&self) -> usize {
        self.output_len
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>, ModelError> {
        if input.len() != self.input_len() {
            return Err(ModelError::InputLength { expected: self.input_len(), found: input.len() });
        }
        let (lidar, extra) = input.split_at(self.spec.lidar_inputs);
        let mut data = lidar.to_vec();
        let mut len = lidar.len();
        let mut flat = false;
        for (layer, p) in self.spec.layers.iter().zip(&self.params) {
            match *layer {
                LayerSpec::Conv1d { in_channels, out_channels, kernel, stride, padding, circular } => {
                    let geom = ConvGeom { in_channels, out_channels, kernel, stride, padding, circular };
                    let (out, out_len) = conv1d(&data, len, &geom, p);
                    data = out;
                    len = out_len;
                }
                LayerSpec::Dense { inputs, outputs } => {
                    if !flat {
                        data.extend_from_slice(extra);
                        flat = true;
                    }
                    data = dense(&data, inputs, outputs, p);
                }
                LayerSpec::Relu => data.iter_mut().for_each(|v| *v = v.max(0.0)),
                LayerSpec::Tanh => data.iter_mut().for_each(|v| *v = v.tanh()),
            }
        }
        if !flat {
            data.extend_from_slice(extra);
        }
        Ok(data)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ModelError> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| ModelError::Parse(e.to_string()))?;
        match table.get("format") {
            Some(toml::Value::Integer(1)) => {}
            Some(toml::Value::Integer(v)) => return Err(ModelError::Format(*v as u32)),
            Some(_) => return Err(ModelError::Parse("`format` must be an integer".into())),
            None => return Err(ModelError::Parse("missing leading `format` field".into())),
        }
        let file: WeightFile = table.try_into().map_err(|e: toml::de::Error| ModelError::Parse(e.to_string()))?;
        let (layers, params) = file
            .layers
            .into_iter()
            .map(|l| (l.spec, Params { weights: l.weights, bias: l.bias }))
            .unzip();
        let spec = NetworkSpec { lidar_inputs: file.lidar_inputs, extra_inputs: file.extra_inputs, layers };
        Network::new(spec, params)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        Network::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        let file = WeightFile {
            format: 1,
            lidar_inputs: self.spec.lidar_inputs,
            extra_inputs: self.spec.extra_inputs,
            layers: self
                .spec
                .layers
                .iter()
                .zip(&self.params)
                .map(|(spec, p)| FileLayer { spec: spec.clone(), weights: p.weights.clone(), bias: p.bias.clone() })
                .collect(),
        };
        toml::to_string(&file).expect("weight file serializes")
    }
}

#[derive(Serialize, Deserialize)]
struct WeightFile {
    format: u32,
    lidar_inputs: usize,
    extra_inputs: usize,
    #[serde(rename = "layer", default)]
    layers: Vec<FileLayer>,
}

#[derive(Serialize, Deserialize)]
struct FileLayer {
    #[serde(flatten)]
    spec: LayerSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    weights: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    bias: Vec<f64>,
}

struct ConvGeom {
    in_channels: usize,
    out_channels: usize,
    kernel: usize,
    stride: usize,
    padding: usize,
    circular: bool,
}

fn conv1d(x: &[f64], len: usize, g: &ConvGeom, p: &Params) -> (Vec<f64>, usize) {
    let padded_len = len + 2 * g.padding;
    let out_len = (padded_len - g.kernel) / g.stride + 1;
    // materialize each padded channel once, then run contiguous dot products
    let mut padded = vec![0.0; g.in_channels * padded_len];
    for c in 0..g.in_channels {
        let src = &x[c * len..(c + 1) * len];
        let dst = &mut padded[c * padded_len..(c + 1) * padded_len];
        dst[g.padding..g.padding + len].copy_from_slice(src);
        if g.circular {
            for k in 0..g.padding {
                dst[k] = src[(len + k - g.padding) % len];
                dst[g.padding + len + k] = src[k];
            }
        }
    }
    let mut out = vec![0.0; g.out_channels * out_len];
    for o in 0..g.out_channels {
        for (j, slot) in out[o * out_len..(o + 1) * out_len].iter_mut().enumerate() {
            let start = j * g.stride;
            let mut acc = p.bias[o];
            for c in 0..g.in_channels {
                let w = &p.weights[(o * g.in_channels + c) * g.kernel..][..g.kernel];
                let xs = &padded[c * padded_len + start..][..g.kernel];
                acc += w.iter().zip(xs).map(|(a, b)| a * b).sum::<f64>();
            }
            *slot = acc;
        }
    }
    (out, out_len)
}

fn dense(x: &[f64], inputs: usize, outputs: usize, p: &Params) -> Vec<f64> {
    (0..outputs)
        .map(|o| p.bias[o] + p.weights[o * inputs..(o + 1) * inputs].iter().zip(x).map(|(w, v)| w * v).sum::<f64>())
        .collect()
}

/// A network with a tanh head, used as a policy.
#[derive(Debug, Clone)]
pub struct NetworkPolicy {
    net: Network,
    name: String,
}

impl NetworkPolicy {
    pub fn new(net: Network, name: impl Into<String>) -> Result<Self, ModelError> {
        if net.spec.layers.last() != Some(&LayerSpec::Tanh) {
            return Err(ModelError::Config("policy network must end in a tanh layer".into()));
        }
        Ok(Self { net, name: name.into() })
    }

    pub fn network(&self) -> &Network {
        &self.net
    }
}

impl PolicyModel for NetworkPolicy {
    fn input_len(&self) -> usize {
        self.net.input_len()
    }

    fn output_len(&self) -> usize {
        self.net.output_len()
    }

    fn act(&self, state: &ModelState) -> Result<ActionVector, ModelError> {
        check_input(self.input_len(), state)?;
        ActionVector::new(self.net.forward(state.values())?)
    }

    fn describe(&self) -> String {
        format!("network:{}", self.name)
    }
}
