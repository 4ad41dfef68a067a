use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Softmax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    /// Uniform in `[-0.05, 0.05]`, divided by `sqrt(fan_in)`.
    #[default]
    ScaledUniform,
    /// Uniform in `[0, 1]`.
    UnitUniform,
}

/// Where one layer's parameters live in the flat parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerShape {
    pub fan_in: usize,
    pub fan_out: usize,
    pub weights: usize,
    pub biases: usize,
}

impl LayerShape {
    pub fn weight_range(&self) -> std::ops::Range<usize> {
        self.weights..self.weights + self.fan_in * self.fan_out
    }

    pub fn bias_range(&self) -> std::ops::Range<usize> {
        self.biases..self.biases + self.fan_out
    }
}

/// A fully connected network. All parameters sit in one flat vector: for each
/// layer, its row-major `fan_out × fan_in` weight matrix then its bias vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    layer_sizes: Vec<usize>,
    shapes: Vec<LayerShape>,
    params: Vec<f64>,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
}

fn shapes_for(sizes: &[usize]) -> Result<Vec<LayerShape>> {
    if sizes.len() < 2 {
        return Err(Error::InvalidShape(format!("need at least 2 layer sizes, got {}", sizes.len())));
    }
    if let Some(i) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::InvalidShape(format!("layer {i} has size 0")));
    }
    let mut offset = 0;
    Ok(sizes
        .windows(2)
        .map(|w| {
            let shape = LayerShape { fan_in: w[0], fan_out: w[1], weights: offset, biases: offset + w[0] * w[1] };
            offset = shape.biases + w[1];
            shape
        })
        .collect())
}

impl Network {
    /// All-zero parameters.
    pub fn zeros(layer_sizes: &[usize]) -> Result<Network> {
        let shapes = shapes_for(layer_sizes)?;
        let total = shapes.last().map_or(0, |s| s.biases + s.fan_out);
        Ok(Network {
            layer_sizes: layer_sizes.to_vec(),
            shapes,
            params: vec![0.0; total],
            hidden_activation: Activation::Relu,
            output_activation: Activation::Softmax,
        })
    }

    /// Random weights, zero biases; deterministic per seed.
    pub fn init(layer_sizes: &[usize], seed: u64, mode: InitMode) -> Result<Network> {
        let mut net = Network::zeros(layer_sizes)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for s in net.shapes.clone() {
            let scale = 1.0 / (s.fan_in as f64).sqrt();
            for w in &mut net.params[s.weight_range()] {
                *w = match mode {
                    InitMode::ScaledUniform => rng.random_range(-0.05..=0.05) * scale,
                    InitMode::UnitUniform => rng.random_range(0.0..=1.0),
                };
            }
        }
        Ok(net)
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn input_width(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_width(&self) -> usize {
        *self.layer_sizes.last().expect("at least two layers")
    }

    pub fn shapes(&self) -> &[LayerShape] {
        &self.shapes
    }

    pub fn num_layers(&self) -> usize {
        self.shapes.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(Error::DimensionMismatch { expected: self.params.len(), got: params.len() });
        }
        self.params.copy_from_slice(params);
        Ok(())
    }

    pub fn weights(&self, layer: usize) -> &[f64] {
        &self.params[self.shapes[layer].weight_range()]
    }

    pub fn weights_mut(&mut self, layer: usize) -> &mut [f64] {
        let r = self.shapes[layer].weight_range();
        &mut self.params[r]
    }

    pub fn biases(&self, layer: usize) -> &[f64] {
        &self.params[self.shapes[layer].bias_range()]
    }

    pub fn biases_mut(&mut self, layer: usize) -> &mut [f64] {
        let r = self.shapes[layer].bias_range();
        &mut self.params[r]
    }

    /// Whether flat index `i` is a weight (as opposed to a bias).
    pub fn is_weight(&self, i: usize) -> bool {
        self.shapes.iter().any(|s| s.weight_range().contains(&i))
    }

    /// `(Σ|w|, Σw²)` over weights only.
    pub fn weight_norms(&self) -> (f64, f64) {
        self.shapes.iter().flat_map(|s| &self.params[s.weight_range()]).fold((0.0, 0.0), |(l1, l2), w| (l1 + w.abs(), l2 + w * w))
    }

    pub fn param_norm(&self) -> f64 {
        self.params.iter().map(|p| p * p).sum::<f64>().sqrt()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_file())?)
    }

    pub fn from_json(text: &str) -> Result<Network> {
        Network::from_file(serde_json::from_str(text)?)
    }

    pub fn to_file(&self) -> NetworkFile {
        NetworkFile {
            format_version: MODEL_FORMAT_VERSION,
            layer_sizes: self.layer_sizes.clone(),
            hidden_activation: self.hidden_activation,
            output_activation: self.output_activation,
            layers: (0..self.num_layers())
                .map(|l| LayerFile { weights: self.weights(l).to_vec(), biases: self.biases(l).to_vec() })
                .collect(),
        }
    }

    pub fn from_file(file: NetworkFile) -> Result<Network> {
        if file.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::VersionMismatch { found: file.format_version, expected: MODEL_FORMAT_VERSION });
        }
        let mut net = Network::zeros(&file.layer_sizes)?;
        if file.layers.len() != net.num_layers() {
            return Err(Error::InvalidShape(format!("{} layers for sizes {:?}", file.layers.len(), file.layer_sizes)));
        }
        for (l, layer) in file.layers.iter().enumerate() {
            let s = net.shapes[l];
            if layer.weights.len() != s.fan_in * s.fan_out || layer.biases.len() != s.fan_out {
                return Err(Error::InvalidShape(format!("layer {l} parameter counts do not match {:?}", file.layer_sizes)));
            }
            net.weights_mut(l).copy_from_slice(&layer.weights);
            net.biases_mut(l).copy_from_slice(&layer.biases);
        }
        if net.params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidShape("non-finite parameter".into()));
        }
        net.hidden_activation = file.hidden_activation;
        net.output_activation = file.output_activation;
        Ok(net)
    }
}

/// On-disk model layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub format_version: u32,
    pub layer_sizes: Vec<usize>,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
    pub layers: Vec<LayerFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerFile {
    /// Row-major, `fan_out` rows of `fan_in`.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}
