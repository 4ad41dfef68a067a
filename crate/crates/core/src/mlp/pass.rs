use rand::Rng;
use serde::{Deserialize, Serialize};

use super::network::Network;
use crate::data::Label;
use crate::error::{Error, Result};

pub const DEFAULT_PROB_CLAMP: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossConfig {
    pub l1: f64,
    pub l2: f64,
    pub prob_clamp: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig { l1: 1e-5, l2: 1e-5, prob_clamp: DEFAULT_PROB_CLAMP }
    }
}

impl LossConfig {
    pub fn unregularized() -> Self {
        LossConfig { l1: 0.0, l2: 0.0, prob_clamp: DEFAULT_PROB_CLAMP }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.l1 >= 0.0 && self.l2 >= 0.0) {
            return Err(Error::InvalidConfig(format!("l1 and l2 must be non-negative, got {} and {}", self.l1, self.l2)));
        }
        if !(self.prob_clamp > 0.0 && self.prob_clamp < 0.5) {
            return Err(Error::InvalidConfig(format!("prob_clamp must be in (0, 0.5), got {}", self.prob_clamp)));
        }
        Ok(())
    }
}

/// Inverted-dropout masks for the hidden layers. Each entry is the factor a
/// hidden activation is multiplied by: `0` when dropped, `1 / keep_prob`
/// otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct DropoutMask {
    pub keep_prob: f64,
    pub scales: Vec<Vec<f64>>,
}

impl DropoutMask {
    pub fn sample(net: &Network, dropout_ratio: f64, rng: &mut impl Rng) -> DropoutMask {
        let keep_prob = 1.0 - dropout_ratio;
        let hidden = &net.layer_sizes()[1..net.layer_sizes().len() - 1];
        let scales = hidden
            .iter()
            .map(|&n| (0..n).map(|_| if rng.random::<f64>() < keep_prob { 1.0 / keep_prob } else { 0.0 }).collect())
            .collect();
        DropoutMask { keep_prob, scales }
    }
}

/// Everything backpropagation needs from a forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    /// `activations[0]` is the input; `activations[l]` the (masked) output of
    /// hidden layer `l`.
    pub activations: Vec<Vec<f64>>,
    /// Pre-activations of every layer, output layer last.
    pub pre_activations: Vec<Vec<f64>>,
    pub dropout: Option<Vec<Vec<f64>>>,
    /// Softmax probabilities.
    pub output: Vec<f64>,
}

pub fn relu(v: f64) -> f64 {
    v.max(0.0)
}

/// Max-shifted softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - m).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn affine(net: &Network, layer: usize, input: &[f64]) -> Vec<f64> {
    let s = net.shapes()[layer];
    let w = net.weights(layer);
    let b = net.biases(layer);
    let mut out = b.to_vec();
    for (j, o) in out.iter_mut().enumerate() {
        let row = &w[j * s.fan_in..(j + 1) * s.fan_in];
        *o += row.iter().zip(input).map(|(w, x)| w * x).sum::<f64>();
    }
    out
}

/// Forward pass: `α = W·a + B` per layer, ReLU on hidden layers (scaled by
/// the dropout mask when given) and softmax on the output.
pub fn forward(net: &Network, x: &[f64], mask: Option<&DropoutMask>) -> Result<ForwardTrace> {
    if x.len() != net.input_width() {
        return Err(Error::DimensionMismatch { expected: net.input_width(), got: x.len() });
    }
    if let Some(m) = mask {
        let expected = net.num_layers() - 1;
        if m.scales.len() != expected || m.scales.iter().zip(&net.layer_sizes()[1..]).any(|(s, &n)| s.len() != n) {
            return Err(Error::InvalidShape("dropout mask does not match hidden layers".into()));
        }
    }
    let last = net.num_layers() - 1;
    let mut activations = vec![x.to_vec()];
    let mut pre_activations = Vec::with_capacity(net.num_layers());
    for l in 0..net.num_layers() {
        let alpha = affine(net, l, &activations[l]);
        if l < last {
            let mut a: Vec<f64> = alpha.iter().map(|&v| relu(v)).collect();
            if let Some(m) = mask {
                for (v, s) in a.iter_mut().zip(&m.scales[l]) {
                    *v *= s;
                }
            }
            activations.push(a);
        }
        pre_activations.push(alpha);
    }
    let output = softmax(pre_activations.last().expect("one layer"));
    Ok(ForwardTrace { activations, pre_activations, dropout: mask.map(|m| m.scales.clone()), output })
}

pub fn one_hot(label: Label, classes: usize) -> Vec<f64> {
    let mut t = vec![0.0; classes];
    t[label.index()] = 1.0;
    t
}

/// Cross-entropy summed over every output unit, without regularization.
pub fn data_loss(output: &[f64], target: &[f64], prob_clamp: f64) -> f64 {
    output
        .iter()
        .zip(target)
        .map(|(&o, &t)| {
            let p = o.clamp(prob_clamp, 1.0 - prob_clamp);
            -(t * p.ln() + (1.0 - t) * (1.0 - p).ln())
        })
        .sum()
}

/// `−Σ_y [t_y ln O_y + (1 − t_y) ln(1 − O_y)] + l1·Σ|w| + l2·Σw²`.
pub fn loss(trace: &ForwardTrace, target: &[f64], cfg: &LossConfig, net: &Network) -> f64 {
    let (abs_sum, sq_sum) = net.weight_norms();
    data_loss(&trace.output, target, cfg.prob_clamp) + cfg.l1 * abs_sum + cfg.l2 * sq_sum
}

/// Gradient of [`loss`] with respect to every parameter, in the network's
/// flat layout, written into `grads`.
pub fn backward_into(net: &Network, trace: &ForwardTrace, target: &[f64], cfg: &LossConfig, grads: &mut [f64]) -> Result<()> {
    if grads.len() != net.params().len() {
        return Err(Error::DimensionMismatch { expected: net.params().len(), got: grads.len() });
    }
    if target.len() != net.output_width() || trace.output.len() != net.output_width() {
        return Err(Error::DimensionMismatch { expected: net.output_width(), got: target.len() });
    }
    if trace.activations.len() != net.num_layers() {
        return Err(Error::InvalidShape("trace does not match network depth".into()));
    }

    // dL/dO through the clamp (flat outside [ε, 1 − ε])
    let eps = cfg.prob_clamp;
    let d_out: Vec<f64> = trace
        .output
        .iter()
        .zip(target)
        .map(|(&o, &t)| if o < eps || o > 1.0 - eps { 0.0 } else { -t / o + (1.0 - t) / (1.0 - o) })
        .collect();
    // softmax Jacobian: dz_k = O_k (g_k − Σ_y g_y O_y)
    let dot: f64 = d_out.iter().zip(&trace.output).map(|(g, o)| g * o).sum();
    let mut delta: Vec<f64> = trace.output.iter().zip(&d_out).map(|(o, g)| o * (g - dot)).collect();

    for l in (0..net.num_layers()).rev() {
        let s = net.shapes()[l];
        let input = &trace.activations[l];
        let (wr, br) = (s.weight_range(), s.bias_range());
        {
            let gw = &mut grads[wr.clone()];
            for (j, &d) in delta.iter().enumerate() {
                let row = &mut gw[j * s.fan_in..(j + 1) * s.fan_in];
                if d == 0.0 {
                    row.fill(0.0);
                } else {
                    for (g, &a) in row.iter_mut().zip(input) {
                        *g = d * a;
                    }
                }
            }
        }
        grads[br].copy_from_slice(&delta);
        if l == 0 {
            break;
        }
        let w = net.weights(l);
        let mut prev = vec![0.0; s.fan_in];
        for (j, &d) in delta.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            for (p, &wji) in prev.iter_mut().zip(&w[j * s.fan_in..(j + 1) * s.fan_in]) {
                *p += wji * d;
            }
        }
        let alpha = &trace.pre_activations[l - 1];
        for (i, p) in prev.iter_mut().enumerate() {
            let mut scale = if alpha[i] > 0.0 { 1.0 } else { 0.0 };
            if let Some(masks) = &trace.dropout {
                scale *= masks[l - 1][i];
            }
            *p *= scale;
        }
        delta = prev;
    }

    if cfg.l1 != 0.0 || cfg.l2 != 0.0 {
        let params = net.params();
        for s in net.shapes() {
            for i in s.weight_range() {
                let w = params[i];
                let sign = if w > 0.0 {
                    1.0
                } else if w < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                grads[i] += cfg.l1 * sign + 2.0 * cfg.l2 * w;
            }
        }
    }
    Ok(())
}

pub fn backward(net: &Network, trace: &ForwardTrace, target: &[f64], cfg: &LossConfig) -> Result<Vec<f64>> {
    let mut grads = vec![0.0; net.params().len()];
    backward_into(net, trace, target, cfg, &mut grads)?;
    Ok(grads)
}

/// Class with the highest probability (ties go to fake) and the probability
/// of the fake class. Dropout is never applied.
pub fn predict(net: &Network, x: &[f64]) -> Result<(Label, f64)> {
    let trace = forward(net, x, None)?;
    Ok(classify(&trace.output))
}

pub fn classify(output: &[f64]) -> (Label, f64) {
    let p_fake = output[Label::Fake.index()];
    let p_real = output[Label::Real.index()];
    (if p_real > p_fake { Label::Real } else { Label::Fake }, p_fake)
}
