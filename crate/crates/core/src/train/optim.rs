use crate::error::{Error, Result};
use crate::mlp::Network;

use super::config::{OptimizerKind, TrainConfig};

/// Per-parameter update rule. Both trainers go through [`Optimizer::step`],
/// so a single-worker parallel run performs exactly the same floating-point
/// operations as a sequential one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Optimizer {
    Sgd { learning_rate: f64 },
    Adadelta { rho: f64, epsilon: f64 },
}

impl Optimizer {
    pub fn from_config(cfg: &TrainConfig) -> Optimizer {
        match cfg.optimizer {
            OptimizerKind::Sgd => Optimizer::Sgd { learning_rate: cfg.learning_rate },
            OptimizerKind::Adadelta => Optimizer::Adadelta { rho: cfg.rho, epsilon: cfg.epsilon },
        }
    }

    /// Returns the new `(param, E[g²], E[Δx²])`. SGD leaves the accumulators
    /// untouched.
    #[inline]
    pub fn step(&self, param: f64, grad: f64, sq_grad: f64, sq_delta: f64) -> (f64, f64, f64) {
        match *self {
            Optimizer::Sgd { learning_rate } => (param - learning_rate * grad, sq_grad, sq_delta),
            Optimizer::Adadelta { rho, epsilon } => {
                let sq_grad = rho * sq_grad + (1.0 - rho) * grad * grad;
                let delta = -((sq_delta + epsilon).sqrt() / (sq_grad + epsilon).sqrt()) * grad;
                let sq_delta = rho * sq_delta + (1.0 - rho) * delta * delta;
                (param + delta, sq_grad, sq_delta)
            }
        }
    }
}

/// ADADELTA accumulators, both starting at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct AdadeltaState {
    pub sq_grad: Vec<f64>,
    pub sq_delta: Vec<f64>,
}

impl AdadeltaState {
    pub fn new(len: usize) -> Self {
        AdadeltaState { sq_grad: vec![0.0; len], sq_delta: vec![0.0; len] }
    }

    pub fn for_network(net: &Network) -> Self {
        Self::new(net.params().len())
    }

    pub fn is_finite(&self) -> bool {
        self.sq_grad.iter().chain(&self.sq_delta).all(|v| v.is_finite() && *v >= 0.0)
    }
}

fn check_finite(grads: &[f64]) -> Result<()> {
    match grads.iter().position(|g| !g.is_finite()) {
        Some(i) => Err(Error::Diverged { epoch: 0, detail: format!("non-finite gradient at parameter {i}: {}", grads[i]) }),
        None => Ok(()),
    }
}

/// Applies `opt` to every parameter in place.
pub fn apply(opt: &Optimizer, params: &mut [f64], grads: &[f64], state: &mut AdadeltaState) -> Result<()> {
    if params.len() != grads.len() || state.sq_grad.len() != params.len() {
        return Err(Error::DimensionMismatch { expected: params.len(), got: grads.len() });
    }
    check_finite(grads)?;
    for i in 0..params.len() {
        let (p, a, b) = opt.step(params[i], grads[i], state.sq_grad[i], state.sq_delta[i]);
        params[i] = p;
        state.sq_grad[i] = a;
        state.sq_delta[i] = b;
    }
    if let Some(i) = params.iter().position(|p| !p.is_finite()) {
        return Err(Error::Diverged { epoch: 0, detail: format!("non-finite parameter {i} after update") });
    }
    Ok(())
}

/// `w ← w − α·g` for every weight and bias.
pub fn sgd_step(net: &mut Network, grads: &[f64], learning_rate: f64) -> Result<()> {
    let opt = Optimizer::Sgd { learning_rate };
    if net.params().len() != grads.len() {
        return Err(Error::DimensionMismatch { expected: net.params().len(), got: grads.len() });
    }
    check_finite(grads)?;
    for (p, g) in net.params_mut().iter_mut().zip(grads) {
        *p = opt.step(*p, *g, 0.0, 0.0).0;
    }
    Ok(())
}

/// One ADADELTA update of every parameter.
pub fn adadelta_step(net: &mut Network, grads: &[f64], state: &mut AdadeltaState, rho: f64, epsilon: f64) -> Result<()> {
    apply(&Optimizer::Adadelta { rho, epsilon }, net.params_mut(), grads, state)
}
