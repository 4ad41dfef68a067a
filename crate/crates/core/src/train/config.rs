use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mlp::{InitMode, LossConfig, DEFAULT_PROB_CLAMP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Adadelta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrainerKind {
    Sequential,
    Hogwild,
}

/// What happens to a node's optimizer accumulators when it copies the global
/// parameters at the start of an outer iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerStatePolicy {
    Persist,
    ResetEachIteration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreEvery {
    Epoch,
    Iteration,
}

/// Training hyperparameters and parallel topology.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub hidden_size: usize,
    pub dropout_ratio: f64,
    pub l1: f64,
    pub l2: f64,
    pub prob_clamp: f64,
    pub optimizer: OptimizerKind,
    pub rho: f64,
    pub epsilon: f64,
    pub learning_rate: f64,
    pub init: InitMode,
    pub trainer: TrainerKind,
    pub nodes: usize,
    pub cores_per_node: usize,
    /// Examples each node draws per outer iteration; 0 means the whole
    /// training set.
    pub samples_per_iteration: usize,
    pub optimizer_state: OptimizerStatePolicy,
    pub score_every: ScoreEvery,
    /// `-1` draws a seed from the operating system.
    pub seed: i64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 10,
            hidden_size: 200,
            dropout_ratio: 0.5,
            l1: 1e-5,
            l2: 1e-5,
            prob_clamp: DEFAULT_PROB_CLAMP,
            optimizer: OptimizerKind::Adadelta,
            rho: 0.99,
            epsilon: 1e-8,
            learning_rate: 0.01,
            init: InitMode::ScaledUniform,
            trainer: TrainerKind::Sequential,
            nodes: 1,
            cores_per_node: 1,
            samples_per_iteration: 0,
            optimizer_state: OptimizerStatePolicy::Persist,
            score_every: ScoreEvery::Epoch,
            seed: -1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidConfig(m));
        if self.epochs < 1 {
            return fail("epochs must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.dropout_ratio) {
            return fail(format!("dropout_ratio must be in [0, 1), got {}", self.dropout_ratio));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return fail(format!("rho must be in (0, 1), got {}", self.rho));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return fail(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return fail(format!("learning_rate must be non-negative, got {}", self.learning_rate));
        }
        if self.nodes < 1 || self.cores_per_node < 1 {
            return fail("nodes and cores_per_node must be at least 1".into());
        }
        if self.seed < -1 {
            return fail(format!("seed must be -1 or non-negative, got {}", self.seed));
        }
        self.loss_config().validate()
    }

    pub fn loss_config(&self) -> LossConfig {
        LossConfig { l1: self.l1, l2: self.l2, prob_clamp: self.prob_clamp }
    }

    /// Input, optional hidden layer, two softmax outputs.
    pub fn layer_sizes(&self, input_width: usize) -> Vec<usize> {
        if self.hidden_size == 0 {
            vec![input_width, 2]
        } else {
            vec![input_width, self.hidden_size, 2]
        }
    }

    /// The configured seed, or a fresh one from the OS for `-1`.
    pub fn resolve_seed(&self) -> u64 {
        if self.seed >= 0 {
            self.seed as u64
        } else {
            rand::random()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let cfg = TrainConfig::default();
        cfg.validate().unwrap();
        assert_eq!((cfg.epochs, cfg.hidden_size, cfg.dropout_ratio), (10, 200, 0.5));
        assert_eq!((cfg.l1, cfg.l2, cfg.rho, cfg.epsilon), (1e-5, 1e-5, 0.99, 1e-8));
        assert_eq!(cfg.seed, -1);
    }

    #[test]
    fn invariants_enforced() {
        let bad = [
            TrainConfig { epochs: 0, ..TrainConfig::default() },
            TrainConfig { dropout_ratio: 1.0, ..TrainConfig::default() },
            TrainConfig { rho: 1.0, ..TrainConfig::default() },
            TrainConfig { epsilon: 0.0, ..TrainConfig::default() },
            TrainConfig { nodes: 0, ..TrainConfig::default() },
            TrainConfig { cores_per_node: 0, ..TrainConfig::default() },
            TrainConfig { l1: -1.0, ..TrainConfig::default() },
            TrainConfig { seed: -2, ..TrainConfig::default() },
        ];
        for cfg in bad {
            assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))), "{cfg:?}");
        }
    }

    #[test]
    fn seed_resolution() {
        assert_eq!(TrainConfig { seed: 12, ..TrainConfig::default() }.resolve_seed(), 12);
        let cfg = TrainConfig::default();
        // two entropy draws colliding is vanishingly unlikely
        assert_ne!(cfg.resolve_seed(), cfg.resolve_seed());
    }

    #[test]
    fn json_rejects_unknown_keys() {
        let cfg: TrainConfig = serde_json::from_str(r#"{"epochs": 3, "optimizer": "sgd"}"#).unwrap();
        assert_eq!(cfg.epochs, 3);
        assert_eq!(cfg.optimizer, OptimizerKind::Sgd);
        assert!(serde_json::from_str::<TrainConfig>(r#"{"epoch": 3}"#).is_err());
    }
}
