//! Optimizers, the sequential trainer and the lock-free parallel trainer.

mod config;
mod optim;
mod runlog;
mod trainer;

pub use config::{OptimizerKind, OptimizerStatePolicy, ScoreEvery, TrainConfig, TrainerKind};
pub use optim::{adadelta_step, apply, sgd_step, AdadeltaState, Optimizer};
pub use runlog::{EpochRecord, IterationRecord, RunLog};
pub use trainer::{mean_loss, train, train_hogwild, train_sequential};

#[cfg(test)]
mod tests;
