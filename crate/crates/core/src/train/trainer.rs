use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{OptimizerStatePolicy, ScoreEvery, TrainConfig, TrainerKind};
use super::optim::{AdadeltaState, Optimizer};
use super::runlog::{EpochRecord, IterationRecord, RunLog};
use crate::data::Label;
use crate::error::{Error, Result};
use crate::features::EncodedDataset;
use crate::mlp::{backward_into, data_loss, forward, one_hot, DropoutMask, LossConfig, Network};

const STREAM_ORDER: u64 = 1;
const STREAM_DROPOUT: u64 = 2;

/// Independent random stream for `(seed, purpose, iteration, node, core)`.
fn stream_rng(seed: u64, purpose: u64, iteration: usize, node: usize, core: usize) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&purpose.to_le_bytes());
    key[16..24].copy_from_slice(&(iteration as u64).to_le_bytes());
    key[24..28].copy_from_slice(&(node as u32).to_le_bytes());
    key[28..].copy_from_slice(&(core as u32).to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

fn shuffled(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order
}

/// Mean per-example cross-entropy (no regularization, no dropout).
pub fn mean_loss(net: &Network, data: &EncodedDataset, prob_clamp: f64) -> Result<f64> {
    if data.is_empty() {
        return Ok(f64::NAN);
    }
    let mut total = 0.0;
    for (x, &label) in data.rows().zip(&data.labels) {
        let trace = forward(net, x, None)?;
        total += data_loss(&trace.output, &one_hot(label, net.output_width()), prob_clamp);
    }
    Ok(total / data.len() as f64)
}

fn check_inputs(net: &Network, data: &EncodedDataset, cfg: &TrainConfig, val: &EncodedDataset) -> Result<()> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    for w in [data.width, val.width] {
        if w != net.input_width() {
            return Err(Error::DimensionMismatch { expected: net.input_width(), got: w });
        }
    }
    if net.output_width() != 2 {
        return Err(Error::InvalidShape(format!("binary classifier needs 2 outputs, got {}", net.output_width())));
    }
    Ok(())
}

struct Scorer<'a> {
    train: &'a EncodedDataset,
    val: &'a EncodedDataset,
    prob_clamp: f64,
}

impl Scorer<'_> {
    fn score(&self, net: &Network) -> Result<(f64, f64)> {
        Ok((mean_loss(net, self.train, self.prob_clamp)?, mean_loss(net, self.val, self.prob_clamp)?))
    }

    fn epoch(&self, net: &Network, epoch: usize, started: Instant) -> Result<EpochRecord> {
        let (train_loss, val_loss) = self.score(net)?;
        if !train_loss.is_finite() {
            return Err(Error::Diverged { epoch, detail: format!("training loss is {train_loss}") });
        }
        Ok(EpochRecord { epoch, train_loss, val_loss, seconds: started.elapsed().as_secs_f64(), param_norm: net.param_norm() })
    }
}

/// Runs whichever trainer the config selects.
pub fn train(net: Network, data: &EncodedDataset, cfg: &TrainConfig, val: &EncodedDataset) -> Result<(Network, RunLog)> {
    match cfg.trainer {
        TrainerKind::Sequential => train_sequential(net, data, cfg, val),
        TrainerKind::Hogwild => train_hogwild(net, data, cfg, val),
    }
}

/// Per-example training on one thread: each epoch visits a fresh seeded
/// permutation, sampling a new dropout mask per example.
pub fn train_sequential(mut net: Network, data: &EncodedDataset, cfg: &TrainConfig, val: &EncodedDataset) -> Result<(Network, RunLog)> {
    check_inputs(&net, data, cfg, val)?;
    let seed = cfg.resolve_seed();
    let opt = Optimizer::from_config(cfg);
    let loss_cfg = cfg.loss_config();
    let targets = [one_hot(Label::Fake, 2), one_hot(Label::Real, 2)];
    let use_dropout = cfg.dropout_ratio > 0.0 && net.num_layers() > 1;
    let scorer = Scorer { train: data, val, prob_clamp: cfg.prob_clamp };

    let mut state = AdadeltaState::for_network(&net);
    let mut grads = vec![0.0; net.params().len()];
    let mut log = RunLog { seed, ..RunLog::default() };

    for epoch in 0..cfg.epochs {
        let started = Instant::now();
        if cfg.optimizer_state == OptimizerStatePolicy::ResetEachIteration {
            state = AdadeltaState::for_network(&net);
        }
        let order = shuffled(data.len(), &mut stream_rng(seed, STREAM_ORDER, epoch, 0, 0));
        let mut drop_rng = stream_rng(seed, STREAM_DROPOUT, epoch, 0, 0);
        for i in order {
            let mask = use_dropout.then(|| DropoutMask::sample(&net, cfg.dropout_ratio, &mut drop_rng));
            let trace = forward(&net, data.row(i), mask.as_ref())?;
            backward_into(&net, &trace, &targets[data.labels[i].index()], &loss_cfg, &mut grads)?;
            let params = net.params_mut();
            for k in 0..params.len() {
                let (p, a, b) = opt.step(params[k], grads[k], state.sq_grad[k], state.sq_delta[k]);
                params[k] = p;
                state.sq_grad[k] = a;
                state.sq_delta[k] = b;
            }
            if let Some(k) = net.params().iter().position(|p| !p.is_finite()) {
                return Err(Error::Diverged { epoch: epoch + 1, detail: format!("parameter {k} became non-finite") });
            }
        }
        let record = scorer.epoch(&net, epoch + 1, started)?;
        if cfg.score_every == ScoreEvery::Iteration {
            log.iterations.push(IterationRecord { iteration: epoch + 1, train_loss: record.train_loss, val_loss: record.val_loss });
        }
        log.epochs.push(record);
    }
    Ok((net, log))
}

/// Parameters and optimizer accumulators of one node, shared by its cores.
/// Every scalar is an `f64` stored as bits in an `AtomicU64`; reads and writes
/// are word-atomic but unsynchronized, so concurrent updates may be lost.
struct NodeStore {
    params: Vec<AtomicU64>,
    sq_grad: Vec<AtomicU64>,
    sq_delta: Vec<AtomicU64>,
}

#[inline]
fn load(cell: &AtomicU64) -> f64 {
    f64::from_bits(cell.load(Ordering::Relaxed))
}

#[inline]
fn store(cell: &AtomicU64, v: f64) {
    cell.store(v.to_bits(), Ordering::Relaxed)
}

impl NodeStore {
    fn new(len: usize) -> Self {
        let zeros = || (0..len).map(|_| AtomicU64::new(0.0f64.to_bits())).collect();
        NodeStore { params: zeros(), sq_grad: zeros(), sq_delta: zeros() }
    }

    fn copy_from(&self, global: &[f64]) {
        for (cell, &v) in self.params.iter().zip(global) {
            store(cell, v);
        }
    }

    fn reset_optimizer(&self) {
        for cell in self.sq_grad.iter().chain(&self.sq_delta) {
            store(cell, 0.0);
        }
    }

    fn snapshot_into(&self, out: &mut [f64]) {
        for (o, cell) in out.iter_mut().zip(&self.params) {
            *o = load(cell);
        }
    }
}

struct IterationJob<'a> {
    seed: u64,
    iteration: usize,
    samples: usize,
    cores: usize,
    cfg: &'a TrainConfig,
    loss_cfg: LossConfig,
    opt: Optimizer,
    data: &'a EncodedDataset,
    template: &'a Network,
    failed: &'a AtomicBool,
}

impl IterationJob<'_> {
    fn run_node(&self, node: usize, store: &NodeStore, global: &[f64]) {
        store.copy_from(global);
        if self.cfg.optimizer_state == OptimizerStatePolicy::ResetEachIteration {
            store.reset_optimizer();
        }
        let mut active = shuffled(self.data.len(), &mut stream_rng(self.seed, STREAM_ORDER, self.iteration, node, 0));
        active.truncate(self.samples);
        if self.cores == 1 {
            self.run_core(node, 0, &active, store);
            return;
        }
        let chunk = active.len().div_ceil(self.cores);
        std::thread::scope(|s| {
            for (core, part) in active.chunks(chunk.max(1)).enumerate() {
                s.spawn(move || self.run_core(node, core, part, store));
            }
        });
    }

    fn run_core(&self, node: usize, core: usize, examples: &[usize], node_store: &NodeStore) {
        let mut local = self.template.clone();
        let mut grads = vec![0.0; local.params().len()];
        let targets = [one_hot(Label::Fake, 2), one_hot(Label::Real, 2)];
        let use_dropout = self.cfg.dropout_ratio > 0.0 && local.num_layers() > 1;
        let mut drop_rng = stream_rng(self.seed, STREAM_DROPOUT, self.iteration, node, core);
        for &i in examples {
            if self.failed.load(Ordering::Relaxed) {
                return;
            }
            node_store.snapshot_into(local.params_mut());
            let mask = use_dropout.then(|| DropoutMask::sample(&local, self.cfg.dropout_ratio, &mut drop_rng));
            let ok = forward(&local, self.data.row(i), mask.as_ref())
                .and_then(|trace| backward_into(&local, &trace, &targets[self.data.labels[i].index()], &self.loss_cfg, &mut grads));
            if ok.is_err() {
                self.failed.store(true, Ordering::Relaxed);
                return;
            }
            for (k, &g) in grads.iter().enumerate() {
                let (p, a, b) =
                    self.opt.step(load(&node_store.params[k]), g, load(&node_store.sq_grad[k]), load(&node_store.sq_delta[k]));
                if !p.is_finite() {
                    self.failed.store(true, Ordering::Relaxed);
                    return;
                }
                store(&node_store.params[k], p);
                store(&node_store.sq_grad[k], a);
                store(&node_store.sq_delta[k], b);
            }
        }
    }
}

/// Lock-free parallel training with node averaging.
///
/// Each outer iteration, every node copies the global parameters, draws
/// `samples_per_iteration` examples, splits them across its cores and lets
/// the cores update the node's parameters concurrently without locks. The
/// global parameters then become the mean of the node parameters. One epoch
/// is `⌈N / samples_per_iteration⌉` outer iterations.
pub fn train_hogwild(net: Network, data: &EncodedDataset, cfg: &TrainConfig, val: &EncodedDataset) -> Result<(Network, RunLog)> {
    check_inputs(&net, data, cfg, val)?;
    let n = data.len();
    let samples = if cfg.samples_per_iteration == 0 { n } else { cfg.samples_per_iteration };
    if samples > n {
        return Err(Error::InvalidConfig(format!("samples_per_iteration {samples} exceeds training set size {n}")));
    }
    let seed = cfg.resolve_seed();
    let iterations_per_epoch = n.div_ceil(samples);
    let scorer = Scorer { train: data, val, prob_clamp: cfg.prob_clamp };
    let failed = AtomicBool::new(false);

    let mut global = net.params().to_vec();
    let mut current = net;
    let stores: Vec<NodeStore> = (0..cfg.nodes).map(|_| NodeStore::new(global.len())).collect();
    let mut log = RunLog { seed, ..RunLog::default() };
    let mut iteration = 0;

    for epoch in 0..cfg.epochs {
        let started = Instant::now();
        for _ in 0..iterations_per_epoch {
            let job = IterationJob {
                seed,
                iteration,
                samples,
                cores: cfg.cores_per_node,
                cfg,
                loss_cfg: cfg.loss_config(),
                opt: Optimizer::from_config(cfg),
                data,
                template: &current,
                failed: &failed,
            };
            if stores.len() == 1 {
                job.run_node(0, &stores[0], &global);
            } else {
                std::thread::scope(|s| {
                    for (node, store) in stores.iter().enumerate() {
                        let (job, global) = (&job, &global);
                        s.spawn(move || job.run_node(node, store, global));
                    }
                });
            }
            if failed.load(Ordering::Relaxed) {
                return Err(Error::Diverged { epoch: epoch + 1, detail: format!("non-finite update in iteration {}", iteration + 1) });
            }
            let nodes = stores.len() as f64;
            for (k, g) in global.iter_mut().enumerate() {
                let mut sum = load(&stores[0].params[k]);
                for s in &stores[1..] {
                    sum += load(&s.params[k]);
                }
                *g = sum / nodes;
            }
            current.set_params(&global)?;
            iteration += 1;
            if cfg.score_every == ScoreEvery::Iteration {
                let (train_loss, val_loss) = scorer.score(&current)?;
                log.iterations.push(IterationRecord { iteration, train_loss, val_loss });
            }
        }
        log.epochs.push(scorer.epoch(&current, epoch + 1, started)?);
    }
    Ok((current, log))
}
