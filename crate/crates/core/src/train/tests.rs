use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::data::Label;
use crate::error::Error;
use crate::features::EncodedDataset;
use crate::mlp::{predict, Network};

/// Two Gaussian-ish blobs centred at ±`offset` along the diagonal.
fn blobs(n: usize, offset: f64, seed: u64) -> EncodedDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..n {
        let label = if i % 2 == 0 { Label::Fake } else { Label::Real };
        let c = if label == Label::Fake { -offset } else { offset };
        let noise = |rng: &mut ChaCha8Rng| (0..4).map(|_| rng.random_range(-0.5..0.5)).sum::<f64>() * 0.5;
        rows.push(vec![c + noise(&mut rng), c + noise(&mut rng)]);
        labels.push(label);
    }
    EncodedDataset::from_rows(&rows, labels).unwrap()
}

/// Classic perceptron; returns true once an epoch makes no mistakes.
fn perceptron_separates(data: &EncodedDataset) -> bool {
    let mut w = [0.0f64; 3];
    for _ in 0..1000 {
        let mut mistakes = 0;
        for (x, l) in data.rows().zip(&data.labels) {
            let y = if *l == Label::Real { 1.0 } else { -1.0 };
            if y * (w[0] * x[0] + w[1] * x[1] + w[2]) <= 0.0 {
                w[0] += y * x[0];
                w[1] += y * x[1];
                w[2] += y;
                mistakes += 1;
            }
        }
        if mistakes == 0 {
            return true;
        }
    }
    false
}

fn accuracy(net: &Network, data: &EncodedDataset) -> f64 {
    let hits = data.rows().zip(&data.labels).filter(|(x, l)| predict(net, x).unwrap().0 == **l).count();
    hits as f64 / data.len() as f64
}

fn linear_cfg(seed: i64) -> TrainConfig {
    TrainConfig { hidden_size: 0, dropout_ratio: 0.0, seed, ..TrainConfig::default() }
}

#[test]
fn separable_blobs_without_hidden_layer() {
    let data = blobs(400, 1.0, 3);
    assert!(perceptron_separates(&data), "fixture must be linearly separable");
    let cfg = linear_cfg(11);
    let net = Network::init(&cfg.layer_sizes(2), 11, cfg.init).unwrap();
    let (net, log) = train_sequential(net, &data, &cfg, &data).unwrap();
    assert_eq!(log.epochs.len(), cfg.epochs);
    assert!(accuracy(&net, &data) >= 0.99, "accuracy {}", accuracy(&net, &data));
}

#[test]
fn zero_epochs_rejected() {
    let data = blobs(20, 1.0, 1);
    let cfg = TrainConfig { epochs: 0, ..linear_cfg(1) };
    let net = Network::zeros(&[2, 2]).unwrap();
    assert!(matches!(train_sequential(net, &data, &cfg, &data), Err(Error::InvalidConfig(_))));
}

#[test]
fn runlog_length_and_seed() {
    let data = blobs(60, 1.0, 2);
    let cfg = TrainConfig { epochs: 3, hidden_size: 4, seed: 5, ..TrainConfig::default() };
    let net = Network::init(&cfg.layer_sizes(2), 5, cfg.init).unwrap();
    let (_, log) = train_sequential(net, &data, &cfg, &data).unwrap();
    assert_eq!(log.seed, 5);
    assert_eq!(log.epochs.iter().map(|e| e.epoch).collect::<Vec<_>>(), vec![1, 2, 3]);
    assert!(log.epochs.iter().all(|e| e.train_loss.is_finite() && e.val_loss.is_finite() && e.param_norm > 0.0));
}

#[test]
fn width_mismatch_rejected() {
    let data = blobs(20, 1.0, 1);
    let net = Network::zeros(&[3, 2]).unwrap();
    assert!(matches!(train_sequential(net, &data, &linear_cfg(1), &data), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn sequential_is_deterministic() {
    let data = blobs(80, 0.5, 4);
    let cfg = TrainConfig { epochs: 2, hidden_size: 8, seed: 9, ..TrainConfig::default() };
    let net = Network::init(&cfg.layer_sizes(2), 9, cfg.init).unwrap();
    let (a, la) = train_sequential(net.clone(), &data, &cfg, &data).unwrap();
    let (b, lb) = train_sequential(net, &data, &cfg, &data).unwrap();
    assert_eq!(a, b);
    let losses = |l: &RunLog| l.epochs.iter().map(|e| (e.train_loss, e.val_loss)).collect::<Vec<_>>();
    assert_eq!(losses(&la), losses(&lb));
}

#[test]
fn single_worker_hogwild_matches_sequential_bitwise() {
    let data = blobs(90, 0.5, 6);
    for policy in [OptimizerStatePolicy::Persist, OptimizerStatePolicy::ResetEachIteration] {
        let cfg = TrainConfig { epochs: 3, hidden_size: 6, seed: 21, optimizer_state: policy, ..TrainConfig::default() };
        let net = Network::init(&cfg.layer_sizes(2), 21, cfg.init).unwrap();
        let (seq, _) = train_sequential(net.clone(), &data, &cfg, &data).unwrap();
        let hog_cfg = TrainConfig { trainer: TrainerKind::Hogwild, samples_per_iteration: data.len(), ..cfg };
        let (hog, _) = train_hogwild(net, &data, &hog_cfg, &data).unwrap();
        let bits = |n: &Network| n.params().iter().map(|p| p.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&seq), bits(&hog), "{policy:?}");
    }
}

#[test]
fn hogwild_epoch_accounting() {
    let data = blobs(50, 1.0, 8);
    let cfg = TrainConfig {
        epochs: 2,
        trainer: TrainerKind::Hogwild,
        nodes: 2,
        cores_per_node: 2,
        samples_per_iteration: 20,
        score_every: ScoreEvery::Iteration,
        ..linear_cfg(4)
    };
    let (_, log) = train(Network::zeros(&[2, 2]).unwrap(), &data, &cfg, &data).unwrap();
    assert_eq!(log.epochs.len(), 2);
    // ⌈50 / 20⌉ = 3 outer iterations per epoch
    assert_eq!(log.iterations.len(), 6);
}

#[test]
fn hogwild_rejects_oversized_subset() {
    let data = blobs(20, 1.0, 1);
    let cfg = TrainConfig { trainer: TrainerKind::Hogwild, samples_per_iteration: 21, ..linear_cfg(1) };
    assert!(matches!(train_hogwild(Network::zeros(&[2, 2]).unwrap(), &data, &cfg, &data), Err(Error::InvalidConfig(_))));
}

#[test]
fn parallel_convex_loss_close_to_sequential() {
    let data = blobs(800, 0.3, 12);
    let base = TrainConfig { epochs: 10, ..linear_cfg(17) };
    let net = Network::zeros(&[2, 2]).unwrap();
    let (_, seq) = train_sequential(net.clone(), &data, &base, &data).unwrap();
    let cfg = TrainConfig { trainer: TrainerKind::Hogwild, nodes: 4, cores_per_node: 4, samples_per_iteration: 200, ..base };
    let (_, par) = train_hogwild(net, &data, &cfg, &data).unwrap();
    let (s, p) = (seq.final_epoch().unwrap().train_loss, par.final_epoch().unwrap().train_loss);
    assert!((p - s).abs() <= 0.05 * s, "sequential {s}, parallel {p}");
}

#[test]
fn overflow_reports_divergence() {
    let rows = vec![vec![1e200, -1e200], vec![-1e200, 1e200]];
    let data = EncodedDataset::from_rows(&rows, vec![Label::Fake, Label::Real]).unwrap();
    let cfg = TrainConfig { optimizer: OptimizerKind::Sgd, learning_rate: 1e300, ..linear_cfg(1) };
    let net = Network::init(&[2, 2], 1, cfg.init).unwrap();
    match train_sequential(net.clone(), &data, &cfg, &data) {
        Err(Error::Diverged { epoch, .. }) => assert_eq!(epoch, 1),
        other => panic!("expected divergence, got {other:?}"),
    }
    let cfg = TrainConfig { trainer: TrainerKind::Hogwild, nodes: 2, ..cfg };
    assert!(matches!(train_hogwild(net, &data, &cfg, &data), Err(Error::Diverged { epoch: 1, .. })));
}
