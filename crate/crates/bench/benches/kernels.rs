use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use fakepoi_bench::{cleaned, prepared};
use fakepoi_core::features::{encode_dataset, fit_encoder, smote, uniform_hash_dims, DEFAULT_HASH_DIMS};
use fakepoi_core::mlp::{backward, forward, one_hot, InitMode, LossConfig, Network};
use fakepoi_core::train::train_sequential;
use fakepoi_core::{AttributeSet, Label, PipelineConfig, TrainConfig};
use std::hint::black_box;

fn mlp(c: &mut Criterion) {
    let net = Network::init(&[120, 200, 2], 1, InitMode::ScaledUniform).unwrap();
    let x: Vec<f64> = (0..120).map(|i| (i as f64 * 0.37).sin()).collect();
    let target = one_hot(Label::Fake, 2);
    let cfg = LossConfig::default();
    c.bench_function("forward 120-200-2", |b| b.iter(|| forward(black_box(&net), black_box(&x), None).unwrap()));
    c.bench_function("forward+backward 120-200-2", |b| {
        b.iter(|| {
            let trace = forward(&net, black_box(&x), None).unwrap();
            backward(&net, &trace, &target, &cfg).unwrap()
        })
    });
}

fn features(c: &mut Criterion) {
    let ds = cleaned();
    let dims = uniform_hash_dims(DEFAULT_HASH_DIMS);
    let spec = fit_encoder(&ds, AttributeSet::default_active(), &dims).unwrap();
    c.bench_function("fit encoder (desk set)", |b| b.iter(|| fit_encoder(black_box(&ds), AttributeSet::default_active(), &dims).unwrap()));
    c.bench_function("encode dataset (desk set)", |b| b.iter(|| encode_dataset(black_box(&ds), &spec)));

    let mut cfg = PipelineConfig::default();
    cfg.smote.enabled = false;
    let train = prepared(&cfg).train;
    c.bench_function("smote k=5 to balance (desk train split)", |b| b.iter(|| smote(black_box(&train), 5, 1.0, 7).unwrap()));
}

fn training(c: &mut Criterion) {
    let prep = prepared(&PipelineConfig::default());
    let tcfg = TrainConfig { epochs: 1, seed: 1, ..TrainConfig::default() };
    let net = Network::init(&tcfg.layer_sizes(prep.train.width), 1, tcfg.init).unwrap();
    let mut group = c.benchmark_group("training");
    group.sample_size(10);
    group.bench_function("one sequential epoch (desk train split)", |b| {
        b.iter_batched(|| net.clone(), |n| train_sequential(n, &prep.train, &tcfg, &prep.validation).unwrap(), BatchSize::LargeInput)
    });
    group.finish();
}

criterion_group!(benches, mlp, features, training);
criterion_main!(benches);
