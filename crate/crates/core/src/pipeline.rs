//! End-to-end run: clean, split, impute, encode, oversample, train, score.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{
    clean, coordinate_medians, impute_coordinates, split, AttributeSet, CleaningLog, CleaningPolicy, CoordinateMedians,
    Dataset, Imputation, SplitIndices, SplitRatios,
};
use crate::error::{Error, Result};
use crate::eval::{evaluate, MetricsReport};
use crate::features::{encode_dataset, fit_encoder, smote, uniform_hash_dims, EncodedDataset, FeatureSpec, DEFAULT_HASH_DIMS, DEFAULT_SMOTE_K};
use crate::mlp::{Network, NetworkFile};
use crate::train::{train, RunLog, TrainConfig};

pub const BUNDLE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmoteConfig {
    pub enabled: bool,
    pub k: usize,
    /// Minority/majority ratio after oversampling.
    pub target_ratio: f64,
}

impl Default for SmoteConfig {
    fn default() -> Self {
        SmoteConfig { enabled: true, k: DEFAULT_SMOTE_K, target_ratio: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub train: TrainConfig,
    pub split: SplitRatios,
    pub active_attributes: AttributeSet,
    pub hash_dims: usize,
    pub smote: SmoteConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            train: TrainConfig::default(),
            split: SplitRatios::default(),
            active_attributes: AttributeSet::default_active(),
            hash_dims: DEFAULT_HASH_DIMS,
            smote: SmoteConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        self.split.validate()?;
        if self.hash_dims == 0 {
            return Err(Error::InvalidConfig("hash_dims must be at least 1".into()));
        }
        if self.smote.enabled && (self.smote.k == 0 || !(self.smote.target_ratio > 0.0 && self.smote.target_ratio <= 1.0)) {
            return Err(Error::InvalidConfig("smote needs k ≥ 1 and target_ratio in (0, 1]".into()));
        }
        Ok(())
    }

    /// Same settings without a hidden layer: the logistic comparator.
    pub fn logistic(&self) -> PipelineConfig {
        let mut cfg = self.clone();
        cfg.train.hidden_size = 0;
        cfg
    }
}

/// Seeds for the independent random steps of one run, all derived from the
/// run seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StageSeeds {
    pub split: u64,
    pub smote: u64,
    pub init: u64,
    pub train: u64,
}

impl StageSeeds {
    pub fn derive(seed: u64) -> StageSeeds {
        let mix = |tag: u64| {
            // splitmix64 finalizer
            let mut z = seed.wrapping_add(tag.wrapping_mul(0x9E37_79B9_7F4A_7C15));
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^ (z >> 31)
        };
        StageSeeds { split: mix(1), smote: mix(2), init: mix(3), train: mix(4) }
    }
}

/// Encoded splits ready for training.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub cleaned: Dataset,
    pub cleaning_log: CleaningLog,
    pub split: SplitIndices,
    pub medians: CoordinateMedians,
    pub spec: FeatureSpec,
    /// Training rows after oversampling.
    pub train: EncodedDataset,
    pub validation: EncodedDataset,
    pub test: EncodedDataset,
}

/// Cleans `ds`, splits it, imputes coordinates with training-split medians,
/// fits the encoder on the training split without `removed`, encodes all
/// three parts and oversamples the training part.
pub fn prepare(ds: &Dataset, cfg: &PipelineConfig, removed: AttributeSet, seed: u64) -> Result<Prepared> {
    cfg.validate()?;
    let (cleaned, cleaning_log) = clean(ds, &CleaningPolicy { imputation: Imputation::Defer })?;
    let parts = split(&cleaned, cfg.split, StageSeeds::derive(seed).split)?;
    prepare_split(cleaned, cleaning_log, parts, cfg, removed, seed)
}

/// The steps of [`prepare`] after splitting, for a dataset already cleaned
/// with deferred imputation.
pub fn prepare_split(
    mut cleaned: Dataset,
    mut cleaning_log: CleaningLog,
    parts: SplitIndices,
    cfg: &PipelineConfig,
    removed: AttributeSet,
    seed: u64,
) -> Result<Prepared> {
    let medians = coordinate_medians(&cleaned, Some(&parts.train));
    impute_coordinates(&mut cleaned, medians, &mut cleaning_log);

    let active = cfg.active_attributes.difference(removed);
    let train_ds = cleaned.subset(&parts.train);
    let spec = fit_encoder(&train_ds, active, &uniform_hash_dims(cfg.hash_dims))?;
    let mut train = encode_dataset(&train_ds, &spec);
    let validation = encode_dataset(&cleaned.subset(&parts.validation), &spec);
    let test = encode_dataset(&cleaned.subset(&parts.test), &spec);

    if cfg.smote.enabled {
        let (fake, real) = train.label_counts();
        let ratio = fake.min(real) as f64 / fake.max(real) as f64;
        if ratio < cfg.smote.target_ratio {
            train = smote(&train, cfg.smote.k, cfg.smote.target_ratio, StageSeeds::derive(seed).smote)?;
        }
    }
    Ok(Prepared { cleaned, cleaning_log, split: parts, medians, spec, train, validation, test })
}

/// Everything produced by one training run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub seed: u64,
    pub network: Network,
    pub spec: FeatureSpec,
    pub medians: CoordinateMedians,
    pub log: RunLog,
    pub validation: MetricsReport,
    pub test: MetricsReport,
}

impl RunOutcome {
    pub fn bundle(&self, cfg: &PipelineConfig) -> ModelBundle {
        ModelBundle {
            format_version: BUNDLE_FORMAT_VERSION,
            seed: self.seed,
            train_config: cfg.train.clone(),
            medians: self.medians,
            features: self.spec.clone(),
            network: self.network.to_file(),
        }
    }
}

/// Trains on prepared splits and scores the result on validation and test.
pub fn train_prepared(prep: &Prepared, cfg: &PipelineConfig, seed: u64) -> Result<RunOutcome> {
    let seeds = StageSeeds::derive(seed);
    let mut tcfg = cfg.train.clone();
    tcfg.seed = (seeds.train >> 1) as i64;
    let net = Network::init(&tcfg.layer_sizes(prep.train.width), seeds.init, tcfg.init)?;
    let (network, mut log) = train(net, &prep.train, &tcfg, &prep.validation)?;
    log.seed = seed;
    Ok(RunOutcome {
        seed,
        validation: evaluate(&network, &prep.validation)?,
        test: evaluate(&network, &prep.test)?,
        network,
        spec: prep.spec.clone(),
        medians: prep.medians,
        log,
    })
}

/// [`prepare`] followed by [`train_prepared`]. A configured seed of `-1`
/// draws a fresh one, reported in the outcome.
pub fn run(ds: &Dataset, cfg: &PipelineConfig, removed: AttributeSet) -> Result<RunOutcome> {
    let seed = cfg.train.resolve_seed();
    let prep = prepare(ds, cfg, removed, seed)?;
    train_prepared(&prep, cfg, seed)
}

/// A trained model with everything needed to score new records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBundle {
    pub format_version: u32,
    pub seed: u64,
    pub train_config: TrainConfig,
    pub medians: CoordinateMedians,
    pub features: FeatureSpec,
    pub network: NetworkFile,
}

impl ModelBundle {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<ModelBundle> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let found = value.get("format_version").and_then(serde_json::Value::as_u64).unwrap_or(0) as u32;
        if found != BUNDLE_FORMAT_VERSION {
            return Err(Error::VersionMismatch { found, expected: BUNDLE_FORMAT_VERSION });
        }
        let bundle: ModelBundle = serde_json::from_value(value)?;
        if bundle.features.version != crate::features::FEATURE_SPEC_VERSION {
            return Err(Error::VersionMismatch { found: bundle.features.version, expected: crate::features::FEATURE_SPEC_VERSION });
        }
        Ok(bundle)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ModelBundle> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
            _ => e.into(),
        })?;
        ModelBundle::from_json(&text)
    }

    pub fn network(&self) -> Result<Network> {
        let net = Network::from_file(self.network.clone())?;
        if net.input_width() != self.features.width() {
            return Err(Error::DimensionMismatch { expected: self.features.width(), got: net.input_width() });
        }
        Ok(net)
    }

    /// Scores labelled records. Records are cleaned with the stored medians;
    /// duplicates are dropped as in training.
    pub fn evaluate(&self, ds: &Dataset) -> Result<MetricsReport> {
        let (cleaned, _) = clean(ds, &CleaningPolicy { imputation: Imputation::Fixed(self.medians) })?;
        evaluate(&self.network()?, &encode_dataset(&cleaned, &self.features))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate_fake, generate_reference, merge_labeled, FakeProfile, ReferenceOptions};

    fn small_data(seed: u64) -> Dataset {
        let real = generate_reference(&ReferenceOptions { unique: 150, duplicates: 3, ..ReferenceOptions::default() }, seed);
        let fake = generate_fake(60, &FakeProfile::default(), seed + 1).unwrap();
        merge_labeled(&real, &fake).unwrap()
    }

    fn quick_cfg() -> PipelineConfig {
        let mut cfg = PipelineConfig::default();
        cfg.train.epochs = 2;
        cfg.train.hidden_size = 16;
        cfg.train.seed = 3;
        cfg
    }

    #[test]
    fn prepare_shapes_and_balance() {
        let ds = small_data(1);
        let prep = prepare(&ds, &quick_cfg(), AttributeSet::empty(), 3).unwrap();
        assert_eq!(prep.cleaned.len(), 210);
        let n = prep.split.train.len() + prep.split.validation.len() + prep.split.test.len();
        assert_eq!(n, 210);
        let (fake, real) = prep.train.label_counts();
        assert_eq!(fake, real);
        assert_eq!(prep.validation.len(), prep.split.validation.len());
        assert!(prep.cleaned.records.iter().all(|r| r.x.is_some() && r.y.is_some()));
        assert_eq!(prep.train.width, prep.spec.width());
    }

    #[test]
    fn removal_shrinks_width() {
        use crate::data::Attribute;
        let ds = small_data(2);
        let full = prepare(&ds, &quick_cfg(), AttributeSet::empty(), 3).unwrap();
        let removed: AttributeSet = [Attribute::X, Attribute::Y].into_iter().collect();
        let less = prepare(&ds, &quick_cfg(), removed, 3).unwrap();
        assert_eq!(less.train.width, full.train.width - 4);
        let everything = AttributeSet::all();
        assert!(matches!(prepare(&ds, &quick_cfg(), everything, 3), Err(Error::EmptyFeatureSet)));
    }

    #[test]
    fn run_is_reproducible_and_bundle_round_trips() {
        let ds = small_data(3);
        let cfg = quick_cfg();
        let a = run(&ds, &cfg, AttributeSet::empty()).unwrap();
        let b = run(&ds, &cfg, AttributeSet::empty()).unwrap();
        assert_eq!(a.network, b.network);
        assert_eq!(a.test, b.test);
        assert_eq!(a.log.epochs.len(), 2);

        let bundle = a.bundle(&cfg);
        let back = ModelBundle::from_json(&bundle.to_json().unwrap()).unwrap();
        assert_eq!(back, bundle);
        assert_eq!(back.network().unwrap(), a.network);
    }

    #[test]
    fn bundle_version_checked() {
        let ds = small_data(4);
        let cfg = quick_cfg();
        let out = run(&ds, &cfg, AttributeSet::empty()).unwrap();
        let mut bundle = out.bundle(&cfg);
        bundle.format_version = 9;
        assert!(matches!(ModelBundle::from_json(&bundle.to_json().unwrap()), Err(Error::VersionMismatch { found: 9, .. })));
        let mut bundle = out.bundle(&cfg);
        bundle.features.version = 5;
        assert!(matches!(ModelBundle::from_json(&bundle.to_json().unwrap()), Err(Error::VersionMismatch { found: 5, .. })));
    }

    #[test]
    fn stage_seeds_distinct() {
        let s = StageSeeds::derive(0);
        let all = [s.split, s.smote, s.init, s.train];
        for i in 0..4 {
            for j in i + 1..4 {
                assert_ne!(all[i], all[j]);
            }
        }
        assert_ne!(StageSeeds::derive(1), s);
    }
}
