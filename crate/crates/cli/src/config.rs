//! The run configuration document. Every command reads it (or its
//! defaults) and then applies command-line overrides.

use std::path::{Path, PathBuf};

use fakepoi_core::data::SplitRatios;
use fakepoi_core::features::DEFAULT_HASH_DIMS;
use fakepoi_core::pipeline::SmoteConfig;
use fakepoi_core::synth::FakeProfile;
use fakepoi_core::{AttributeSet, Error, PipelineConfig, Result, TrainConfig};
use serde::{Deserialize, Serialize};

pub const CONFIG_VERSION: u32 = 1;

/// Number of generated fake records when no fake CSV is given.
pub const DEFAULT_FAKE_COUNT: usize = 500;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FakeSection {
    pub count: usize,
    pub seed: u64,
    pub profile: FakeProfile,
}

impl Default for FakeSection {
    fn default() -> Self {
        FakeSection { count: DEFAULT_FAKE_COUNT, seed: 1, profile: FakeProfile::default() }
    }
}

/// Input locations. Absent entries fall back to the bundled real sample and
/// freshly generated fakes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathSection {
    pub real_csv: Option<PathBuf>,
    pub fake_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfigFile {
    pub version: u32,
    pub train: TrainConfig,
    pub split: SplitRatios,
    pub active_attributes: AttributeSet,
    pub hash_dims: usize,
    pub smote: SmoteConfig,
    pub fake: FakeSection,
    pub paths: PathSection,
    /// Seeds for multi-run commands (ablate, sweep).
    pub seeds: Vec<u64>,
    /// Parallel runs for multi-run commands; 0 uses every core.
    pub workers: usize,
}

impl Default for RunConfigFile {
    fn default() -> Self {
        RunConfigFile {
            version: CONFIG_VERSION,
            train: TrainConfig::default(),
            split: SplitRatios::default(),
            active_attributes: AttributeSet::default_active(),
            hash_dims: DEFAULT_HASH_DIMS,
            smote: SmoteConfig::default(),
            fake: FakeSection::default(),
            paths: PathSection::default(),
            seeds: (1..=5).collect(),
            workers: 0,
        }
    }
}

impl RunConfigFile {
    pub fn from_json(text: &str) -> Result<RunConfigFile> {
        let cfg: RunConfigFile = serde_json::from_str(text)?;
        if cfg.version != CONFIG_VERSION {
            return Err(Error::VersionMismatch { found: cfg.version, expected: CONFIG_VERSION });
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfigFile> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
            _ => e.into(),
        })?;
        RunConfigFile::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            train: self.train.clone(),
            split: self.split,
            active_attributes: self.active_attributes,
            hash_dims: self.hash_dims,
            smote: self.smote,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.pipeline().validate()?;
        self.fake.profile.validate()?;
        if self.fake.count == 0 {
            return Err(Error::InvalidConfig("fake.count must be at least 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_all_defaults() {
        assert_eq!(RunConfigFile::from_json("{}").unwrap(), RunConfigFile::default());
    }

    #[test]
    fn defaults_match_reference_hyperparameters() {
        let t = RunConfigFile::default().train;
        assert_eq!((t.epochs, t.hidden_size), (10, 200));
        assert_eq!((t.dropout_ratio, t.l1, t.l2, t.rho), (0.5, 1e-5, 1e-5, 0.99));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(RunConfigFile::from_json(r#"{"epochs": 3}"#), Err(Error::Json(_))));
        assert!(matches!(RunConfigFile::from_json(r#"{"train": {"epoch": 3}}"#), Err(Error::Json(_))));
    }

    #[test]
    fn documented_defaults_parse_to_defaults() {
        let doc = r#"{
          "version": 1,
          "train": { "epochs": 10, "hidden_size": 200, "dropout_ratio": 0.5, "l1": 1e-5, "l2": 1e-5,
                     "optimizer": "adadelta", "rho": 0.99, "epsilon": 1e-8, "trainer": "sequential",
                     "nodes": 1, "cores_per_node": 1, "samples_per_iteration": 0,
                     "optimizer_state": "persist", "score_every": "epoch", "seed": -1 },
          "split": { "train": 0.7, "validation": 0.15, "test": 0.15 },
          "hash_dims": 16,
          "smote": { "enabled": true, "k": 5, "target_ratio": 1.0 },
          "fake": { "count": 500, "seed": 1 },
          "paths": { "real_csv": null, "fake_csv": null },
          "seeds": [1, 2, 3, 4, 5],
          "workers": 0
        }"#;
        assert_eq!(RunConfigFile::from_json(doc).unwrap(), RunConfigFile::default());
    }

    #[test]
    fn version_checked() {
        assert!(matches!(RunConfigFile::from_json(r#"{"version": 2}"#), Err(Error::VersionMismatch { found: 2, .. })));
    }

    #[test]
    fn round_trip() {
        let mut cfg = RunConfigFile::default();
        cfg.train.epochs = 3;
        cfg.paths.real_csv = Some("r.csv".into());
        assert_eq!(RunConfigFile::from_json(&cfg.to_json().unwrap()).unwrap(), cfg);
    }
}
