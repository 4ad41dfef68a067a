//! Fake point-of-interest detection: record handling, synthetic fakes,
//! feature encoding, a from-scratch MLP with lock-free parallel training,
//! evaluation and ablation.

pub mod ablation;
pub mod data;
pub mod error;
pub mod eval;
pub mod features;
pub mod mlp;
pub mod patterns;
pub mod pipeline;
pub mod synth;
pub mod train;

pub use data::{Attribute, AttributeSet, Dataset, Label, PoiRecord};
pub use error::{Error, Result};
pub use features::{EncodedDataset, FeatureSpec};
pub use mlp::Network;
pub use train::{RunLog, TrainConfig};
pub use eval::{ConfusionMatrix, MetricsReport};
pub use pipeline::{ModelBundle, PipelineConfig};
pub use ablation::{AblationReport, AblationVariant};
