//! Record encoding, attribute ablation and SMOTE oversampling.

mod encoder;
mod smote;

pub use encoder::{
    ablate, encode, encode_dataset, fit_encoder, hash_trigrams, uniform_hash_dims, EncodedDataset, FeatureSpec,
    FeatureVector, NumericStats, DEFAULT_HASH_DIMS, FEATURE_SPEC_VERSION,
};
pub use smote::{nearest_neighbors, smote, smote_with_origins, SyntheticOrigin, DEFAULT_SMOTE_K};
