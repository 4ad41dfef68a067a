//! Fixtures shared by the benchmarks.

use fakepoi_core::data::{bundled_dataset, clean, CleaningPolicy, Imputation};
use fakepoi_core::pipeline::{prepare, Prepared};
use fakepoi_core::synth::{generate_fake, merge_labeled, FakeProfile};
use fakepoi_core::{AttributeSet, Dataset, PipelineConfig};

/// Bundled real sample plus 500 generated fakes.
pub fn desk_dataset() -> Dataset {
    let fake = generate_fake(500, &FakeProfile::default(), 1).expect("default profile is valid");
    merge_labeled(&bundled_dataset(), &fake).expect("labels are consistent")
}

/// The desk dataset cleaned, with coordinates left unimputed.
pub fn cleaned() -> Dataset {
    clean(&desk_dataset(), &CleaningPolicy { imputation: Imputation::Defer }).expect("cleans").0
}

pub fn prepared(cfg: &PipelineConfig) -> Prepared {
    prepare(&desk_dataset(), cfg, AttributeSet::empty(), 1).expect("prepares")
}
