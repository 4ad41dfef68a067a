//! POI records: schema, CSV input/output, cleaning and stratified splitting.

mod clean;
mod io;
mod record;
mod split;

pub use clean::{
    clean, coordinate_medians, impute_coordinates, median, CleaningAction, CleaningActionKind, CleaningLog,
    CleaningPolicy, CoordinateMedians, Imputation,
};
pub use io::{load_csv, read_csv, save_csv, write_csv, CsvSchema, LABEL_COLUMN};
pub use record::{Attribute, AttributeKind, AttributeSet, Dataset, Label, PoiRecord, Provenance, MISSING};
pub use split::{kfold, split, FoldAssignment, SplitIndices, SplitRatios, MIN_SPLIT_RECORDS};

const BUNDLED_CSV: &str = include_str!("../../data/peel_poi_sample.csv");

/// The bundled real-schema sample (about 1300 records after cleaning). It is
/// produced by [`crate::synth::generate_reference`] and contains no crawled data.
pub fn bundled_dataset() -> Dataset {
    let mut ds = read_csv(BUNDLED_CSV.as_bytes(), &CsvSchema::default()).expect("bundled CSV parses");
    ds.provenance = Provenance::Bundled;
    ds
}

/// Raw text of the bundled CSV.
pub fn bundled_csv() -> &'static str {
    BUNDLED_CSV
}
