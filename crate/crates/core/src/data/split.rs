use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::record::{Dataset, Label};
use crate::error::{Error, Result};

pub const MIN_SPLIT_RECORDS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitRatios {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios { train: 0.70, validation: 0.15, test: 0.15 }
    }
}

impl SplitRatios {
    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.validation, self.test];
        if parts.iter().any(|p| !p.is_finite() || *p <= 0.0) {
            return Err(Error::InvalidRatios(format!("all parts must be positive, got {parts:?}")));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidRatios(format!("parts must sum to 1, got {sum}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub fold_of: Vec<usize>,
    pub k: usize,
}

impl FoldAssignment {
    /// Indices in fold `f`.
    pub fn fold(&self, f: usize) -> Vec<usize> {
        self.fold_of.iter().enumerate().filter(|(_, &g)| g == f).map(|(i, _)| i).collect()
    }

    /// Indices outside fold `f`.
    pub fn complement(&self, f: usize) -> Vec<usize> {
        self.fold_of.iter().enumerate().filter(|(_, &g)| g != f).map(|(i, _)| i).collect()
    }
}

/// Per-class shuffled index lists, fake class first.
fn shuffled_classes(ds: &Dataset, seed: u64) -> [Vec<usize>; 2] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut classes: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, r) in ds.records.iter().enumerate() {
        classes[r.label.index()].push(i);
    }
    for c in &mut classes {
        c.shuffle(&mut rng);
    }
    classes
}

fn check_classes(classes: &[Vec<usize>; 2], needed: usize) -> Result<()> {
    for (label, members) in [Label::Fake, Label::Real].into_iter().zip(classes) {
        if members.len() < needed {
            return Err(Error::ClassTooSmall { label: label.as_u8(), count: members.len(), needed });
        }
    }
    Ok(())
}

/// Stratified train/validation/test split.
///
/// Class members are spread evenly along one ordering (member `j` of a class
/// with `c` members sits at fractional position `(j + 0.5) / c`), which is then
/// cut into three runs. Every prefix of that ordering holds each class within
/// one record of its proportional share.
pub fn split(ds: &Dataset, ratios: SplitRatios, seed: u64) -> Result<SplitIndices> {
    ratios.validate()?;
    let n = ds.len();
    if n < MIN_SPLIT_RECORDS {
        return Err(Error::TooFewRecords { len: n, needed: MIN_SPLIT_RECORDS });
    }
    let classes = shuffled_classes(ds, seed);
    check_classes(&classes, 3)?;

    let mut keyed: Vec<(f64, usize, usize)> = Vec::with_capacity(n);
    for (class, members) in classes.iter().enumerate() {
        let c = members.len() as f64;
        for (j, &idx) in members.iter().enumerate() {
            keyed.push(((j as f64 + 0.5) / c, class, idx));
        }
    }
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let order: Vec<usize> = keyed.into_iter().map(|(_, _, idx)| idx).collect();

    let n_train = (ratios.train * n as f64).round() as usize;
    let n_val = (ratios.validation * n as f64).round() as usize;
    let n_val = n_val.min(n - n_train);
    Ok(SplitIndices {
        train: order[..n_train].to_vec(),
        validation: order[n_train..n_train + n_val].to_vec(),
        test: order[n_train + n_val..].to_vec(),
    })
}

/// Stratified k-fold assignment: each class's shuffled members are dealt
/// round-robin, continuing the deal from one class to the next so fold sizes
/// differ by at most one.
pub fn kfold(ds: &Dataset, k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::InvalidConfig(format!("k must be at least 2, got {k}")));
    }
    let n = ds.len();
    if n < k {
        return Err(Error::TooFewRecords { len: n, needed: k });
    }
    let classes = shuffled_classes(ds, seed);
    check_classes(&classes, k)?;
    let mut fold_of = vec![0; n];
    for (pos, &idx) in classes.iter().flatten().enumerate() {
        fold_of[idx] = pos % k;
    }
    Ok(FoldAssignment { fold_of, k })
}
