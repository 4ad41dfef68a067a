use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::data::{Attribute, AttributeKind, AttributeSet, Dataset, Label, PoiRecord};
use crate::error::{Error, Result};
use crate::patterns;

pub const FEATURE_SPEC_VERSION: u32 = 1;
pub const DEFAULT_HASH_DIMS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericStats {
    pub mean: f64,
    pub stddev: f64,
}

/// A fitted encoder: which attributes are used and the statistics needed to
/// turn a record into a fixed-width vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureSpec {
    pub version: u32,
    pub active_attributes: AttributeSet,
    pub hash_dims: BTreeMap<Attribute, usize>,
    pub numeric_stats: BTreeMap<Attribute, NumericStats>,
    /// Known values per categorical attribute; the `<UNK>` slot follows them.
    pub category_vocab: BTreeMap<Attribute, Vec<String>>,
}

/// Hash bucket count for every text attribute.
pub fn uniform_hash_dims(dims: usize) -> BTreeMap<Attribute, usize> {
    Attribute::ALL.into_iter().filter(|a| a.kind() == AttributeKind::Text).map(|a| (a, dims)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub label: Label,
}

/// Row-major `N × width` matrix with labels and the spec that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedDataset {
    pub matrix: Vec<f64>,
    pub labels: Vec<Label>,
    pub width: usize,
    pub spec: FeatureSpec,
}

impl EncodedDataset {
    /// Wraps a raw feature matrix. The attached spec lists no attributes, so
    /// records cannot be encoded against it.
    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<Label>) -> Result<EncodedDataset> {
        let width = rows.first().map_or(0, Vec::len);
        if rows.len() != labels.len() {
            return Err(Error::LengthMismatch(rows.len(), labels.len()));
        }
        if let Some(r) = rows.iter().find(|r| r.len() != width) {
            return Err(Error::DimensionMismatch { expected: width, got: r.len() });
        }
        Ok(EncodedDataset {
            matrix: rows.concat(),
            labels,
            width,
            spec: FeatureSpec {
                version: FEATURE_SPEC_VERSION,
                active_attributes: AttributeSet::empty(),
                hash_dims: BTreeMap::new(),
                numeric_stats: BTreeMap::new(),
                category_vocab: BTreeMap::new(),
            },
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.matrix[i * self.width..(i + 1) * self.width]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.matrix.chunks_exact(self.width.max(1)).take(self.labels.len())
    }

    /// `(fake, real)` counts.
    pub fn label_counts(&self) -> (usize, usize) {
        let fake = self.labels.iter().filter(|l| **l == Label::Fake).count();
        (fake, self.labels.len() - fake)
    }

    pub fn subset(&self, indices: &[usize]) -> EncodedDataset {
        let mut matrix = Vec::with_capacity(indices.len() * self.width);
        for &i in indices {
            matrix.extend_from_slice(self.row(i));
        }
        EncodedDataset {
            matrix,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            width: self.width,
            spec: self.spec.clone(),
        }
    }
}

/// Fits numeric statistics and category vocabularies on `train` for the
/// attributes in `active`. Standard deviations are population values.
pub fn fit_encoder(train: &Dataset, active: AttributeSet, hash_dims: &BTreeMap<Attribute, usize>) -> Result<FeatureSpec> {
    if active.is_empty() {
        return Err(Error::EmptyFeatureSet);
    }
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut spec = FeatureSpec {
        version: FEATURE_SPEC_VERSION,
        active_attributes: active,
        hash_dims: BTreeMap::new(),
        numeric_stats: BTreeMap::new(),
        category_vocab: BTreeMap::new(),
    };
    for a in active.iter() {
        match a.kind() {
            AttributeKind::Numeric => {
                let values: Vec<f64> =
                    train.records.iter().filter(|r| r.is_present(a)).filter_map(|r| r.coord(a)).collect();
                spec.numeric_stats.insert(a, numeric_stats(&values));
            }
            AttributeKind::Categorical => {
                let vocab: BTreeSet<&str> =
                    train.records.iter().filter(|r| r.is_present(a)).filter_map(|r| r.text(a)).map(str::trim).collect();
                spec.category_vocab.insert(a, vocab.into_iter().map(String::from).collect());
            }
            AttributeKind::Text => {
                let dims = hash_dims.get(&a).copied().unwrap_or(DEFAULT_HASH_DIMS).max(1);
                spec.hash_dims.insert(a, dims);
            }
        }
    }
    Ok(spec)
}

fn numeric_stats(values: &[f64]) -> NumericStats {
    if values.is_empty() {
        return NumericStats { mean: 0.0, stddev: 1.0 };
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    // constant columns would otherwise divide by zero
    let stddev = if sd > 1e-12 && sd.is_finite() { sd } else { 1.0 };
    NumericStats { mean, stddev }
}

impl FeatureSpec {
    /// Encoded width of one attribute's block (zero when inactive).
    pub fn block_width(&self, a: Attribute) -> usize {
        if !self.active_attributes.contains(a) {
            return 0;
        }
        match a.kind() {
            // value + missing indicator
            AttributeKind::Numeric => 2,
            // one-hot incl. <UNK> + missing indicator
            AttributeKind::Categorical => self.category_vocab.get(&a).map_or(0, Vec::len) + 2,
            // hash buckets + validity flag + missing indicator
            AttributeKind::Text => self.hash_dims.get(&a).copied().unwrap_or(DEFAULT_HASH_DIMS) + 2,
        }
    }

    pub fn width(&self) -> usize {
        self.active_attributes.iter().map(|a| self.block_width(a)).sum()
    }

    /// Start offset of each active attribute's block.
    pub fn layout(&self) -> Vec<(Attribute, usize, usize)> {
        let mut offset = 0;
        self.active_attributes
            .iter()
            .map(|a| {
                let w = self.block_width(a);
                let entry = (a, offset, w);
                offset += w;
                entry
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: FeatureSpec = serde_json::from_str(text)?;
        if spec.version != FEATURE_SPEC_VERSION {
            return Err(Error::VersionMismatch { found: spec.version, expected: FEATURE_SPEC_VERSION });
        }
        Ok(spec)
    }
}

/// Encodes one record. Numeric values are z-scored, categorical values one-hot
/// encoded (unknown values hit the `<UNK>` slot) and text values hashed as
/// character-trigram frequencies followed by a format-validity flag. Each
/// block ends with a missing indicator; a missing value leaves the rest of its
/// block zero.
pub fn encode(rec: &PoiRecord, spec: &FeatureSpec) -> FeatureVector {
    let mut values = vec![0.0; spec.width()];
    for (a, offset, width) in spec.layout() {
        let block = &mut values[offset..offset + width];
        if !rec.is_present(a) {
            block[width - 1] = 1.0;
            continue;
        }
        match a.kind() {
            AttributeKind::Numeric => {
                let s = spec.numeric_stats[&a];
                let v = rec.coord(a).expect("present coordinate");
                block[0] = (v - s.mean) / s.stddev;
            }
            AttributeKind::Categorical => {
                let vocab = &spec.category_vocab[&a];
                let v = rec.text(a).unwrap_or_default().trim();
                let slot = vocab.binary_search_by(|probe| probe.as_str().cmp(v)).unwrap_or(vocab.len());
                block[slot] = 1.0;
            }
            AttributeKind::Text => {
                let dims = width - 2;
                let v = rec.text(a).unwrap_or_default().trim();
                hash_trigrams(v, &mut block[..dims]);
                block[dims] = if is_valid(a, v) { 1.0 } else { 0.0 };
            }
        }
    }
    FeatureVector { values, label: rec.label }
}

pub fn encode_dataset(ds: &Dataset, spec: &FeatureSpec) -> EncodedDataset {
    let width = spec.width();
    let mut matrix = Vec::with_capacity(ds.len() * width);
    for r in &ds.records {
        matrix.extend(encode(r, spec).values);
    }
    EncodedDataset { matrix, labels: ds.labels(), width, spec: spec.clone() }
}

fn is_valid(a: Attribute, v: &str) -> bool {
    match a {
        Attribute::Pc => patterns::is_valid_postal(v),
        Attribute::Phone => patterns::is_valid_phone(v),
        Attribute::Website => patterns::is_valid_website(v),
        _ => !v.is_empty(),
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Lower-cased character trigrams of `^value$`, counted into `buckets` and
/// divided by the trigram count.
pub fn hash_trigrams(value: &str, buckets: &mut [f64]) {
    let padded: Vec<char> = std::iter::once('^').chain(value.chars().flat_map(char::to_lowercase)).chain(std::iter::once('$')).collect();
    let count = padded.len().saturating_sub(2);
    let mut buf = [0u8; 12];
    for w in padded.windows(3) {
        let mut len = 0;
        for c in w {
            len += c.encode_utf8(&mut buf[len..]).len();
        }
        let bucket = (fnv1a(&buf[..len]) % buckets.len() as u64) as usize;
        buckets[bucket] += 1.0;
    }
    let scale = 1.0 / (count.max(1) as f64);
    for b in buckets.iter_mut() {
        *b *= scale;
    }
}

/// Removes attributes from an encoder's active set, dropping their fitted
/// statistics.
pub fn ablate(spec: &FeatureSpec, removed: AttributeSet) -> Result<FeatureSpec> {
    if let Some(a) = removed.iter().find(|a| !spec.active_attributes.contains(*a)) {
        return Err(Error::AttributeNotActive(a.column().to_string()));
    }
    let active = spec.active_attributes.difference(removed);
    if active.is_empty() {
        return Err(Error::EmptyFeatureSet);
    }
    let mut out = spec.clone();
    out.active_attributes = active;
    for a in removed.iter() {
        out.hash_dims.remove(&a);
        out.numeric_stats.remove(&a);
        out.category_vocab.remove(&a);
    }
    Ok(out)
}
