use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::encoder::EncodedDataset;
use crate::data::Label;
use crate::error::{Error, Result};

pub const DEFAULT_SMOTE_K: usize = 5;

/// Parents of one synthetic row, as row indices into the input dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticOrigin {
    pub base: usize,
    pub neighbor: usize,
    pub lambda: f64,
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// The `k` nearest other points of every point under Euclidean distance.
/// Ties go to the lower index.
pub fn nearest_neighbors(points: &[&[f64]], k: usize) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = squared_distance(points[i], points[j]);
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    (0..n)
        .map(|i| {
            let row = &dist[i * n..(i + 1) * n];
            let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            others.sort_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b)));
            others.truncate(k);
            others
        })
        .collect()
}

/// Oversamples the minority class until minority/majority reaches
/// `target_ratio` (to the nearest row).
pub fn smote(data: &EncodedDataset, k: usize, target_ratio: f64, seed: u64) -> Result<EncodedDataset> {
    smote_with_origins(data, k, target_ratio, seed).map(|(d, _)| d)
}

/// [`smote`], also returning the parents of each appended row.
///
/// Base points are visited round-robin in a seeded random order; each
/// synthetic row is `p + λ(q − p)` with `q` one of `p`'s `k` nearest minority
/// neighbours and `λ` uniform in `[0, 1)`.
pub fn smote_with_origins(
    data: &EncodedDataset,
    k: usize,
    target_ratio: f64,
    seed: u64,
) -> Result<(EncodedDataset, Vec<SyntheticOrigin>)> {
    if k == 0 {
        return Err(Error::Smote("k must be at least 1".into()));
    }
    let (fake, real) = data.label_counts();
    let (minority_label, minority, majority) =
        if fake <= real { (Label::Fake, fake, real) } else { (Label::Real, real, fake) };
    if minority < k + 1 {
        return Err(Error::Smote(format!("minority class has {minority} rows, need at least k + 1 = {}", k + 1)));
    }
    let current = minority as f64 / majority as f64;
    if !(target_ratio > current && target_ratio <= 1.0) {
        return Err(Error::Smote(format!("target_ratio must be in ({current:.4}, 1], got {target_ratio}")));
    }
    let wanted = (target_ratio * majority as f64).round() as usize;
    let n_synth = wanted.saturating_sub(minority);

    let members: Vec<usize> = (0..data.len()).filter(|&i| data.labels[i] == minority_label).collect();
    let points: Vec<&[f64]> = members.iter().map(|&i| data.row(i)).collect();
    let neighbors = nearest_neighbors(&points, k);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..members.len()).collect();
    order.shuffle(&mut rng);

    let mut out = data.clone();
    out.matrix.reserve(n_synth * data.width);
    let mut origins = Vec::with_capacity(n_synth);
    for s in 0..n_synth {
        let p = order[s % order.len()];
        let q = neighbors[p][rng.random_range(0..k)];
        let lambda: f64 = rng.random();
        let (pr, qr) = (points[p], points[q]);
        out.matrix.extend(pr.iter().zip(qr).map(|(a, b)| a + lambda * (b - a)));
        out.labels.push(minority_label);
        origins.push(SyntheticOrigin { base: members[p], neighbor: members[q], lambda });
    }
    Ok((out, origins))
}
