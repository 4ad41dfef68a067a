use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::data::record::{Attribute, AttributeKind, Dataset, MISSING};
use crate::error::{Error, Result};

/// Replacement values for missing coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoordinateMedians {
    pub x: f64,
    pub y: f64,
}

impl CoordinateMedians {
    fn get(&self, a: Attribute) -> f64 {
        if a == Attribute::X {
            self.x
        } else {
            self.y
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Imputation {
    /// Medians of the dataset being cleaned.
    #[default]
    DatasetMedian,
    /// Medians supplied by the caller, usually fitted on a training split.
    Fixed(CoordinateMedians),
    /// Leave missing coordinates as `None` for a later [`impute_coordinates`].
    Defer,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CleaningPolicy {
    pub imputation: Imputation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CleaningActionKind {
    DuplicateRemoved,
    IdConflict,
    MissingIdDropped,
    MissingFilled,
    CoordinateImputed,
}

/// One line of the cleaning log. `row` is the index in the input dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleaningAction {
    pub action: CleaningActionKind,
    pub row: usize,
    pub attribute: Option<String>,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CleaningLog {
    pub actions: Vec<CleaningAction>,
}

impl CleaningLog {
    pub fn count(&self, kind: CleaningActionKind) -> usize {
        self.actions.iter().filter(|a| a.action == kind).count()
    }

    /// One JSON object per line.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for a in &self.actions {
            serde_json::to_writer(&mut w, a)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    fn push(&mut self, action: CleaningActionKind, row: usize, attribute: Option<Attribute>, detail: String) {
        self.actions.push(CleaningAction {
            action,
            row,
            attribute: attribute.map(|a| a.column().to_string()),
            detail,
        });
    }
}

/// Median of the finite values, `None` when there are none.
pub fn median(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let mut v: Vec<f64> = values.into_iter().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[mid] } else { (v[mid - 1] + v[mid]) / 2.0 })
}

/// Coordinate medians over the records at `indices` (all records if `None`).
/// An axis with no observed values falls back to 0.
pub fn coordinate_medians(ds: &Dataset, indices: Option<&[usize]>) -> CoordinateMedians {
    let pick = |a: Attribute| -> f64 {
        let values: Vec<f64> = match indices {
            Some(idx) => idx.iter().filter_map(|&i| ds.records[i].coord(a)).collect(),
            None => ds.records.iter().filter_map(|r| r.coord(a)).collect(),
        };
        median(values).unwrap_or(0.0)
    };
    CoordinateMedians { x: pick(Attribute::X), y: pick(Attribute::Y) }
}

/// Removes duplicate ids, fills missing text with [`MISSING`] and imputes
/// missing coordinates according to `policy`.
pub fn clean(ds: &Dataset, policy: &CleaningPolicy) -> Result<(Dataset, CleaningLog)> {
    let mut log = CleaningLog::default();
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut kept = Vec::with_capacity(ds.len());
    let mut origin = Vec::with_capacity(ds.len());

    for (row, rec) in ds.records.iter().enumerate() {
        let id = rec.lm_id.trim();
        if id.is_empty() || id == MISSING {
            log.push(CleaningActionKind::MissingIdDropped, row, Some(Attribute::LmId), "record without id".into());
            continue;
        }
        if let Some(&first) = seen.get(id) {
            let prev: &crate::data::PoiRecord = &ds.records[first];
            if prev.x != rec.x || prev.y != rec.y {
                log.push(
                    CleaningActionKind::IdConflict,
                    row,
                    Some(Attribute::LmId),
                    format!("id {id:?} reused with different coordinates; keeping row {first}"),
                );
            }
            log.push(
                CleaningActionKind::DuplicateRemoved,
                row,
                Some(Attribute::LmId),
                format!("duplicate of row {first}"),
            );
            continue;
        }
        seen.insert(id.to_string(), row);
        kept.push(rec.clone());
        origin.push(row);
    }
    if kept.is_empty() {
        return Err(Error::EmptyDataset);
    }

    for (rec, &row) in kept.iter_mut().zip(&origin) {
        for a in Attribute::ALL {
            if a.kind() == AttributeKind::Numeric {
                continue;
            }
            let value = rec.text_mut(a).expect("text attribute");
            let trimmed = value.trim();
            if trimmed.is_empty() {
                *value = MISSING.to_string();
                rec.missing.insert(a);
                log.push(CleaningActionKind::MissingFilled, row, Some(a), MISSING.into());
            } else if trimmed == MISSING {
                rec.missing.insert(a);
            }
        }
    }

    let mut out = Dataset::new(kept, ds.provenance);
    let medians = match policy.imputation {
        Imputation::DatasetMedian => Some(coordinate_medians(&out, None)),
        Imputation::Fixed(m) => Some(m),
        Imputation::Defer => None,
    };
    if let Some(m) = medians {
        impute_with_origin(&mut out, m, &origin, &mut log);
    }
    Ok((out, log))
}

/// Fills any remaining missing coordinates with `medians`, logging against
/// row indices of `ds`.
pub fn impute_coordinates(ds: &mut Dataset, medians: CoordinateMedians, log: &mut CleaningLog) {
    let origin: Vec<usize> = (0..ds.len()).collect();
    impute_with_origin(ds, medians, &origin, log);
}

fn impute_with_origin(ds: &mut Dataset, medians: CoordinateMedians, origin: &[usize], log: &mut CleaningLog) {
    for (rec, &row) in ds.records.iter_mut().zip(origin) {
        for a in [Attribute::X, Attribute::Y] {
            let slot = rec.coord_mut(a).expect("coordinate");
            if slot.is_some_and(f64::is_finite) {
                continue;
            }
            let v = medians.get(a);
            *slot = Some(v);
            rec.missing.insert(a);
            log.push(CleaningActionKind::CoordinateImputed, row, Some(a), format!("median {v}"));
        }
    }
}
