//! Confusion matrix, classification metrics and report rendering. The fake
//! class is the positive class throughout.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::data::Label;
use crate::error::{Error, Result};
use crate::features::EncodedDataset;
use crate::mlp::{predict, Network};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    /// Fake predicted fake.
    pub tp: u64,
    /// Real predicted fake.
    pub fp: u64,
    /// Fake predicted real.
    #[serde(rename = "fn")]
    pub fn_: u64,
    /// Real predicted real.
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// Swaps the roles of the two classes.
    pub fn swapped(&self) -> ConfusionMatrix {
        ConfusionMatrix { tp: self.tn, fp: self.fn_, fn_: self.fp, tn: self.tp }
    }
}

/// Metrics whose denominator was zero; each such metric is reported as 0.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegenerateFlags {
    pub precision: bool,
    pub recall: bool,
    pub f1: bool,
}

impl DegenerateFlags {
    pub fn any(&self) -> bool {
        self.precision || self.recall || self.f1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsReport {
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Root mean squared error of `prob_fake` against the fake indicator;
    /// absent when no probabilities were supplied.
    pub rmse: Option<f64>,
    pub degenerate: DegenerateFlags,
}

pub fn confusion(predictions: &[Label], labels: &[Label]) -> Result<ConfusionMatrix> {
    if predictions.len() != labels.len() {
        return Err(Error::LengthMismatch(predictions.len(), labels.len()));
    }
    if labels.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut cm = ConfusionMatrix::default();
    for (p, l) in predictions.iter().zip(labels) {
        match (p, l) {
            (Label::Fake, Label::Fake) => cm.tp += 1,
            (Label::Fake, Label::Real) => cm.fp += 1,
            (Label::Real, Label::Fake) => cm.fn_ += 1,
            (Label::Real, Label::Real) => cm.tn += 1,
        }
    }
    Ok(cm)
}

fn ratio(num: u64, den: u64) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

/// `sqrt(mean((p − [label = fake])²))`.
pub fn rmse(prob_fake: &[f64], labels: &[Label]) -> Result<f64> {
    if prob_fake.len() != labels.len() {
        return Err(Error::LengthMismatch(prob_fake.len(), labels.len()));
    }
    if labels.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let sse: f64 = prob_fake
        .iter()
        .zip(labels)
        .map(|(p, l)| {
            let target = if *l == Label::Fake { 1.0 } else { 0.0 };
            (p - target).powi(2)
        })
        .sum();
    Ok((sse / labels.len() as f64).sqrt())
}

/// Accuracy, precision, recall and F1 from `cm`, plus RMSE when `probs`
/// (probability of the fake class per example) are given.
pub fn metrics(cm: &ConfusionMatrix, probs: Option<&[f64]>, labels: &[Label]) -> Result<MetricsReport> {
    if cm.total() == 0 {
        return Err(Error::EmptyDataset);
    }
    let (accuracy, _) = ratio(cm.tp + cm.tn, cm.total());
    let (precision, dp) = ratio(cm.tp, cm.tp + cm.fp);
    let (recall, dr) = ratio(cm.tp, cm.tp + cm.fn_);
    let (f1, df) = ratio(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn_);
    let rmse = probs.map(|p| rmse(p, labels)).transpose()?;
    Ok(MetricsReport {
        confusion: *cm,
        accuracy,
        precision,
        recall,
        f1,
        rmse,
        degenerate: DegenerateFlags { precision: dp, recall: dr, f1: df },
    })
}

/// Class predictions and fake probabilities for every row, without dropout.
pub fn predict_all(net: &Network, data: &EncodedDataset) -> Result<(Vec<Label>, Vec<f64>)> {
    if data.width != net.input_width() {
        return Err(Error::DimensionMismatch { expected: net.input_width(), got: data.width });
    }
    let mut preds = Vec::with_capacity(data.len());
    let mut probs = Vec::with_capacity(data.len());
    for x in data.rows() {
        let (label, p) = predict(net, x)?;
        preds.push(label);
        probs.push(p);
    }
    Ok((preds, probs))
}

pub fn evaluate(net: &Network, data: &EncodedDataset) -> Result<MetricsReport> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let (preds, probs) = predict_all(net, data)?;
    metrics(&confusion(&preds, &data.labels)?, Some(&probs), &data.labels)
}

impl MetricsReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<MetricsReport> {
        Ok(serde_json::from_str(text)?)
    }

    /// Confusion table followed by a one-row metrics table.
    pub fn render(&self, model_name: &str) -> String {
        let c = &self.confusion;
        let w = [c.tp, c.fp, c.fn_, c.tn].iter().map(|v| v.to_string().len()).max().unwrap_or(1).max(11);
        let mut out = String::new();
        let _ = writeln!(out, "{:<16}{:>w$}  {:>w$}", "", "Actual Fake", "Actual Real");
        let _ = writeln!(out, "{:<16}{:>w$}  {:>w$}", "Predicted Fake", c.tp, c.fp);
        let _ = writeln!(out, "{:<16}{:>w$}  {:>w$}", "Predicted Real", c.fn_, c.tn);
        let _ = writeln!(out);
        let name_w = model_name.len().max(5);
        let _ = writeln!(out, "{:<name_w$}  {:>9}  {:>9}  {:>9}  {:>9}  {:>9}", "Model", "Accuracy", "Precision", "Recall", "F1", "RMSE");
        let rmse = self.rmse.map_or("-".to_string(), |r| format!("{r:.3}"));
        let _ = writeln!(
            out,
            "{:<name_w$}  {:>9.2}  {:>9.2}  {:>9.2}  {:>9.2}  {:>9}",
            model_name, self.accuracy, self.precision, self.recall, self.f1, rmse
        );
        if self.degenerate.any() {
            let _ = writeln!(out, "note: zero denominator in {:?}", self.degenerate);
        }
        out
    }
}
