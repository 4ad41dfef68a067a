use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    /// Wall-clock seconds spent in this epoch.
    pub seconds: f64,
    pub param_norm: f64,
}

/// Score taken after one outer parallel iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

/// Learning curve of one training run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub seed: u64,
    pub epochs: Vec<EpochRecord>,
    pub iterations: Vec<IterationRecord>,
}

impl RunLog {
    pub fn final_epoch(&self) -> Option<&EpochRecord> {
        self.epochs.last()
    }

    /// `epoch,train_loss,val_loss,seconds`, one row per epoch.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["epoch", "train_loss", "val_loss", "seconds"])?;
        for e in &self.epochs {
            out.write_record([e.epoch.to_string(), e.train_loss.to_string(), e.val_loss.to_string(), format!("{:.6}", e.seconds)])?;
        }
        out.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let log = RunLog {
            seed: 1,
            epochs: vec![EpochRecord { epoch: 1, train_loss: 0.5, val_loss: 0.625, seconds: 0.25, param_norm: 3.0 }],
            iterations: vec![],
        };
        let mut buf = Vec::new();
        log.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "epoch,train_loss,val_loss,seconds\n1,0.5,0.625,0.250000\n");
    }
}
