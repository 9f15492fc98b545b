//! Experiment grid, metrics and results tables.
//!
//! The positive class of every metric is the AI label (1).

mod grid;
mod report;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use grid::{run_grid, FitAudit, GridOutcome, GridSpec, Hyperparameters};
pub use report::{load_report_csv, render_csv, render_markdown, write_report, CellStats, EvalReport, Outcome, ReportRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

pub fn confusion(y_true: &[u8], y_pred: &[u8]) -> Result<Confusion> {
    if y_true.len() != y_pred.len() {
        return Err(Error::InvalidInput(format!(
            "{} true labels but {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    if y_true.is_empty() {
        return Err(Error::InvalidInput("no predictions to score".into()));
    }
    let mut c = Confusion::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        if t > 1 || p > 1 {
            return Err(Error::InvalidInput("labels must be 0 or 1".into()));
        }
        match (t, p) {
            (1, 1) => c.tp += 1,
            (0, 1) => c.fp += 1,
            (1, 0) => c.fn_ += 1,
            _ => c.tn += 1,
        }
    }
    Ok(c)
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.tp + self.tn, self.total())
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

pub fn accuracy(c: &Confusion) -> f64 {
    c.accuracy()
}

pub fn f1(c: &Confusion) -> f64 {
    c.f1()
}

/// Mean and population standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example() {
        let c = confusion(&[1, 0, 1, 0], &[1, 0, 0, 0]).unwrap();
        assert_eq!(c, Confusion { tp: 1, fp: 0, fn_: 1, tn: 2 });
        assert_eq!(c.accuracy(), 0.75);
        assert_eq!(c.precision(), 1.0);
        assert_eq!(c.recall(), 0.5);
        assert!((c.f1() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_cases() {
        let perfect = confusion(&[1, 0], &[1, 0]).unwrap();
        assert_eq!((perfect.fp, perfect.fn_), (0, 0));
        assert_eq!((perfect.accuracy(), perfect.f1()), (1.0, 1.0));
        let wrong = confusion(&[1, 0], &[0, 1]).unwrap();
        assert_eq!((wrong.tp, wrong.tn), (0, 0));
        let silent = confusion(&[0, 0], &[0, 0]).unwrap();
        assert_eq!(silent.f1(), 0.0);
        assert!(confusion(&[1], &[1, 0]).is_err());
        assert!(confusion(&[], &[]).is_err());
    }

    #[test]
    fn population_std() {
        assert_eq!(mean_std(&[1.0, 3.0]), (2.0, 1.0));
        assert_eq!(mean_std(&[0.5]), (0.5, 0.0));
    }
}
