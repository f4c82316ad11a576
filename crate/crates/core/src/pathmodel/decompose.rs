use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::FittedPathModel;
use crate::error::{Error, Result};

/// Per-period split of a path-model forecast into the intercept and one
/// `psi_i * z_i` series per construct.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub constructs: Vec<String>,
    pub intercept: f64,
    /// Rows are periods, columns follow `constructs`.
    pub contributions: DMatrix<f64>,
    pub prediction: DVector<f64>,
}

pub fn decompose(model: &FittedPathModel, x: &DMatrix<f64>) -> Result<Decomposition> {
    let z = model.projection.scores(x)?;
    let mut contributions = z;
    for (i, mut col) in contributions.column_iter_mut().enumerate() {
        col *= model.path_coefficients[i];
    }
    let prediction = DVector::from_iterator(
        contributions.nrows(),
        contributions
            .row_iter()
            .map(|row| row.iter().fold(model.intercept, |acc, c| acc + c)),
    );
    Ok(Decomposition {
        constructs: model.names().into_iter().map(String::from).collect(),
        intercept: model.intercept,
        contributions,
        prediction,
    })
}

impl Decomposition {
    pub fn len(&self) -> usize {
        self.prediction.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prediction.is_empty()
    }

    /// Largest `|intercept + sum contributions - prediction| / max(1, |prediction|)`.
    pub fn max_identity_error(&self) -> f64 {
        self.contributions
            .row_iter()
            .zip(self.prediction.iter())
            .map(|(row, p)| (self.intercept + row.sum() - p).abs() / p.abs().max(1.0))
            .fold(0.0, f64::max)
    }

    /// CSV `period,intercept,<constructs...>,prediction`.
    pub fn write_csv<W: Write>(&self, out: W, periods: &[String]) -> Result<()> {
        if periods.len() != self.len() {
            return Err(Error::Dimension(format!(
                "{} period labels for {} rows",
                periods.len(),
                self.len()
            )));
        }
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["period".to_string(), "intercept".to_string()];
        header.extend(self.constructs.iter().cloned());
        header.push("prediction".into());
        w.write_record(&header)?;
        for (r, label) in periods.iter().enumerate() {
            let mut rec = vec![label.clone(), self.intercept.to_string()];
            rec.extend(self.contributions.row(r).iter().map(|v| v.to_string()));
            rec.push(self.prediction[r].to_string());
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<decomposition csv>", e))?;
        Ok(())
    }
}
