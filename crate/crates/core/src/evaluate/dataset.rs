use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// What a supervised row predicts from period `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode", content = "horizon")]
pub enum Target {
    /// `Y[i+h]` with `h >= 1`.
    Level(usize),
    /// `Y[i+1] - Y[i]`.
    Delta,
}

impl Target {
    /// Periods after the anchor that the target needs.
    pub fn offset(&self) -> usize {
        match self {
            Target::Level(h) => *h,
            Target::Delta => 1,
        }
    }

    /// Horizon used for the forecast-comparison variance truncation.
    pub fn horizon(&self) -> usize {
        self.offset()
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Level(h) => write!(f, "h{h}"),
            Target::Delta => write!(f, "delta"),
        }
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("delta") {
            return Ok(Target::Delta);
        }
        s.strip_prefix('h')
            .and_then(|h| h.parse().ok())
            .filter(|&h| h >= 1)
            .map(Target::Level)
            .ok_or_else(|| Error::InvalidModel(format!("unknown target `{s}`")))
    }
}

/// Design rows aligned to anchor periods: text feature columns first, then
/// `Y[i-1], ..., Y[i-l]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SupervisedDataset {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    /// Period index of each row.
    pub anchors: Vec<usize>,
    pub text_columns: usize,
    pub lag_columns: usize,
}

pub fn make_supervised_dataset(
    features: &DMatrix<f64>,
    y: &[f64],
    target: Target,
    lags: usize,
) -> Result<SupervisedDataset> {
    let n = y.len();
    if features.nrows() != n {
        return Err(Error::Dimension(format!(
            "{} feature rows for {} indicator periods",
            features.nrows(),
            n
        )));
    }
    if let Target::Level(0) = target {
        return Err(Error::InvalidModel("horizon must be at least 1".into()));
    }
    let offset = target.offset();
    let end = n.saturating_sub(offset);
    if lags >= end {
        return Err(Error::EmptyDataset {
            periods: n,
            max_lag: lags,
            horizon: offset,
        });
    }
    let anchors: Vec<usize> = (lags..end).collect();
    let p = features.ncols();
    let x = DMatrix::from_fn(anchors.len(), p + lags, |r, c| {
        let i = anchors[r];
        if c < p {
            features[(i, c)]
        } else {
            y[i - 1 - (c - p)]
        }
    });
    let target_values = DVector::from_iterator(
        anchors.len(),
        anchors.iter().map(|&i| match target {
            Target::Level(h) => y[i + h],
            Target::Delta => y[i + 1] - y[i],
        }),
    );
    Ok(SupervisedDataset {
        x,
        y: target_values,
        anchors,
        text_columns: p,
        lag_columns: lags,
    })
}

impl SupervisedDataset {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Drops rows whose anchor precedes `first_anchor`.
    pub fn starting_at(&self, first_anchor: usize) -> Result<SupervisedDataset> {
        let keep: Vec<usize> = (0..self.len()).filter(|&r| self.anchors[r] >= first_anchor).collect();
        if keep.is_empty() {
            return Err(Error::EmptyDataset {
                periods: self.anchors.last().map_or(0, |a| a + 1),
                max_lag: first_anchor,
                horizon: 0,
            });
        }
        Ok(SupervisedDataset {
            x: crate::linalg::select_rows(&self.x, &keep),
            y: crate::linalg::select_entries(&self.y, &keep),
            anchors: keep.iter().map(|&r| self.anchors[r]).collect(),
            text_columns: self.text_columns,
            lag_columns: self.lag_columns,
        })
    }

    pub fn text_part(&self) -> DMatrix<f64> {
        self.x.columns(0, self.text_columns).into_owned()
    }

    pub fn lag_part(&self) -> DMatrix<f64> {
        self.x.columns(self.text_columns, self.lag_columns).into_owned()
    }
}
