use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rolling-origin cross-validation geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvPlan {
    pub folds: usize,
    pub initial: usize,
    pub validation: usize,
    /// Expanding window when true, fixed-length sliding window otherwise.
    pub expanding: bool,
}

pub const DEFAULT_FOLDS: usize = 10;

impl CvPlan {
    pub fn new(folds: usize, initial: usize, validation: usize) -> Self {
        CvPlan {
            folds,
            initial,
            validation,
            expanding: true,
        }
    }

    /// Half of the rows for the first training window, the rest split into
    /// ten equal validation windows.
    pub fn default_for(rows: usize) -> Result<Self> {
        let initial = rows / 2;
        let validation = (rows - initial) / DEFAULT_FOLDS;
        let plan = CvPlan::new(DEFAULT_FOLDS, initial, validation);
        if validation == 0 || initial < 2 {
            return Err(Error::InfeasiblePlan {
                rows,
                min_rows: 2 * DEFAULT_FOLDS - 1,
            });
        }
        Ok(plan)
    }

    pub fn min_rows(&self) -> usize {
        self.initial + self.folds * self.validation
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Range<usize>,
    pub validation: Range<usize>,
}

pub fn time_slice_folds(n: usize, plan: &CvPlan) -> Result<Vec<Fold>> {
    if plan.folds == 0 || plan.initial == 0 || plan.validation == 0 {
        return Err(Error::InvalidModel(format!(
            "cross-validation plan needs positive folds, initial and validation lengths: {plan:?}"
        )));
    }
    if n < plan.min_rows() {
        return Err(Error::InfeasiblePlan {
            rows: n,
            min_rows: plan.min_rows(),
        });
    }
    Ok((0..plan.folds)
        .map(|k| {
            let end = plan.initial + k * plan.validation;
            let start = if plan.expanding { 0 } else { k * plan.validation };
            Fold {
                train: start..end,
                validation: end..end + plan.validation,
            }
        })
        .collect())
}
