//! Paired endpoint samples for one sub-interval.

use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-aligned endpoint pairs `(left[r], right[r])` for interval `interval`
/// (1-based), i.e. samples at `t_{i-1}` and `t_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalCoupling {
    pub interval: usize,
    pub left: Array2<f64>,
    pub right: Array2<f64>,
}

impl IntervalCoupling {
    pub fn new(interval: usize, left: Array2<f64>, right: Array2<f64>) -> Result<Self> {
        if left.nrows() == 0 || left.nrows() != right.nrows() {
            return Err(Error::Shape(format!(
                "coupling {interval}: left has {} rows, right has {}",
                left.nrows(),
                right.nrows()
            )));
        }
        if left.ncols() != right.ncols() {
            return Err(Error::Shape(format!("coupling {interval}: endpoint dimensions differ")));
        }
        Ok(Self {
            interval,
            left,
            right,
        })
    }

    pub fn len(&self) -> usize {
        self.left.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.left.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.left.ncols()
    }
}

/// `m` distinct rows of `samples`, in random order.
pub(crate) fn subsample_rows<R: Rng + ?Sized>(
    samples: ArrayView2<'_, f64>,
    m: usize,
    rng: &mut R,
) -> Array2<f64> {
    let idx = index::sample(rng, samples.nrows(), m).into_vec();
    samples.select(Axis(0), &idx)
}
