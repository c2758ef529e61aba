//! Constraint times and the snapshots observed at them.
//!
//! Forward quantities use half-open intervals `[t_{i-1}, t_i)` and backward
//! quantities use `(t_{i-1}, t_i]`, so a grid point belongs to the interval on
//! its right going forward and to the interval on its left going backward.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which way along the clock a control, coupling refresh or rollout runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
        }
    }
}

/// Strictly increasing constraint times `t_0 < t_1 < ... < t_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TryFrom<Vec<f64>> for TimeGrid {
    type Error = Error;

    fn try_from(times: Vec<f64>) -> Result<Self> {
        TimeGrid::new(times)
    }
}

impl From<TimeGrid> for Vec<f64> {
    fn from(g: TimeGrid) -> Self {
        g.times
    }
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::Config(format!(
                "time grid needs at least 2 times, got {}",
                times.len()
            )));
        }
        if let Some(t) = times.iter().find(|t| !t.is_finite()) {
            return Err(Error::NonFinite(format!("grid time {t}")));
        }
        for (i, w) in times.windows(2).enumerate() {
            if w[0] >= w[1] {
                return Err(Error::Config(format!(
                    "grid times must be strictly increasing: times[{i}]={} >= times[{}]={}",
                    w[0],
                    i + 1,
                    w[1]
                )));
            }
        }
        Ok(Self { times })
    }

    /// `n + 1` equally spaced times over `[0, horizon]`.
    pub fn uniform(horizon: f64, n_intervals: usize) -> Result<Self> {
        if n_intervals == 0 || !(horizon > 0.0) {
            return Err(Error::Config("uniform grid needs horizon > 0 and >= 1 interval".into()));
        }
        Self::new(
            (0..=n_intervals)
                .map(|i| horizon * i as f64 / n_intervals as f64)
                .collect(),
        )
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of sub-intervals `k`.
    pub fn n_intervals(&self) -> usize {
        self.times.len() - 1
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn time(&self, i: usize) -> f64 {
        self.times[i]
    }

    /// Endpoints `(t_{i-1}, t_i)` of interval `i` (1-based).
    pub fn interval(&self, i: usize) -> (f64, f64) {
        assert!(i >= 1 && i <= self.n_intervals(), "interval {i} out of range");
        (self.times[i - 1], self.times[i])
    }

    /// Smallest grid time strictly greater than `t`.
    pub fn next_time(&self, t: f64) -> Result<f64> {
        if !(t >= self.start() && t < self.end()) {
            return Err(Error::Domain(format!(
                "next_time needs t in [{}, {}), got {t}",
                self.start(),
                self.end()
            )));
        }
        let i = self.times.partition_point(|&u| u <= t);
        Ok(self.times[i])
    }

    /// Largest grid time strictly smaller than `t`.
    pub fn prev_time(&self, t: f64) -> Result<f64> {
        if !(t > self.start() && t <= self.end()) {
            return Err(Error::Domain(format!(
                "prev_time needs t in ({}, {}], got {t}",
                self.start(),
                self.end()
            )));
        }
        let i = self.times.partition_point(|&u| u < t);
        Ok(self.times[i - 1])
    }

    /// 1-based index of the interval containing `t` under the direction's
    /// half-open convention.
    pub fn interval_index(&self, t: f64, direction: Direction) -> Result<usize> {
        match direction {
            Direction::Forward => {
                if !(t >= self.start() && t < self.end()) {
                    return Err(Error::Domain(format!(
                        "forward interval lookup needs t in [{}, {}), got {t}",
                        self.start(),
                        self.end()
                    )));
                }
                Ok(self.times.partition_point(|&u| u <= t))
            }
            Direction::Backward => {
                if !(t > self.start() && t <= self.end()) {
                    return Err(Error::Domain(format!(
                        "backward interval lookup needs t in ({}, {}], got {t}",
                        self.start(),
                        self.end()
                    )));
                }
                Ok(self.times.partition_point(|&u| u < t))
            }
        }
    }
}

/// Samples observed at one grid time.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time_index: usize,
    pub samples: Array2<f64>,
}

impl Snapshot {
    pub fn new(time_index: usize, samples: Array2<f64>) -> Result<Self> {
        if samples.nrows() == 0 {
            return Err(Error::Config(format!("snapshot {time_index} is empty")));
        }
        if samples.ncols() == 0 {
            return Err(Error::Shape(format!("snapshot {time_index} has dimension 0")));
        }
        if let Some((row, _)) = samples
            .rows()
            .into_iter()
            .enumerate()
            .find(|(_, r)| r.iter().any(|v| !v.is_finite()))
        {
            return Err(Error::NonFinite(format!(
                "snapshot {time_index} row {row} has a non-finite entry"
            )));
        }
        Ok(Self {
            time_index,
            samples,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.samples.ncols()
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.samples.view()
    }
}

/// One snapshot per grid time, optionally with some times held out of training.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalDataset {
    grid: TimeGrid,
    snapshots: Vec<Snapshot>,
    holdout: Vec<bool>,
}

impl MarginalDataset {
    pub fn new(grid: TimeGrid, snapshots: Vec<Array2<f64>>) -> Result<Self> {
        if snapshots.len() != grid.len() {
            return Err(Error::Shape(format!(
                "{} snapshots for {} grid times",
                snapshots.len(),
                grid.len()
            )));
        }
        let snapshots = snapshots
            .into_iter()
            .enumerate()
            .map(|(i, s)| Snapshot::new(i, s))
            .collect::<Result<Vec<_>>>()?;
        let d = snapshots[0].dim();
        if let Some(s) = snapshots.iter().find(|s| s.dim() != d) {
            return Err(Error::Shape(format!(
                "snapshot {} has dimension {}, expected {d}",
                s.time_index,
                s.dim()
            )));
        }
        let holdout = vec![false; grid.len()];
        Ok(Self {
            grid,
            snapshots,
            holdout,
        })
    }

    /// Marks times as held out. Held-out times are excluded from
    /// [`training_view`](Self::training_view) but kept for evaluation. The first
    /// and last times cannot be held out.
    pub fn with_holdout(mut self, held_out: &[usize]) -> Result<Self> {
        let mut mask = vec![false; self.grid.len()];
        for &i in held_out {
            if i == 0 || i + 1 >= self.grid.len() {
                return Err(Error::Config(format!(
                    "only interior times can be held out, got index {i}"
                )));
            }
            mask[i] = true;
        }
        self.holdout = mask;
        Ok(self)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    pub fn snapshot(&self, i: usize) -> &Snapshot {
        &self.snapshots[i]
    }

    pub fn holdout(&self) -> &[bool] {
        &self.holdout
    }

    pub fn held_out_indices(&self) -> Vec<usize> {
        (0..self.grid.len()).filter(|&i| self.holdout[i]).collect()
    }

    pub fn dim(&self) -> usize {
        self.snapshots[0].dim()
    }

    /// The dataset restricted to non-held-out times.
    pub fn training_view(&self) -> MarginalDataset {
        if !self.holdout.iter().any(|&h| h) {
            return self.clone();
        }
        let keep: Vec<usize> = (0..self.grid.len()).filter(|&i| !self.holdout[i]).collect();
        let grid = TimeGrid::new(keep.iter().map(|&i| self.grid.time(i)).collect())
            .expect("subset of a valid grid is valid");
        let snapshots = keep
            .iter()
            .enumerate()
            .map(|(j, &i)| Snapshot {
                time_index: j,
                samples: self.snapshots[i].samples.clone(),
            })
            .collect();
        MarginalDataset {
            holdout: vec![false; grid.len()],
            grid,
            snapshots,
        }
    }
}
