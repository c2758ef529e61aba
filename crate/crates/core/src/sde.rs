//! Euler–Maruyama simulation of the controlled forward and backward SDEs.
//!
//! Forward:  `x <- x + (f(x) + sigma v(t, x)) dt + sigma sqrt(dt) z`, clock up.
//! Backward: `x <- x + (sigma u(t, x) - f(x)) dt + sigma sqrt(dt) z`, clock down.
//!
//! The backward control lives on the original clock: `u(t, .)` is evaluated at
//! the current original time while stepping from `t` to `t - dt`.
//!
//! Rows are integrated in fixed-size chunks, each with its own keyed random
//! stream, so trajectories are identical for any thread count.

use std::path::Path;

use ndarray::{s, Array2, Array3, ArrayView2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::control::ControlFunction;
use crate::error::{Error, Result};
use crate::reference::ReferenceProcess;
use crate::rng;
use crate::time_grid::{Direction, MarginalDataset};

const SIM_CHUNK: usize = 256;

/// Anything that can act as a drift control `v(t, x)`.
pub trait Control: Sync {
    fn dim(&self) -> usize;

    /// `v(t, x_r)` for every row of `x`.
    fn eval_rows(&self, t: f64, x: ArrayView2<'_, f64>) -> Array2<f64>;
}

impl Control for ControlFunction {
    fn dim(&self) -> usize {
        ControlFunction::dim(self)
    }

    fn eval_rows(&self, t: f64, x: ArrayView2<'_, f64>) -> Array2<f64> {
        self.eval_at(t, x)
    }
}

/// The identically-zero control.
#[derive(Debug, Clone, Copy)]
pub struct ZeroControl(pub usize);

impl Control for ZeroControl {
    fn dim(&self) -> usize {
        self.0
    }

    fn eval_rows(&self, _t: f64, x: ArrayView2<'_, f64>) -> Array2<f64> {
        Array2::zeros(x.raw_dim())
    }
}

/// A control given by a closure over one state row.
pub struct FnControl<F> {
    dim: usize,
    f: F,
}

impl<F> FnControl<F>
where
    F: Fn(f64, &[f64], &mut [f64]) + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> Control for FnControl<F>
where
    F: Fn(f64, &[f64], &mut [f64]) + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval_rows(&self, t: f64, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut out = Array2::zeros(x.raw_dim());
        for (xr, mut o) in x.rows().into_iter().zip(out.rows_mut()) {
            let xr = xr.to_vec();
            (self.f)(t, &xr, o.as_slice_mut().unwrap());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Euler–Maruyama steps per sub-interval (or per simulated span).
    pub steps_per_interval: usize,
    /// Extra times at which to record the state.
    #[serde(default)]
    pub record_times: Vec<f64>,
    pub seed: u64,
    /// Key path appended to the seed; distinguishes simulations that share a seed.
    #[serde(default)]
    pub stream: Vec<u64>,
}

impl SimConfig {
    pub fn new(steps_per_interval: usize, seed: u64) -> Self {
        Self {
            steps_per_interval,
            record_times: Vec::new(),
            seed,
            stream: Vec::new(),
        }
    }

    pub fn with_stream(mut self, stream: &[u64]) -> Self {
        self.stream = stream.to_vec();
        self
    }

    pub fn with_records(mut self, times: &[f64]) -> Self {
        self.record_times = times.to_vec();
        self
    }

    fn validate(&self) -> Result<()> {
        if self.steps_per_interval == 0 {
            return Err(Error::Config("steps_per_interval must be >= 1".into()));
        }
        Ok(())
    }
}

/// Simulated paths: `states[[k, r, j]]` is coordinate `j` of path `r` at `times[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryBatch {
    times: Vec<f64>,
    states: Array3<f64>,
}

impl TrajectoryBatch {
    pub fn new(times: Vec<f64>, states: Array3<f64>) -> Self {
        assert_eq!(times.len(), states.len_of(Axis(0)));
        Self { times, states }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &Array3<f64> {
        &self.states
    }

    pub fn n_paths(&self) -> usize {
        self.states.len_of(Axis(1))
    }

    pub fn dim(&self) -> usize {
        self.states.len_of(Axis(2))
    }

    /// The `batch x d` slice recorded at `times[k]`.
    pub fn slice(&self, k: usize) -> ArrayView2<'_, f64> {
        self.states.index_axis(Axis(0), k)
    }

    /// The slice recorded at time `t` (exact match within 1e-12).
    pub fn at_time(&self, t: f64) -> Option<ArrayView2<'_, f64>> {
        self.times
            .iter()
            .position(|&u| (u - t).abs() <= 1e-12 * (1.0 + t.abs()))
            .map(|k| self.slice(k))
    }

    pub fn last(&self) -> ArrayView2<'_, f64> {
        self.slice(self.times.len() - 1)
    }

    /// Writes `path_id, t, x0..x{d-1}` rows, optionally preceded by `#` comment lines.
    pub fn write_csv(&self, path: &Path, comments: &[String]) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        {
            use std::io::Write;
            for c in comments {
                writeln!(w, "# {c}").map_err(|e| Error::io(path, e))?;
            }
        }
        let mut wr = csv::Writer::from_writer(w);
        let csv_err = |e: csv::Error| Error::data(path, e.to_string());
        let mut header = vec!["path_id".to_string(), "t".to_string()];
        header.extend((0..self.dim()).map(|j| format!("x{j}")));
        wr.write_record(&header).map_err(csv_err)?;
        for r in 0..self.n_paths() {
            for (k, t) in self.times.iter().enumerate() {
                let mut rec = vec![r.to_string(), t.to_string()];
                rec.extend(self.states.slice(s![k, r, ..]).iter().map(|v| v.to_string()));
                wr.write_record(&rec).map_err(csv_err)?;
            }
        }
        wr.flush().map_err(|e| Error::io(path, e))
    }
}

/// A time partition: integration knots (interval ends, each owning
/// `steps_per_interval` steps) refined by record times.
struct Schedule {
    /// Segment endpoints in the order they are visited.
    points: Vec<f64>,
    steps: Vec<usize>,
    /// Whether the state at `points[k]` is reported.
    record: Vec<bool>,
}

fn schedule(knots: &[f64], records: &[f64], steps_per_interval: usize, record_knots: bool) -> Schedule {
    let descending = knots[0] > knots[knots.len() - 1];
    let mut points = vec![knots[0]];
    let mut steps = Vec::new();
    let mut record = vec![true];
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let mut inner: Vec<f64> = records.iter().copied().filter(|&r| r > lo && r < hi).collect();
        inner.sort_by(|x, y| x.partial_cmp(y).unwrap());
        inner.dedup();
        if descending {
            inner.reverse();
        }
        let len = (b - a).abs();
        let mut prev = a;
        let n_seg = inner.len() + 1;
        for (k, p) in inner.into_iter().chain(std::iter::once(b)).enumerate() {
            let n = if n_seg == 1 {
                steps_per_interval
            } else {
                ((steps_per_interval as f64 * (p - prev).abs() / len).round() as usize).max(1)
            };
            steps.push(n);
            points.push(p);
            let is_knot = k + 1 == n_seg;
            let wanted = records.iter().any(|&r| (r - p).abs() <= 1e-12 * (1.0 + p.abs()));
            record.push(wanted || (is_knot && record_knots));
            prev = p;
        }
    }
    // always report the terminal state
    *record.last_mut().unwrap() = true;
    Schedule {
        points,
        steps,
        record,
    }
}

fn integrate(
    ctrl: &dyn Control,
    x0: ArrayView2<'_, f64>,
    sched: &Schedule,
    direction: Direction,
    cfg: &SimConfig,
    reference: &ReferenceProcess,
) -> Result<TrajectoryBatch> {
    if x0.ncols() != ctrl.dim() {
        return Err(Error::Shape(format!(
            "initial states have dimension {}, control expects {}",
            x0.ncols(),
            ctrl.dim()
        )));
    }
    let n = x0.nrows();
    let d = x0.ncols();
    let sigma = reference.sigma();
    let sign = match direction {
        Direction::Forward => 1.0,
        Direction::Backward => -1.0,
    };
    let rec_times: Vec<f64> = sched
        .points
        .iter()
        .zip(&sched.record)
        .filter(|(_, &r)| r)
        .map(|(&p, _)| p)
        .collect();

    let chunk_starts: Vec<usize> = (0..n).step_by(SIM_CHUNK).collect();
    let results: Vec<Result<Vec<Array2<f64>>>> = chunk_starts
        .par_iter()
        .enumerate()
        .map(|(c, &start)| {
            let end = (start + SIM_CHUNK).min(n);
            let mut key = vec![rng::tag::SIM];
            key.extend_from_slice(&cfg.stream);
            key.push(c as u64);
            let mut rng = rng::stream(cfg.seed, &key);
            let mut x = x0.slice(s![start..end, ..]).to_owned();
            let mut recorded = vec![x.clone()];
            let mut global_step = 0usize;
            for (seg, &n_steps) in sched.steps.iter().enumerate() {
                let a = sched.points[seg];
                let b = sched.points[seg + 1];
                let dt = (b - a).abs() / n_steps as f64;
                let sq = sigma * dt.sqrt();
                for m in 0..n_steps {
                    let t = a + sign * dt * m as f64;
                    let v = ctrl.eval_rows(t, x.view());
                    let mut incr = v * (sigma * dt);
                    reference.add_drift(&x, sign * dt, &mut incr);
                    x += &incr;
                    if sigma > 0.0 {
                        x.mapv_inplace(|xv| {
                            let z: f64 = rng.sample(StandardNormal);
                            xv + sq * z
                        });
                    }
                    if x.iter().any(|v| !v.is_finite()) {
                        return Err(Error::NonFinite(format!(
                            "{} simulation state at step {global_step} (t = {t})",
                            direction.as_str()
                        )));
                    }
                    global_step += 1;
                }
                if sched.record[seg + 1] {
                    recorded.push(x.clone());
                }
            }
            Ok(recorded)
        })
        .collect();

    let mut states = Array3::zeros((rec_times.len(), n, d));
    for (&start, res) in chunk_starts.iter().zip(results) {
        let recs = res?;
        let end = (start + SIM_CHUNK).min(n);
        for (k, r) in recs.into_iter().enumerate() {
            states.slice_mut(s![k, start..end, ..]).assign(&r);
        }
    }
    Ok(TrajectoryBatch::new(rec_times, states))
}

fn check_records(records: &[f64], lo: f64, hi: f64) -> Result<()> {
    if let Some(r) = records.iter().find(|&&r| !(r >= lo && r <= hi)) {
        return Err(Error::Domain(format!("record time {r} outside [{lo}, {hi}]")));
    }
    Ok(())
}

/// Simulates the forward SDE from `t_start` to `t_end` in
/// `cfg.steps_per_interval` uniform steps (split at any record times).
pub fn simulate_forward(
    ctrl: &dyn Control,
    x0: ArrayView2<'_, f64>,
    t_start: f64,
    t_end: f64,
    cfg: &SimConfig,
    reference: &ReferenceProcess,
) -> Result<TrajectoryBatch> {
    cfg.validate()?;
    if !(t_start < t_end) {
        return Err(Error::Domain(format!("forward simulation needs t_start < t_end, got {t_start} >= {t_end}")));
    }
    check_records(&cfg.record_times, t_start, t_end)?;
    let sched = schedule(&[t_start, t_end], &cfg.record_times, cfg.steps_per_interval, true);
    integrate(ctrl, x0, &sched, Direction::Forward, cfg, reference)
}

/// Simulates the backward SDE from `t_start` down to `t_end < t_start`.
pub fn simulate_backward(
    ctrl: &dyn Control,
    x_t: ArrayView2<'_, f64>,
    t_start: f64,
    t_end: f64,
    cfg: &SimConfig,
    reference: &ReferenceProcess,
) -> Result<TrajectoryBatch> {
    cfg.validate()?;
    if !(t_start > t_end) {
        return Err(Error::Domain(format!("backward simulation needs t_start > t_end, got {t_start} <= {t_end}")));
    }
    check_records(&cfg.record_times, t_end, t_start)?;
    let sched = schedule(&[t_start, t_end], &cfg.record_times, cfg.steps_per_interval, true);
    integrate(ctrl, x_t, &sched, Direction::Backward, cfg, reference)
}

/// One continuous rollout over the whole horizon with `x0` as the starting
/// samples, stepping `steps_per_interval` per interval of `knots` and
/// recording at every time in `record_at` plus `cfg.record_times`.
pub fn rollout_from(
    ctrl: &dyn Control,
    x0: ArrayView2<'_, f64>,
    knots: &[f64],
    record_at: &[f64],
    direction: Direction,
    cfg: &SimConfig,
    reference: &ReferenceProcess,
) -> Result<TrajectoryBatch> {
    cfg.validate()?;
    let (lo, hi) = (knots[0], knots[knots.len() - 1]);
    let mut records = record_at.to_vec();
    records.extend_from_slice(&cfg.record_times);
    check_records(&records, lo, hi)?;
    let ordered: Vec<f64> = match direction {
        Direction::Forward => knots.to_vec(),
        Direction::Backward => knots.iter().rev().copied().collect(),
    };
    let sched = schedule(&ordered, &records, cfg.steps_per_interval, false);
    integrate(ctrl, x0, &sched, direction, cfg, reference)
}

/// Full-horizon rollout started from the dataset's first (forward) or last
/// (backward) snapshot. Steps follow the training grid; every dataset grid
/// time, held out or not, is recorded.
pub fn rollout_full(
    ctrl: &dyn Control,
    dataset: &MarginalDataset,
    direction: Direction,
    cfg: &SimConfig,
    reference: &ReferenceProcess,
) -> Result<TrajectoryBatch> {
    let train = dataset.training_view();
    let start = match direction {
        Direction::Forward => dataset.snapshot(0),
        Direction::Backward => dataset.snapshot(dataset.grid().len() - 1),
    };
    rollout_from(
        ctrl,
        start.view(),
        train.grid().times(),
        dataset.grid().times(),
        direction,
        cfg,
        reference,
    )
}
