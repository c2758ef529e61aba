//! The alternating backward/forward fitting loop over multi-marginal couplings.

use std::path::Path;
use std::time::Instant;

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::control::{
    ema_swap, regression_step, Architecture, ControlFunction, OptimizerConfig, RegressionBatch, TrainerState,
};
use crate::coupling::{subsample_rows, IntervalCoupling};
use crate::error::{Error, Result};
use crate::metrics::{wasserstein_subsampled, MetricConfig, Order};
use crate::reference::{backward_score_target, forward_score_target, sample_bridge, BridgeQuery, ReferenceProcess};
use crate::rng::{self, tag};
use crate::sde::{rollout_from, Control, SimConfig};
use crate::time_grid::{Direction, MarginalDataset, TimeGrid};

/// Relative distance from a singular endpoint below which a sampled training
/// time is redrawn.
pub const ENDPOINT_EPS: f64 = 1e-6;

/// Upper bound on redraws of a single training time.
const MAX_REDRAWS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Couplings refreshed by local simulation anchored at data on each interval.
    Msbm,
    /// Couplings read off one global rollout from the first or last snapshot.
    Naive,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Msbm => "msbm",
            Mode::Naive => "naive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MsbmConfig {
    pub outer_iterations: usize,
    pub inner_steps: usize,
    pub batch_size: usize,
    pub sigma: f64,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    pub steps_per_interval: usize,
    pub seed: u64,
    pub mode: Mode,
    /// Network shape; `None` picks [`Architecture::default_for_dim`].
    #[serde(default)]
    pub architecture: Option<Architecture>,
    /// Samples used for the per-iteration W2 tracking; 0 disables tracking.
    #[serde(default = "default_track_samples")]
    pub track_samples: usize,
}

fn default_track_samples() -> usize {
    256
}

impl MsbmConfig {
    /// Petal-row defaults: lr 1e-3, 20 outer iterations, 1000 inner steps,
    /// batch 256, 30 steps per interval.
    pub fn new(sigma: f64, seed: u64) -> Self {
        Self {
            outer_iterations: 20,
            inner_steps: 1000,
            batch_size: 256,
            sigma,
            optimizer: OptimizerConfig::default(),
            steps_per_interval: 30,
            seed,
            mode: Mode::Msbm,
            architecture: None,
            track_samples: default_track_samples(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.outer_iterations == 0 || self.inner_steps == 0 || self.batch_size == 0 || self.steps_per_interval == 0
        {
            return Err(Error::Config(
                "outer_iterations, inner_steps, batch_size and steps_per_interval must be >= 1".into(),
            ));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!("sigma must be positive, got {}", self.sigma)));
        }
        if !(self.optimizer.learning_rate > 0.0) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if let Some(a) = &self.architecture {
            a.validate()?;
        }
        Ok(())
    }

    pub fn reference(&self) -> Result<ReferenceProcess> {
        ReferenceProcess::brownian(self.sigma)
    }

    fn sim(&self, stream: &[u64]) -> SimConfig {
        SimConfig::new(self.steps_per_interval, self.seed).with_stream(stream)
    }
}

fn dir_code(direction: Direction) -> u64 {
    match direction {
        Direction::Forward => 0,
        Direction::Backward => 1,
    }
}

/// Independent couplings: for interval `i`, `min(n_{i-1}, n_i)` rows drawn
/// without replacement from each side, in random order.
pub fn init_couplings(dataset: &MarginalDataset, seed: u64) -> Result<Vec<IntervalCoupling>> {
    let grid = dataset.grid();
    (1..grid.len())
        .map(|i| {
            let left = dataset.snapshot(i - 1).view();
            let right = dataset.snapshot(i).view();
            let m = left.nrows().min(right.nrows());
            let mut r = rng::stream(seed, &[tag::INIT_COUPLING, i as u64]);
            let l = subsample_rows(left, m, &mut r);
            let rr = subsample_rows(right, m, &mut r);
            IntervalCoupling::new(i, l, rr)
        })
        .collect()
}

/// Regression target for a bridge point `x_t` of coupling row `row`: the
/// forward target towards the right endpoint or the backward target towards
/// the left one.
pub fn regression_target(
    coupling: &IntervalCoupling,
    grid: &TimeGrid,
    row: usize,
    t: f64,
    x_t: ndarray::ArrayView1<'_, f64>,
    direction: Direction,
    reference: &ReferenceProcess,
) -> Result<ndarray::Array1<f64>> {
    let (tl, tr) = grid.interval(coupling.interval);
    match direction {
        Direction::Forward => forward_score_target(x_t, coupling.right.row(row), t, tr, reference),
        Direction::Backward => backward_score_target(x_t, coupling.left.row(row), t, tl, reference),
    }
}

/// Draws a training time uniformly on the horizon, redrawing when it lands
/// within `ENDPOINT_EPS` (relative to its interval) of the singular endpoint.
fn draw_time<R: Rng + ?Sized>(grid: &TimeGrid, direction: Direction, rng: &mut R) -> Result<(f64, usize)> {
    let (a, b) = (grid.start(), grid.end());
    for _ in 0..MAX_REDRAWS {
        let t = rng.random_range(a..b);
        let i = match direction {
            Direction::Forward => grid.interval_index(t, Direction::Forward),
            Direction::Backward => grid.interval_index(t, Direction::Backward),
        };
        let Ok(i) = i else { continue };
        let (tl, tr) = grid.interval(i);
        let gap = match direction {
            Direction::Forward => tr - t,
            Direction::Backward => t - tl,
        };
        if gap >= ENDPOINT_EPS * (tr - tl) {
            return Ok((t, i));
        }
    }
    Err(Error::Domain("could not draw a training time away from the interval endpoints".into()))
}

/// A regression batch for `direction`: `t ~ U[t_0, t_k]`, a uniformly chosen
/// row of `t`'s interval coupling, a bridge draw `x_t` between its endpoints,
/// and the matching target.
pub fn make_training_batch<R: Rng + ?Sized>(
    couplings: &[IntervalCoupling],
    grid: &TimeGrid,
    reference: &ReferenceProcess,
    batch_size: usize,
    direction: Direction,
    rng: &mut R,
) -> Result<RegressionBatch> {
    if couplings.len() != grid.n_intervals() {
        return Err(Error::Shape(format!(
            "{} couplings for {} intervals",
            couplings.len(),
            grid.n_intervals()
        )));
    }
    if batch_size == 0 {
        return Err(Error::Config("batch_size must be >= 1".into()));
    }
    let d = couplings[0].dim();
    let mut times = Vec::with_capacity(batch_size);
    let mut intervals = Vec::with_capacity(batch_size);
    let mut x = Array2::zeros((batch_size, d));
    let mut targets = Array2::zeros((batch_size, d));
    for b in 0..batch_size {
        let (t, i) = draw_time(grid, direction, rng)?;
        let c = &couplings[i - 1];
        let row = rng.random_range(0..c.len());
        let (tl, tr) = grid.interval(i);
        let q = BridgeQuery {
            t_left: tl,
            t_right: tr,
            x_left: c.left.row(row),
            x_right: c.right.row(row),
            t,
        };
        let xt = sample_bridge(&q, reference, rng)?;
        let target = regression_target(c, grid, row, t, xt.view(), direction, reference)?;
        x.row_mut(b).assign(&xt);
        targets.row_mut(b).assign(&target);
        times.push(t);
        intervals.push(i);
    }
    Ok(RegressionBatch {
        times,
        x,
        targets,
        intervals,
    })
}

/// Per-interval contributions to the batch loss: squared residuals of the
/// interval's rows summed and divided by the full batch size, so the entries
/// add up to the aggregate loss.
pub fn interval_losses(ctrl: &ControlFunction, batch: &RegressionBatch, n_intervals: usize) -> Vec<f64> {
    let res = ctrl.squared_residuals(batch);
    let mut out = vec![0.0; n_intervals];
    for (r, &i) in res.iter().zip(&batch.intervals) {
        out[i - 1] += r;
    }
    let b = batch.len() as f64;
    out.iter_mut().for_each(|v| *v /= b);
    out
}

/// Local refresh of interval `i`. Forward: data at `t_{i-1}` simulated to
/// `t_i`; backward: data at `t_i` simulated down to `t_{i-1}`. The data side is
/// a fresh uniform subsample of `min(n_{i-1}, n_i)` rows.
pub fn refresh_interval(
    ctrl: &dyn Control,
    dataset: &MarginalDataset,
    i: usize,
    direction: Direction,
    iteration: u64,
    cfg: &MsbmConfig,
    reference: &ReferenceProcess,
) -> Result<IntervalCoupling> {
    let grid = dataset.grid();
    let (tl, tr) = grid.interval(i);
    let n_left = dataset.snapshot(i - 1).len();
    let n_right = dataset.snapshot(i).len();
    let m = n_left.min(n_right);
    let key = [tag::REFRESH, iteration, dir_code(direction), i as u64];
    let anchor = match direction {
        Direction::Forward => dataset.snapshot(i - 1),
        Direction::Backward => dataset.snapshot(i),
    };
    let start = subsample_rows(anchor.view(), m, &mut rng::stream(cfg.seed, &key));
    let tb = rollout_from(ctrl, start.view(), &[tl, tr], &[tl, tr], direction, &cfg.sim(&key), reference)?;
    let left = tb.at_time(tl).expect("recorded").to_owned();
    let right = tb.at_time(tr).expect("recorded").to_owned();
    IntervalCoupling::new(i, left, right)
}

/// Refreshes every interval independently (in parallel) with local simulation.
pub fn refresh_couplings(
    ctrl: &dyn Control,
    dataset: &MarginalDataset,
    direction: Direction,
    iteration: u64,
    cfg: &MsbmConfig,
    reference: &ReferenceProcess,
) -> Result<Vec<IntervalCoupling>> {
    (1..dataset.grid().len())
        .into_par_iter()
        .map(|i| refresh_interval(ctrl, dataset, i, direction, iteration, cfg, reference))
        .collect()
}

/// Naive refresh: one rollout over the whole horizon from the first (forward)
/// or last (backward) snapshot, with every coupling read off the simulated
/// path. `m = min_i n_i` paths are simulated.
pub fn refresh_couplings_naive(
    ctrl: &dyn Control,
    dataset: &MarginalDataset,
    direction: Direction,
    iteration: u64,
    cfg: &MsbmConfig,
    reference: &ReferenceProcess,
) -> Result<Vec<IntervalCoupling>> {
    let grid = dataset.grid();
    let m = dataset.snapshots().iter().map(|s| s.len()).min().expect("non-empty dataset");
    // with one interval this coincides with the local refresh key
    let key = [tag::REFRESH, iteration, dir_code(direction), 1];
    let anchor = match direction {
        Direction::Forward => dataset.snapshot(0),
        Direction::Backward => dataset.snapshot(grid.len() - 1),
    };
    let start = subsample_rows(anchor.view(), m, &mut rng::stream(cfg.seed, &key));
    let tb = rollout_from(ctrl, start.view(), grid.times(), grid.times(), direction, &cfg.sim(&key), reference)?;
    (1..grid.len())
        .map(|i| {
            let (tl, tr) = grid.interval(i);
            IntervalCoupling::new(
                i,
                tb.at_time(tl).expect("recorded").to_owned(),
                tb.at_time(tr).expect("recorded").to_owned(),
            )
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimings {
    pub fit_backward_s: f64,
    pub refresh_backward_s: f64,
    pub fit_forward_s: f64,
    pub refresh_forward_s: f64,
    pub track_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// 1-based outer iteration.
    pub iteration: usize,
    /// Loss at every inner step of the backward fit.
    pub backward_loss: Vec<f64>,
    pub forward_loss: Vec<f64>,
    /// W2 of a from-`t_0` rollout at grid times `1..=k`; empty when tracking is off.
    pub w2: Vec<f64>,
    pub timings: PhaseTimings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub mode: Mode,
    pub seed: u64,
    pub times: Vec<f64>,
    /// Tracking W2 before any training (zero control).
    pub initial_w2: Vec<f64>,
    pub iterations: Vec<IterationRecord>,
    /// Set when training stopped early.
    #[serde(default)]
    pub error: Option<String>,
}

impl TrainReport {
    /// W2 per iteration including iteration 0; `curve[n][j]` is grid time `j + 1`.
    pub fn w2_curve(&self) -> Vec<Vec<f64>> {
        std::iter::once(self.initial_w2.clone())
            .chain(self.iterations.iter().map(|r| r.w2.clone()))
            .collect()
    }

    /// The report with wall-clock fields zeroed, for reproducibility checks.
    pub fn without_timings(&self) -> TrainReport {
        let mut r = self.clone();
        r.iterations.iter_mut().for_each(|it| it.timings = PhaseTimings::default());
        r
    }

    pub fn total_seconds(&self) -> f64 {
        self.iterations
            .iter()
            .map(|r| {
                let t = &r.timings;
                t.fit_backward_s + t.refresh_backward_s + t.fit_forward_s + t.refresh_forward_s + t.track_s
            })
            .sum()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let s = serde_json::to_string_pretty(self)?;
        std::fs::write(path, s).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&s)?)
    }
}

/// Trainer state after `iteration` completed outer iterations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MsbmCheckpoint {
    pub format: String,
    pub config: MsbmConfig,
    pub iteration: usize,
    pub forward: ControlFunction,
    pub backward: ControlFunction,
    pub forward_state: TrainerState,
    pub backward_state: TrainerState,
    pub couplings: Vec<IntervalCoupling>,
    pub report: TrainReport,
}

const CHECKPOINT_FORMAT: &str = "msbm-trainer/1";

impl MsbmCheckpoint {
    pub fn save(&self, path: &Path) -> Result<()> {
        let s = serde_json::to_string(self)?;
        std::fs::write(path, s).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let c: MsbmCheckpoint = serde_json::from_str(&s)?;
        if c.format != CHECKPOINT_FORMAT {
            return Err(Error::data(path, format!("unknown checkpoint format {:?}", c.format)));
        }
        Ok(c)
    }

    /// EMA forward and backward controls.
    pub fn ema_controls(&self) -> (ControlFunction, ControlFunction) {
        (
            ema_swap(&self.forward, &self.forward_state),
            ema_swap(&self.backward, &self.backward_state),
        )
    }
}

/// Trained EMA controls and the run report.
#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub forward: ControlFunction,
    pub backward: ControlFunction,
    pub report: TrainReport,
}

/// Stepwise trainer; [`run_msbm`] drives it to completion.
pub struct MsbmTrainer {
    dataset: MarginalDataset,
    cfg: MsbmConfig,
    reference: ReferenceProcess,
    forward: ControlFunction,
    backward: ControlFunction,
    forward_state: TrainerState,
    backward_state: TrainerState,
    couplings: Vec<IntervalCoupling>,
    iteration: usize,
    report: TrainReport,
}

impl MsbmTrainer {
    /// Trains on the dataset's training view (held-out times are skipped).
    pub fn new(dataset: &MarginalDataset, cfg: MsbmConfig) -> Result<Self> {
        cfg.validate()?;
        let dataset = dataset.training_view();
        let reference = cfg.reference()?;
        let d = dataset.dim();
        let arch = cfg.architecture.clone().unwrap_or_else(|| Architecture::default_for_dim(d));
        if arch.dim != d {
            return Err(Error::Shape(format!(
                "architecture dimension {} does not match data dimension {d}",
                arch.dim
            )));
        }
        let forward = ControlFunction::new(
            arch.clone(),
            Direction::Forward,
            rng::stream_key(cfg.seed, &[tag::NET_INIT, 0]),
        )?;
        let backward = ControlFunction::new(arch, Direction::Backward, rng::stream_key(cfg.seed, &[tag::NET_INIT, 1]))?;
        let forward_state = TrainerState::new(&forward, cfg.optimizer.clone())?;
        let backward_state = TrainerState::new(&backward, cfg.optimizer.clone())?;
        let couplings = init_couplings(&dataset, cfg.seed)?;
        let mut t = Self {
            report: TrainReport {
                mode: cfg.mode,
                seed: cfg.seed,
                times: dataset.grid().times().to_vec(),
                initial_w2: Vec::new(),
                iterations: Vec::new(),
                error: None,
            },
            dataset,
            cfg,
            reference,
            forward,
            backward,
            forward_state,
            backward_state,
            couplings,
            iteration: 0,
        };
        let ema = ema_swap(&t.forward, &t.forward_state);
        t.report.initial_w2 = t.track(&ema)?;
        Ok(t)
    }

    /// Continues from a checkpoint taken on the same dataset.
    pub fn resume(dataset: &MarginalDataset, ckpt: MsbmCheckpoint) -> Result<Self> {
        ckpt.config.validate()?;
        let dataset = dataset.training_view();
        if dataset.grid().times() != ckpt.report.times.as_slice() || dataset.dim() != ckpt.forward.dim() {
            return Err(Error::Config("checkpoint does not match the dataset".into()));
        }
        Ok(Self {
            reference: ckpt.config.reference()?,
            dataset,
            cfg: ckpt.config,
            forward: ckpt.forward,
            backward: ckpt.backward,
            forward_state: ckpt.forward_state,
            backward_state: ckpt.backward_state,
            couplings: ckpt.couplings,
            iteration: ckpt.iteration,
            report: ckpt.report,
        })
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn is_done(&self) -> bool {
        self.iteration >= self.cfg.outer_iterations
    }

    pub fn report(&self) -> &TrainReport {
        &self.report
    }

    pub fn couplings(&self) -> &[IntervalCoupling] {
        &self.couplings
    }

    pub fn config(&self) -> &MsbmConfig {
        &self.cfg
    }

    pub fn checkpoint(&self) -> MsbmCheckpoint {
        MsbmCheckpoint {
            format: CHECKPOINT_FORMAT.into(),
            config: self.cfg.clone(),
            iteration: self.iteration,
            forward: self.forward.clone(),
            backward: self.backward.clone(),
            forward_state: self.forward_state.clone(),
            backward_state: self.backward_state.clone(),
            couplings: self.couplings.clone(),
            report: self.report.clone(),
        }
    }

    pub fn ema_controls(&self) -> (ControlFunction, ControlFunction) {
        (
            ema_swap(&self.forward, &self.forward_state),
            ema_swap(&self.backward, &self.backward_state),
        )
    }

    fn fit(&mut self, direction: Direction, n: u64) -> Result<Vec<f64>> {
        let grid = self.dataset.grid().clone();
        let mut r = rng::stream(self.cfg.seed, &[tag::BATCH, n, dir_code(direction)]);
        let (ctrl, state) = match direction {
            Direction::Forward => (&mut self.forward, &mut self.forward_state),
            Direction::Backward => (&mut self.backward, &mut self.backward_state),
        };
        let mut losses = Vec::with_capacity(self.cfg.inner_steps);
        for _ in 0..self.cfg.inner_steps {
            let batch = make_training_batch(
                &self.couplings,
                &grid,
                &self.reference,
                self.cfg.batch_size,
                direction,
                &mut r,
            )?;
            let loss = regression_step(ctrl, &batch, state).map_err(|e| match e {
                Error::NonFinite(msg) => Error::Divergence(format!("outer iteration {n}: {msg}")),
                other => other,
            })?;
            losses.push(loss);
        }
        Ok(losses)
    }

    fn refresh(&self, ctrl: &ControlFunction, direction: Direction, n: u64) -> Result<Vec<IntervalCoupling>> {
        match self.cfg.mode {
            Mode::Msbm => refresh_couplings(ctrl, &self.dataset, direction, n, &self.cfg, &self.reference),
            Mode::Naive => refresh_couplings_naive(ctrl, &self.dataset, direction, n, &self.cfg, &self.reference),
        }
    }

    /// W2 between a forward rollout from `t_0` and each later snapshot.
    /// Every iteration reuses the same start rows, noise and data subsample,
    /// so changes along the curve come from the control alone.
    fn track(&self, ctrl: &ControlFunction) -> Result<Vec<f64>> {
        let m = self.cfg.track_samples;
        if m == 0 {
            return Ok(Vec::new());
        }
        let key = [tag::TRACK];
        let x0 = self.dataset.snapshot(0).view();
        let start = subsample_rows(x0, m.min(x0.nrows()), &mut rng::stream(self.cfg.seed, &key));
        let grid = self.dataset.grid();
        let tb = rollout_from(
            ctrl,
            start.view(),
            grid.times(),
            grid.times(),
            Direction::Forward,
            &self.cfg.sim(&key),
            &self.reference,
        )?;
        let mc = MetricConfig {
            wasserstein_max_samples: m,
            seed: rng::stream_key(self.cfg.seed, &key),
            ..MetricConfig::default()
        };
        (1..grid.len())
            .map(|i| {
                let gen = tb.at_time(grid.time(i)).expect("recorded");
                track_w2(gen, self.dataset.snapshot(i).view(), &mc)
            })
            .collect()
    }

    /// One outer iteration: fit `u`, refresh backward, fit `v`, refresh forward.
    pub fn step(&mut self) -> Result<()> {
        if self.is_done() {
            return Ok(());
        }
        let n = (self.iteration + 1) as u64;
        let mut timings = PhaseTimings::default();
        let clock = Instant::now();
        let backward_loss = self.fit(Direction::Backward, n)?;
        timings.fit_backward_s = clock.elapsed().as_secs_f64();

        let clock = Instant::now();
        let u = ema_swap(&self.backward, &self.backward_state);
        self.couplings = self.refresh(&u, Direction::Backward, n)?;
        timings.refresh_backward_s = clock.elapsed().as_secs_f64();

        let clock = Instant::now();
        let forward_loss = self.fit(Direction::Forward, n)?;
        timings.fit_forward_s = clock.elapsed().as_secs_f64();

        let clock = Instant::now();
        let v = ema_swap(&self.forward, &self.forward_state);
        self.couplings = self.refresh(&v, Direction::Forward, n)?;
        timings.refresh_forward_s = clock.elapsed().as_secs_f64();

        let clock = Instant::now();
        let w2 = self.track(&v)?;
        timings.track_s = clock.elapsed().as_secs_f64();

        log::info!(
            "[{}] iteration {n}: backward loss {:.4e}, forward loss {:.4e}, w2 {:?}",
            self.cfg.mode.as_str(),
            backward_loss.last().copied().unwrap_or(f64::NAN),
            forward_loss.last().copied().unwrap_or(f64::NAN),
            w2
        );
        self.report.iterations.push(IterationRecord {
            iteration: n as usize,
            backward_loss,
            forward_loss,
            w2,
            timings,
        });
        self.iteration += 1;
        Ok(())
    }

    /// Runs the remaining iterations. On failure the error is also recorded
    /// in the report, which stays available via [`report`](Self::report).
    pub fn run(&mut self) -> Result<()> {
        while !self.is_done() {
            if let Err(e) = self.step() {
                self.report.error = Some(e.to_string());
                return Err(e);
            }
        }
        Ok(())
    }

    pub fn finish(self) -> TrainOutput {
        let (forward, backward) = self.ema_controls();
        TrainOutput {
            forward,
            backward,
            report: self.report,
        }
    }
}

fn track_w2(gen: ArrayView2<'_, f64>, data: ArrayView2<'_, f64>, cfg: &MetricConfig) -> Result<f64> {
    Ok(wasserstein_subsampled(gen, data, Order::W2, cfg)?.0)
}

/// Runs the full local-anchoring scheme. `cfg.mode` must be [`Mode::Msbm`].
pub fn run_msbm(dataset: &MarginalDataset, cfg: &MsbmConfig) -> Result<TrainOutput> {
    if cfg.mode != Mode::Msbm {
        return Err(Error::Config("run_msbm needs mode = msbm".into()));
    }
    train(dataset, cfg)
}

/// Runs the global-endpoint baseline. `cfg.mode` must be [`Mode::Naive`].
pub fn run_naive_baseline(dataset: &MarginalDataset, cfg: &MsbmConfig) -> Result<TrainOutput> {
    if cfg.mode != Mode::Naive {
        return Err(Error::Config("run_naive_baseline needs mode = naive".into()));
    }
    train(dataset, cfg)
}

/// Dispatches on `cfg.mode`.
pub fn train(dataset: &MarginalDataset, cfg: &MsbmConfig) -> Result<TrainOutput> {
    let mut t = MsbmTrainer::new(dataset, cfg.clone())?;
    t.run()?;
    Ok(t.finish())
}

/// Two-marginal bridge matching between samples `x0` at time 0 and `x1` at
/// time `horizon`.
pub fn run_two_marginal(x0: Array2<f64>, x1: Array2<f64>, horizon: f64, cfg: &MsbmConfig) -> Result<TrainOutput> {
    let grid = TimeGrid::new(vec![0.0, horizon])?;
    let ds = MarginalDataset::new(grid, vec![x0, x1])?;
    train(&ds, cfg)
}
