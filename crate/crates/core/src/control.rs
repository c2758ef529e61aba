//! Trainable control fields `(t, x) -> R^d`.
//!
//! One residual MLP is shared across every sub-interval, so the glued control
//! is continuous in `t` by construction. Layout:
//!
//! ```text
//! z  = [x, sinusoidal(t)]
//! h0 = W_in z + b_in
//! h  = h + W2 act(W1 act(h) + b1) + b2        (repeated `blocks` times)
//! y  = W_out act(h) + b_out                   (W_out, b_out start at zero)
//! ```
//!
//! Gradients are hand-written for this fixed layout; there is no general
//! autodiff. Parameters live in one flat vector so that the optimizer, the
//! EMA shadow and checkpoints can treat them uniformly.

use std::ops::Range;
use std::path::Path;

use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, ArrayViewMut2, Axis};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::time_grid::Direction;

/// Rows per gradient chunk. Fixed so that the reduction order, and therefore
/// the result, does not depend on the thread count.
const GRAD_CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Silu,
    Tanh,
}

impl Activation {
    #[inline]
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Silu => x / (1.0 + (-x).exp()),
            Activation::Tanh => x.tanh(),
        }
    }

    #[inline]
    fn derivative(self, x: f64) -> f64 {
        match self {
            Activation::Silu => {
                let sg = 1.0 / (1.0 + (-x).exp());
                sg * (1.0 + x * (1.0 - sg))
            }
            Activation::Tanh => {
                let th = x.tanh();
                1.0 - th * th
            }
        }
    }
}

/// Shape of a control network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Architecture {
    /// State dimension `d` (input and output).
    pub dim: usize,
    /// Width of the sinusoidal time embedding; must be even.
    pub embed_width: usize,
    /// Lowest and highest angular frequency of the time embedding.
    pub embed_freq_range: (f64, f64),
    pub hidden: usize,
    /// Number of residual blocks.
    pub blocks: usize,
    pub activation: Activation,
}

impl Architecture {
    /// Default sizing: about 11k parameters per direction for low-dimensional
    /// data and about 640k per direction for 100-dimensional data.
    pub fn default_for_dim(dim: usize) -> Self {
        let (hidden, blocks) = if dim > 20 { (512, 1) } else { (64, 1) };
        Self {
            dim,
            embed_width: 32,
            embed_freq_range: (0.25, 32.0),
            hidden,
            blocks,
            activation: Activation::Silu,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.hidden == 0 {
            return Err(Error::Config("dim and hidden must be positive".into()));
        }
        if self.embed_width % 2 != 0 {
            return Err(Error::Config(format!(
                "embed_width must be even, got {}",
                self.embed_width
            )));
        }
        let (lo, hi) = self.embed_freq_range;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::Config(format!("bad embedding frequency range ({lo}, {hi})")));
        }
        Ok(())
    }

    fn input_width(&self) -> usize {
        self.dim + self.embed_width
    }

    fn layout(&self) -> Layout {
        let mut off = 0;
        let mut lin = |out_dim: usize, in_dim: usize| {
            let l = Linear {
                w: off..off + out_dim * in_dim,
                b: off + out_dim * in_dim..off + out_dim * in_dim + out_dim,
                out_dim,
                in_dim,
            };
            off = l.b.end;
            l
        };
        let input = lin(self.hidden, self.input_width());
        let blocks = (0..self.blocks)
            .map(|_| (lin(self.hidden, self.hidden), lin(self.hidden, self.hidden)))
            .collect();
        let output = lin(self.dim, self.hidden);
        Layout {
            input,
            blocks,
            output,
            n_params: off,
        }
    }

    pub fn n_params(&self) -> usize {
        self.layout().n_params
    }

    fn frequencies(&self) -> Vec<f64> {
        let half = self.embed_width / 2;
        let (lo, hi) = self.embed_freq_range;
        (0..half)
            .map(|j| {
                if half == 1 {
                    lo
                } else {
                    lo * (hi / lo).powf(j as f64 / (half - 1) as f64)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
struct Linear {
    w: Range<usize>,
    b: Range<usize>,
    out_dim: usize,
    in_dim: usize,
}

impl Linear {
    fn weight<'a>(&self, p: &'a [f64]) -> ArrayView2<'a, f64> {
        ArrayView2::from_shape((self.out_dim, self.in_dim), &p[self.w.clone()]).unwrap()
    }

    fn bias<'a>(&self, p: &'a [f64]) -> ArrayView1<'a, f64> {
        ArrayView1::from(&p[self.b.clone()])
    }

    /// `x W^T + b`.
    fn forward(&self, p: &[f64], x: &ArrayView2<'_, f64>) -> Array2<f64> {
        let mut y = Array2::zeros((x.nrows(), self.out_dim));
        y += &self.bias(p);
        general_mat_mul(1.0, x, &self.weight(p).t(), 1.0, &mut y);
        y
    }

    /// Accumulates parameter gradients for upstream `dy` and returns `dx`.
    fn backward(
        &self,
        p: &[f64],
        x: &ArrayView2<'_, f64>,
        dy: &ArrayView2<'_, f64>,
        grad: &mut [f64],
        need_dx: bool,
    ) -> Option<Array2<f64>> {
        {
            let mut gw =
                ArrayViewMut2::from_shape((self.out_dim, self.in_dim), &mut grad[self.w.clone()]).unwrap();
            general_mat_mul(1.0, &dy.t(), x, 1.0, &mut gw);
        }
        for (g, s) in grad[self.b.clone()].iter_mut().zip(dy.sum_axis(Axis(0))) {
            *g += s;
        }
        need_dx.then(|| dy.dot(&self.weight(p)))
    }
}

#[derive(Debug, Clone)]
struct Layout {
    input: Linear,
    blocks: Vec<(Linear, Linear)>,
    output: Linear,
    n_params: usize,
}

/// Intermediate values of one batched forward pass.
struct Tape {
    z: Array2<f64>,
    /// Residual stream before each block, plus the final stream.
    h: Vec<Array2<f64>>,
    /// Pre-activations inside each block.
    p: Vec<Array2<f64>>,
    out: Array2<f64>,
}

/// A control field `v(t, x)` for one direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlFunction {
    arch: Architecture,
    role: Direction,
    params: Vec<f64>,
}

impl ControlFunction {
    /// Random hidden layers, zero output layer: the initial control is zero.
    pub fn new(arch: Architecture, role: Direction, seed: u64) -> Result<Self> {
        arch.validate()?;
        let layout = arch.layout();
        let mut params = vec![0.0; layout.n_params];
        let mut rng = rng::stream(seed, &[rng::tag::NET_INIT, role as u64]);
        let mut fill = |l: &Linear, params: &mut [f64]| {
            let bound = 1.0 / (l.in_dim as f64).sqrt();
            for v in params[l.w.start..l.b.end].iter_mut() {
                *v = rng.random_range(-bound..bound);
            }
        };
        fill(&layout.input, &mut params);
        for (a, b) in &layout.blocks {
            fill(a, &mut params);
            fill(b, &mut params);
        }
        Ok(Self { arch, role, params })
    }

    /// A control with explicit parameters.
    pub fn from_params(arch: Architecture, role: Direction, params: Vec<f64>) -> Result<Self> {
        arch.validate()?;
        if params.len() != arch.n_params() {
            return Err(Error::Shape(format!(
                "{} parameters for an architecture with {}",
                params.len(),
                arch.n_params()
            )));
        }
        Ok(Self { arch, role, params })
    }

    pub fn arch(&self) -> &Architecture {
        &self.arch
    }

    pub fn role(&self) -> Direction {
        self.role
    }

    pub fn dim(&self) -> usize {
        self.arch.dim
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    fn embed(&self, times: &[f64], x: &ArrayView2<'_, f64>) -> Array2<f64> {
        let d = self.arch.dim;
        let mut z = Array2::zeros((x.nrows(), self.arch.input_width()));
        z.slice_mut(s![.., ..d]).assign(x);
        let freqs = self.arch.frequencies();
        let half = freqs.len();
        for (mut row, &t) in z.rows_mut().into_iter().zip(times) {
            for (j, f) in freqs.iter().enumerate() {
                let (sn, cs) = (f * t).sin_cos();
                row[d + j] = sn;
                row[d + half + j] = cs;
            }
        }
        z
    }

    fn forward_tape(&self, times: &[f64], x: &ArrayView2<'_, f64>) -> Tape {
        let layout = self.arch.layout();
        let act = self.arch.activation;
        let p = &self.params;
        let z = self.embed(times, x);
        let mut h = vec![layout.input.forward(p, &z.view())];
        let mut pre = Vec::with_capacity(layout.blocks.len());
        for (l1, l2) in &layout.blocks {
            let cur = h.last().unwrap();
            let pk = l1.forward(p, &cur.mapv(|v| act.apply(v)).view());
            let r = l2.forward(p, &pk.mapv(|v| act.apply(v)).view());
            h.push(cur + &r);
            pre.push(pk);
        }
        let out = layout
            .output
            .forward(p, &h.last().unwrap().mapv(|v| act.apply(v)).view());
        Tape { z, h, p: pre, out }
    }

    /// Accumulates the gradient of `sum(d_out * out)` into `grad`.
    fn backward_tape(&self, tape: &Tape, d_out: &ArrayView2<'_, f64>, grad: &mut [f64]) {
        let layout = self.arch.layout();
        let act = self.arch.activation;
        let p = &self.params;
        let h_last = tape.h.last().unwrap();
        let ds = layout
            .output
            .backward(p, &h_last.mapv(|v| act.apply(v)).view(), d_out, grad, true)
            .unwrap();
        let mut dh = ds * &h_last.mapv(|v| act.derivative(v));
        for (k, (l1, l2)) in layout.blocks.iter().enumerate().rev() {
            let hk = &tape.h[k];
            let pk = &tape.p[k];
            let dq = l2
                .backward(p, &pk.mapv(|v| act.apply(v)).view(), &dh.view(), grad, true)
                .unwrap();
            let dp = dq * &pk.mapv(|v| act.derivative(v));
            let du = l1
                .backward(p, &hk.mapv(|v| act.apply(v)).view(), &dp.view(), grad, true)
                .unwrap();
            dh = dh + du * &hk.mapv(|v| act.derivative(v));
        }
        layout.input.backward(p, &tape.z.view(), &dh.view(), grad, false);
    }

    /// `v(t, x)` for a single point.
    pub fn eval(&self, t: f64, x: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        if x.len() != self.arch.dim {
            return Err(Error::Shape(format!(
                "control expects dimension {}, got {}",
                self.arch.dim,
                x.len()
            )));
        }
        let x2 = x.insert_axis(Axis(0));
        Ok(self.forward_tape(&[t], &x2).out.row(0).to_owned())
    }

    /// `v(t, x_r)` for every row, at a common time.
    pub fn eval_at(&self, t: f64, x: ArrayView2<'_, f64>) -> Array2<f64> {
        assert_eq!(x.ncols(), self.arch.dim, "control dimension mismatch");
        let times = vec![t; x.nrows()];
        self.forward_tape(&times, &x).out
    }

    /// `v(t_r, x_r)` for every row.
    pub fn eval_batch(&self, times: &[f64], x: ArrayView2<'_, f64>) -> Array2<f64> {
        assert_eq!(x.ncols(), self.arch.dim, "control dimension mismatch");
        assert_eq!(times.len(), x.nrows(), "one time per row");
        self.forward_tape(times, &x).out
    }

    /// Mean squared residual `mean_r ||target_r - v(t_r, x_r)||^2` and its
    /// gradient with respect to the parameters.
    pub fn loss_and_grad(&self, batch: &RegressionBatch) -> (f64, Vec<f64>) {
        let n = batch.len();
        let denom = n as f64;
        let chunks: Vec<(f64, Vec<f64>)> = (0..n)
            .step_by(GRAD_CHUNK)
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|start| {
                let end = (start + GRAD_CHUNK).min(n);
                let x = batch.x.slice(s![start..end, ..]);
                let tape = self.forward_tape(&batch.times[start..end], &x);
                let resid = &tape.out - &batch.targets.slice(s![start..end, ..]);
                let loss: f64 = resid.iter().map(|r| r * r).sum();
                let d_out = resid * (2.0 / denom);
                let mut g = vec![0.0; self.params.len()];
                self.backward_tape(&tape, &d_out.view(), &mut g);
                (loss, g)
            })
            .collect();
        let mut grad = vec![0.0; self.params.len()];
        let mut loss = 0.0;
        for (l, g) in chunks {
            loss += l;
            for (a, b) in grad.iter_mut().zip(g) {
                *a += b;
            }
        }
        (loss / denom, grad)
    }

    /// Per-sample squared residuals, without gradients.
    pub fn squared_residuals(&self, batch: &RegressionBatch) -> Vec<f64> {
        let out = self.eval_batch(&batch.times, batch.x.view());
        (&out - &batch.targets)
            .rows()
            .into_iter()
            .map(|r| r.iter().map(|v| v * v).sum())
            .collect()
    }

    /// Writes the control as JSON.
    pub fn save(&self, path: &Path, state: Option<&TrainerState>) -> Result<()> {
        let ck = ControlCheckpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            control: self.clone(),
            trainer: state.cloned(),
        };
        let text = serde_json::to_string(&ck)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<(Self, Option<TrainerState>)> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let ck: ControlCheckpoint = serde_json::from_str(&text)?;
        ck.validate()?;
        Ok((ck.control, ck.trainer))
    }
}

pub const CHECKPOINT_FORMAT: &str = "msbm-control/1";

/// JSON container for one control and, optionally, its optimizer state.
/// Floats are written in shortest round-trip form and parsed exactly, so a
/// save/load cycle reproduces every parameter bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlCheckpoint {
    pub format: String,
    pub control: ControlFunction,
    pub trainer: Option<TrainerState>,
}

impl ControlCheckpoint {
    pub fn validate(&self) -> Result<()> {
        if self.format != CHECKPOINT_FORMAT {
            return Err(Error::Config(format!("unknown checkpoint format {}", self.format)));
        }
        self.control.arch.validate()?;
        if self.control.params.len() != self.control.arch.n_params() {
            return Err(Error::Shape("checkpoint parameter count does not match architecture".into()));
        }
        if let Some(t) = &self.trainer {
            if t.ema_shadow.len() != self.control.params.len() {
                return Err(Error::Shape("EMA shadow length does not match parameters".into()));
            }
        }
        Ok(())
    }
}

/// Regression samples `(t_r, x_r, target_r)`, with the interval each sample
/// was drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionBatch {
    pub times: Vec<f64>,
    pub x: Array2<f64>,
    pub targets: Array2<f64>,
    pub intervals: Vec<usize>,
}

impl RegressionBatch {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// The rows drawn from interval `i`.
    pub fn restrict_to_interval(&self, i: usize) -> RegressionBatch {
        let idx: Vec<usize> = (0..self.len()).filter(|&r| self.intervals[r] == i).collect();
        RegressionBatch {
            times: idx.iter().map(|&r| self.times[r]).collect(),
            x: self.x.select(Axis(0), &idx),
            targets: self.targets.select(Axis(0), &idx),
            intervals: vec![i; idx.len()],
        }
    }
}

/// Optimizer hyper-parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub ema_decay: f64,
    /// Optional global gradient-norm clip.
    pub grad_clip: Option<f64>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            ema_decay: 0.999,
            grad_clip: None,
        }
    }
}

/// Adam moments and the EMA shadow of one control.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainerState {
    pub config: OptimizerConfig,
    pub step: u64,
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub ema_shadow: Vec<f64>,
}

impl TrainerState {
    pub fn new(ctrl: &ControlFunction, config: OptimizerConfig) -> Result<Self> {
        if !(config.ema_decay > 0.0 && config.ema_decay < 1.0) {
            return Err(Error::Config(format!(
                "EMA decay must lie in (0, 1), got {}",
                config.ema_decay
            )));
        }
        if !(config.learning_rate > 0.0) || !(config.beta1 >= 0.0 && config.beta1 < 1.0)
            || !(config.beta2 >= 0.0 && config.beta2 < 1.0)
            || !(config.eps > 0.0)
        {
            return Err(Error::Config("invalid Adam hyper-parameters".into()));
        }
        let n = ctrl.n_params();
        Ok(Self {
            config,
            step: 0,
            first_moment: vec![0.0; n],
            second_moment: vec![0.0; n],
            ema_shadow: ctrl.params.clone(),
        })
    }
}

/// One optimizer step on `batch`. Returns the loss before the update.
pub fn regression_step(
    ctrl: &mut ControlFunction,
    batch: &RegressionBatch,
    state: &mut TrainerState,
) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::Config("empty regression batch".into()));
    }
    if batch.x.ncols() != ctrl.dim() || batch.targets.ncols() != ctrl.dim() {
        return Err(Error::Shape("batch dimension does not match control".into()));
    }
    if state.ema_shadow.len() != ctrl.n_params() {
        return Err(Error::Shape("trainer state does not match control".into()));
    }
    let (loss, mut grad) = ctrl.loss_and_grad(batch);
    if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        let res = ctrl.squared_residuals(batch);
        let bad: Vec<f64> = res
            .iter()
            .zip(&batch.times)
            .filter(|(r, _)| !r.is_finite())
            .map(|(_, &t)| t)
            .collect();
        let (lo, hi) = bad
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &t| (a.min(t), b.max(t)));
        return Err(Error::NonFinite(format!(
            "{} loss at step {}: {} non-finite residuals with t in [{lo}, {hi}]",
            ctrl.role().as_str(),
            state.step,
            bad.len()
        )));
    }
    let cfg = state.config.clone();
    if let Some(clip) = cfg.grad_clip {
        let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if norm > clip {
            let k = clip / norm;
            grad.iter_mut().for_each(|g| *g *= k);
        }
    }
    state.step += 1;
    let bc1 = 1.0 - cfg.beta1.powi(state.step as i32);
    let bc2 = 1.0 - cfg.beta2.powi(state.step as i32);
    for (((p, g), m), v) in ctrl
        .params
        .iter_mut()
        .zip(&grad)
        .zip(state.first_moment.iter_mut())
        .zip(state.second_moment.iter_mut())
    {
        *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
        *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
        let m_hat = *m / bc1;
        let v_hat = *v / bc2;
        *p -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.eps);
    }
    ema_update(&ctrl.params, state);
    Ok(loss)
}

fn ema_update(params: &[f64], state: &mut TrainerState) {
    let decay = state.config.ema_decay;
    for (s, p) in state.ema_shadow.iter_mut().zip(params) {
        *s = decay * *s + (1.0 - decay) * p;
    }
}

/// The control evaluated with the EMA shadow parameters.
pub fn ema_swap(ctrl: &ControlFunction, state: &TrainerState) -> ControlFunction {
    ControlFunction {
        arch: ctrl.arch.clone(),
        role: ctrl.role,
        params: state.ema_shadow.clone(),
    }
}
