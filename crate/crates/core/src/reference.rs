//! Reference diffusion, its pinned bridges, and bridge-matching regression
//! targets.
//!
//! The reference is `dX = f_t(X) dt + sigma dW`. Closed-form bridges and
//! targets exist only for the drift-free (Brownian) case; the affine drift
//! hook is honoured by the simulator but rejected here.

use ndarray::{Array1, Array2, Array3, ArrayView1};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::coupling::IntervalCoupling;
use crate::error::{Error, Result};
use crate::sde::TrajectoryBatch;
use crate::time_grid::{Direction, TimeGrid};

/// Base drift `f_t(x)` of the reference process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Drift {
    #[default]
    Zero,
    /// `f(x) = a * x + b`.
    Affine { a: f64, b: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceProcess {
    sigma: f64,
    #[serde(default)]
    drift: Drift,
}

impl ReferenceProcess {
    pub fn brownian(sigma: f64) -> Result<Self> {
        Self::new(sigma, Drift::Zero)
    }

    pub fn new(sigma: f64, drift: Drift) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::Config(format!("sigma must be positive, got {sigma}")));
        }
        Ok(Self { sigma, drift })
    }

    /// A reference with `sigma = 0`. Only meaningful for simulating the
    /// deterministic limit; bridge operations are undefined for it.
    pub fn degenerate() -> Self {
        Self {
            sigma: 0.0,
            drift: Drift::Zero,
        }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn drift(&self) -> &Drift {
        &self.drift
    }

    pub fn is_brownian(&self) -> bool {
        matches!(self.drift, Drift::Zero)
    }

    /// Adds `scale * f(x)` to `out` for every row of `x`.
    pub(crate) fn add_drift(&self, x: &Array2<f64>, scale: f64, out: &mut Array2<f64>) {
        if let Drift::Affine { a, b } = &self.drift {
            for (mut o, xr) in out.rows_mut().into_iter().zip(x.rows()) {
                for j in 0..xr.len() {
                    let bj = b.get(j).copied().unwrap_or(0.0);
                    o[j] += scale * (a * xr[j] + bj);
                }
            }
        }
    }

    fn require_brownian(&self) -> Result<()> {
        if self.is_brownian() {
            Ok(())
        } else {
            Err(Error::Unsupported(
                "closed-form bridges and targets need a drift-free reference".into(),
            ))
        }
    }
}

/// A bridge of the reference pinned at `(t_left, x_left)` and `(t_right, x_right)`,
/// queried at time `t`.
#[derive(Debug, Clone, Copy)]
pub struct BridgeQuery<'a> {
    pub t_left: f64,
    pub t_right: f64,
    pub x_left: ArrayView1<'a, f64>,
    pub x_right: ArrayView1<'a, f64>,
    pub t: f64,
}

impl BridgeQuery<'_> {
    fn validate(&self) -> Result<()> {
        if !(self.t_left < self.t_right) {
            return Err(Error::Domain(format!(
                "bridge needs t_left < t_right, got [{}, {}]",
                self.t_left, self.t_right
            )));
        }
        if !(self.t >= self.t_left && self.t <= self.t_right) {
            return Err(Error::Domain(format!(
                "bridge time {} outside [{}, {}]",
                self.t, self.t_left, self.t_right
            )));
        }
        if self.x_left.len() != self.x_right.len() {
            return Err(Error::Shape("bridge endpoints differ in dimension".into()));
        }
        Ok(())
    }
}

/// Mean and isotropic variance of the Brownian bridge at `q.t`.
pub fn bridge_mean_var(q: &BridgeQuery<'_>, reference: &ReferenceProcess) -> Result<(Array1<f64>, f64)> {
    reference.require_brownian()?;
    q.validate()?;
    let span = q.t_right - q.t_left;
    let s = (q.t - q.t_left) / span;
    let mean = &q.x_left * (1.0 - s) + &q.x_right * s;
    let var = reference.sigma * reference.sigma * (q.t - q.t_left) * (q.t_right - q.t) / span;
    Ok((mean, var))
}

/// One draw from the bridge at `q.t`.
pub fn sample_bridge<R: Rng + ?Sized>(
    q: &BridgeQuery<'_>,
    reference: &ReferenceProcess,
    rng: &mut R,
) -> Result<Array1<f64>> {
    let (mut mean, var) = bridge_mean_var(q, reference)?;
    let sd = var.sqrt();
    for m in mean.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *m += sd * z;
    }
    Ok(mean)
}

/// `sigma * grad log Q_{t_next|t}(x_next | x_t)` for Brownian `Q`.
pub fn forward_score_target(
    x_t: ArrayView1<'_, f64>,
    x_next: ArrayView1<'_, f64>,
    t: f64,
    t_next: f64,
    reference: &ReferenceProcess,
) -> Result<Array1<f64>> {
    reference.require_brownian()?;
    if !(t < t_next) {
        return Err(Error::Domain(format!("forward target needs t < t_next, got {t} >= {t_next}")));
    }
    let scale = 1.0 / (reference.sigma * (t_next - t));
    Ok((&x_next - &x_t) * scale)
}

/// `sigma * grad log Q_{t|t_prev}(x_t | x_prev)` for Brownian `Q`.
pub fn backward_score_target(
    x_t: ArrayView1<'_, f64>,
    x_prev: ArrayView1<'_, f64>,
    t: f64,
    t_prev: f64,
    reference: &ReferenceProcess,
) -> Result<Array1<f64>> {
    reference.require_brownian()?;
    if !(t > t_prev) {
        return Err(Error::Domain(format!("backward target needs t > t_prev, got {t} <= {t_prev}")));
    }
    let scale = 1.0 / (reference.sigma * (t - t_prev));
    Ok((&x_prev - &x_t) * scale)
}

/// Samples the multi-marginal reciprocal process at `query_times`.
///
/// Path `r` uses row `r` of every coupling, so all couplings must share a row
/// count. Each query time is served by the bridge of its containing interval
/// (forward convention; `t_k` belongs to the last interval). Bridges in
/// different intervals are drawn independently.
pub fn sample_reciprocal_path<R: Rng + ?Sized>(
    couplings: &[IntervalCoupling],
    grid: &TimeGrid,
    query_times: &[f64],
    reference: &ReferenceProcess,
    rng: &mut R,
) -> Result<TrajectoryBatch> {
    reference.require_brownian()?;
    if couplings.len() != grid.n_intervals() {
        return Err(Error::Shape(format!(
            "{} couplings for {} intervals",
            couplings.len(),
            grid.n_intervals()
        )));
    }
    let m = couplings[0].len();
    let d = couplings[0].dim();
    if couplings.iter().any(|c| c.len() != m || c.dim() != d) {
        return Err(Error::Shape("couplings must share row count and dimension".into()));
    }
    let mut states = Array3::zeros((query_times.len(), m, d));
    for (q, &t) in query_times.iter().enumerate() {
        let i = if t == grid.end() {
            grid.n_intervals()
        } else {
            grid.interval_index(t, Direction::Forward)?
        };
        let (tl, tr) = grid.interval(i);
        let c = &couplings[i - 1];
        for r in 0..m {
            let query = BridgeQuery {
                t_left: tl,
                t_right: tr,
                x_left: c.left.row(r),
                x_right: c.right.row(r),
                t,
            };
            let x = sample_bridge(&query, reference, rng)?;
            states.slice_mut(ndarray::s![q, r, ..]).assign(&x);
        }
    }
    Ok(TrajectoryBatch::new(query_times.to_vec(), states))
}
