//! Distances between empirical distributions: sliced Wasserstein, RBF MMD and
//! exact W1/W2 via linear assignment.

pub mod assignment;
mod protocol;

pub use protocol::{evaluate_protocol, EvalReport, EvalRow, Protocol};

use ndarray::{Array1, ArrayView1, ArrayView2};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::coupling::subsample_rows;
use crate::error::{Error, Result};
use crate::rng;

/// Bandwidth for the RBF kernel `exp(-|x - y|^2 / (2 h^2))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bandwidth {
    /// Median pairwise distance over the pooled samples.
    Median,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    pub swd_projections: usize,
    pub mmd_bandwidth: Bandwidth,
    /// Sets larger than this are subsampled before exact assignment.
    pub wasserstein_max_samples: usize,
    pub seed: u64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            swd_projections: 128,
            mmd_bandwidth: Bandwidth::Median,
            wasserstein_max_samples: 2000,
            seed: 0,
        }
    }
}

impl MetricConfig {
    pub fn validate(&self) -> Result<()> {
        if self.swd_projections == 0 || self.wasserstein_max_samples == 0 {
            return Err(Error::Config(
                "swd_projections and wasserstein_max_samples must be >= 1".into(),
            ));
        }
        if let Bandwidth::Fixed(h) = self.mmd_bandwidth {
            if !(h > 0.0) {
                return Err(Error::Config(format!("fixed MMD bandwidth must be positive, got {h}")));
            }
        }
        Ok(())
    }
}

fn check_pair(a: &ArrayView2<'_, f64>, b: &ArrayView2<'_, f64>) -> Result<()> {
    if a.ncols() == 0 || b.ncols() == 0 {
        return Err(Error::Shape("metric inputs have dimension 0".into()));
    }
    if a.ncols() != b.ncols() {
        return Err(Error::Shape(format!(
            "metric inputs differ in dimension: {} vs {}",
            a.ncols(),
            b.ncols()
        )));
    }
    if a.nrows() == 0 || b.nrows() == 0 {
        return Err(Error::Shape("metric inputs must be non-empty".into()));
    }
    Ok(())
}

/// Exact squared 2-Wasserstein distance between two sorted 1-D empirical
/// measures with uniform weights, integrating the squared difference of the
/// step quantile functions.
pub fn w2_squared_1d_sorted(a: &[f64], b: &[f64]) -> f64 {
    let (n, m) = (a.len(), b.len());
    // cumulative mass in units of 1 / (n m)
    let (mut i, mut j, mut pos) = (0usize, 0usize, 0usize);
    let mut total = 0.0;
    while i < n && j < m {
        let next_a = (i + 1) * m;
        let next_b = (j + 1) * n;
        let next = next_a.min(next_b);
        let diff = a[i] - b[j];
        total += (next - pos) as f64 * diff * diff;
        pos = next;
        if next_a == next {
            i += 1;
        }
        if next_b == next {
            j += 1;
        }
    }
    total / (n * m) as f64
}

fn sorted(v: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = v.collect();
    v.sort_by(|x, y| x.total_cmp(y));
    v
}

/// Mean over random unit directions of the 1-D 2-Wasserstein distance
/// between the projected samples.
pub fn sliced_wasserstein<R: Rng + ?Sized>(
    a: ArrayView2<'_, f64>,
    b: ArrayView2<'_, f64>,
    projections: usize,
    rng: &mut R,
) -> Result<f64> {
    check_pair(&a, &b)?;
    if projections == 0 {
        return Err(Error::Config("need at least one projection".into()));
    }
    let d = a.ncols();
    let mut acc = 0.0;
    for _ in 0..projections {
        let mut dir: Array1<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = dir.dot(&dir).sqrt();
        if norm == 0.0 {
            dir.fill(0.0);
            dir[0] = 1.0;
        } else {
            dir /= norm;
        }
        acc += projected_w2(&a, &b, dir.view());
    }
    Ok(acc / projections as f64)
}

/// 1-D W2 between `a` and `b` projected onto `dir`.
pub fn projected_w2(a: &ArrayView2<'_, f64>, b: &ArrayView2<'_, f64>, dir: ArrayView1<'_, f64>) -> f64 {
    let pa = sorted(a.dot(&dir).into_iter());
    let pb = sorted(b.dot(&dir).into_iter());
    w2_squared_1d_sorted(&pa, &pb).sqrt()
}

/// Sliced Wasserstein under a metric configuration.
pub fn swd_with(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>, cfg: &MetricConfig) -> Result<f64> {
    let mut r = rng::stream(cfg.seed, &[rng::tag::METRIC, 1]);
    sliced_wasserstein(a, b, cfg.swd_projections, &mut r)
}

fn sq_dist(x: ArrayView1<'_, f64>, y: ArrayView1<'_, f64>) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Median pairwise Euclidean distance over the pooled samples.
pub fn median_pairwise_distance(a: &ArrayView2<'_, f64>, b: &ArrayView2<'_, f64>) -> f64 {
    let rows: Vec<ArrayView1<'_, f64>> = a.rows().into_iter().chain(b.rows()).collect();
    let mut d = Vec::with_capacity(rows.len() * rows.len().saturating_sub(1) / 2);
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            d.push(sq_dist(rows[i], rows[j]).sqrt());
        }
    }
    if d.is_empty() {
        return 0.0;
    }
    let mid = d.len() / 2;
    let (_, &mut hi, _) = d.select_nth_unstable_by(mid, |x, y| x.total_cmp(y));
    if d.len() % 2 == 1 {
        hi
    } else {
        let lo = d[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lo + hi)
    }
}

/// Resolves the kernel bandwidth, falling back to 1.0 when the median is 0.
pub fn resolve_bandwidth(a: &ArrayView2<'_, f64>, b: &ArrayView2<'_, f64>, rule: Bandwidth) -> f64 {
    match rule {
        Bandwidth::Fixed(h) => h,
        Bandwidth::Median => {
            let h = median_pairwise_distance(a, b);
            if h > 0.0 {
                h
            } else {
                log::warn!("median pairwise distance is 0; using MMD bandwidth 1.0");
                1.0
            }
        }
    }
}

/// Biased (V-statistic) squared MMD with an RBF kernel.
pub fn mmd_rbf(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>, bandwidth: Bandwidth) -> Result<f64> {
    check_pair(&a, &b)?;
    let h = resolve_bandwidth(&a, &b, bandwidth);
    let gamma = 1.0 / (2.0 * h * h);
    let mean_k = |x: &ArrayView2<'_, f64>, y: &ArrayView2<'_, f64>| {
        let mut s = 0.0;
        for xr in x.rows() {
            for yr in y.rows() {
                s += (-gamma * sq_dist(xr, yr)).exp();
            }
        }
        s / (x.nrows() * y.nrows()) as f64
    };
    let v = mean_k(&a, &a) + mean_k(&b, &b) - 2.0 * mean_k(&a, &b);
    Ok(v.max(0.0))
}

/// Which Wasserstein order to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Order {
    W1,
    W2,
}

/// Exact W1 or W2 between two equal-size empirical sets via optimal assignment.
pub fn wasserstein_exact(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>, order: Order) -> Result<f64> {
    check_pair(&a, &b)?;
    if a.nrows() != b.nrows() {
        return Err(Error::Shape(format!(
            "exact Wasserstein needs equal sizes, got {} and {}",
            a.nrows(),
            b.nrows()
        )));
    }
    let n = a.nrows();
    let mut cost = Vec::with_capacity(n * n);
    for ar in a.rows() {
        for br in b.rows() {
            let c = sq_dist(ar, br);
            cost.push(match order {
                Order::W1 => c.sqrt(),
                Order::W2 => c,
            });
        }
    }
    let assign = assignment::solve(&cost, n);
    let mean = assign.iter().enumerate().map(|(i, &j)| cost[i * n + j]).sum::<f64>() / n as f64;
    Ok(match order {
        Order::W1 => mean,
        Order::W2 => mean.sqrt(),
    })
}

/// Exact Wasserstein after seeded subsampling of both sets to
/// `min(n, m, cfg.wasserstein_max_samples)` rows. Returns the distance and
/// the number of rows used.
pub fn wasserstein_subsampled(
    a: ArrayView2<'_, f64>,
    b: ArrayView2<'_, f64>,
    order: Order,
    cfg: &MetricConfig,
) -> Result<(f64, usize)> {
    check_pair(&a, &b)?;
    let m = a.nrows().min(b.nrows()).min(cfg.wasserstein_max_samples);
    let take = |x: ArrayView2<'_, f64>| {
        if x.nrows() == m {
            x.to_owned()
        } else {
            // same key for both sides: identical inputs give identical subsets
            let mut r = rng::stream(cfg.seed, &[rng::tag::SUBSAMPLE, m as u64]);
            subsample_rows(x, m, &mut r)
        }
    };
    let (sa, sb) = (take(a), take(b));
    Ok((wasserstein_exact(sa.view(), sb.view(), order)?, m))
}

/// All four metrics between a generated and a reference set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricValues {
    pub w1: f64,
    pub w2: f64,
    pub mmd: f64,
    pub swd: f64,
    /// Rows used for the exact W1/W2.
    pub n_assignment: usize,
}

pub fn all_metrics(generated: ArrayView2<'_, f64>, reference: ArrayView2<'_, f64>, cfg: &MetricConfig) -> Result<MetricValues> {
    cfg.validate()?;
    let (w1, n_assignment) = wasserstein_subsampled(generated, reference, Order::W1, cfg)?;
    let (w2, _) = wasserstein_subsampled(generated, reference, Order::W2, cfg)?;
    let mmd = mmd_rbf(generated, reference, cfg.mmd_bandwidth)?;
    let swd = swd_with(generated, reference, cfg)?;
    Ok(MetricValues {
        w1,
        w2,
        mmd,
        swd,
        n_assignment,
    })
}
