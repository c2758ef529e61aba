//! Acceptance suite. Runs every criterion in sequence, prints one PASS/FAIL
//! line each, and exits non-zero if any failed.

use std::panic;
use std::time::Instant;

use msbm_core::control::ControlCheckpoint;
use msbm_core::datasets::{Component, SyntheticKind, SyntheticSpec};
use msbm_core::metrics::{
    evaluate_protocol, mmd_rbf, sliced_wasserstein, wasserstein_exact, Bandwidth, MetricConfig, Order, Protocol,
};
use msbm_core::reference::{backward_score_target, bridge_mean_var, forward_score_target, sample_bridge, BridgeQuery};
use msbm_core::rng;
use msbm_core::sde::{simulate_forward, ZeroControl};
use msbm_core::train::{run_two_marginal, train, MsbmCheckpoint, MsbmConfig, MsbmTrainer, Mode, TrainReport};
use msbm_core::{Architecture, ReferenceProcess, SimConfig};
use ndarray::{array, Array1, Array2, ArrayView2};
use rand::Rng;
use rand_distr::StandardNormal;

// Tolerances, as stated by the criteria.
const A1_REL_TOL: f64 = 0.01;
const A1_MAX_SECONDS: f64 = 10.0;
const A2_REL_TOL: f64 = 1e-5;
const A3_W2_MAX: f64 = 0.05;
const A3_CORR_TOL: f64 = 0.05;
const A3_MAX_SECONDS: f64 = 300.0;
const G1_W2_MAX: f64 = 0.15;
const G1_MAX_SECONDS: f64 = 600.0;
const G2_MIN_RATIO: f64 = 2.0;
const G3_MAX_FRACTION: f64 = 0.5;
const G3_TREND_SLACK: f64 = 0.05;
const G3_MAX_SECONDS: f64 = 1800.0;
const M1_MMD_TOL: f64 = 1e-12;
const M1_SWD_TOL: f64 = 1e-10;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

// ---------------------------------------------------------------- A1

fn a1_bridge_moments() -> Outcome {
    let clock = Instant::now();
    let reference = ReferenceProcess::brownian(0.7).unwrap();
    let (xl, xr) = (array![1.0, -2.0], array![3.0, 0.5]);
    let (tl, tr) = (0.0, 2.0);
    let n = 100_000;
    let mut worst: f64 = 0.0;
    for (k, &t) in [0.25, 1.0, 1.75].iter().enumerate() {
        let q = BridgeQuery {
            t_left: tl,
            t_right: tr,
            x_left: xl.view(),
            x_right: xr.view(),
            t,
        };
        // closed form, computed here independently
        let s = (t - tl) / (tr - tl);
        let mean: Array1<f64> = &xl * (1.0 - s) + &xr * s;
        let var = 0.49 * (t - tl) * (tr - t) / (tr - tl);
        let (m_lib, v_lib) = bridge_mean_var(&q, &reference).unwrap();
        assert!((v_lib - var).abs() < 1e-15 && (&m_lib - &mean).iter().all(|d| d.abs() < 1e-15));

        let mut r = rng::stream(1, &[k as u64]);
        let mut sum = Array1::<f64>::zeros(2);
        let mut sq = Array1::<f64>::zeros(2);
        for _ in 0..n {
            let x = sample_bridge(&q, &reference, &mut r).unwrap();
            sum += &x;
            sq += &(&x * &x);
        }
        let emp_mean = &sum / n as f64;
        for j in 0..2 {
            let emp_var = sq[j] / n as f64 - emp_mean[j] * emp_mean[j];
            worst = worst.max(((emp_mean[j] - mean[j]) / mean[j]).abs());
            worst = worst.max(((emp_var - var) / var).abs());
        }
    }
    let secs = clock.elapsed().as_secs_f64();
    outcome(
        worst <= A1_REL_TOL && secs < A1_MAX_SECONDS,
        format!("worst relative moment error {worst:.4} (tol {A1_REL_TOL}), {secs:.2}s (limit {A1_MAX_SECONDS}s)"),
    )
}

// ---------------------------------------------------------------- A2

fn log_transition(x_from: &[f64], x_to: &[f64], dt: f64, sigma: f64) -> f64 {
    let v = sigma * sigma * dt;
    let d = x_from.len() as f64;
    let sq: f64 = x_from.iter().zip(x_to).map(|(a, b)| (b - a).powi(2)).sum();
    -0.5 * sq / v - 0.5 * d * (2.0 * std::f64::consts::PI * v).ln()
}

fn a2_score_targets() -> Outcome {
    let mut r = rng::stream(2, &[]);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let sigma = r.random_range(0.2..2.0);
        let reference = ReferenceProcess::brownian(sigma).unwrap();
        let t = r.random_range(0.0..3.0);
        let dt = r.random_range(0.05..1.0);
        let x: Vec<f64> = (0..3).map(|_| r.sample::<f64, _>(StandardNormal)).collect();
        let y: Vec<f64> = (0..3).map(|_| r.sample::<f64, _>(StandardNormal)).collect();
        let xv = Array1::from(x.clone());
        let yv = Array1::from(y.clone());
        let fwd = forward_score_target(xv.view(), yv.view(), t, t + dt, &reference).unwrap();
        let bwd = backward_score_target(xv.view(), yv.view(), t + dt, t, &reference).unwrap();
        let h = 1e-5;
        for (target, is_forward) in [(fwd, true), (bwd, false)] {
            // forward: d/dx_t log Q(y | x_t); backward: d/dx_t log Q(x_t | y)
            let mut fd = vec![0.0; 3];
            for j in 0..3 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[j] += h;
                xm[j] -= h;
                let (lp, lm) = if is_forward {
                    (log_transition(&xp, &y, dt, sigma), log_transition(&xm, &y, dt, sigma))
                } else {
                    (log_transition(&y, &xp, dt, sigma), log_transition(&y, &xm, dt, sigma))
                };
                fd[j] = sigma * (lp - lm) / (2.0 * h);
            }
            let norm = target.iter().map(|v| v * v).sum::<f64>().sqrt();
            let err = target.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            worst = worst.max(err / norm);
        }
    }
    outcome(worst <= A2_REL_TOL, format!("worst relative error {worst:.2e} over 100 queries (tol {A2_REL_TOL:.0e})"))
}

// ---------------------------------------------------------------- A3

fn gaussian_pair(n: usize, seed: u64) -> SyntheticSpec {
    SyntheticSpec {
        kind: SyntheticKind::CustomMixture {
            components: vec![
                vec![Component {
                    weight: 1.0,
                    mean: vec![0.0],
                    std: 0.1,
                }],
                vec![Component {
                    weight: 1.0,
                    mean: vec![2.0],
                    std: 0.1,
                }],
            ],
        },
        n,
        noise: 0.0,
        seed,
        times: vec![0.0, 1.0],
    }
}

/// Log-domain Sinkhorn for entropic OT with cost |x - y|^2 / 2 and
/// regularization `eps`; returns the correlation of the optimal plan.
fn sinkhorn_correlation(x: &[f64], a: &[f64], y: &[f64], b: &[f64], eps: f64) -> f64 {
    let (n, m) = (x.len(), y.len());
    let c = |i: usize, j: usize| 0.5 * (x[i] - y[j]).powi(2);
    let lse = |v: &mut dyn Iterator<Item = f64>| {
        let vals: Vec<f64> = v.collect();
        let mx = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        mx + vals.iter().map(|z| (z - mx).exp()).sum::<f64>().ln()
    };
    let mut f = vec![0.0; n];
    let mut g = vec![0.0; m];
    for _ in 0..5000 {
        for i in 0..n {
            f[i] = -eps * lse(&mut (0..m).map(|j| (g[j] - c(i, j)) / eps + b[j].ln()));
        }
        for j in 0..m {
            g[j] = -eps * lse(&mut (0..n).map(|i| (f[i] - c(i, j)) / eps + a[i].ln()));
        }
    }
    let plan = |i: usize, j: usize| ((f[i] + g[j] - c(i, j)) / eps).exp() * a[i] * b[j];
    let (mut mx, mut my, mut total) = (0.0, 0.0, 0.0);
    for i in 0..n {
        for j in 0..m {
            let p = plan(i, j);
            total += p;
            mx += p * x[i];
            my += p * y[j];
        }
    }
    mx /= total;
    my /= total;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        for j in 0..m {
            let p = plan(i, j) / total;
            sxy += p * (x[i] - mx) * (y[j] - my);
            sxx += p * (x[i] - mx).powi(2);
            syy += p * (y[j] - my).powi(2);
        }
    }
    sxy / (sxx * syy).sqrt()
}

fn discretized_gaussian(mean: f64, sd: f64, k: usize) -> (Vec<f64>, Vec<f64>) {
    let x: Vec<f64> = (0..k).map(|i| mean - 5.0 * sd + 10.0 * sd * i as f64 / (k - 1) as f64).collect();
    let w: Vec<f64> = x.iter().map(|v| (-(v - mean).powi(2) / (2.0 * sd * sd)).exp()).collect();
    let s: f64 = w.iter().sum();
    (x, w.iter().map(|v| v / s).collect())
}

fn correlation(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> f64 {
    let (x, y) = (a.column(0), b.column(0));
    let (mx, my) = (x.mean().unwrap(), y.mean().unwrap());
    let sxy: f64 = x.iter().zip(y.iter()).map(|(p, q)| (p - mx) * (q - my)).sum();
    let sxx: f64 = x.iter().map(|p| (p - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|q| (q - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

fn a3_two_marginal_gaussian() -> Outcome {
    let clock = Instant::now();
    let sigma = 0.5;
    let train_set = gaussian_pair(2000, 1).generate().unwrap();
    let mut cfg = MsbmConfig::new(sigma, 7);
    cfg.outer_iterations = 10;
    cfg.steps_per_interval = 100;
    let out = run_two_marginal(
        train_set.snapshot(0).samples.clone(),
        train_set.snapshot(1).samples.clone(),
        1.0,
        &cfg,
    )
    .unwrap();
    let secs = clock.elapsed().as_secs_f64();

    let test_set = gaussian_pair(4000, 99).generate().unwrap();
    let reference = cfg.reference().unwrap();
    let tb = simulate_forward(
        &out.forward,
        test_set.snapshot(0).view(),
        0.0,
        1.0,
        &SimConfig::new(100, 5),
        &reference,
    )
    .unwrap();
    let cfg_w = MetricConfig::default();
    let (w2, _) =
        msbm_core::metrics::wasserstein_subsampled(tb.last(), test_set.snapshot(1).view(), Order::W2, &cfg_w).unwrap();
    let learned = correlation(tb.slice(0), tb.last());

    let (x, a) = discretized_gaussian(0.0, 0.1, 200);
    let (y, b) = discretized_gaussian(2.0, 0.1, 200);
    let oracle = sinkhorn_correlation(&x, &a, &y, &b, sigma * sigma * 1.0);
    let pass = w2 <= A3_W2_MAX && (learned - oracle).abs() <= A3_CORR_TOL && secs < A3_MAX_SECONDS;
    outcome(
        pass,
        format!(
            "terminal W2 {w2:.4} (max {A3_W2_MAX}); coupling corr {learned:.4} vs Sinkhorn {oracle:.4} \
             (tol {A3_CORR_TOL}); train {secs:.0}s (limit {A3_MAX_SECONDS}s)"
        ),
    )
}

// ---------------------------------------------------------------- G1 / G2

fn chain_config(mode: Mode) -> MsbmConfig {
    let mut cfg = MsbmConfig::new(0.3, 7);
    cfg.mode = mode;
    cfg.outer_iterations = 10;
    cfg.inner_steps = 1000;
    cfg.batch_size = 256;
    cfg
}

fn chain_intermediate_w2(mode: Mode) -> (f64, f64, TrainReport) {
    let spec = SyntheticSpec::gaussian_chain(&[0.0, 2.0, 0.0], 0.1, 1000, 3);
    let ds = spec.generate().unwrap();
    let test = SyntheticSpec { seed: 77, ..spec }.generate().unwrap();
    let cfg = chain_config(mode);
    let clock = Instant::now();
    let out = train(&ds, &cfg).unwrap();
    let secs = clock.elapsed().as_secs_f64();
    let rep = evaluate_protocol(
        &out.forward,
        &test,
        &Protocol::FromT0,
        &MetricConfig::default(),
        &SimConfig::new(cfg.steps_per_interval, 3),
        &cfg.reference().unwrap(),
    )
    .unwrap();
    (rep.row(1).unwrap().w2, secs, out.report)
}

fn g1_g2() -> (Outcome, Outcome) {
    let (msbm, secs, _) = chain_intermediate_w2(Mode::Msbm);
    let (naive, naive_secs, naive_report) = chain_intermediate_w2(Mode::Naive);
    let g1 = outcome(
        msbm <= G1_W2_MAX && secs < G1_MAX_SECONDS,
        format!("MSBM intermediate W2 {msbm:.4} (max {G1_W2_MAX}); train {secs:.0}s (limit {G1_MAX_SECONDS}s)"),
    );
    let ratio = naive / msbm;
    let curve: Vec<String> = naive_report.w2_curve().iter().map(|w| format!("{:.2}", w[0])).collect();
    let g2 = outcome(
        ratio >= G2_MIN_RATIO,
        format!(
            "naive intermediate W2 {naive:.4} vs MSBM {msbm:.4}: ratio {ratio:.1} (min {G2_MIN_RATIO}); \
             naive train {naive_secs:.0}s; naive tracked W2 at t1 by iteration [{}]",
            curve.join(", ")
        ),
    );
    (g1, g2)
}

// ---------------------------------------------------------------- G3

fn moving_average(v: &[f64], w: usize) -> Vec<f64> {
    v.windows(w).map(|s| s.iter().sum::<f64>() / w as f64).collect()
}

fn g3_petal() -> Outcome {
    let spec = SyntheticSpec::petal(1000, 3);
    let ds = spec.generate().unwrap();
    let test = SyntheticSpec { seed: 103, ..spec }.generate().unwrap();
    let mut cfg = MsbmConfig::new(0.5, 7);
    cfg.optimizer.learning_rate = 1e-3;
    cfg.outer_iterations = 20;
    cfg.inner_steps = 1000;
    cfg.batch_size = 256;
    cfg.steps_per_interval = 30;
    cfg.track_samples = 1000;
    let clock = Instant::now();
    let out = train(&ds, &cfg).unwrap();
    let secs = clock.elapsed().as_secs_f64();

    let reference = cfg.reference().unwrap();
    let sim = SimConfig::new(cfg.steps_per_interval, 3);
    let mc = MetricConfig::default();
    let before = evaluate_protocol(&ZeroControl(2), &test, &Protocol::FromT0, &mc, &sim, &reference).unwrap();
    let after = evaluate_protocol(&out.forward, &test, &Protocol::FromT0, &mc, &sim, &reference).unwrap();
    let fractions: Vec<f64> = before.rows.iter().zip(&after.rows).map(|(b, a)| a.w2 / b.w2).collect();
    let fit_ok = fractions.iter().all(|&f| f <= G3_MAX_FRACTION);

    let curve = out.report.w2_curve();
    let n_times = curve[0].len();
    let mut trend_ok = true;
    let mut worst_rise: f64 = f64::NEG_INFINITY;
    for j in 0..n_times {
        let series: Vec<f64> = curve.iter().map(|w| w[j]).collect();
        let ma = moving_average(&series, 3);
        for k in 1..ma.len() {
            let rise = (ma[k] - ma[k - 1]) / ma[0];
            worst_rise = worst_rise.max(rise);
            if rise > G3_TREND_SLACK {
                trend_ok = false;
            }
        }
        if ma[ma.len() - 1] >= ma[0] {
            trend_ok = false;
        }
    }
    let fr: Vec<String> = fractions.iter().map(|f| format!("{f:.2}")).collect();
    let pass = fit_ok && trend_ok && secs < G3_MAX_SECONDS;
    outcome(
        pass,
        format!(
            "final/untrained W2 per time [{}] (max {G3_MAX_FRACTION}); worst 3-iteration MA rise {:.3} x MA_0 \
             (slack {G3_TREND_SLACK}); train {secs:.0}s (limit {G3_MAX_SECONDS}s)",
            fr.join(", "),
            worst_rise
        ),
    )
}

// ---------------------------------------------------------------- M1

fn brute_force(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>, p: i32) -> f64 {
    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for perm in permutations(n - 1) {
            for pos in 0..=perm.len() {
                let mut q = perm.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }
    let n = a.nrows();
    let cost = |i: usize, j: usize| {
        let d: f64 = a.row(i).iter().zip(b.row(j).iter()).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        d.powi(p)
    };
    let best = permutations(n)
        .iter()
        .map(|perm| perm.iter().enumerate().map(|(i, &j)| cost(i, j)).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    (best / n as f64).powf(1.0 / p as f64)
}

fn double_loop_mmd(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>, h: f64) -> f64 {
    let k = |x: ndarray::ArrayView1<'_, f64>, y: ndarray::ArrayView1<'_, f64>| {
        let d2: f64 = x.iter().zip(y.iter()).map(|(p, q)| (p - q).powi(2)).sum();
        (-d2 / (2.0 * h * h)).exp()
    };
    let (n, m) = (a.nrows() as f64, b.nrows() as f64);
    let mut kxx = 0.0;
    for x in a.rows() {
        for y in a.rows() {
            kxx += k(x, y);
        }
    }
    let mut kyy = 0.0;
    for x in b.rows() {
        for y in b.rows() {
            kyy += k(x, y);
        }
    }
    let mut kxy = 0.0;
    for x in a.rows() {
        for y in b.rows() {
            kxy += k(x, y);
        }
    }
    kxx / (n * n) + kyy / (m * m) - 2.0 * kxy / (n * m)
}

/// Exact W2 between uniform 1-D samples of sizes n and m: replicate every
/// point of `a` m times and every point of `b` n times, then pair sorted.
fn replicated_quantile_w2(a: &[f64], b: &[f64]) -> f64 {
    let (n, m) = (a.len(), b.len());
    let mut ra: Vec<f64> = a.iter().flat_map(|&v| std::iter::repeat_n(v, m)).collect();
    let mut rb: Vec<f64> = b.iter().flat_map(|&v| std::iter::repeat_n(v, n)).collect();
    ra.sort_by(f64::total_cmp);
    rb.sort_by(f64::total_cmp);
    (ra.iter().zip(&rb).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / (n * m) as f64).sqrt()
}

fn m1_metric_oracles() -> Outcome {
    let mut r = rng::stream(11, &[]);
    let mut worst_w: f64 = 0.0;
    for inst in 0..50 {
        let n = 1 + inst % 7;
        let d = 1 + inst % 3;
        let a = Array2::from_shape_fn((n, d), |_| r.random_range(-2.0..2.0));
        let b = Array2::from_shape_fn((n, d), |_| r.random_range(-2.0..2.0));
        for (order, p) in [(Order::W1, 1), (Order::W2, 2)] {
            let got = wasserstein_exact(a.view(), b.view(), order).unwrap();
            let want = brute_force(a.view(), b.view(), p);
            worst_w = worst_w.max((got - want).abs() / want.max(1e-300));
        }
    }
    // "exact": agreement up to floating-point summation order
    let w_ok = worst_w <= 1e-12;

    let mut worst_mmd: f64 = 0.0;
    for _ in 0..10 {
        let a = Array2::from_shape_fn((13, 3), |_| r.random_range(-1.0..1.0));
        let b = Array2::from_shape_fn((9, 3), |_| r.random_range(-0.5..1.5));
        let h = r.random_range(0.3..2.0);
        let got = mmd_rbf(a.view(), b.view(), Bandwidth::Fixed(h)).unwrap();
        worst_mmd = worst_mmd.max((got - double_loop_mmd(a.view(), b.view(), h)).abs());
    }

    let mut worst_swd: f64 = 0.0;
    for (n, m) in [(20, 20), (12, 30), (7, 5)] {
        let a: Vec<f64> = (0..n).map(|_| r.sample::<f64, _>(StandardNormal)).collect();
        let b: Vec<f64> = (0..m).map(|_| 1.0 + 2.0 * r.sample::<f64, _>(StandardNormal)).collect();
        let av = Array2::from_shape_vec((n, 1), a.clone()).unwrap();
        let bv = Array2::from_shape_vec((m, 1), b.clone()).unwrap();
        let got = sliced_wasserstein(av.view(), bv.view(), 16, &mut rng::stream(3, &[])).unwrap();
        worst_swd = worst_swd.max((got - replicated_quantile_w2(&a, &b)).abs());
    }
    outcome(
        w_ok && worst_mmd <= M1_MMD_TOL && worst_swd <= M1_SWD_TOL,
        format!(
            "Hungarian vs brute force worst rel {worst_w:.1e} on 50 instances; MMD vs double loop {worst_mmd:.1e} \
             (tol {M1_MMD_TOL:.0e}); 1-D SWD vs quantile W2 {worst_swd:.1e} (tol {M1_SWD_TOL:.0e})"
        ),
    )
}

// ---------------------------------------------------------------- R1 / R2

fn small_chain_config(seed: u64) -> MsbmConfig {
    let mut cfg = MsbmConfig::new(0.5, seed);
    cfg.outer_iterations = 3;
    cfg.inner_steps = 60;
    cfg.batch_size = 128;
    cfg.track_samples = 200;
    cfg.architecture = Some(Architecture {
        hidden: 32,
        ..Architecture::default_for_dim(1)
    });
    cfg
}

fn r1_reduction() -> Outcome {
    let data = gaussian_pair(500, 4).generate().unwrap();
    let cfg = small_chain_config(21);
    let (x0, x1) = (data.snapshot(0).samples.clone(), data.snapshot(1).samples.clone());
    let via_entry = run_two_marginal(x0, x1, 1.0, &cfg).unwrap();

    let mut t = MsbmTrainer::new(&data, cfg).unwrap();
    t.run().unwrap();
    let ckpt: MsbmCheckpoint = t.checkpoint();
    let (fwd, bwd) = ckpt.ema_controls();

    let as_json = |c: &msbm_core::ControlFunction| {
        serde_json::to_string(&ControlCheckpoint {
            format: "msbm-control/1".into(),
            control: c.clone(),
            trainer: None,
        })
        .unwrap()
    };
    let same = as_json(&via_entry.forward) == as_json(&fwd)
        && as_json(&via_entry.backward) == as_json(&bwd)
        && via_entry.report.without_timings() == ckpt.report.without_timings();
    outcome(same, format!("two-marginal entry point vs trainer on {{0, T}}: checkpoints identical = {same}"))
}

fn r2_thread_independence() -> Outcome {
    let ds = SyntheticSpec::gaussian_chain(&[0.0, 1.5, -0.5, 1.0], 0.2, 700, 8).generate().unwrap();
    let cfg = small_chain_config(5);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| train(&ds, &cfg).unwrap())
    };
    let one = run(1);
    let eight = run(8);
    let same = one.report.without_timings() == eight.report.without_timings()
        && one.forward.params() == eight.forward.params()
        && one.backward.params() == eight.backward.params();
    outcome(same, format!("1 thread vs 8 threads: reports and parameters identical = {same}"))
}

// ---------------------------------------------------------------- driver

fn main() {
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let wants = |id: &str| filter.as_deref().is_none_or(|f| id.contains(f));
    type Group = (&'static [&'static str], fn() -> Vec<Outcome>);
    let groups: [Group; 8] = [
        (&["A1"], || vec![a1_bridge_moments()]),
        (&["A2"], || vec![a2_score_targets()]),
        (&["A3"], || vec![a3_two_marginal_gaussian()]),
        (&["G1", "G2"], || {
            let (g1, g2) = g1_g2();
            vec![g1, g2]
        }),
        (&["G3"], || vec![g3_petal()]),
        (&["M1"], || vec![m1_metric_oracles()]),
        (&["R1"], || vec![r1_reduction()]),
        (&["R2"], || vec![r2_thread_independence()]),
    ];
    let mut results: Vec<(String, Option<Outcome>)> = Vec::new();
    for (ids, f) in groups {
        if !ids.iter().any(|id| wants(id)) {
            continue;
        }
        match panic::catch_unwind(f) {
            Ok(outs) => {
                for (id, o) in ids.iter().zip(outs) {
                    print_line(id, Some(&o));
                    results.push((id.to_string(), Some(o)));
                }
            }
            Err(_) => {
                for id in ids {
                    print_line(id, None);
                    results.push((id.to_string(), None));
                }
            }
        }
    }
    println!(
        "[ACCEPTANCE] SKIP  TABLES: real scRNA-seq tables (hESC, EB, CITE, MULTI) need the prepared datasets; \
         not desk-reproducible, no gate"
    );

    let failed: Vec<&str> = results
        .iter()
        .filter(|(_, o)| !o.as_ref().is_some_and(|o| o.pass))
        .map(|(id, _)| id.as_str())
        .collect();
    println!(
        "[ACCEPTANCE] {} of {} criteria passed{}",
        results.len() - failed.len(),
        results.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!("; failed: {}", failed.join(", "))
        }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}

fn print_line(id: &str, o: Option<&Outcome>) {
    match o {
        Some(o) => println!("[ACCEPTANCE] {}  {id}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail),
        None => println!("[ACCEPTANCE] FAIL  {id}: panicked"),
    }
}
