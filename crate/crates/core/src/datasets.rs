//! Synthetic snapshot generators, the CSV snapshot-directory format, and
//! train/test splitting.

use std::path::Path;

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::distr::weighted::WeightedIndex;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::time_grid::{MarginalDataset, TimeGrid};

pub const MANIFEST_FILE: &str = "grid.json";

/// One Gaussian component of a mixture snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub weight: f64,
    pub mean: Vec<f64>,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SyntheticKind {
    /// 2-D: a tight cluster at the origin that splits into `lobes` petals
    /// moving radially outward. Lobe directions are the petal axes of a rose
    /// curve, `2 pi l / lobes`, each point jittered in angle by `jitter` rad.
    /// The radius grows linearly to `radius` at the last time, or with `merge`
    /// follows `radius * sin(pi s)` so that the petals close back at the origin.
    Petal {
        lobes: usize,
        radius: f64,
        jitter: f64,
        #[serde(default)]
        merge: bool,
    },
    /// One Gaussian per time with mean `means[i]` and std `noise`.
    GaussianChain { means: Vec<Vec<f64>> },
    /// A weighted mixture per time; component stds are used as given.
    CustomMixture { components: Vec<Vec<Component>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    #[serde(flatten)]
    pub kind: SyntheticKind,
    /// Samples per snapshot.
    pub n: usize,
    pub noise: f64,
    pub seed: u64,
    pub times: Vec<f64>,
}

impl SyntheticSpec {
    /// Five-lobe petal on the grid `{0, 1, 2, 3, 4}`.
    pub fn petal(n: usize, seed: u64) -> Self {
        Self {
            kind: SyntheticKind::Petal {
                lobes: 5,
                radius: 4.0,
                jitter: 0.1,
                merge: false,
            },
            n,
            noise: 0.1,
            seed,
            times: vec![0.0, 1.0, 2.0, 3.0, 4.0],
        }
    }

    /// 1-D chain with the given means on the integer grid `0, 1, ..`.
    pub fn gaussian_chain(means: &[f64], noise: f64, n: usize, seed: u64) -> Self {
        Self {
            kind: SyntheticKind::GaussianChain {
                means: means.iter().map(|&m| vec![m]).collect(),
            },
            n,
            noise,
            seed,
            times: (0..means.len()).map(|i| i as f64).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("n must be >= 1".into()));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(Error::Config(format!("noise must be finite and >= 0, got {}", self.noise)));
        }
        let grid = TimeGrid::new(self.times.clone())?;
        match &self.kind {
            SyntheticKind::Petal { lobes, radius, jitter, .. } => {
                if *lobes < 2 {
                    return Err(Error::Config(format!("petal needs at least 2 lobes, got {lobes}")));
                }
                if !(*radius > 0.0) || !(*jitter >= 0.0) {
                    return Err(Error::Config("petal radius must be > 0 and jitter >= 0".into()));
                }
            }
            SyntheticKind::GaussianChain { means } => {
                if grid.len() < 3 {
                    return Err(Error::Config("gaussian_chain needs at least 3 times".into()));
                }
                if means.len() != grid.len() {
                    return Err(Error::Config(format!("{} means for {} times", means.len(), grid.len())));
                }
                let d = means[0].len();
                if d == 0 || means.iter().any(|m| m.len() != d) {
                    return Err(Error::Config("gaussian_chain means must share a positive dimension".into()));
                }
            }
            SyntheticKind::CustomMixture { components } => {
                if components.len() != grid.len() {
                    return Err(Error::Config(format!(
                        "{} mixtures for {} times",
                        components.len(),
                        grid.len()
                    )));
                }
                let d = components.first().and_then(|c| c.first()).map_or(0, |c| c.mean.len());
                for mix in components {
                    if mix.is_empty() {
                        return Err(Error::Config("empty mixture".into()));
                    }
                    for c in mix {
                        if c.mean.len() != d || d == 0 || !(c.weight > 0.0) || !(c.std >= 0.0) {
                            return Err(Error::Config(
                                "mixture components need a shared dimension, weight > 0 and std >= 0".into(),
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Generates the dataset for this spec.
    pub fn generate(&self) -> Result<MarginalDataset> {
        match self.kind {
            SyntheticKind::Petal { .. } => gen_petal(self),
            SyntheticKind::GaussianChain { .. } => gen_gaussian_chain(self),
            SyntheticKind::CustomMixture { .. } => gen_custom_mixture(self),
        }
    }
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Standard normal restricted to `[-3, 3]` by rejection.
fn truncated_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let z = normal(rng);
        if z.abs() <= 3.0 {
            return z;
        }
    }
}

/// Petal samples together with each point's lobe (`None` at the first time).
pub(crate) fn petal_points(spec: &SyntheticSpec) -> Result<Vec<(Array2<f64>, Vec<Option<usize>>)>> {
    spec.validate()?;
    let SyntheticKind::Petal {
        lobes,
        radius,
        jitter,
        merge,
    } = spec.kind
    else {
        return Err(Error::Config("not a petal spec".into()));
    };
    let (t0, t_end) = (spec.times[0], spec.times[spec.times.len() - 1]);
    spec.times
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let mut r = rng::stream(spec.seed, &[i as u64]);
            let mut x = Array2::zeros((spec.n, 2));
            let mut labels = vec![None; spec.n];
            let s = (t - t0) / (t_end - t0);
            for k in 0..spec.n {
                if i == 0 {
                    x[[k, 0]] = spec.noise * truncated_normal(&mut r);
                    x[[k, 1]] = spec.noise * truncated_normal(&mut r);
                    continue;
                }
                let l = r.random_range(0..lobes);
                let theta = std::f64::consts::TAU * l as f64 / lobes as f64 + jitter * normal(&mut r);
                let rho = if merge {
                    radius * (std::f64::consts::PI * s).sin()
                } else {
                    radius * s
                };
                x[[k, 0]] = rho * theta.cos() + spec.noise * normal(&mut r);
                x[[k, 1]] = rho * theta.sin() + spec.noise * normal(&mut r);
                labels[k] = Some(l);
            }
            Ok((x, labels))
        })
        .collect()
}

pub fn gen_petal(spec: &SyntheticSpec) -> Result<MarginalDataset> {
    let snaps = petal_points(spec)?.into_iter().map(|(x, _)| x).collect();
    MarginalDataset::new(TimeGrid::new(spec.times.clone())?, snaps)
}

pub fn gen_gaussian_chain(spec: &SyntheticSpec) -> Result<MarginalDataset> {
    spec.validate()?;
    let SyntheticKind::GaussianChain { means } = &spec.kind else {
        return Err(Error::Config("not a gaussian_chain spec".into()));
    };
    let snaps = means
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let mut r = rng::stream(spec.seed, &[i as u64]);
            Array2::from_shape_fn((spec.n, m.len()), |(_, j)| m[j] + spec.noise * normal(&mut r))
        })
        .collect();
    MarginalDataset::new(TimeGrid::new(spec.times.clone())?, snaps)
}

pub fn gen_custom_mixture(spec: &SyntheticSpec) -> Result<MarginalDataset> {
    spec.validate()?;
    let SyntheticKind::CustomMixture { components } = &spec.kind else {
        return Err(Error::Config("not a custom_mixture spec".into()));
    };
    let snaps = components
        .iter()
        .enumerate()
        .map(|(i, mix)| {
            let mut r = rng::stream(spec.seed, &[i as u64]);
            let pick = WeightedIndex::new(mix.iter().map(|c| c.weight)).expect("validated weights");
            let d = mix[0].mean.len();
            let mut x = Array2::zeros((spec.n, d));
            for mut row in x.rows_mut() {
                let c = &mix[pick.sample(&mut r)];
                for (j, v) in row.iter_mut().enumerate() {
                    *v = c.mean[j] + c.std * normal(&mut r);
                }
            }
            x
        })
        .collect();
    MarginalDataset::new(TimeGrid::new(spec.times.clone())?, snaps)
}

/// Contents of `grid.json` in a snapshot directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub times: Vec<f64>,
    pub files: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub held_out: Vec<usize>,
    /// Free-form provenance (generator spec, build id, ...).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

pub fn snapshot_file_name(i: usize) -> String {
    format!("snapshot_{i}.csv")
}

/// Writes `snapshot_<i>.csv` files and `grid.json` into `dir` (created if
/// missing). Values are written in shortest round-trip form.
pub fn save_snapshots(dataset: &MarginalDataset, dir: &Path, meta: Option<serde_json::Value>) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let d = dataset.dim();
    let header: Vec<String> = (0..d).map(|j| format!("x{j}")).collect();
    let mut files = Vec::new();
    for (i, snap) in dataset.snapshots().iter().enumerate() {
        let name = snapshot_file_name(i);
        let path = dir.join(&name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| Error::data(&path, e.to_string()))?;
        w.write_record(&header).map_err(|e| Error::data(&path, e.to_string()))?;
        for row in snap.samples.rows() {
            w.write_record(row.iter().map(|v| v.to_string()))
                .map_err(|e| Error::data(&path, e.to_string()))?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        files.push(name);
    }
    let manifest = Manifest {
        times: dataset.grid().times().to_vec(),
        files,
        held_out: dataset.held_out_indices(),
        meta,
    };
    let path = dir.join(MANIFEST_FILE);
    let s = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(&path, s).map_err(|e| Error::io(&path, e))
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST_FILE);
    let s = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&s).map_err(|e| Error::data(&path, e.to_string()))
}

fn read_snapshot(path: &Path) -> Result<Array2<f64>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::data(path, format!("{other:?}")),
    })?;
    let d = rdr.headers().map_err(|e| Error::data(path, e.to_string()))?.len();
    if d == 0 {
        return Err(Error::data(path, "empty header"));
    }
    let mut values = Vec::new();
    let mut n = 0;
    for (k, rec) in rdr.records().enumerate() {
        let row = k + 1;
        let rec = rec.map_err(|e| Error::data(path, format!("row {row}: {e}")))?;
        if rec.len() != d {
            return Err(Error::data(path, format!("row {row} has {} fields, header has {d}", rec.len())));
        }
        for field in rec.iter() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| Error::data(path, format!("row {row}: cannot parse {field:?}")))?;
            if !v.is_finite() {
                return Err(Error::data(path, format!("row {row}: non-finite value {field}")));
            }
            values.push(v);
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::data(path, "no samples"));
    }
    Ok(Array2::from_shape_vec((n, d), values).expect("row-major fill"))
}

/// Loads a snapshot directory written by [`save_snapshots`] or prepared
/// externally in the same layout.
pub fn load_snapshots(dir: &Path) -> Result<MarginalDataset> {
    let manifest = read_manifest(dir)?;
    if manifest.files.len() != manifest.times.len() {
        return Err(Error::data(
            &dir.join(MANIFEST_FILE),
            format!("{} files for {} times", manifest.files.len(), manifest.times.len()),
        ));
    }
    let grid = TimeGrid::new(manifest.times.clone())?;
    let mut snaps = Vec::with_capacity(manifest.files.len());
    for f in &manifest.files {
        let path = dir.join(f);
        let x = read_snapshot(&path)?;
        if let Some(first) = snaps.first().map(|s: &Array2<f64>| s.ncols()) {
            if x.ncols() != first {
                return Err(Error::data(&path, format!("dimension {} differs from {first}", x.ncols())));
            }
        }
        snaps.push(x);
    }
    let ds = MarginalDataset::new(grid, snaps)?;
    if manifest.held_out.is_empty() {
        Ok(ds)
    } else {
        ds.with_holdout(&manifest.held_out)
    }
}

/// Splits every snapshot's rows into disjoint train/test parts with
/// `round(ratio * n)` training rows. Both parts keep the holdout mask.
pub fn split(dataset: &MarginalDataset, ratio: f64, seed: u64) -> Result<(MarginalDataset, MarginalDataset)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Config(format!("split ratio must be in (0, 1), got {ratio}")));
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (i, snap) in dataset.snapshots().iter().enumerate() {
        let n = snap.len();
        let n_train = (ratio * n as f64).round() as usize;
        if n_train == 0 || n_train == n {
            return Err(Error::Config(format!(
                "snapshot {i} with {n} rows is too small to split at ratio {ratio}"
            )));
        }
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng::stream(seed, &[rng::tag::SUBSAMPLE, i as u64]));
        train.push(snap.samples.select(Axis(0), &idx[..n_train]));
        test.push(snap.samples.select(Axis(0), &idx[n_train..]));
    }
    let held = dataset.held_out_indices();
    let tr = MarginalDataset::new(dataset.grid().clone(), train)?.with_holdout(&held)?;
    let te = MarginalDataset::new(dataset.grid().clone(), test)?.with_holdout(&held)?;
    Ok((tr, te))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_rows(x: &Array2<f64>) -> Vec<Vec<u64>> {
        let mut v: Vec<Vec<u64>> = x.rows().into_iter().map(|r| r.iter().map(|v| v.to_bits()).collect()).collect();
        v.sort();
        v
    }

    #[test]
    fn petal_origin_is_tight() {
        let spec = SyntheticSpec::petal(2000, 3);
        let ds = gen_petal(&spec).unwrap();
        assert_eq!(ds.grid().len(), 5);
        for r in ds.snapshot(0).samples.rows() {
            assert!(r[0].abs() <= 3.0 * spec.noise && r[1].abs() <= 3.0 * spec.noise);
        }
    }

    /// Lloyd's algorithm on unit vectors, initialized by farthest-point seeding.
    fn kmeans(pts: &[[f64; 2]], k: usize) -> Vec<usize> {
        let mut centers = vec![pts[0]];
        while centers.len() < k {
            let far = pts
                .iter()
                .max_by(|a, b| {
                    let da = centers.iter().map(|c| (a[0] - c[0]).powi(2) + (a[1] - c[1]).powi(2)).fold(f64::MAX, f64::min);
                    let db = centers.iter().map(|c| (b[0] - c[0]).powi(2) + (b[1] - c[1]).powi(2)).fold(f64::MAX, f64::min);
                    da.partial_cmp(&db).unwrap()
                })
                .unwrap();
            centers.push(*far);
        }
        let mut assign = vec![0; pts.len()];
        for _ in 0..50 {
            for (a, p) in assign.iter_mut().zip(pts) {
                *a = (0..k)
                    .min_by(|&i, &j| {
                        let di = (p[0] - centers[i][0]).powi(2) + (p[1] - centers[i][1]).powi(2);
                        let dj = (p[0] - centers[j][0]).powi(2) + (p[1] - centers[j][1]).powi(2);
                        di.partial_cmp(&dj).unwrap()
                    })
                    .unwrap();
            }
            for (c, center) in centers.iter_mut().enumerate() {
                let members: Vec<&[f64; 2]> = pts.iter().zip(&assign).filter(|(_, &a)| a == c).map(|(p, _)| p).collect();
                if !members.is_empty() {
                    let n = members.len() as f64;
                    *center = [
                        members.iter().map(|p| p[0]).sum::<f64>() / n,
                        members.iter().map(|p| p[1]).sum::<f64>() / n,
                    ];
                }
            }
        }
        assign
    }

    #[test]
    fn petal_final_lobes_cluster() {
        let spec = SyntheticSpec::petal(1000, 5);
        let snaps = petal_points(&spec).unwrap();
        let (x, labels) = snaps.last().unwrap();
        let pts: Vec<[f64; 2]> = x
            .rows()
            .into_iter()
            .map(|r| {
                let a = r[1].atan2(r[0]);
                [a.cos(), a.sin()]
            })
            .collect();
        let assign = kmeans(&pts, 5);
        let mut correct = 0;
        for c in 0..5 {
            let mut counts = [0usize; 5];
            for (a, l) in assign.iter().zip(labels) {
                if *a == c {
                    counts[l.unwrap()] += 1;
                }
            }
            correct += counts.iter().max().unwrap();
        }
        let purity = correct as f64 / 1000.0;
        assert!(purity >= 0.9, "purity {purity}");
    }

    #[test]
    fn petal_needs_two_lobes() {
        let mut spec = SyntheticSpec::petal(10, 0);
        spec.kind = SyntheticKind::Petal {
            lobes: 1,
            radius: 4.0,
            jitter: 0.1,
            merge: false,
        };
        assert!(gen_petal(&spec).is_err());
    }

    #[test]
    fn petal_merge_closes_at_origin() {
        let mut spec = SyntheticSpec::petal(500, 0);
        spec.kind = SyntheticKind::Petal {
            lobes: 5,
            radius: 4.0,
            jitter: 0.1,
            merge: true,
        };
        let ds = gen_petal(&spec).unwrap();
        let last = &ds.snapshot(4).samples;
        let max_r = last.rows().into_iter().map(|r| r[0].hypot(r[1])).fold(0.0, f64::max);
        assert!(max_r < 6.0 * spec.noise);
    }

    #[test]
    fn doubling_n_keeps_means() {
        let a = gen_petal(&SyntheticSpec::petal(4000, 1)).unwrap();
        let b = gen_petal(&SyntheticSpec::petal(8000, 1)).unwrap();
        for i in [0usize, 4] {
            assert_eq!(b.snapshot(i).len(), 2 * a.snapshot(i).len());
        }
        // at t_0 the spread is `noise`, so the mean is within a few noise/sqrt(n)
        let ma = a.snapshot(0).samples.mean_axis(Axis(0)).unwrap();
        let mb = b.snapshot(0).samples.mean_axis(Axis(0)).unwrap();
        for j in 0..2 {
            assert!((ma[j] - mb[j]).abs() < 4.0 * 0.1 / 4000f64.sqrt());
        }
    }

    #[test]
    fn chain_means_and_point_masses() {
        let spec = SyntheticSpec::gaussian_chain(&[0.0, 2.0, -2.0, 0.0], 0.1, 2000, 4);
        let ds = gen_gaussian_chain(&spec).unwrap();
        for (i, &m) in [0.0, 2.0, -2.0, 0.0].iter().enumerate() {
            let got = ds.snapshot(i).samples.column(0).mean().unwrap();
            assert!((got - m).abs() <= 3.0 * 0.1 / 2000f64.sqrt(), "{i}: {got}");
        }
        let ds = gen_gaussian_chain(&SyntheticSpec::gaussian_chain(&[0.0, 1.0, 0.0], 0.0, 5, 0)).unwrap();
        assert!(ds.snapshot(1).samples.iter().all(|&v| v == 1.0));
        assert!(gen_gaussian_chain(&SyntheticSpec::gaussian_chain(&[0.0, 1.0], 0.1, 5, 0)).is_err());
    }

    #[test]
    fn mixture_weights() {
        let spec = SyntheticSpec {
            kind: SyntheticKind::CustomMixture {
                components: vec![
                    vec![Component {
                        weight: 1.0,
                        mean: vec![0.0],
                        std: 0.0,
                    }],
                    vec![
                        Component {
                            weight: 3.0,
                            mean: vec![1.0],
                            std: 0.0,
                        },
                        Component {
                            weight: 1.0,
                            mean: vec![-1.0],
                            std: 0.0,
                        },
                    ],
                ],
            },
            n: 4000,
            noise: 0.0,
            seed: 2,
            times: vec![0.0, 1.0],
        };
        let ds = spec.generate().unwrap();
        let frac = ds.snapshot(1).samples.iter().filter(|&&v| v == 1.0).count() as f64 / 4000.0;
        assert!((frac - 0.75).abs() < 0.03);
    }

    #[test]
    fn save_load_round_trip_and_determinism() {
        let dir = tempfile::tempdir().unwrap();
        let spec = SyntheticSpec::petal(50, 9);
        let ds = gen_petal(&spec).unwrap();
        save_snapshots(&ds, dir.path(), Some(serde_json::to_value(&spec).unwrap())).unwrap();
        let back = load_snapshots(dir.path()).unwrap();
        assert_eq!(back, ds);

        let dir2 = tempfile::tempdir().unwrap();
        save_snapshots(&gen_petal(&spec).unwrap(), dir2.path(), Some(serde_json::to_value(&spec).unwrap())).unwrap();
        for f in ["snapshot_0.csv", "snapshot_4.csv", MANIFEST_FILE] {
            let a = std::fs::read(dir.path().join(f)).unwrap();
            let b = std::fs::read(dir2.path().join(f)).unwrap();
            assert_eq!(a, b, "{f}");
        }
        let head = std::fs::read_to_string(dir.path().join("snapshot_0.csv")).unwrap();
        assert!(head.starts_with("x0,x1\n"));
    }

    #[test]
    fn six_time_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let times: Vec<f64> = (0..6).map(|i| i as f64).collect();
        let snaps = (0..6).map(|i| Array2::from_elem((3, 5), i as f64)).collect();
        let ds = MarginalDataset::new(TimeGrid::new(times).unwrap(), snaps).unwrap();
        save_snapshots(&ds, dir.path(), None).unwrap();
        let back = load_snapshots(dir.path()).unwrap();
        assert_eq!(back.snapshots().len(), 6);
        assert_eq!(back.dim(), 5);
    }

    #[test]
    fn loader_errors() {
        let dir = tempfile::tempdir().unwrap();
        let ds = gen_gaussian_chain(&SyntheticSpec::gaussian_chain(&[0.0, 1.0, 0.0], 0.1, 4, 0)).unwrap();
        save_snapshots(&ds, dir.path(), None).unwrap();
        let p = dir.path().join("snapshot_1.csv");
        std::fs::write(&p, "x0\n0.5\n1.0\nNaN\n").unwrap();
        let msg = load_snapshots(dir.path()).unwrap_err().to_string();
        assert!(msg.contains("row 3"), "{msg}");

        std::fs::write(&p, "x0,x1\n0.5,1\n").unwrap();
        assert!(load_snapshots(dir.path()).unwrap_err().to_string().contains("dimension"));

        std::fs::remove_file(&p).unwrap();
        assert!(load_snapshots(dir.path()).is_err());
        assert!(load_snapshots(&dir.path().join("nope")).is_err());
    }

    #[test]
    fn split_sizes_and_partition() {
        let ds = gen_gaussian_chain(&SyntheticSpec::gaussian_chain(&[0.0, 1.0, 0.0], 1.0, 100, 0)).unwrap();
        let (tr, te) = split(&ds, 0.85, 1).unwrap();
        assert_eq!(tr.snapshot(1).len(), 85);
        assert_eq!(te.snapshot(1).len(), 15);
        for i in 0..3 {
            let joined = ndarray::concatenate(Axis(0), &[tr.snapshot(i).view(), te.snapshot(i).view()]).unwrap();
            assert_eq!(sorted_rows(&joined), sorted_rows(&ds.snapshot(i).samples));
        }
        let (tr2, _) = split(&ds, 0.85, 2).unwrap();
        assert_eq!(tr2.snapshot(0).len(), 85);
        assert_ne!(sorted_rows(&tr2.snapshot(0).samples), sorted_rows(&tr.snapshot(0).samples));

        let tiny = gen_gaussian_chain(&SyntheticSpec::gaussian_chain(&[0.0, 1.0, 0.0], 1.0, 1, 0)).unwrap();
        assert!(split(&tiny, 0.5, 0).is_err());
        assert!(split(&ds, 1.0, 0).is_err());
    }
}
