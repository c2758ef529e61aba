//! Subcommand implementations.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use msbm_core::datasets::save_snapshots;
use msbm_core::metrics::{evaluate_protocol, EvalReport, EvalRow, Protocol};
use msbm_core::sde::rollout_full;
use msbm_core::train::{MsbmCheckpoint, MsbmTrainer};
use msbm_core::{ControlFunction, Direction, MarginalDataset, Mode};
use serde::{Deserialize, Serialize};

use crate::config::{DatasetSource, ExperimentConfig};
use crate::output::{build_id, ensure_dir, provenance, read_json, write_csv, write_json};

// ---------------------------------------------------------------- generate

pub fn generate(cfg: &ExperimentConfig) -> Result<()> {
    let mut targets = vec![("data", &cfg.dataset)];
    if let Some(e) = &cfg.eval_dataset {
        targets.push(("eval_data", e));
    }
    for (name, src) in targets {
        let DatasetSource::Synthetic(spec) = src else {
            if name == "data" {
                bail!("generate needs a synthetic dataset spec, not a path");
            }
            continue;
        };
        spec.validate().context("invalid dataset spec")?;
        let ds = spec.generate()?;
        let dir = cfg.out.join(name);
        let meta = serde_json::json!({
            "build": build_id(),
            "command": "generate",
            "config": cfg,
        });
        save_snapshots(&ds, &dir, Some(meta)).with_context(|| format!("writing {}", dir.display()))?;
        log::info!("wrote {} snapshots to {}", ds.grid().len(), dir.display());
    }
    Ok(())
}

// ---------------------------------------------------------------- train

pub fn train(cfg: &ExperimentConfig) -> Result<()> {
    let ds = cfg.training_data()?;
    let mode = cfg.train.mode.as_str();
    for &seed in &cfg.seeds {
        let tcfg = cfg.train_config(seed);
        let dir = cfg.run_dir(mode, seed);
        ensure_dir(&dir)?;
        log::info!("training {mode} seed {seed}: {} outer iterations", tcfg.outer_iterations);
        let mut trainer = MsbmTrainer::new(&ds, tcfg)?;
        while !trainer.is_done() {
            if let Err(e) = trainer.step() {
                let mut report = trainer.report().clone();
                report.error = Some(e.to_string());
                write_json(&dir.join("report.json"), "train", cfg, &report)?;
                return Err(anyhow!(e).context(format!("training {mode} seed {seed} stopped; partial report saved")));
            }
            let rec = trainer.report().iterations.last().expect("one iteration recorded");
            let t = &rec.timings;
            log::info!(
                "iteration {}: fit_b {:.1}s refresh_b {:.1}s fit_f {:.1}s refresh_f {:.1}s track {:.1}s, w2 {:?}",
                rec.iteration,
                t.fit_backward_s,
                t.refresh_backward_s,
                t.fit_forward_s,
                t.refresh_forward_s,
                t.track_s,
                rec.w2
            );
        }
        write_json(&dir.join("checkpoint.json"), "train", cfg, &trainer.checkpoint())?;
        write_json(&dir.join("report.json"), "train", cfg, trainer.report())?;
        log::info!("{mode} seed {seed} done in {:.1}s", trainer.report().total_seconds());
    }
    Ok(())
}

/// Reads a trainer checkpoint, either wrapped by this tool or bare.
pub fn load_checkpoint(path: &Path) -> Result<MsbmCheckpoint> {
    if !path.exists() {
        bail!("checkpoint {} not found", path.display());
    }
    match read_json::<MsbmCheckpoint>(path) {
        Ok(env) => Ok(env.result),
        Err(_) => MsbmCheckpoint::load(path).with_context(|| format!("loading checkpoint {}", path.display())),
    }
}

fn checkpoints(cfg: &ExperimentConfig, mode: &str, explicit: Option<&Path>) -> Vec<(u64, PathBuf)> {
    cfg.seeds
        .iter()
        .map(|&s| (s, explicit.map(Path::to_path_buf).unwrap_or_else(|| cfg.checkpoint_path(mode, s))))
        .collect()
}

// ---------------------------------------------------------------- simulate

pub fn simulate(cfg: &ExperimentConfig, mode: Mode, checkpoint: Option<&Path>, direction: Direction) -> Result<()> {
    let ds = cfg.evaluation_data()?;
    for (seed, path) in checkpoints(cfg, mode.as_str(), checkpoint) {
        let ckpt = load_checkpoint(&path)?;
        let (fwd, bwd) = ckpt.ema_controls();
        let ctrl = match direction {
            Direction::Forward => fwd,
            Direction::Backward => bwd,
        };
        let out = cfg.run_dir(mode.as_str(), seed).join(format!("trajectories_{}.csv", direction.as_str()));
        write_trajectories(cfg, "simulate", &ctrl, &ckpt, &ds, direction, seed, &out)?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn write_trajectories(
    cfg: &ExperimentConfig,
    command: &str,
    ctrl: &ControlFunction,
    ckpt: &MsbmCheckpoint,
    ds: &MarginalDataset,
    direction: Direction,
    seed: u64,
    out: &Path,
) -> Result<()> {
    let (sim, _) = cfg.eval_configs(seed);
    let tb = rollout_full(ctrl, ds, direction, &sim, &ckpt.config.reference()?)?;
    if let Some(parent) = out.parent() {
        ensure_dir(parent)?;
    }
    tb.write_csv(out, &provenance(command, cfg)?)?;
    log::info!("wrote {}", out.display());
    Ok(())
}

// ---------------------------------------------------------------- evaluate

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub time_index: usize,
    pub time: f64,
    pub n_seeds: usize,
    pub w1_mean: f64,
    pub w1_std: f64,
    pub w2_mean: f64,
    pub w2_std: f64,
    pub mmd_mean: f64,
    pub mmd_std: f64,
    pub swd_mean: f64,
    pub swd_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSummary {
    pub protocol: String,
    pub seeds: Vec<u64>,
    pub rows: Vec<SummaryRow>,
}

/// Sample mean and standard deviation (0 for a single value).
pub fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn summarize(protocol: &str, seeds: &[u64], reports: &[EvalReport]) -> ProtocolSummary {
    let rows = reports[0]
        .rows
        .iter()
        .enumerate()
        .map(|(k, first)| {
            let col = |f: fn(&EvalRow) -> f64| -> (f64, f64) {
                mean_std(&reports.iter().map(|r| f(&r.rows[k])).collect::<Vec<_>>())
            };
            let (w1_mean, w1_std) = col(|r| r.w1);
            let (w2_mean, w2_std) = col(|r| r.w2);
            let (mmd_mean, mmd_std) = col(|r| r.mmd);
            let (swd_mean, swd_std) = col(|r| r.swd);
            SummaryRow {
                time_index: first.time_index,
                time: first.time,
                n_seeds: reports.len(),
                w1_mean,
                w1_std,
                w2_mean,
                w2_std,
                mmd_mean,
                mmd_std,
                swd_mean,
                swd_std,
            }
        })
        .collect();
    ProtocolSummary {
        protocol: protocol.to_string(),
        seeds: seeds.to_vec(),
        rows,
    }
}

fn eval_one(
    cfg: &ExperimentConfig,
    ckpt: &MsbmCheckpoint,
    ds: &MarginalDataset,
    protocol: &Protocol,
    seed: u64,
) -> Result<EvalReport> {
    let (sim, metrics) = cfg.eval_configs(seed);
    let (fwd, _) = ckpt.ema_controls();
    if fwd.dim() != ds.dim() {
        bail!("checkpoint dimension {} does not match dataset dimension {}", fwd.dim(), ds.dim());
    }
    let reference = ckpt.config.reference()?;
    evaluate_protocol(&fwd, ds, protocol, &metrics, &sim, &reference)
        .with_context(|| format!("evaluating protocol {}", protocol.tag()))
}

fn report_rows(r: &EvalReport) -> (Vec<String>, Vec<Vec<String>>) {
    let header = ["time_index", "time", "w1", "w2", "mmd", "swd", "n_generated", "n_reference", "n_assignment"]
        .map(String::from)
        .to_vec();
    let rows = r
        .rows
        .iter()
        .map(|x| {
            vec![
                x.time_index.to_string(),
                x.time.to_string(),
                x.w1.to_string(),
                x.w2.to_string(),
                x.mmd.to_string(),
                x.swd.to_string(),
                x.n_generated.to_string(),
                x.n_reference.to_string(),
                x.n_assignment.to_string(),
            ]
        })
        .collect();
    (header, rows)
}

fn summary_rows(s: &ProtocolSummary) -> (Vec<String>, Vec<Vec<String>>) {
    let header = [
        "time_index", "time", "n_seeds", "w1_mean", "w1_std", "w2_mean", "w2_std", "mmd_mean", "mmd_std", "swd_mean",
        "swd_std",
    ]
    .map(String::from)
    .to_vec();
    let rows = s
        .rows
        .iter()
        .map(|r| {
            vec![
                r.time_index.to_string(),
                r.time.to_string(),
                r.n_seeds.to_string(),
                r.w1_mean.to_string(),
                r.w1_std.to_string(),
                r.w2_mean.to_string(),
                r.w2_std.to_string(),
                r.mmd_mean.to_string(),
                r.mmd_std.to_string(),
                r.swd_mean.to_string(),
                r.swd_std.to_string(),
            ]
        })
        .collect();
    (header, rows)
}

pub fn evaluate(cfg: &ExperimentConfig, mode: Mode, checkpoint: Option<&Path>) -> Result<()> {
    let ds = cfg.evaluation_data()?;
    let runs = checkpoints(cfg, mode.as_str(), checkpoint);
    let ckpts: Vec<MsbmCheckpoint> = runs.iter().map(|(_, p)| load_checkpoint(p)).collect::<Result<_>>()?;
    let dir = cfg.out.join(mode.as_str()).join("eval");
    for protocol in &cfg.protocols {
        let tag = protocol.tag();
        let mut reports = Vec::new();
        for ((seed, _), ckpt) in runs.iter().zip(&ckpts) {
            let rep = eval_one(cfg, ckpt, &ds, protocol, *seed)?;
            let (h, rows) = report_rows(&rep);
            write_csv(&dir.join(format!("{tag}_seed_{seed}.csv")), "evaluate", cfg, &h, &rows)?;
            write_json(&dir.join(format!("{tag}_seed_{seed}.json")), "evaluate", cfg, &rep)?;
            reports.push(rep);
        }
        let summary = summarize(&tag, &cfg.seeds, &reports);
        let (h, rows) = summary_rows(&summary);
        write_csv(&dir.join(format!("{tag}_summary.csv")), "evaluate", cfg, &h, &rows)?;
        write_json(&dir.join(format!("{tag}_summary.json")), "evaluate", cfg, &summary)?;
    }
    Ok(())
}

// ---------------------------------------------------------------- compare

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub protocols: Vec<ComparedProtocol>,
    /// Mean training wall-clock seconds over seeds.
    pub runtime_s: Runtime,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparedProtocol {
    pub protocol: String,
    pub msbm: ProtocolSummary,
    pub naive: ProtocolSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Runtime {
    pub msbm: f64,
    pub naive: f64,
}

pub fn compare(cfg: &ExperimentConfig, msbm: Option<&Path>, naive: Option<&Path>) -> Result<()> {
    let ds = cfg.evaluation_data()?;
    let load_all = |mode: &str, explicit: Option<&Path>| -> Result<Vec<(u64, MsbmCheckpoint)>> {
        checkpoints(cfg, mode, explicit)
            .into_iter()
            .map(|(s, p)| Ok((s, load_checkpoint(&p)?)))
            .collect()
    };
    let a = load_all("msbm", msbm)?;
    let b = load_all("naive", naive)?;
    let dir = cfg.out.join("compare");

    let mut protocols = Vec::new();
    for protocol in &cfg.protocols {
        let tag = protocol.tag();
        let run = |runs: &[(u64, MsbmCheckpoint)]| -> Result<ProtocolSummary> {
            let reports: Vec<EvalReport> =
                runs.iter().map(|(s, c)| eval_one(cfg, c, &ds, protocol, *s)).collect::<Result<_>>()?;
            Ok(summarize(&tag, &cfg.seeds, &reports))
        };
        protocols.push(ComparedProtocol {
            protocol: tag.clone(),
            msbm: run(&a)?,
            naive: run(&b)?,
        });
    }
    let mean_runtime = |runs: &[(u64, MsbmCheckpoint)]| {
        mean_std(&runs.iter().map(|(_, c)| c.report.total_seconds()).collect::<Vec<_>>()).0
    };
    let cmp = Comparison {
        protocols,
        runtime_s: Runtime {
            msbm: mean_runtime(&a),
            naive: mean_runtime(&b),
        },
    };

    let header = [
        "protocol", "time_index", "time", "metric", "msbm_mean", "msbm_std", "naive_mean", "naive_std",
    ]
    .map(String::from)
    .to_vec();
    let mut rows = Vec::new();
    for p in &cmp.protocols {
        for (m, n) in p.msbm.rows.iter().zip(&p.naive.rows) {
            let metrics: [(&str, (f64, f64), (f64, f64)); 4] = [
                ("w1", (m.w1_mean, m.w1_std), (n.w1_mean, n.w1_std)),
                ("w2", (m.w2_mean, m.w2_std), (n.w2_mean, n.w2_std)),
                ("mmd", (m.mmd_mean, m.mmd_std), (n.mmd_mean, n.mmd_std)),
                ("swd", (m.swd_mean, m.swd_std), (n.swd_mean, n.swd_std)),
            ];
            for (name, ms, ns) in metrics {
                rows.push(vec![
                    p.protocol.clone(),
                    m.time_index.to_string(),
                    m.time.to_string(),
                    name.to_string(),
                    ms.0.to_string(),
                    ms.1.to_string(),
                    ns.0.to_string(),
                    ns.1.to_string(),
                ]);
            }
        }
    }
    for (name, v) in [("msbm", cmp.runtime_s.msbm), ("naive", cmp.runtime_s.naive)] {
        log::info!("{name} mean training time {v:.1}s");
    }
    write_csv(&dir.join("compare.csv"), "compare", cfg, &header, &rows)?;
    write_json(&dir.join("compare.json"), "compare", cfg, &cmp)?;

    for (mode, runs) in [("msbm", &a), ("naive", &b)] {
        for (seed, ckpt) in runs.iter() {
            let (fwd, _) = ckpt.ema_controls();
            let out = dir.join(format!("trajectories_{mode}_seed_{seed}.csv"));
            write_trajectories(cfg, "compare", &fwd, ckpt, &ds, Direction::Forward, *seed, &out)?;
        }
    }
    Ok(())
}
