//! Evaluation protocols: which snapshot a rollout starts from and where the
//! generated samples are compared against held data.

use serde::{Deserialize, Serialize};

use super::{all_metrics, MetricConfig};
use crate::error::{Error, Result};
use crate::reference::ReferenceProcess;
use crate::rng;
use crate::sde::{rollout_from, simulate_forward, Control, SimConfig};
use crate::time_grid::{Direction, MarginalDataset};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// One rollout from the first snapshot, compared at every later time.
    FromT0,
    /// For each `i`, a one-interval rollout from snapshot `i - 1`, compared at `t_i`.
    FromPrev,
    /// Snapshot `index` was excluded from training; compare only there,
    /// rolling out from `t_0` or from the previous snapshot.
    LeaveOneOut { index: usize, from_previous: bool },
    /// One rollout from `t_0`, compared at every held-out time.
    HeldOut,
}

impl Protocol {
    pub fn tag(&self) -> String {
        match self {
            Protocol::FromT0 => "from_t0".into(),
            Protocol::FromPrev => "from_prev".into(),
            Protocol::LeaveOneOut { index, .. } => format!("leave_one_out_{index}"),
            Protocol::HeldOut => "held_out".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub time_index: usize,
    pub time: f64,
    pub w1: f64,
    pub w2: f64,
    pub mmd: f64,
    pub swd: f64,
    pub n_generated: usize,
    pub n_reference: usize,
    /// Rows used for exact W1/W2 after subsampling.
    pub n_assignment: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub protocol: String,
    pub seed: u64,
    pub rows: Vec<EvalRow>,
}

impl EvalReport {
    /// Row for grid index `i`, if evaluated.
    pub fn row(&self, i: usize) -> Option<&EvalRow> {
        self.rows.iter().find(|r| r.time_index == i)
    }

    pub fn mean_of(&self, f: impl Fn(&EvalRow) -> f64) -> f64 {
        self.rows.iter().map(f).sum::<f64>() / self.rows.len().max(1) as f64
    }
}

/// Runs `protocol` on `dataset` (typically the test split) with control `ctrl`.
pub fn evaluate_protocol(
    ctrl: &dyn Control,
    dataset: &MarginalDataset,
    protocol: &Protocol,
    metrics: &MetricConfig,
    sim: &SimConfig,
    reference: &ReferenceProcess,
) -> Result<EvalReport> {
    metrics.validate()?;
    if ctrl.dim() != dataset.dim() {
        return Err(Error::Shape(format!(
            "control dimension {} does not match dataset dimension {}",
            ctrl.dim(),
            dataset.dim()
        )));
    }
    let grid = dataset.grid();
    let train_knots = dataset.training_view().grid().times().to_vec();
    let sim_key = |k: u64| {
        let mut s = sim.clone();
        s.stream = vec![rng::tag::METRIC, k];
        s.record_times.clear();
        s
    };
    let row = |i: usize, generated: ndarray::ArrayView2<'_, f64>| -> Result<EvalRow> {
        let reference_set = dataset.snapshot(i).view();
        let m = all_metrics(generated, reference_set, metrics)?;
        Ok(EvalRow {
            time_index: i,
            time: grid.time(i),
            w1: m.w1,
            w2: m.w2,
            mmd: m.mmd,
            swd: m.swd,
            n_generated: generated.nrows(),
            n_reference: reference_set.nrows(),
            n_assignment: m.n_assignment,
        })
    };

    let rows = match protocol {
        Protocol::FromT0 | Protocol::HeldOut => {
            let tb = rollout_from(
                ctrl,
                dataset.snapshot(0).view(),
                &train_knots,
                grid.times(),
                Direction::Forward,
                &sim_key(0),
                reference,
            )?;
            let targets: Vec<usize> = match protocol {
                Protocol::HeldOut => {
                    let h = dataset.held_out_indices();
                    if h.is_empty() {
                        return Err(Error::Config("held_out protocol needs held-out times".into()));
                    }
                    h
                }
                _ => (1..grid.len()).collect(),
            };
            targets
                .into_iter()
                .map(|i| row(i, tb.at_time(grid.time(i)).expect("grid time recorded")))
                .collect::<Result<Vec<_>>>()?
        }
        Protocol::FromPrev => (1..grid.len())
            .map(|i| {
                let tb = simulate_forward(
                    ctrl,
                    dataset.snapshot(i - 1).view(),
                    grid.time(i - 1),
                    grid.time(i),
                    &sim_key(i as u64),
                    reference,
                )?;
                row(i, tb.last())
            })
            .collect::<Result<Vec<_>>>()?,
        Protocol::LeaveOneOut {
            index,
            from_previous,
        } => {
            let i = *index;
            if i == 0 || i >= grid.len() || !dataset.holdout()[i] {
                return Err(Error::Config(format!(
                    "leave_one_out({i}) needs snapshot {i} to be held out of training"
                )));
            }
            let generated = if *from_previous {
                simulate_forward(
                    ctrl,
                    dataset.snapshot(i - 1).view(),
                    grid.time(i - 1),
                    grid.time(i),
                    &sim_key(i as u64),
                    reference,
                )?
                .last()
                .to_owned()
            } else {
                rollout_from(
                    ctrl,
                    dataset.snapshot(0).view(),
                    &train_knots,
                    &[grid.time(i)],
                    Direction::Forward,
                    &sim_key(0),
                    reference,
                )?
                .at_time(grid.time(i))
                .expect("requested time recorded")
                .to_owned()
            };
            vec![row(i, generated.view())?]
        }
    };
    Ok(EvalReport {
        protocol: protocol.tag(),
        seed: sim.seed,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sde::ZeroControl;
    use crate::time_grid::TimeGrid;
    use ndarray::Array2;

    fn constant_dataset() -> MarginalDataset {
        // every snapshot is the same point cloud; with no dynamics the
        // generated set equals the test set exactly
        let pts = Array2::from_shape_fn((12, 2), |(r, j)| (r * 2 + j) as f64 * 0.1);
        let grid = TimeGrid::new(vec![0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        MarginalDataset::new(grid, vec![pts; 5]).unwrap()
    }

    fn sim() -> SimConfig {
        SimConfig::new(5, 1)
    }

    #[test]
    fn perfect_copy_scores_zero() {
        let ds = constant_dataset();
        let r = ReferenceProcess::degenerate();
        for p in [Protocol::FromT0, Protocol::FromPrev] {
            let rep = evaluate_protocol(&ZeroControl(2), &ds, &p, &MetricConfig::default(), &sim(), &r).unwrap();
            assert_eq!(rep.rows.len(), 4);
            for row in &rep.rows {
                assert_eq!((row.w1, row.w2, row.swd), (0.0, 0.0, 0.0));
                assert!(row.mmd.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn held_out_layouts() {
        let r = ReferenceProcess::degenerate();
        let ds = constant_dataset().with_holdout(&[1, 3]).unwrap();
        let rep = evaluate_protocol(&ZeroControl(2), &ds, &Protocol::HeldOut, &MetricConfig::default(), &sim(), &r)
            .unwrap();
        let idx: Vec<usize> = rep.rows.iter().map(|r| r.time_index).collect();
        assert_eq!(idx, vec![1, 3]);

        let ds = constant_dataset().with_holdout(&[2]).unwrap();
        for from_previous in [false, true] {
            let p = Protocol::LeaveOneOut {
                index: 2,
                from_previous,
            };
            let rep = evaluate_protocol(&ZeroControl(2), &ds, &p, &MetricConfig::default(), &sim(), &r).unwrap();
            assert_eq!(rep.rows.len(), 1);
            assert_eq!(rep.rows[0].time_index, 2);
        }
        let bad = Protocol::LeaveOneOut {
            index: 3,
            from_previous: false,
        };
        assert!(evaluate_protocol(&ZeroControl(2), &ds, &bad, &MetricConfig::default(), &sim(), &r).is_err());
        assert!(evaluate_protocol(
            &ZeroControl(2),
            &constant_dataset(),
            &Protocol::HeldOut,
            &MetricConfig::default(),
            &sim(),
            &r
        )
        .is_err());
        assert!(evaluate_protocol(&ZeroControl(3), &ds, &Protocol::FromT0, &MetricConfig::default(), &sim(), &r)
            .is_err());
    }
}
