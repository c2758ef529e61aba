//! Multi-marginal Schrödinger bridge matching.
//!
//! Learns forward and backward controls of a Brownian reference so that the
//! controlled diffusion matches population snapshots observed at a sequence of
//! times. Each sub-interval between consecutive snapshots is bridged locally
//! and the local solutions share one time-conditioned network per direction.
//!
//! The pieces, bottom-up:
//! - [`time_grid`]: observation times and snapshot containers
//! - [`reference`]: Brownian bridges and regression targets
//! - [`control`]: the residual MLP control, Adam and EMA
//! - [`sde`]: Euler–Maruyama rollouts
//! - [`train`]: coupling initialization, batches, refresh and the outer loop
//! - [`metrics`]: W1/W2, sliced Wasserstein, MMD and evaluation protocols
//! - [`datasets`]: synthetic generators and the snapshot directory format

pub mod control;
pub mod coupling;
pub mod datasets;
pub mod error;
pub mod metrics;
pub mod reference;
pub mod rng;
pub mod sde;
pub mod time_grid;
pub mod train;

pub use control::{Architecture, ControlFunction, OptimizerConfig};
pub use coupling::IntervalCoupling;
pub use error::{Error, Result};
pub use reference::ReferenceProcess;
pub use sde::{Control, SimConfig, TrajectoryBatch};
pub use time_grid::{Direction, MarginalDataset, TimeGrid};
pub use train::{MsbmConfig, Mode, TrainOutput, TrainReport};
