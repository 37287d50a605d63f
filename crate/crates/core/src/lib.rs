//! Minimizes expected logarithmic losses over the probability simplex and
//! over density matrices with stochastic dual averaging on the log-det
//! barrier, plus the applications built on it: Poisson inverse problems,
//! maximum-likelihood state tomography, the permanent relaxation and Kelly
//! portfolios.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod barrier;
pub mod baselines;
pub mod datagen;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod hermitian;
pub mod io;
pub mod logloss;
pub mod problems;
pub mod record;
pub mod rng;
pub mod setup;
pub mod solver;

pub use error::{Error, Result};
pub use hermitian::{eigh, DensityMatrix, EigenPair, HermitianMatrix, SimplexVector};
pub use logloss::{ClassicalDataset, Dataset, QuantumDataset};
pub use record::{Checkpoint, CheckpointSchedule, RunRecord};
pub use rng::RngStream;
pub use setup::{Classical, Quantum, Setup};
pub use solver::{Budget, SolverConfig, SolverState};
