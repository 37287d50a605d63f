//! The applications: Poisson inverse problems, state tomography, the PSD
//! permanent relaxation and Kelly portfolios.

pub mod kelly;
pub mod permanent;
pub mod pip;
pub mod qst;

pub use kelly::{kelly_dataset, KellyInstance};
pub use permanent::{
    permanent_exact, permanent_permutation_sum, permanent_relaxation, PermanentInstance, RelaxationResult,
};
pub use pip::{normalized_estimation_error, pip_to_classical, recover_lambda, PoissonInstance, ReformulationContext};
pub use qst::{qst_dataset, qst_estimate, QstInstance};
