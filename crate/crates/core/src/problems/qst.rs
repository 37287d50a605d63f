//! Maximum-likelihood quantum state tomography: `f(ρ) = Σ w_k (−log tr(A_k ρ))`
//! with `w_k` the observed outcome frequencies.

use crate::error::Result;
use crate::geometry::fidelity;
use crate::hermitian::DensityMatrix;
use crate::logloss::QuantumDataset;
use crate::record::{CheckpointSchedule, RunRecord};
use crate::solver::{self, SolverConfig};

pub use crate::datagen::QstInstance;

/// Counts become weights; each operator appears once.
pub fn qst_dataset(inst: &QstInstance) -> Result<QuantumDataset> {
    QuantumDataset::from_counts(inst.operators.clone(), &inst.counts)
}

/// Runs LB-SDA on the tomography data. An epoch is one pass over the shots
/// unless `cfg.epoch_samples` says otherwise; fidelity to the ground truth is
/// recorded when it is known.
pub fn qst_estimate(
    inst: &QstInstance,
    cfg: &SolverConfig,
    schedule: &CheckpointSchedule,
) -> Result<(DensityMatrix, RunRecord)> {
    let ds = qst_dataset(inst)?;
    let mut cfg = cfg.clone();
    cfg.epoch_samples.get_or_insert(inst.shots());
    let metric_fn;
    let m: Option<solver::Metric<'_, DensityMatrix>> = match &inst.rho_true {
        Some(truth) => {
            metric_fn = move |rho: &DensityMatrix| fidelity(rho, truth);
            Some(&metric_fn)
        }
        None => None,
    };
    let out = solver::run(&ds, &cfg, schedule, m)?;
    let mut record = out.record;
    if m.is_some() {
        record.metric_name = Some("fidelity".into());
    }
    Ok((out.final_average, record))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{random_measurements, sample_outcomes, w_state};
    use crate::rng::RngStream;

    #[test]
    fn dataset_weights_are_frequencies() {
        let mut rng = RngStream::new(1);
        let rho = w_state(2).unwrap();
        let ens = random_measurements(4, 2, 5, &mut rng).unwrap();
        let inst = sample_outcomes(&rho, &ens, 1000, &mut rng).unwrap();
        let ds = qst_dataset(&inst).unwrap();
        assert_eq!(ds.len(), inst.operators.len());
        for (w, &c) in ds.weights().iter().zip(&inst.counts) {
            assert!((w - c as f64 / 1000.0).abs() < 1e-15);
        }
    }
}
