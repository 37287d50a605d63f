//! Full-gradient baselines: the EM multiplicative update on the simplex and
//! the iterative-MLE `RρR` update on density matrices.

use crate::error::{Error, Result};
use crate::hermitian::{DensityMatrix, HermitianMatrix, SimplexVector};
use crate::logloss::{ClassicalDataset, Dataset, QuantumDataset, FEASIBILITY_FLOOR};
use crate::record::{Checkpoint, CheckpointSchedule, RunRecord};
use crate::setup::{Classical, Quantum, Setup};
use crate::solver::{Budget, Metric, Stopwatch};

/// Consecutive objective increases after which iMLE is declared divergent.
pub const DIVERGENCE_PATIENCE: usize = 20;

fn inner_checked<S: Setup>(ds: &Dataset<S>, p: &S::Point) -> Result<Vec<f64>> {
    ds.samples()
        .iter()
        .enumerate()
        .map(|(index, s)| {
            let value = S::inner(s, p);
            if value > FEASIBILITY_FLOOR {
                Ok(value)
            } else {
                Err(Error::InfeasibleSample { index, value })
            }
        })
        .collect()
}

fn objective_from(ds_weights: &[f64], inner: &[f64]) -> f64 {
    -ds_weights.iter().zip(inner).map(|(w, v)| w * v.ln()).sum::<f64>()
}

/// `x ← x ⊙ Σ w_i a_i/⟨a_i, x⟩`, renormalized. Also returns `f(x)` at the
/// input point.
pub fn em_step_with_value(ds: &ClassicalDataset, x: &SimplexVector) -> Result<(SimplexVector, f64)> {
    let inner = inner_checked(ds, x)?;
    let mut r = vec![0.0; ds.dim()];
    for ((a, w), v) in ds.samples().iter().zip(ds.weights()).zip(&inner) {
        let c = w / v;
        r.iter_mut().zip(a).for_each(|(rj, aj)| *rj += c * aj);
    }
    let next = x.as_slice().iter().zip(&r).map(|(xj, rj)| xj * rj).collect();
    Ok((SimplexVector::normalized(next)?, objective_from(ds.weights(), &inner)))
}

pub fn em_step(ds: &ClassicalDataset, x: &SimplexVector) -> Result<SimplexVector> {
    em_step_with_value(ds, x).map(|(x, _)| x)
}

/// `ρ ← RρR / tr(RρR)` with `R = Σ w_i A_i/tr(A_i ρ)`. Also returns `f(ρ)`
/// at the input point.
pub fn imle_step_with_value(ds: &QuantumDataset, rho: &DensityMatrix) -> Result<(DensityMatrix, f64)> {
    let inner = inner_checked(ds, rho)?;
    let r = imle_r(ds, &inner);
    let next = HermitianMatrix::new(r.matrix() * rho.matrix() * r.matrix())?;
    Ok((DensityMatrix::normalized(next)?, objective_from(ds.weights(), &inner)))
}

pub fn imle_step(ds: &QuantumDataset, rho: &DensityMatrix) -> Result<DensityMatrix> {
    imle_step_with_value(ds, rho).map(|(r, _)| r)
}

fn imle_r(ds: &QuantumDataset, inner: &[f64]) -> HermitianMatrix {
    let mut r = HermitianMatrix::zeros(ds.dim());
    for ((a, w), v) in ds.samples().iter().zip(ds.weights()).zip(inner) {
        r.add_scaled(w / v, a);
    }
    r
}

/// `R(ρ) = Σ w_i A_i / tr(A_i ρ)`; equals `I` exactly at an interior optimum.
pub fn imle_certificate(ds: &QuantumDataset, rho: &DensityMatrix) -> Result<HermitianMatrix> {
    let inner = inner_checked(ds, rho)?;
    Ok(imle_r(ds, &inner))
}

/// A baseline update with its objective at the input point.
pub trait BaselineStep<S: Setup> {
    const NAME: &'static str;
    fn step(ds: &Dataset<S>, p: &S::Point) -> Result<(S::Point, f64)>;
}

pub struct Em;
pub struct Imle;

impl BaselineStep<Classical> for Em {
    const NAME: &'static str = "em";
    fn step(ds: &ClassicalDataset, p: &SimplexVector) -> Result<(SimplexVector, f64)> {
        em_step_with_value(ds, p)
    }
}

impl BaselineStep<Quantum> for Imle {
    const NAME: &'static str = "imle";
    fn step(ds: &QuantumDataset, p: &DensityMatrix) -> Result<(DensityMatrix, f64)> {
        imle_step_with_value(ds, p)
    }
}

pub struct BaselineOutput<S: Setup> {
    pub record: RunRecord,
    pub final_point: S::Point,
    /// Set when the objective rose for [`DIVERGENCE_PATIENCE`] steps in a row.
    pub diverged: bool,
}

/// Iterates a baseline from `I/d`. Iteration `t` reports the point after
/// `t − 1` updates and counts `t` epochs; `Budget::Epochs` is read as an
/// iteration count.
pub fn run_baseline<S: Setup, B: BaselineStep<S>>(
    ds: &Dataset<S>,
    budget: Budget,
    schedule: &CheckpointSchedule,
    metric: Option<Metric<'_, S::Point>>,
) -> Result<BaselineOutput<S>> {
    let cap = match budget {
        Budget::Iterations(k) => k,
        Budget::Epochs(e) => (e.ceil() as u64).max(1),
        Budget::Seconds(_) => u64::MAX,
    };
    if cap == 0 {
        return Err(Error::Config("iteration budget must be positive".into()));
    }
    let seconds = match budget {
        Budget::Seconds(s) => Some(s),
        _ => None,
    };
    let mut point = S::center(ds.dim());
    let mut record = RunRecord::default();
    let clock = Stopwatch::start();
    let mut next_cp = schedule.next_after(0);
    let mut prev = f64::INFINITY;
    let mut rising = 0usize;
    let mut diverged;
    let mut t = 1u64;
    loop {
        let (next, value) = B::step(ds, &point)?;
        if value > prev {
            rising += 1;
        } else {
            rising = 0;
        }
        prev = value;
        diverged = rising >= DIVERGENCE_PATIENCE;
        let elapsed = clock.elapsed();
        let last = t >= cap || diverged || seconds.is_some_and(|s| elapsed >= s);
        if last || next_cp == Some(t) {
            record.checkpoints.push(Checkpoint {
                iter: t,
                epochs: t as f64,
                elapsed_s: elapsed,
                objective: value,
                metric: metric.map(|m| m(&point)).transpose()?,
            });
            next_cp = schedule.next_after(t);
        }
        if last {
            break;
        }
        point = next;
        t += 1;
    }
    Ok(BaselineOutput {
        record,
        final_point: point,
        diverged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::test_util::random_psd;
    use crate::logloss::f_value;
    use crate::rng::RngStream;
    use rand::Rng;

    #[test]
    fn em_decreases_objective() {
        let mut rng = RngStream::new(1);
        let samples: Vec<Vec<f64>> = (0..30).map(|_| (0..5).map(|_| rng.random::<f64>()).collect()).collect();
        let ds = ClassicalDataset::uniform(samples).unwrap();
        let mut x = SimplexVector::uniform(5);
        let mut prev = f_value(&ds, &x).unwrap();
        for _ in 0..200 {
            let (next, value) = em_step_with_value(&ds, &x).unwrap();
            assert!((value - prev).abs() < 1e-15);
            x = next;
            let now = f_value(&ds, &x).unwrap();
            assert!(now <= prev + 1e-15);
            prev = now;
        }
    }

    #[test]
    fn em_fixed_point_on_symmetric_data() {
        let ds = ClassicalDataset::uniform(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let x = em_step(&ds, &SimplexVector::uniform(2)).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn imle_reaches_certificate() {
        let mut rng = RngStream::new(2);
        let d = 3;
        let samples = (0..50).map(|_| random_psd(d, 1, &mut rng)).collect();
        let ds = QuantumDataset::uniform(samples).unwrap();
        let out = run_baseline::<Quantum, Imle>(&ds, Budget::Iterations(20_000), &CheckpointSchedule::default(), None)
            .unwrap();
        assert!(!out.diverged);
        let r = imle_certificate(&ds, &out.final_point).unwrap();
        let dev = r.max_abs_diff(&HermitianMatrix::identity(d));
        assert!(dev < 1e-8, "{dev}");
        let objs: Vec<f64> = out.record.checkpoints.iter().map(|c| c.objective).collect();
        assert!(objs.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn baseline_record_shape() {
        let ds = ClassicalDataset::uniform(vec![vec![1.0, 2.0], vec![3.0, 1.0]]).unwrap();
        let out =
            run_baseline::<Classical, Em>(&ds, Budget::Iterations(1), &CheckpointSchedule::default(), None).unwrap();
        assert_eq!(out.record.checkpoints.len(), 1);
        let c = &out.record.checkpoints[0];
        assert_eq!((c.iter, c.epochs), (1, 1.0));
        assert!((c.objective - f_value(&ds, &SimplexVector::uniform(2)).unwrap()).abs() < 1e-15);
        let out =
            run_baseline::<Classical, Em>(&ds, Budget::Epochs(10.0), &CheckpointSchedule::default(), None).unwrap();
        assert_eq!(out.record.last().unwrap().iter, 10);
    }
}
