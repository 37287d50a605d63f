//! Permanents of PSD matrices and their density-matrix relaxation
//! `rel A = max_ρ Π_i tr((d v_i v_i*) ρ)` over the eigenvectors `v_i` of `A`.

use crate::error::{Error, Result};
use crate::hermitian::{c64, eigh, CMatrix, DensityMatrix, HermitianMatrix, C64, PSD_TOL};
use crate::logloss::{f_value, QuantumDataset};
use crate::record::{CheckpointSchedule, RunRecord};
use crate::solver::{self, SolverConfig};

/// Largest dimension [`permanent_exact`] accepts.
pub const MAX_EXACT_DIM: usize = 12;
/// Largest dimension [`permanent_permutation_sum`] accepts.
pub const MAX_BRUTE_DIM: usize = 8;

fn check_square(a: &CMatrix, limit: usize) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if a.nrows() > limit {
        return Err(Error::PermanentTooLarge(a.nrows()));
    }
    Ok(a.nrows())
}

/// Ryser's formula with Gray-code subset order, `O(2^d d)`.
pub fn permanent_exact(a: &CMatrix) -> Result<C64> {
    let d = check_square(a, MAX_EXACT_DIM)?;
    if d == 0 {
        return Ok(c64(1.0, 0.0));
    }
    let mut row_sums = vec![c64(0.0, 0.0); d];
    let mut in_set = vec![false; d];
    let mut size = 0usize;
    let mut total = c64(0.0, 0.0);
    for k in 1u64..(1 << d) {
        let j = k.trailing_zeros() as usize;
        let sign = if in_set[j] { -1.0 } else { 1.0 };
        in_set[j] = !in_set[j];
        if in_set[j] {
            size += 1;
        } else {
            size -= 1;
        }
        for (i, r) in row_sums.iter_mut().enumerate() {
            *r += a[(i, j)] * sign;
        }
        let prod = row_sums.iter().fold(c64(1.0, 0.0), |p, r| p * r);
        if size.is_multiple_of(2) {
            total += prod;
        } else {
            total -= prod;
        }
    }
    Ok(if d % 2 == 0 { total } else { -total })
}

/// `Σ_π Π_i A_{i,π(i)}` over all permutations.
pub fn permanent_permutation_sum(a: &CMatrix) -> Result<C64> {
    let d = check_square(a, MAX_BRUTE_DIM)?;
    fn rec(a: &CMatrix, row: usize, used: &mut [bool], acc: C64, total: &mut C64) {
        if row == used.len() {
            *total += acc;
            return;
        }
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                rec(a, row + 1, used, acc * a[(row, j)], total);
                used[j] = false;
            }
        }
    }
    let mut total = c64(0.0, 0.0);
    rec(a, 0, &mut vec![false; d], c64(1.0, 0.0), &mut total);
    Ok(total)
}

#[derive(Clone, Debug)]
pub struct PermanentInstance {
    pub a: HermitianMatrix,
}

impl PermanentInstance {
    pub fn new(a: HermitianMatrix) -> Result<Self> {
        let min = eigh(&a)?.min();
        if min < -PSD_TOL {
            return Err(Error::NotPsd(min));
        }
        Ok(Self { a })
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    /// Samples `d v_i v_i*` with uniform weights.
    pub fn dataset(&self) -> Result<QuantumDataset> {
        let d = self.dim();
        let eig = eigh(&self.a)?;
        let samples = (0..d)
            .map(|i| {
                let v: Vec<C64> = eig.vectors.column(i).iter().copied().collect();
                HermitianMatrix::rank_one(&v).scaled(d as f64)
            })
            .collect();
        QuantumDataset::uniform(samples)
    }
}

/// `Π_i tr(A_i ρ)` for the relaxation samples.
pub fn relaxation_product(ds: &QuantumDataset, rho: &DensityMatrix) -> f64 {
    ds.samples().iter().map(|s| rho.expectation(s)).product()
}

#[derive(Clone, Debug)]
pub struct RelaxationResult {
    pub rel: f64,
    pub rho: DensityMatrix,
    pub record: RunRecord,
}

/// Solves the relaxation with LB-SDA; `rel = exp(−d f(ρ̄))`.
pub fn permanent_relaxation(
    p: &PermanentInstance,
    cfg: &SolverConfig,
    schedule: &CheckpointSchedule,
) -> Result<RelaxationResult> {
    let ds = p.dataset()?;
    let d = p.dim() as f64;
    let value = |rho: &DensityMatrix| Ok((-d * f_value(&ds, rho)?).exp());
    let out = solver::run(&ds, cfg, schedule, Some(&value))?;
    let mut record = out.record;
    record.metric_name = Some("rel".into());
    let rel = value(&out.final_average)?;
    Ok(RelaxationResult {
        rel,
        rho: out.final_average,
        record,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::random_density;
    use crate::rng::RngStream;
    use rand::Rng;

    fn random_complex(d: usize, rng: &mut RngStream) -> CMatrix {
        CMatrix::from_fn(d, d, |_, _| c64(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    #[test]
    fn small_permanents() {
        assert_eq!(permanent_exact(&CMatrix::identity(4, 4)).unwrap(), c64(1.0, 0.0));
        let m = CMatrix::from_row_slice(2, 2, &[c64(1.0, 0.0), c64(2.0, 1.0), c64(3.0, 0.0), c64(4.0, -1.0)]);
        let expect = m[(0, 0)] * m[(1, 1)] + m[(0, 1)] * m[(1, 0)];
        assert!((permanent_exact(&m).unwrap() - expect).norm() < 1e-14);
        let ones = CMatrix::from_element(4, 4, c64(1.0, 0.0));
        assert!((permanent_exact(&ones).unwrap().re - 24.0).abs() < 1e-12);
    }

    #[test]
    fn ryser_matches_permutation_sum() {
        let mut rng = RngStream::new(11);
        for d in 1..=6 {
            let m = random_complex(d, &mut rng);
            let r = permanent_exact(&m).unwrap();
            let b = permanent_permutation_sum(&m).unwrap();
            assert!((r - b).norm() <= 1e-9 * b.norm().max(1e-300), "d={d}");
        }
    }

    #[test]
    fn size_limits() {
        assert!(matches!(
            permanent_exact(&CMatrix::identity(13, 13)),
            Err(Error::PermanentTooLarge(13))
        ));
        assert!(permanent_exact(&CMatrix::zeros(2, 3)).is_err());
        assert!(permanent_exact(&CMatrix::identity(12, 12)).is_ok());
    }

    #[test]
    fn identity_relaxation_is_one() {
        let p = PermanentInstance::new(HermitianMatrix::identity(2)).unwrap();
        let cfg = SolverConfig::new(2)
            .with_batch_size(2)
            .with_budget(solver::Budget::Iterations(5000));
        let r = permanent_relaxation(&p, &cfg, &CheckpointSchedule::default()).unwrap();
        assert!((r.rel - 1.0).abs() < 1e-3, "{}", r.rel);
        let ds = p.dataset().unwrap();
        assert!((relaxation_product(&ds, &r.rho) - r.rel).abs() < 1e-9);
    }

    #[test]
    fn one_dimensional_relaxation() {
        let p = PermanentInstance::new(HermitianMatrix::from_real_diagonal(&[7.0])).unwrap();
        let cfg = SolverConfig::new(1).with_budget(solver::Budget::Iterations(3));
        let r = permanent_relaxation(&p, &cfg, &CheckpointSchedule::default()).unwrap();
        assert!((r.rel - 1.0).abs() < 1e-12);
    }

    #[test]
    fn psd_permanent_bounds() {
        // Marcus: per A ≥ Π a_ii for PSD A
        let mut rng = RngStream::new(12);
        for _ in 0..20 {
            let rho = random_density(3, &mut rng).unwrap();
            let per = permanent_exact(rho.matrix()).unwrap();
            assert!(per.im.abs() < 1e-14);
            let diag: f64 = rho.as_hermitian().diagonal().iter().product();
            assert!(per.re >= diag - 1e-15);
        }
        assert!(PermanentInstance::new(HermitianMatrix::from_real_diagonal(&[1.0, -1.0])).is_err());
    }
}
