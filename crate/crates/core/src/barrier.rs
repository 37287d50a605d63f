//! The dual-averaging subproblem `argmin_{ρ ∈ D_d} η tr(Gρ) − log det ρ`.
//!
//! Stationarity gives `ρ = (ηG + νI)⁻¹` with the scalar `ν` fixed by the trace
//! constraint. After one eigendecomposition of `G` the problem is the root of
//! `φ(ν) = Σ_i 1/(ηλ_i + ν) − 1`, which is convex and decreasing on its
//! domain, so Newton started left of the root increases monotonically to it.
//!
//! Newton runs on the shifted variable `s = ν + η λ_min`. With `μ_i = η(λ_i −
//! λ_min) ≥ 0` the root satisfies `1 ≤ s ≤ d`, which is also the bisection
//! bracket used when Newton runs out of iterations.

use crate::error::{Error, Result};
use crate::hermitian::{eigh, DensityMatrix, EigenPair, HermitianMatrix, SimplexVector};

#[derive(Clone, Copy, Debug)]
pub struct NewtonOptions {
    /// Exit when `|tr ρ − 1| ≤ tol`.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iters: 100,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SubproblemReport {
    /// The multiplier `ν` of the trace constraint.
    pub nu: f64,
    pub newton_iters: usize,
    /// `|Σ_i 1/(ηλ_i + ν) − 1|` at exit.
    pub kkt_residual: f64,
    pub used_bisection: bool,
}

const BISECTION_MAX_ITERS: usize = 200;

/// Solves for the eigenvalues `1/(ηλ_i + ν)` of the minimizer, in the order of
/// `spectrum`.
pub fn solve_spectrum(spectrum: &[f64], eta: f64, opts: &NewtonOptions) -> Result<(Vec<f64>, SubproblemReport)> {
    let d = spectrum.len();
    if d == 0 {
        return Err(Error::DimensionMismatch { expected: 1, got: 0 });
    }
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::Config(format!("learning rate must be positive, got {eta}")));
    }
    let lambda_min = spectrum.iter().copied().fold(f64::INFINITY, f64::min);
    let lambda_max = spectrum.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let fail = |residual: f64| Error::Subproblem {
        eta,
        lambda_min,
        lambda_max,
        residual,
    };
    if !lambda_min.is_finite() || !lambda_max.is_finite() {
        return Err(fail(f64::NAN));
    }
    let mu: Vec<f64> = spectrum.iter().map(|l| eta * (l - lambda_min)).collect();
    let phi = |s: f64| -> (f64, f64) {
        let mut value = -1.0;
        let mut slope = 0.0;
        for m in &mu {
            let w = 1.0 / (m + s);
            value += w;
            slope -= w * w;
        }
        (value, slope)
    };

    let df = d as f64;
    let mean_mu = mu.iter().sum::<f64>() / df;
    // d − η·mean(λ) in the unshifted variable; Jensen puts it left of the root
    let mut s = (df - mean_mu).max(1.0);
    let mut iters = 0;
    let mut residual = f64::INFINITY;
    while iters < opts.max_iters {
        let (value, slope) = phi(s);
        residual = value.abs();
        if residual <= opts.tol {
            break;
        }
        iters += 1;
        let next = s - value / slope;
        if !(next.is_finite() && next >= 1.0 && next <= df) {
            break;
        }
        s = next;
    }
    let mut used_bisection = false;
    if !(residual <= opts.tol) {
        used_bisection = true;
        let (mut lo, mut hi) = (1.0_f64, df);
        for _ in 0..BISECTION_MAX_ITERS {
            s = 0.5 * (lo + hi);
            let (value, _) = phi(s);
            residual = value.abs();
            if residual <= opts.tol {
                break;
            }
            if value > 0.0 {
                lo = s;
            } else {
                hi = s;
            }
        }
        if !(residual <= opts.tol) {
            return Err(fail(residual));
        }
    }
    let weights = mu.iter().map(|m| 1.0 / (m + s)).collect();
    Ok((
        weights,
        SubproblemReport {
            nu: s - eta * lambda_min,
            newton_iters: iters,
            kkt_residual: residual,
            used_bisection,
        },
    ))
}

/// Minimizer over density matrices; shares eigenvectors with `g_cum`.
pub fn barrier_argmin_quantum(
    g_cum: &HermitianMatrix,
    eta: f64,
    opts: &NewtonOptions,
) -> Result<(DensityMatrix, SubproblemReport)> {
    let eig = eigh(g_cum)?;
    let (weights, report) = solve_spectrum(&eig.values, eta, opts)?;
    // ascending λ maps to descending weights
    let d = weights.len();
    let values: Vec<f64> = weights.iter().rev().copied().collect();
    let vectors = crate::hermitian::CMatrix::from_fn(d, d, |i, j| eig.vectors[(i, d - 1 - j)]);
    let rho = DensityMatrix::from_eigen_unchecked(EigenPair { values, vectors });
    Ok((rho, report))
}

/// Minimizer over the simplex; no eigendecomposition.
pub fn barrier_argmin_classical(
    v_cum: &[f64],
    eta: f64,
    opts: &NewtonOptions,
) -> Result<(SimplexVector, SubproblemReport)> {
    let (weights, report) = solve_spectrum(v_cum, eta, opts)?;
    Ok((SimplexVector::from_vec_unchecked(weights), report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::test_util::random_hermitian;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const GOLDEN: f64 = 1.618_033_988_749_895;

    #[test]
    fn zero_gradient_gives_maximally_mixed() {
        let opts = NewtonOptions::default();
        for eta in [0.1, 1.0, 50.0] {
            let (rho, rep) = barrier_argmin_quantum(&HermitianMatrix::zeros(3), eta, &opts).unwrap();
            assert!(
                rho.as_hermitian()
                    .max_abs_diff(&HermitianMatrix::identity(3).scaled(1.0 / 3.0))
                    < 1e-15
            );
            assert!((rep.nu - 3.0).abs() < 1e-12);
            assert_eq!(rep.newton_iters, 0);
        }
    }

    #[test]
    fn multiple_of_identity_gives_maximally_mixed() {
        let opts = NewtonOptions::default();
        let g = HermitianMatrix::identity(4).scaled(-7.5);
        let (rho, _) = barrier_argmin_quantum(&g, 0.3, &opts).unwrap();
        assert!(
            rho.as_hermitian()
                .max_abs_diff(&HermitianMatrix::identity(4).scaled(0.25))
                < 1e-15
        );
    }

    #[test]
    fn golden_ratio_instance() {
        let opts = NewtonOptions::default();
        let g = HermitianMatrix::from_real_diagonal(&[0.0, 1.0]);
        let (rho, rep) = barrier_argmin_quantum(&g, 1.0, &opts).unwrap();
        assert!((rep.nu - GOLDEN).abs() < 1e-12);
        let expected = HermitianMatrix::from_real_diagonal(&[1.0 / GOLDEN, 1.0 / (1.0 + GOLDEN)]);
        assert!(rho.as_hermitian().max_abs_diff(&expected) < 1e-12);

        let (x, rep) = barrier_argmin_classical(&[0.0, 1.0], 1.0, &opts).unwrap();
        assert!((rep.nu - GOLDEN).abs() < 1e-12);
        assert!((x[0] - 0.618_033_988_749_895).abs() < 1e-12);
        assert!((x[1] - 0.381_966_011_250_105).abs() < 1e-12);
    }

    #[test]
    fn classical_examples() {
        let opts = NewtonOptions::default();
        let (x, _) = barrier_argmin_classical(&[0.0; 5], 2.0, &opts).unwrap();
        assert!(x.as_slice().iter().all(|v| (v - 0.2).abs() < 1e-15));
        let v = [0.3, -1.2, 4.0, 0.0];
        let shifted: Vec<f64> = v.iter().map(|a| a + 17.0).collect();
        let (a, _) = barrier_argmin_classical(&v, 0.7, &opts).unwrap();
        let (b, _) = barrier_argmin_classical(&shifted, 0.7, &opts).unwrap();
        for i in 0..4 {
            assert!((a[i] - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn quantum_matches_classical_on_diagonal() {
        let opts = NewtonOptions::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let v: Vec<f64> = (0..6).map(|_| rng.random::<f64>() * 10.0 - 5.0).collect();
            let eta = 0.1 + rng.random::<f64>();
            let (x, _) = barrier_argmin_classical(&v, eta, &opts).unwrap();
            let (rho, _) = barrier_argmin_quantum(&HermitianMatrix::from_real_diagonal(&v), eta, &opts).unwrap();
            let diag = HermitianMatrix::from_real_diagonal(x.as_slice());
            assert!(rho.as_hermitian().max_abs_diff(&diag) < 1e-10);
        }
    }

    #[test]
    fn stationarity_identity() {
        let opts = NewtonOptions::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let g = random_hermitian(5, &mut rng);
            let eta = 0.05 + 3.0 * rng.random::<f64>();
            let (rho, rep) = barrier_argmin_quantum(&g, eta, &opts).unwrap();
            assert!((rho.trace() - 1.0).abs() <= 1e-12);
            assert!(rho.min_eigenvalue() > 0.0);
            // ρ (ηG + νI) = I
            let mut k = g.scaled(eta);
            k.add_identity(rep.nu);
            let prod = rho.matrix() * k.matrix();
            let id = crate::hermitian::CMatrix::identity(5, 5);
            assert!((prod - id).norm() < 1e-10);
        }
    }

    #[test]
    fn bisection_fallback() {
        let opts = NewtonOptions {
            tol: 1e-12,
            max_iters: 1,
        };
        let (x, rep) = barrier_argmin_classical(&[0.0, 1.0, 30.0, -2.0], 3.0, &opts).unwrap();
        assert!(rep.used_bisection);
        assert!(rep.kkt_residual <= 1e-12);
        assert!((x.as_slice().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn rejects_bad_eta() {
        let opts = NewtonOptions::default();
        assert!(barrier_argmin_classical(&[0.0, 1.0], 0.0, &opts).is_err());
        assert!(barrier_argmin_classical(&[0.0, 1.0], f64::NAN, &opts).is_err());
    }

    #[test]
    fn huge_spread_stays_interior() {
        let opts = NewtonOptions::default();
        let (x, rep) = barrier_argmin_classical(&[0.0, 1e8, 1e12], 1e3, &opts).unwrap();
        assert!(x.as_slice().iter().all(|v| *v > 0.0));
        assert!(rep.kkt_residual <= 1e-12);
    }
}
