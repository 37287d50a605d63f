//! Local geometry of the log-det barrier `h(ρ) = −log det ρ`.
//!
//! At a strictly positive `ρ` the Hessian of `h` induces the local norm
//! `‖X‖_ρ = √tr((ρ⁻¹X)²)` with dual `‖X‖_{ρ,*} = √tr((ρX)²)`. Everything is
//! evaluated in the eigenbasis of `ρ`, where both norms are weighted sums of
//! `|X'_ij|²` and stay exactly symmetric. The [`simplex`] submodule holds the
//! diagonal counterparts used by the classical setup.

use crate::error::{Error, Result};
use crate::hermitian::{eigh, CMatrix, DensityMatrix, HermitianMatrix};

/// Smallest eigenvalue accepted where `ρ⁻¹` or `log ρ` is needed.
pub const BOUNDARY_FLOOR: f64 = 1e-14;

fn check_interior(rho: &DensityMatrix) -> Result<()> {
    let min = rho.min_eigenvalue();
    if min <= BOUNDARY_FLOOR {
        return Err(Error::Boundary(min));
    }
    Ok(())
}

fn weighted_sum(values: &[f64], xp: &CMatrix, weight: impl Fn(f64, f64) -> f64) -> f64 {
    let d = values.len();
    let mut acc = 0.0;
    for j in 0..d {
        for i in 0..d {
            acc += weight(values[i], values[j]) * xp[(i, j)].norm_sqr();
        }
    }
    acc
}

/// `√tr((ρ⁻¹X)²)`.
pub fn local_norm(rho: &DensityMatrix, x: &HermitianMatrix) -> Result<f64> {
    check_interior(rho)?;
    let eig = rho.eigen();
    let xp = eig.to_eigenbasis(x);
    Ok(weighted_sum(&eig.values, &xp, |a, b| 1.0 / (a * b)).sqrt())
}

/// `√tr((ρX)²)`.
pub fn dual_local_norm(rho: &DensityMatrix, x: &HermitianMatrix) -> f64 {
    let eig = rho.eigen();
    let xp = eig.to_eigenbasis(x);
    weighted_sum(&eig.values, &xp, |a, b| a * b).max(0.0).sqrt()
}

/// `α_ρ(X) = −tr(ρXρ)/tr(ρ²)`, the multiple of `I` whose addition minimizes
/// the dual local norm of `X`.
pub fn alpha_shift(rho: &DensityMatrix, x: &HermitianMatrix) -> f64 {
    let eig = rho.eigen();
    let xp = eig.to_eigenbasis(x);
    alpha_in_eigenbasis(&eig.values, &xp)
}

fn alpha_in_eigenbasis(values: &[f64], xp: &CMatrix) -> f64 {
    let num: f64 = values.iter().enumerate().map(|(i, l)| l * l * xp[(i, i)].re).sum();
    let den: f64 = values.iter().map(|l| l * l).sum();
    -num / den
}

/// `‖X + α_ρ(X)·I‖²_{ρ,*}` with a single change of basis.
pub fn shifted_dual_norm_sq(rho: &DensityMatrix, x: &HermitianMatrix) -> f64 {
    let eig = rho.eigen();
    let mut xp = eig.to_eigenbasis(x);
    let alpha = alpha_in_eigenbasis(&eig.values, &xp);
    for i in 0..xp.nrows() {
        xp[(i, i)].re += alpha;
    }
    weighted_sum(&eig.values, &xp, |a, b| a * b).max(0.0)
}

/// `log det ρ`, i.e. `−h(ρ)`.
pub fn logdet(rho: &DensityMatrix) -> Result<f64> {
    check_interior(rho)?;
    Ok(rho.eigen().values.iter().map(|l| l.ln()).sum())
}

/// Square root of a spectrum entry, with everything at or below rounding
/// noise (relative to the largest eigenvalue) treated as zero.
fn noise_clipped_sqrt(values: &[f64]) -> impl Fn(f64) -> f64 {
    let top = values.iter().copied().fold(0.0_f64, f64::max);
    let cutoff = 64.0 * f64::EPSILON * values.len() as f64 * top;
    move |l: f64| if l <= cutoff { 0.0 } else { l.sqrt() }
}

/// Uhlmann fidelity `(tr √(√ρ σ √ρ))²`. Negative eigenvalues, and positive
/// ones at rounding-noise level, are clipped to zero before square roots.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: sigma.dim(),
        });
    }
    let sqrt_rho = rho.eigen().map_spectrum(noise_clipped_sqrt(&rho.eigen().values));
    let inner = HermitianMatrix::symmetrized(sqrt_rho.matrix() * sigma.matrix() * sqrt_rho.matrix());
    let spectrum = eigh(&inner)?.values;
    let root = noise_clipped_sqrt(&spectrum);
    let root_trace: f64 = spectrum.iter().map(|&m| root(m)).sum();
    Ok((root_trace * root_trace).clamp(0.0, 1.0))
}

/// Diagonal counterparts on the probability simplex.
pub mod simplex {
    use super::BOUNDARY_FLOOR;
    use crate::error::{Error, Result};
    use crate::hermitian::SimplexVector;

    /// `√Σ (v_i/x_i)²`.
    pub fn local_norm(x: &SimplexVector, v: &[f64]) -> Result<f64> {
        let min = x.as_slice().iter().copied().fold(f64::INFINITY, f64::min);
        if min <= BOUNDARY_FLOOR {
            return Err(Error::Boundary(min));
        }
        Ok(x.as_slice()
            .iter()
            .zip(v)
            .map(|(xi, vi)| (vi / xi).powi(2))
            .sum::<f64>()
            .sqrt())
    }

    /// `√Σ (x_i v_i)²`.
    pub fn dual_local_norm(x: &SimplexVector, v: &[f64]) -> f64 {
        x.as_slice()
            .iter()
            .zip(v)
            .map(|(xi, vi)| (xi * vi).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn alpha_shift(x: &SimplexVector, v: &[f64]) -> f64 {
        let num: f64 = x.as_slice().iter().zip(v).map(|(xi, vi)| xi * xi * vi).sum();
        let den: f64 = x.as_slice().iter().map(|xi| xi * xi).sum();
        -num / den
    }

    pub fn shifted_dual_norm_sq(x: &SimplexVector, v: &[f64]) -> f64 {
        let alpha = alpha_shift(x, v);
        x.as_slice()
            .iter()
            .zip(v)
            .map(|(xi, vi)| (xi * (vi + alpha)).powi(2))
            .sum()
    }

    pub fn logdet(x: &SimplexVector) -> Result<f64> {
        let min = x.as_slice().iter().copied().fold(f64::INFINITY, f64::min);
        if min <= BOUNDARY_FLOOR {
            return Err(Error::Boundary(min));
        }
        Ok(x.as_slice().iter().map(|v| v.ln()).sum())
    }
}
