//! The two problem setups share one solver. A [`Setup`] names the sample,
//! iterate and gradient types and supplies the handful of geometric
//! primitives dual averaging needs.

use std::fmt::Debug;

use crate::barrier::{self, NewtonOptions, SubproblemReport};
use crate::error::Result;
use crate::geometry;
use crate::hermitian::{DensityMatrix, HermitianMatrix, SimplexVector};

pub trait Setup: Sized + Send + Sync + 'static {
    /// `A ∈ H^d_+` or `a ∈ [0,∞)^d`.
    type Sample: Clone + Debug + Send + Sync;
    /// `ρ ∈ D_d` or `x ∈ Δ_d`.
    type Point: Clone + Debug + Send + Sync;
    /// Gradients and their running sums.
    type Vector: Clone + Debug + Send + Sync;

    const NAME: &'static str;

    fn sample_dim(s: &Self::Sample) -> usize;
    /// Describes why a sample is not a valid loss sample.
    fn check_sample(s: &Self::Sample) -> std::result::Result<(), String>;
    fn point_dim(p: &Self::Point) -> usize;
    /// Flat real layout used by the dataset file format.
    fn sample_to_flat(s: &Self::Sample) -> Vec<f64>;
    fn sample_from_flat(d: usize, data: &[f64]) -> Result<Self::Sample>;

    /// `tr(Aρ)` or `⟨a, x⟩`.
    fn inner(s: &Self::Sample, p: &Self::Point) -> f64;
    /// `acc += c · s`.
    fn add_scaled_sample(acc: &mut Self::Vector, c: f64, s: &Self::Sample);

    fn zero_vector(d: usize) -> Self::Vector;
    fn add_scaled(acc: &mut Self::Vector, c: f64, v: &Self::Vector);
    /// `acc += c · I` (or `c · 1`).
    fn add_identity(acc: &mut Self::Vector, c: f64);
    fn vector_distance(a: &Self::Vector, b: &Self::Vector) -> f64;

    /// `I/d`, the barrier minimizer.
    fn center(d: usize) -> Self::Point;
    fn add_point(acc: &mut Self::Vector, p: &Self::Point);
    /// Normalizes a running sum of iterates back onto the feasible set.
    fn average(sum: &Self::Vector) -> Result<Self::Point>;
    fn point_distance(a: &Self::Point, b: &Self::Point) -> f64;

    fn dual_local_norm(p: &Self::Point, v: &Self::Vector) -> f64;
    fn alpha_shift(p: &Self::Point, v: &Self::Vector) -> f64;
    fn shifted_dual_norm_sq(p: &Self::Point, v: &Self::Vector) -> f64;

    fn barrier_argmin(g_cum: &Self::Vector, eta: f64, opts: &NewtonOptions) -> Result<(Self::Point, SubproblemReport)>;
}

/// Density matrices, PSD samples.
#[derive(Clone, Copy, Debug, Default)]
pub struct Quantum;

/// Probability simplex, nonnegative vector samples.
#[derive(Clone, Copy, Debug, Default)]
pub struct Classical;

impl Setup for Quantum {
    type Sample = HermitianMatrix;
    type Point = DensityMatrix;
    type Vector = HermitianMatrix;

    const NAME: &'static str = "quantum";

    fn sample_dim(s: &HermitianMatrix) -> usize {
        s.dim()
    }

    fn check_sample(s: &HermitianMatrix) -> std::result::Result<(), String> {
        if s.frobenius_norm() == 0.0 {
            return Err("zero matrix".into());
        }
        let min = crate::hermitian::eigh(s).map_err(|e| e.to_string())?.min();
        let scale = s.frobenius_norm().max(1.0);
        if min < -crate::hermitian::PSD_TOL * scale {
            return Err(format!("not PSD (min eigenvalue {min:e})"));
        }
        Ok(())
    }

    fn point_dim(p: &DensityMatrix) -> usize {
        p.dim()
    }

    fn sample_to_flat(s: &HermitianMatrix) -> Vec<f64> {
        s.to_interleaved()
    }

    fn sample_from_flat(d: usize, data: &[f64]) -> Result<HermitianMatrix> {
        HermitianMatrix::from_interleaved(d, data)
    }

    fn inner(s: &HermitianMatrix, p: &DensityMatrix) -> f64 {
        p.expectation(s)
    }

    fn add_scaled_sample(acc: &mut HermitianMatrix, c: f64, s: &HermitianMatrix) {
        acc.add_scaled(c, s)
    }

    fn zero_vector(d: usize) -> HermitianMatrix {
        HermitianMatrix::zeros(d)
    }

    fn add_scaled(acc: &mut HermitianMatrix, c: f64, v: &HermitianMatrix) {
        acc.add_scaled(c, v)
    }

    fn add_identity(acc: &mut HermitianMatrix, c: f64) {
        acc.add_identity(c)
    }

    fn vector_distance(a: &HermitianMatrix, b: &HermitianMatrix) -> f64 {
        a.sub(b).frobenius_norm()
    }

    fn center(d: usize) -> DensityMatrix {
        DensityMatrix::maximally_mixed(d)
    }

    fn add_point(acc: &mut HermitianMatrix, p: &DensityMatrix) {
        acc.add_scaled(1.0, p.as_hermitian())
    }

    fn average(sum: &HermitianMatrix) -> Result<DensityMatrix> {
        DensityMatrix::normalized(sum.clone())
    }

    fn point_distance(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
        a.frobenius_distance(b)
    }

    fn dual_local_norm(p: &DensityMatrix, v: &HermitianMatrix) -> f64 {
        geometry::dual_local_norm(p, v)
    }

    fn alpha_shift(p: &DensityMatrix, v: &HermitianMatrix) -> f64 {
        geometry::alpha_shift(p, v)
    }

    fn shifted_dual_norm_sq(p: &DensityMatrix, v: &HermitianMatrix) -> f64 {
        geometry::shifted_dual_norm_sq(p, v)
    }

    fn barrier_argmin(
        g_cum: &HermitianMatrix,
        eta: f64,
        opts: &NewtonOptions,
    ) -> Result<(DensityMatrix, SubproblemReport)> {
        barrier::barrier_argmin_quantum(g_cum, eta, opts)
    }
}

impl Setup for Classical {
    type Sample = Vec<f64>;
    type Point = SimplexVector;
    type Vector = Vec<f64>;

    const NAME: &'static str = "classical";

    fn sample_dim(s: &Vec<f64>) -> usize {
        s.len()
    }

    fn check_sample(s: &Vec<f64>) -> std::result::Result<(), String> {
        if let Some((j, v)) = s.iter().enumerate().find(|(_, v)| !(**v >= 0.0) || !v.is_finite()) {
            return Err(format!("entry {j} is {v}"));
        }
        if s.iter().all(|v| *v == 0.0) {
            return Err("zero vector".into());
        }
        Ok(())
    }

    fn point_dim(p: &SimplexVector) -> usize {
        p.dim()
    }

    fn sample_to_flat(s: &Vec<f64>) -> Vec<f64> {
        s.clone()
    }

    fn sample_from_flat(d: usize, data: &[f64]) -> Result<Vec<f64>> {
        if data.len() != d {
            return Err(crate::error::Error::DimensionMismatch {
                expected: d,
                got: data.len(),
            });
        }
        Ok(data.to_vec())
    }

    fn inner(s: &Vec<f64>, p: &SimplexVector) -> f64 {
        p.dot(s)
    }

    fn add_scaled_sample(acc: &mut Vec<f64>, c: f64, s: &Vec<f64>) {
        acc.iter_mut().zip(s).for_each(|(a, b)| *a += c * b);
    }

    fn zero_vector(d: usize) -> Vec<f64> {
        vec![0.0; d]
    }

    fn add_scaled(acc: &mut Vec<f64>, c: f64, v: &Vec<f64>) {
        acc.iter_mut().zip(v).for_each(|(a, b)| *a += c * b);
    }

    fn add_identity(acc: &mut Vec<f64>, c: f64) {
        acc.iter_mut().for_each(|a| *a += c);
    }

    fn vector_distance(a: &Vec<f64>, b: &Vec<f64>) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
    }

    fn center(d: usize) -> SimplexVector {
        SimplexVector::uniform(d)
    }

    fn add_point(acc: &mut Vec<f64>, p: &SimplexVector) {
        acc.iter_mut().zip(p.as_slice()).for_each(|(a, b)| *a += b);
    }

    fn average(sum: &Vec<f64>) -> Result<SimplexVector> {
        SimplexVector::normalized(sum.clone())
    }

    fn point_distance(a: &SimplexVector, b: &SimplexVector) -> f64 {
        Self::vector_distance(&a.as_slice().to_vec(), &b.as_slice().to_vec())
    }

    fn dual_local_norm(p: &SimplexVector, v: &Vec<f64>) -> f64 {
        geometry::simplex::dual_local_norm(p, v)
    }

    fn alpha_shift(p: &SimplexVector, v: &Vec<f64>) -> f64 {
        geometry::simplex::alpha_shift(p, v)
    }

    fn shifted_dual_norm_sq(p: &SimplexVector, v: &Vec<f64>) -> f64 {
        geometry::simplex::shifted_dual_norm_sq(p, v)
    }

    fn barrier_argmin(g_cum: &Vec<f64>, eta: f64, opts: &NewtonOptions) -> Result<(SimplexVector, SubproblemReport)> {
        barrier::barrier_argmin_classical(g_cum, eta, opts)
    }
}
