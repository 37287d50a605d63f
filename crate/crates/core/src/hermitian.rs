//! Complex Hermitian matrices, density matrices, simplex vectors and the
//! eigendecomposition every matrix function in the crate goes through.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = nalgebra::Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Asymmetry accepted by [`HermitianMatrix::new`] before exact symmetrization.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Most negative eigenvalue a density matrix may carry.
pub const PSD_TOL: f64 = 1e-10;
/// Trace deviation a density matrix may carry.
pub const TRACE_TOL: f64 = 1e-10;
/// Sum deviation a user-supplied simplex vector may carry.
pub const SIMPLEX_TOL: f64 = 1e-12;

const EIGH_MAX_SWEEPS: usize = 10_000;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// A square complex matrix equal to its conjugate transpose.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    mat: CMatrix,
}

impl HermitianMatrix {
    /// Checks Hermitian symmetry (relative to the largest entry) and then
    /// replaces the input by `(M + M*)/2` so the stored matrix is exactly Hermitian.
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::NotSquare {
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        let scale = mat.iter().fold(1.0_f64, |m, z| m.max(z.norm()));
        let mut worst = 0.0_f64;
        let d = mat.nrows();
        for i in 0..d {
            for j in i..d {
                worst = worst.max((mat[(i, j)] - mat[(j, i)].conj()).norm());
            }
        }
        if worst > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian(worst));
        }
        Ok(Self::symmetrized(mat))
    }

    /// Symmetrizes without checking. For matrices that are Hermitian up to
    /// rounding by construction (products like `ρXρ`).
    pub(crate) fn symmetrized(mut mat: CMatrix) -> Self {
        let d = mat.nrows();
        for i in 0..d {
            mat[(i, i)] = c64(mat[(i, i)].re, 0.0);
            for j in (i + 1)..d {
                let avg = (mat[(i, j)] + mat[(j, i)].conj()) * 0.5;
                mat[(i, j)] = avg;
                mat[(j, i)] = avg.conj();
            }
        }
        Self { mat }
    }

    pub fn zeros(d: usize) -> Self {
        Self {
            mat: CMatrix::zeros(d, d),
        }
    }

    pub fn identity(d: usize) -> Self {
        Self {
            mat: CMatrix::identity(d, d),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        let mut mat = CMatrix::zeros(d, d);
        for (i, &v) in diag.iter().enumerate() {
            mat[(i, i)] = c64(v, 0.0);
        }
        Self { mat }
    }

    /// `v v*` for a column vector `v`.
    pub fn rank_one(v: &[C64]) -> Self {
        let d = v.len();
        let mat = CMatrix::from_fn(d, d, |i, j| v[i] * v[j].conj());
        Self::symmetrized(mat)
    }

    /// Row-major interleaved `re, im` doubles, the on-disk layout.
    pub fn from_interleaved(d: usize, data: &[f64]) -> Result<Self> {
        if data.len() != 2 * d * d {
            return Err(Error::DimensionMismatch {
                expected: 2 * d * d,
                got: data.len(),
            });
        }
        let mat = CMatrix::from_fn(d, d, |i, j| {
            let k = 2 * (i * d + j);
            c64(data[k], data[k + 1])
        });
        Self::new(mat)
    }

    pub fn to_interleaved(&self) -> Vec<f64> {
        let d = self.dim();
        let mut out = Vec::with_capacity(2 * d * d);
        for i in 0..d {
            for j in 0..d {
                let z = self.mat[(i, j)];
                out.push(z.re);
                out.push(z.im);
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.mat[(i, i)].re).sum()
    }

    /// Real inner product `tr(self · other)`.
    pub fn inner(&self, other: &HermitianMatrix) -> f64 {
        // tr(XY) = Σ_ij X_ij Y_ji = Σ_ij X_ij conj(Y_ij) for Hermitian Y
        self.mat
            .iter()
            .zip(other.mat.iter())
            .map(|(x, y)| x.re * y.re + x.im * y.im)
            .sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.mat[(i, i)].re).collect()
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        let d = self.dim();
        (0..d).all(|i| (0..d).all(|j| i == j || self.mat[(i, j)].norm() <= tol))
    }

    pub fn scale(&mut self, c: f64) {
        self.mat.iter_mut().for_each(|z| *z *= c);
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            mat: &self.mat * c64(c, 0.0),
        }
    }

    /// `self += c · other`.
    pub fn add_scaled(&mut self, c: f64, other: &HermitianMatrix) {
        debug_assert_eq!(self.dim(), other.dim());
        self.mat.iter_mut().zip(other.mat.iter()).for_each(|(a, b)| *a += b * c);
    }

    /// `self += c · I`.
    pub fn add_identity(&mut self, c: f64) {
        for i in 0..self.dim() {
            self.mat[(i, i)].re += c;
        }
    }

    pub fn sub(&self, other: &HermitianMatrix) -> Self {
        Self {
            mat: &self.mat - &other.mat,
        }
    }

    pub fn max_abs_diff(&self, other: &HermitianMatrix) -> f64 {
        self.mat
            .iter()
            .zip(other.mat.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }
}

/// Eigenvalues in ascending order with orthonormal eigenvector columns.
#[derive(Clone, Debug)]
pub struct EigenPair {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl EigenPair {
    /// `V · diag(f(λ)) · V*`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> HermitianMatrix {
        let d = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..d {
            let w = f(self.values[j]);
            scaled.column_mut(j).iter_mut().for_each(|z| *z *= w);
        }
        HermitianMatrix::symmetrized(scaled * self.vectors.adjoint())
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        self.map_spectrum(|x| x)
    }

    /// `V* X V`, the matrix `X` expressed in this eigenbasis.
    pub fn to_eigenbasis(&self, x: &HermitianMatrix) -> CMatrix {
        self.vectors.adjoint() * x.matrix() * &self.vectors
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().expect("nonempty spectrum")
    }
}

/// Hermitian eigendecomposition with ascending eigenvalues.
pub fn eigh(h: &HermitianMatrix) -> Result<EigenPair> {
    let d = h.dim();
    if d == 0 {
        return Err(Error::DimensionMismatch { expected: 1, got: 0 });
    }
    let eig = SymmetricEigen::try_new(h.matrix().clone(), f64::EPSILON, EIGH_MAX_SWEEPS).ok_or_else(|| {
        Error::EigenNonConvergence {
            dim: d,
            frobenius: h.frobenius_norm(),
            max_abs: h.matrix().iter().fold(0.0, |m, z| m.max(z.norm())),
        }
    })?;
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(d, d, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(EigenPair { values, vectors })
}

/// Hermitian PSD matrix of unit trace. Always carries its eigendecomposition,
/// which every norm and matrix function on it reuses.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    mat: HermitianMatrix,
    eig: EigenPair,
}

impl DensityMatrix {
    pub fn new(mat: HermitianMatrix) -> Result<Self> {
        let eig = eigh(&mat)?;
        Self::validate(&eig.values)?;
        Ok(Self { mat, eig })
    }

    /// Builds `V diag(λ) V*` from a spectral description.
    pub fn from_eigen(eig: EigenPair) -> Result<Self> {
        Self::validate(&eig.values)?;
        Ok(Self::from_eigen_unchecked(eig))
    }

    pub(crate) fn from_eigen_unchecked(eig: EigenPair) -> Self {
        let mat = eig.reconstruct();
        Self { mat, eig }
    }

    /// Divides a PSD matrix by its trace.
    pub fn normalized(mat: HermitianMatrix) -> Result<Self> {
        let tr = mat.trace();
        if !(tr > 0.0) {
            return Err(Error::InvalidTrace(tr));
        }
        Self::new(mat.scaled(1.0 / tr))
    }

    fn validate(values: &[f64]) -> Result<()> {
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -PSD_TOL {
            return Err(Error::NotPsd(min));
        }
        let tr: f64 = values.iter().sum();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidTrace(tr));
        }
        Ok(())
    }

    /// `I/d`, the minimizer of the log-det barrier.
    pub fn maximally_mixed(d: usize) -> Self {
        Self::from_eigen_unchecked(EigenPair {
            values: vec![1.0 / d as f64; d],
            vectors: CMatrix::identity(d, d),
        })
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) state vector.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if !(norm2 > 0.0) {
            return Err(Error::InvalidTrace(norm2));
        }
        let s = 1.0 / norm2.sqrt();
        let v: Vec<C64> = psi.iter().map(|z| z * s).collect();
        Self::new(HermitianMatrix::rank_one(&v))
    }

    pub fn from_simplex(x: &SimplexVector) -> Self {
        let d = x.dim();
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
        let values = order.iter().map(|&k| x[k]).collect();
        let vectors = CMatrix::from_fn(d, d, |i, j| if i == order[j] { c64(1.0, 0.0) } else { c64(0.0, 0.0) });
        Self {
            mat: HermitianMatrix::from_real_diagonal(x.as_slice()),
            eig: EigenPair { values, vectors },
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn as_hermitian(&self) -> &HermitianMatrix {
        &self.mat
    }

    pub fn matrix(&self) -> &CMatrix {
        self.mat.matrix()
    }

    pub fn eigen(&self) -> &EigenPair {
        &self.eig
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eig.min()
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace()
    }

    /// `tr(A ρ)`.
    pub fn expectation(&self, a: &HermitianMatrix) -> f64 {
        self.mat.inner(a)
    }

    pub fn frobenius_distance(&self, other: &DensityMatrix) -> f64 {
        self.mat.sub(&other.mat).frobenius_norm()
    }
}

/// Nonnegative vector summing to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SimplexVector(Vec<f64>);

impl SimplexVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::NotInSimplex("empty vector".into()));
        }
        if let Some((i, v)) = entries
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v >= 0.0) || !v.is_finite())
        {
            return Err(Error::NotInSimplex(format!("entry {i} is {v}")));
        }
        let sum: f64 = entries.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::NotInSimplex(format!("entries sum to {sum}")));
        }
        Ok(Self(entries))
    }

    /// Divides a nonnegative vector by its sum.
    pub fn normalized(mut entries: Vec<f64>) -> Result<Self> {
        let sum: f64 = entries.iter().sum();
        if !(sum > 0.0) || !sum.is_finite() {
            return Err(Error::NotInSimplex(format!("entries sum to {sum}")));
        }
        entries.iter_mut().for_each(|v| *v /= sum);
        Self::new(entries)
    }

    pub(crate) fn from_vec_unchecked(entries: Vec<f64>) -> Self {
        Self(entries)
    }

    pub fn uniform(d: usize) -> Self {
        Self(vec![1.0 / d as f64; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, a: &[f64]) -> f64 {
        self.0.iter().zip(a).map(|(x, y)| x * y).sum()
    }
}

impl std::ops::Index<usize> for SimplexVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl TryFrom<Vec<f64>> for SimplexVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<SimplexVector> for Vec<f64> {
    fn from(x: SimplexVector) -> Vec<f64> {
        x.0
    }
}

#[cfg(test)]
pub(crate) mod test_util {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    pub fn random_hermitian<R: Rng>(d: usize, rng: &mut R) -> HermitianMatrix {
        let g = CMatrix::from_fn(d, d, |_, _| c64(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        HermitianMatrix::symmetrized((&g + g.adjoint()) * c64(0.5, 0.0))
    }

    /// Full-rank Wishart-type density matrix.
    pub fn random_density<R: Rng>(d: usize, rng: &mut R) -> DensityMatrix {
        let g = CMatrix::from_fn(d, d, |_, _| c64(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        let w = HermitianMatrix::symmetrized(&g * g.adjoint());
        DensityMatrix::normalized(w).unwrap()
    }

    pub fn random_psd<R: Rng>(d: usize, rank: usize, rng: &mut R) -> HermitianMatrix {
        let g = CMatrix::from_fn(d, rank, |_, _| {
            c64(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        HermitianMatrix::symmetrized(&g * g.adjoint())
    }
}

#[cfg(test)]
mod tests {
    use super::test_util::*;
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn eigh_identity() {
        let e = eigh(&HermitianMatrix::identity(2)).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0]);
        assert!((&e.vectors - CMatrix::identity(2, 2)).norm() < 1e-15);
    }

    #[test]
    fn eigh_diagonal_is_sorted() {
        let e = eigh(&HermitianMatrix::from_real_diagonal(&[3.0, -1.0])).unwrap();
        assert_eq!(e.values, vec![-1.0, 3.0]);
        // first eigenvector is ±e_2
        assert!((e.vectors[(1, 0)].norm() - 1.0).abs() < 1e-15);
        assert!(e.vectors[(0, 0)].norm() < 1e-15);
    }

    #[test]
    fn eigh_reconstructs_random_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let h = random_hermitian(8, &mut rng);
            let e = eigh(&h).unwrap();
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
            let err = e.reconstruct().sub(&h).frobenius_norm();
            assert!(err <= 1e-9 * (1.0 + h.frobenius_norm()), "{err}");
            let gram = e.vectors.adjoint() * &e.vectors;
            assert!((gram - CMatrix::identity(8, 8)).norm() < 1e-10);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = CMatrix::identity(2, 2);
        m[(0, 1)] = c64(0.0, 1.0);
        assert!(matches!(HermitianMatrix::new(m.clone()), Err(Error::NotHermitian(_))));
        m[(1, 0)] = c64(0.0, -1.0);
        assert!(HermitianMatrix::new(m).is_ok());
    }

    #[test]
    fn symmetrizes_tiny_asymmetry() {
        let mut m = CMatrix::identity(2, 2);
        m[(0, 1)] = c64(0.5, 1e-14);
        m[(1, 0)] = c64(0.5, 0.0);
        let h = HermitianMatrix::new(m).unwrap();
        assert_eq!(h.matrix()[(0, 1)], h.matrix()[(1, 0)].conj());
    }

    #[test]
    fn interleaved_layout() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = c64(1.0, 0.0);
        m[(0, 1)] = c64(2.0, 3.0);
        m[(1, 0)] = c64(2.0, -3.0);
        m[(1, 1)] = c64(4.0, 0.0);
        let h = HermitianMatrix::new(m).unwrap();
        let flat = h.to_interleaved();
        assert_eq!(flat, vec![1.0, 0.0, 2.0, 3.0, 2.0, -3.0, 4.0, 0.0]);
        assert_eq!(HermitianMatrix::from_interleaved(2, &flat).unwrap(), h);
    }

    #[test]
    fn density_validation() {
        assert!(matches!(
            DensityMatrix::new(HermitianMatrix::from_real_diagonal(&[0.5, 0.6])),
            Err(Error::InvalidTrace(_))
        ));
        assert!(matches!(
            DensityMatrix::new(HermitianMatrix::from_real_diagonal(&[1.5, -0.5])),
            Err(Error::NotPsd(_))
        ));
        let rho = DensityMatrix::maximally_mixed(4);
        assert!((rho.trace() - 1.0).abs() < 1e-15);
        assert_eq!(rho.min_eigenvalue(), 0.25);
    }

    #[test]
    fn simplex_validation() {
        assert!(SimplexVector::new(vec![0.5, 0.5]).is_ok());
        assert!(SimplexVector::new(vec![0.5, 0.6]).is_err());
        assert!(SimplexVector::new(vec![1.5, -0.5]).is_err());
        assert!(SimplexVector::new(vec![]).is_err());
        let x = SimplexVector::normalized(vec![1.0, 3.0]).unwrap();
        assert_eq!(x.as_slice(), &[0.25, 0.75]);
    }

    #[test]
    fn from_simplex_carries_spectrum() {
        let x = SimplexVector::new(vec![0.7, 0.1, 0.2]).unwrap();
        let rho = DensityMatrix::from_simplex(&x);
        assert_eq!(rho.eigen().values, vec![0.1, 0.2, 0.7]);
        assert!(rho.eigen().reconstruct().max_abs_diff(rho.as_hermitian()) < 1e-16);
    }
}
