//! Synthetic instances: the Shepp–Logan phantom with Bernoulli sensing and
//! Poisson counts, W states with Haar-random projective measurements, and
//! random PSD matrices.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::error::{Error, Result};
use crate::hermitian::{c64, CMatrix, DensityMatrix, HermitianMatrix, C64};

/// `(x0, y0, semi-axis x, semi-axis y, rotation in degrees, intensity)`.
const PHANTOM: [(f64, f64, f64, f64, f64, f64); 10] = [
    (0.0, 0.0, 0.69, 0.92, 0.0, 2.0),
    (0.0, -0.0184, 0.6624, 0.874, 0.0, -0.98),
    (0.22, 0.0, 0.11, 0.31, -18.0, -0.02),
    (-0.22, 0.0, 0.16, 0.41, 18.0, -0.02),
    (0.0, 0.35, 0.21, 0.25, 0.0, 0.01),
    (0.0, 0.1, 0.046, 0.046, 0.0, 0.01),
    (0.0, -0.1, 0.046, 0.046, 0.0, 0.01),
    (-0.08, -0.605, 0.046, 0.023, 0.0, 0.01),
    (0.0, -0.606, 0.023, 0.023, 0.0, 0.01),
    (0.06, -0.605, 0.023, 0.046, 0.0, 0.01),
];

/// Peak intensity of the rescaled phantom.
pub const PHANTOM_SCALE: f64 = 1000.0;

/// Shepp–Logan phantom on a `side × side` grid, row-major with row 0 at the
/// top, sampled at pixel centres of `[-1,1]²`, clipped to `[0,1]` and scaled
/// by [`PHANTOM_SCALE`].
pub fn shepp_logan(side: usize) -> Vec<f64> {
    let s = side as f64;
    let mut out = Vec::with_capacity(side * side);
    for r in 0..side {
        let y = 1.0 - (2 * r + 1) as f64 / s;
        for c in 0..side {
            let x = -1.0 + (2 * c + 1) as f64 / s;
            let mut v = 0.0;
            for &(x0, y0, a, b, deg, val) in &PHANTOM {
                let (sin, cos) = deg.to_radians().sin_cos();
                let (dx, dy) = (x - x0, y - y0);
                let u = dx * cos + dy * sin;
                let w = -dx * sin + dy * cos;
                if (u / a).powi(2) + (w / b).powi(2) <= 1.0 {
                    v += val;
                }
            }
            out.push(v.clamp(0.0, 1.0) * PHANTOM_SCALE);
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct SensingVectors {
    /// `n` rows of length `d` with entries in `{0, 1/n}`.
    pub rows: Vec<Vec<f64>>,
    /// Rows that came out all-zero and were drawn again.
    pub redrawn: usize,
}

/// `b_i(j) = 1/n` with probability 1/2, else 0; all-zero rows are redrawn.
pub fn sensing_vectors<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> SensingVectors {
    let v = 1.0 / n as f64;
    let mut redrawn = 0;
    let rows = (0..n)
        .map(|_| loop {
            let row: Vec<f64> = (0..d).map(|_| if rng.random::<bool>() { v } else { 0.0 }).collect();
            if row.iter().any(|&x| x > 0.0) {
                break row;
            }
            redrawn += 1;
        })
        .collect();
    SensingVectors { rows, redrawn }
}

/// `y_i ~ Poisson(⟨b_i, λ⟩)`.
pub fn poisson_counts<R: Rng + ?Sized>(b: &[Vec<f64>], lambda: &[f64], rng: &mut R) -> Result<Vec<u64>> {
    b.iter()
        .map(|row| {
            if row.len() != lambda.len() {
                return Err(Error::DimensionMismatch {
                    expected: lambda.len(),
                    got: row.len(),
                });
            }
            let rate: f64 = row.iter().zip(lambda).map(|(x, l)| x * l).sum();
            if !(rate >= 0.0) || !rate.is_finite() {
                return Err(Error::NegativeRate(rate));
            }
            if rate == 0.0 {
                return Ok(0);
            }
            let p = Poisson::new(rate).map_err(|_| Error::NegativeRate(rate))?;
            Ok(p.sample(rng) as u64)
        })
        .collect()
}

/// `|W⟩⟨W|` on `q` qubits, `|W⟩ = q^{-1/2} Σ_k |0…1_k…0⟩`.
pub fn w_state(q: usize) -> Result<DensityMatrix> {
    if q == 0 || q > 20 {
        return Err(Error::Config(format!("W state needs 1 ≤ q ≤ 20 qubits, got {q}")));
    }
    let d = 1usize << q;
    let amp = 1.0 / (q as f64).sqrt();
    let mut psi = vec![c64(0.0, 0.0); d];
    for k in 0..q {
        psi[1 << k] = c64(amp, 0.0);
    }
    DensityMatrix::pure(&psi)
}

/// Haar-distributed `d × d` unitary (QR of a complex Ginibre matrix with the
/// phases of `R`'s diagonal moved into `Q`).
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| c64(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            c64(1.0, 0.0)
        };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Trace-one Wishart matrix `GG*/tr(GG*)` with a `d × d` complex Gaussian `G`.
pub fn random_density<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<DensityMatrix> {
    let g = CMatrix::from_fn(d, d, |_, _| c64(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    DensityMatrix::normalized(HermitianMatrix::new(&g * g.adjoint())?)
}

/// Projective measurements grouped into complete settings.
#[derive(Clone, Debug)]
pub struct MeasurementEnsemble {
    pub dim: usize,
    /// Each group holds PSD operators summing to the identity.
    pub groups: Vec<Vec<HermitianMatrix>>,
}

impl MeasurementEnsemble {
    /// Validates that every group sums to `I` within `tol`.
    pub fn new(dim: usize, groups: Vec<Vec<HermitianMatrix>>, tol: f64) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::InvalidEnsemble(f64::NAN));
        }
        for g in &groups {
            let mut sum = HermitianMatrix::zeros(dim);
            for op in g {
                if op.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: op.dim(),
                    });
                }
                sum.add_scaled(1.0, op);
            }
            let dev = sum.max_abs_diff(&HermitianMatrix::identity(dim));
            if dev > tol {
                return Err(Error::InvalidEnsemble(dev));
            }
        }
        Ok(Self { dim, groups })
    }

    pub fn num_operators(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }
}

/// `groups` independent settings, each a Haar-random rank-`rank` projector
/// `P` and its complement `I − P`.
pub fn random_measurements<R: Rng + ?Sized>(
    d: usize,
    rank: usize,
    groups: usize,
    rng: &mut R,
) -> Result<MeasurementEnsemble> {
    if rank == 0 || rank >= d {
        return Err(Error::Config(format!("projector rank must lie in 1..{d}, got {rank}")));
    }
    let projector = |u: &CMatrix, cols: std::ops::Range<usize>| {
        let v = u.columns(cols.start, cols.len()).into_owned();
        HermitianMatrix::new(&v * v.adjoint())
    };
    let sets = (0..groups)
        .map(|_| {
            let u = haar_unitary(d, rng);
            Ok(vec![projector(&u, 0..rank)?, projector(&u, rank..d)?])
        })
        .collect::<Result<Vec<_>>>()?;
    MeasurementEnsemble::new(d, sets, 1e-9)
}

/// Observed tomography data: distinct operators with their outcome counts.
#[derive(Clone, Debug)]
pub struct QstInstance {
    pub operators: Vec<HermitianMatrix>,
    pub counts: Vec<u64>,
    pub rho_true: Option<DensityMatrix>,
}

impl QstInstance {
    pub fn shots(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Simulates `shots` measurements of `rho`: each shot picks a group
/// uniformly and an outcome with probability `tr(A ρ)`.
pub fn sample_outcomes<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    ens: &MeasurementEnsemble,
    shots: u64,
    rng: &mut R,
) -> Result<QstInstance> {
    let probs = ens
        .groups
        .iter()
        .map(|g| {
            let mut p: Vec<f64> = g.iter().map(|a| rho.expectation(a).max(0.0)).collect();
            let total: f64 = p.iter().sum();
            if (total - 1.0).abs() > 1e-6 {
                return Err(Error::InvalidEnsemble(total - 1.0));
            }
            p.iter_mut().for_each(|x| *x /= total);
            Ok(p)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut counts: Vec<Vec<u64>> = ens.groups.iter().map(|g| vec![0; g.len()]).collect();
    for _ in 0..shots {
        let gi = rng.random_range(0..ens.groups.len());
        let u: f64 = rng.random();
        let p = &probs[gi];
        let mut acc = 0.0;
        let mut k = p.len() - 1;
        for (j, pj) in p.iter().enumerate() {
            acc += pj;
            if u < acc {
                k = j;
                break;
            }
        }
        // never land on a zero-probability outcome through rounding
        while p[k] == 0.0 && k > 0 {
            k -= 1;
        }
        counts[gi][k] += 1;
    }
    let mut operators = Vec::new();
    let mut kept = Vec::new();
    for (g, c) in ens.groups.iter().zip(counts) {
        for (a, n) in g.iter().zip(c) {
            if n > 0 {
                operators.push(a.clone());
                kept.push(n);
            }
        }
    }
    Ok(QstInstance {
        operators,
        counts: kept,
        rho_true: Some(rho.clone()),
    })
}

/// Column vector helper for tests and callers building rank-one samples.
pub fn column(m: &DMatrix<C64>, j: usize) -> Vec<C64> {
    m.column(j).iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn phantom_shape() {
        let side = 8;
        let p = shepp_logan(side);
        assert_eq!(p.len(), 64);
        assert!(p.iter().all(|&v| (0.0..=PHANTOM_SCALE).contains(&v)));
        // corners are outside the skull
        for &(r, c) in &[(0, 0), (0, side - 1), (side - 1, 0), (side - 1, side - 1)] {
            assert_eq!(p[r * side + c], 0.0);
        }
        assert!(p.iter().any(|&v| v > 0.0));
        // skull rim at full intensity on the larger grid
        let big = shepp_logan(64);
        assert!(big.contains(&PHANTOM_SCALE));
        // left-right mirror symmetry of the outer ellipses
        let row = 32;
        assert_eq!(big[row * 64 + 1], big[row * 64 + 62]);
    }

    #[test]
    fn sensing_rows_nonzero() {
        let mut rng = RngStream::new(3);
        let s = sensing_vectors(2000, 2, &mut rng);
        assert_eq!(s.rows.len(), 2000);
        assert!(s.rows.iter().all(|r| r.iter().any(|&x| x > 0.0)));
        assert!(s.rows.iter().flatten().all(|&x| x == 0.0 || x == 1.0 / 2000.0));
        // with d = 2 about a quarter of rows need a redraw
        assert!(s.redrawn > 300 && s.redrawn < 1000, "{}", s.redrawn);
    }

    #[test]
    fn poisson_counts_behave() {
        let mut rng = RngStream::new(4);
        let b = vec![vec![1.0, 0.0]; 20000];
        let y = poisson_counts(&b, &[3.5, 9.0], &mut rng).unwrap();
        let mean = y.iter().sum::<u64>() as f64 / y.len() as f64;
        assert!((mean - 3.5).abs() < 0.05);
        let b = vec![vec![0.0, 1.0]];
        assert_eq!(poisson_counts(&b, &[1.0, 0.0], &mut rng).unwrap(), vec![0]);
        assert!(matches!(
            poisson_counts(&b, &[1.0, -2.0], &mut rng),
            Err(Error::NegativeRate(_))
        ));
    }

    #[test]
    fn w_state_structure() {
        let w = w_state(3).unwrap();
        assert_eq!(w.dim(), 8);
        for k in [1, 2, 4] {
            assert!((w.matrix()[(k, k)].re - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!(w.matrix()[(3, 3)].norm() == 0.0);
        assert!((w.eigen().max() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn haar_is_unitary() {
        let mut rng = RngStream::new(5);
        let u = haar_unitary(6, &mut rng);
        let err = (u.adjoint() * &u - CMatrix::identity(6, 6)).norm();
        assert!(err < 1e-12);
    }

    #[test]
    fn measurement_groups_complete() {
        let mut rng = RngStream::new(6);
        let ens = random_measurements(8, 4, 10, &mut rng).unwrap();
        assert_eq!(ens.num_operators(), 20);
        for g in &ens.groups {
            assert!((g[0].trace() - 4.0).abs() < 1e-10);
            let sq = g[0].matrix() * g[0].matrix();
            assert!((sq - g[0].matrix()).norm() < 1e-10);
        }
        assert!(random_measurements(4, 4, 1, &mut rng).is_err());
        let bad = vec![vec![HermitianMatrix::identity(2).scaled(0.5)]];
        assert!(matches!(
            MeasurementEnsemble::new(2, bad, 1e-9),
            Err(Error::InvalidEnsemble(_))
        ));
    }

    #[test]
    fn outcome_frequencies() {
        let mut rng = RngStream::new(7);
        let rho = w_state(2).unwrap();
        let ens = random_measurements(4, 2, 3, &mut rng).unwrap();
        let inst = sample_outcomes(&rho, &ens, 60000, &mut rng).unwrap();
        assert_eq!(inst.shots(), 60000);
        for (a, &n) in inst.operators.iter().zip(&inst.counts) {
            let expect = rho.expectation(a) / 3.0;
            let freq = n as f64 / 60000.0;
            assert!((freq - expect).abs() < 0.01, "{freq} vs {expect}");
        }
    }
}
