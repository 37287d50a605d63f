//! Poisson inverse problems: recover `λ ≥ 0` from `y_i ~ Poisson(⟨b_i, λ⟩)`.
//!
//! The negative log-likelihood `Σ ⟨b_i, λ⟩ − y_i log ⟨b_i, λ⟩` is rescaled
//! to an expected log-loss over the simplex with `a_i(j) = Y b_i(j)/c_j`,
//! `c_j = Σ_i b_i(j)`, `Y = Σ y_i` and weights `y_i / Y`. A simplex minimizer
//! `x̂` maps back via `λ̂_j = Y x̂_j / c_j`.

use crate::error::{Error, Result};
use crate::hermitian::SimplexVector;
use crate::logloss::ClassicalDataset;

#[derive(Clone, Debug)]
pub struct PoissonInstance {
    /// `n` sensing vectors of length `d`.
    pub b: Vec<Vec<f64>>,
    pub y: Vec<u64>,
    pub lambda_true: Option<Vec<f64>>,
}

impl PoissonInstance {
    pub fn new(b: Vec<Vec<f64>>, y: Vec<u64>, lambda_true: Option<Vec<f64>>) -> Result<Self> {
        let d = b.first().map(Vec::len).unwrap_or(0);
        if d == 0 {
            return Err(Error::InvalidDataset("no sensing vectors".into()));
        }
        if y.len() != b.len() {
            return Err(Error::InvalidDataset(format!(
                "{} sensing vectors but {} counts",
                b.len(),
                y.len()
            )));
        }
        for (index, row) in b.iter().enumerate() {
            if row.len() != d {
                return Err(Error::InvalidSample {
                    index,
                    reason: format!("length {} differs from {d}", row.len()),
                });
            }
            if let Some(v) = row.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
                return Err(Error::InvalidSample {
                    index,
                    reason: format!("entry {v}"),
                });
            }
        }
        if let Some(l) = &lambda_true {
            if l.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: l.len(),
                });
            }
        }
        Ok(Self { b, y, lambda_true })
    }

    pub fn dim(&self) -> usize {
        self.b[0].len()
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.dim()];
        for row in &self.b {
            c.iter_mut().zip(row).for_each(|(s, v)| *s += v);
        }
        c
    }

    pub fn total_counts(&self) -> u64 {
        self.y.iter().sum()
    }

    /// `Σ_i ⟨b_i, λ⟩ − y_i log ⟨b_i, λ⟩`.
    pub fn neg_log_likelihood(&self, lambda: &[f64]) -> f64 {
        self.b
            .iter()
            .zip(&self.y)
            .map(|(row, &y)| {
                let r: f64 = row.iter().zip(lambda).map(|(a, l)| a * l).sum();
                if y == 0 {
                    r
                } else if r > 0.0 {
                    r - y as f64 * r.ln()
                } else {
                    f64::INFINITY
                }
            })
            .sum()
    }
}

/// What [`recover_lambda`] needs to undo the rescaling.
#[derive(Clone, Debug, PartialEq)]
pub struct ReformulationContext {
    /// `Y = Σ y_i`.
    pub total_counts: f64,
    /// `c_j = Σ_i b_i(j)` over all sensing vectors, including zero-count ones.
    pub column_sums: Vec<f64>,
    pub n_original: usize,
    /// Rows of the original instance that carry weight (`y_i > 0`).
    pub kept_rows: Vec<usize>,
}

pub fn pip_to_classical(p: &PoissonInstance) -> Result<(ClassicalDataset, ReformulationContext)> {
    let c = p.column_sums();
    if let Some(j) = c.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::DeadCoordinate(j));
    }
    let y_total = p.total_counts();
    if y_total == 0 {
        return Err(Error::InvalidDataset("all counts are zero".into()));
    }
    let yf = y_total as f64;
    let kept_rows: Vec<usize> = (0..p.len()).filter(|&i| p.y[i] > 0).collect();
    let samples = kept_rows
        .iter()
        .map(|&i| p.b[i].iter().zip(&c).map(|(b, cj)| yf * b / cj).collect())
        .collect();
    let weights = kept_rows.iter().map(|&i| p.y[i] as f64 / yf).collect();
    let ds = ClassicalDataset::new(samples, weights)?;
    Ok((
        ds,
        ReformulationContext {
            total_counts: yf,
            column_sums: c,
            n_original: p.len(),
            kept_rows,
        },
    ))
}

/// `λ̂_j = Y x̂_j / c_j`.
pub fn recover_lambda(x: &SimplexVector, ctx: &ReformulationContext) -> Result<Vec<f64>> {
    if x.dim() != ctx.column_sums.len() {
        return Err(Error::DimensionMismatch {
            expected: ctx.column_sums.len(),
            got: x.dim(),
        });
    }
    Ok(x.as_slice()
        .iter()
        .zip(&ctx.column_sums)
        .map(|(xj, cj)| ctx.total_counts * xj / cj)
        .collect())
}

/// `‖λ̂ − λ‖₂ / ‖λ‖₂`.
pub fn normalized_estimation_error(estimate: &[f64], truth: &[f64]) -> Result<f64> {
    if estimate.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            got: estimate.len(),
        });
    }
    let norm = truth.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroGroundTruth);
    }
    let diff = estimate
        .iter()
        .zip(truth)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(diff / norm)
}
