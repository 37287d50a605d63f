//! The expected logarithmic loss `f(ρ) = E[−log tr(Aρ)]` over a weighted
//! finite dataset, its gradient, and the B-sample stochastic oracle.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{Error, Result};
use crate::setup::{Classical, Quantum, Setup};

/// `tr(Aρ)` below this is treated as an infeasible iterate.
pub const FEASIBILITY_FLOOR: f64 = 1e-300;

const WEIGHT_SUM_TOL: f64 = 1e-10;

/// Weighted samples of one setup and dimension. Weights are a probability
/// vector; sampling draws indices i.i.d. from it.
#[derive(Clone, Debug)]
pub struct Dataset<S: Setup> {
    dim: usize,
    samples: Vec<S::Sample>,
    weights: Vec<f64>,
    sampler: WeightedIndex<f64>,
}

pub type QuantumDataset = Dataset<Quantum>;
pub type ClassicalDataset = Dataset<Classical>;

impl<S: Setup> Dataset<S> {
    /// Weights must be nonnegative and sum to one (up to `1e-10`); they are
    /// stored as given.
    pub fn new(samples: Vec<S::Sample>, weights: Vec<f64>) -> Result<Self> {
        let Some(first) = samples.first() else {
            return Err(Error::InvalidDataset("no samples".into()));
        };
        if weights.len() != samples.len() {
            return Err(Error::InvalidDataset(format!(
                "{} samples but {} weights",
                samples.len(),
                weights.len()
            )));
        }
        let dim = S::sample_dim(first);
        for (index, s) in samples.iter().enumerate() {
            if S::sample_dim(s) != dim {
                return Err(Error::InvalidSample {
                    index,
                    reason: format!("dimension {} differs from {dim}", S::sample_dim(s)),
                });
            }
            S::check_sample(s).map_err(|reason| Error::InvalidSample { index, reason })?;
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(**w >= 0.0) || !w.is_finite())
        {
            return Err(Error::InvalidDataset(format!("weight {i} is {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidDataset(format!("weights sum to {total}")));
        }
        let sampler = WeightedIndex::new(&weights).map_err(|e| Error::InvalidDataset(format!("weights: {e}")))?;
        Ok(Self {
            dim,
            samples,
            weights,
            sampler,
        })
    }

    pub fn uniform(samples: Vec<S::Sample>) -> Result<Self> {
        let n = samples.len();
        Self::new(samples, vec![1.0 / n.max(1) as f64; n])
    }

    /// Weights proportional to integer multiplicities.
    pub fn from_counts(samples: Vec<S::Sample>, counts: &[u64]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::InvalidDataset("all counts are zero".into()));
        }
        let weights = counts.iter().map(|&c| c as f64 / total as f64).collect();
        Self::new(samples, weights)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[S::Sample] {
        &self.samples
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn draw_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.sampler.sample(rng)
    }
}

fn checked_inner<S: Setup>(index: usize, s: &S::Sample, p: &S::Point) -> Result<f64> {
    let value = S::inner(s, p);
    if !(value > FEASIBILITY_FLOOR) {
        return Err(Error::InfeasibleSample { index, value });
    }
    Ok(value)
}

/// `−log tr(Aρ)`.
pub fn sample_loss<S: Setup>(s: &S::Sample, p: &S::Point) -> Result<f64> {
    Ok(-checked_inner::<S>(0, s, p)?.ln())
}

/// `−A / tr(Aρ)`.
pub fn sample_grad<S: Setup>(s: &S::Sample, p: &S::Point) -> Result<S::Vector> {
    let value = checked_inner::<S>(0, s, p)?;
    let mut g = S::zero_vector(S::point_dim(p));
    S::add_scaled_sample(&mut g, -1.0 / value, s);
    Ok(g)
}

fn check_dims<S: Setup>(ds: &Dataset<S>, p: &S::Point) -> Result<()> {
    if S::point_dim(p) != ds.dim() {
        return Err(Error::DimensionMismatch {
            expected: ds.dim(),
            got: S::point_dim(p),
        });
    }
    Ok(())
}

/// Weighted average loss, accumulated in sample order.
pub fn f_value<S: Setup>(ds: &Dataset<S>, p: &S::Point) -> Result<f64> {
    check_dims(ds, p)?;
    let mut acc = 0.0;
    for (i, (s, w)) in ds.samples.iter().zip(&ds.weights).enumerate() {
        acc -= w * checked_inner::<S>(i, s, p)?.ln();
    }
    Ok(acc)
}

pub fn f_grad<S: Setup>(ds: &Dataset<S>, p: &S::Point) -> Result<S::Vector> {
    check_dims(ds, p)?;
    let mut g = S::zero_vector(ds.dim());
    for (i, (s, w)) in ds.samples.iter().zip(&ds.weights).enumerate() {
        let value = checked_inner::<S>(i, s, p)?;
        S::add_scaled_sample(&mut g, -w / value, s);
    }
    Ok(g)
}

/// A stochastic gradient together with the sample indices it came from.
#[derive(Clone, Debug)]
pub struct GradEstimate<S: Setup> {
    pub g: S::Vector,
    pub batch_size: usize,
    pub source_indices: Vec<usize>,
}

/// Bounds satisfied by an oracle in dual-local-norm units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleContract {
    pub g_bound: f64,
    pub sigma2: f64,
}

impl OracleContract {
    /// The B-sample oracle: `G = 1`, `σ² = 4/B`.
    pub fn minibatch(batch_size: usize) -> Self {
        Self {
            g_bound: 1.0,
            sigma2: 4.0 / batch_size as f64,
        }
    }
}

/// Average of `B` per-sample gradients at indices drawn i.i.d. from the
/// dataset weights.
pub fn minibatch_gradient<S: Setup, R: Rng + ?Sized>(
    ds: &Dataset<S>,
    p: &S::Point,
    batch_size: usize,
    rng: &mut R,
) -> Result<GradEstimate<S>> {
    if batch_size == 0 {
        return Err(Error::Config("batch size must be at least 1".into()));
    }
    check_dims(ds, p)?;
    let scale = 1.0 / batch_size as f64;
    let mut g = S::zero_vector(ds.dim());
    let mut source_indices = Vec::with_capacity(batch_size);
    for _ in 0..batch_size {
        let i = ds.draw_index(rng);
        let s = &ds.samples[i];
        let value = checked_inner::<S>(i, s, p)?;
        S::add_scaled_sample(&mut g, -scale / value, s);
        source_indices.push(i);
    }
    Ok(GradEstimate {
        g,
        batch_size,
        source_indices,
    })
}

/// Source of gradient estimates for the solver.
pub trait GradientOracle<S: Setup> {
    fn query<R: Rng + ?Sized>(&mut self, p: &S::Point, rng: &mut R) -> Result<S::Vector>;

    /// Samples consumed per query, for epoch accounting.
    fn batch_size(&self) -> usize;
}

/// The B-sample oracle over a dataset.
#[derive(Clone, Copy, Debug)]
pub struct MinibatchOracle<'a, S: Setup> {
    pub dataset: &'a Dataset<S>,
    pub batch_size: usize,
}

impl<'a, S: Setup> MinibatchOracle<'a, S> {
    pub fn new(dataset: &'a Dataset<S>, batch_size: usize) -> Self {
        Self { dataset, batch_size }
    }
}

impl<S: Setup> GradientOracle<S> for MinibatchOracle<'_, S> {
    fn query<R: Rng + ?Sized>(&mut self, p: &S::Point, rng: &mut R) -> Result<S::Vector> {
        Ok(minibatch_gradient(self.dataset, p, self.batch_size, rng)?.g)
    }

    fn batch_size(&self) -> usize {
        self.batch_size
    }
}

/// Exact gradients; consumes the whole dataset per query.
#[derive(Clone, Copy, Debug)]
pub struct FullGradientOracle<'a, S: Setup> {
    pub dataset: &'a Dataset<S>,
}

impl<S: Setup> GradientOracle<S> for FullGradientOracle<'_, S> {
    fn query<R: Rng + ?Sized>(&mut self, p: &S::Point, _rng: &mut R) -> Result<S::Vector> {
        f_grad(self.dataset, p)
    }

    fn batch_size(&self) -> usize {
        self.dataset.len()
    }
}
