//! Kelly portfolios: maximize `E log⟨a, x⟩` over portfolios `x ∈ Δ_d` for
//! random price relatives `a ≥ 0`.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::logloss::ClassicalDataset;

#[derive(Clone, Debug)]
pub struct KellyInstance {
    pub price_relatives: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl KellyInstance {
    /// Equally weighted days.
    pub fn uniform(price_relatives: Vec<Vec<f64>>) -> Self {
        let n = price_relatives.len().max(1);
        Self {
            weights: vec![1.0 / n as f64; price_relatives.len()],
            price_relatives,
        }
    }

    /// `n` days of log-normal price relatives for `d` assets with drifts in
    /// `[-0.01, 0.01]` and daily volatility 0.05.
    pub fn synthetic<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::Config("kelly instance needs n, d ≥ 1".into()));
        }
        let drifts: Vec<f64> = (0..d).map(|_| rng.random_range(-0.01..=0.01)).collect();
        let noise = Normal::new(0.0, 0.05).map_err(|e| Error::Config(e.to_string()))?;
        let days = (0..n)
            .map(|_| drifts.iter().map(|m| (m + noise.sample(rng)).exp()).collect())
            .collect();
        Ok(Self::uniform(days))
    }
}

/// Empirical distribution of the price relatives as a simplex dataset.
pub fn kelly_dataset(k: &KellyInstance) -> Result<ClassicalDataset> {
    ClassicalDataset::new(k.price_relatives.clone(), k.weights.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::SimplexVector;
    use crate::logloss::f_value;
    use crate::record::CheckpointSchedule;
    use crate::rng::RngStream;
    use crate::solver::{run, Budget, SolverConfig};

    #[test]
    fn single_day_concentrates_on_best_asset() {
        let k = KellyInstance::uniform(vec![vec![0.9, 1.3, 1.1]]);
        let ds = kelly_dataset(&k).unwrap();
        let cfg = SolverConfig::new(3).with_budget(Budget::Iterations(50_000));
        let out = run(&ds, &cfg, &CheckpointSchedule::Every { interval: 50_000 }, None).unwrap();
        assert!(out.state.current()[1] >= 0.99, "{:?}", out.state.current());
    }

    #[test]
    fn flat_market_is_indifferent() {
        let ds = kelly_dataset(&KellyInstance::uniform(vec![vec![1.0; 4]; 3])).unwrap();
        for x in [
            SimplexVector::uniform(4),
            SimplexVector::new(vec![0.7, 0.1, 0.1, 0.1]).unwrap(),
        ] {
            assert!(f_value(&ds, &x).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn symmetric_assets_split_evenly() {
        let k = KellyInstance::uniform(vec![vec![2.0, 0.5], vec![0.5, 2.0]]);
        let ds = kelly_dataset(&k).unwrap();
        let cfg = SolverConfig::new(2)
            .with_batch_size(2)
            .with_budget(Budget::Iterations(20_000));
        let out = run(&ds, &cfg, &CheckpointSchedule::default(), None).unwrap();
        assert!((out.final_average[0] - 0.5).abs() < 0.02, "{:?}", out.final_average);
    }

    #[test]
    fn synthetic_is_valid() {
        let mut rng = RngStream::new(2);
        let k = KellyInstance::synthetic(100, 5, &mut rng).unwrap();
        assert_eq!(kelly_dataset(&k).unwrap().len(), 100);
        assert!(KellyInstance::synthetic(0, 5, &mut rng).is_err());
    }
}
