//! Stochastic dual averaging with the logarithmic barrier (LB-SDA).
//!
//! Each iteration reports the uniform average of the iterates so far, queries
//! the oracle at the current iterate, grows the running sum `S_t` of squared
//! shifted dual local norms, sets `η_t = D/√(S_t + 4M²G²D² + G²)` and solves
//! the barrier subproblem on the accumulated gradient.

use serde::{Deserialize, Serialize};

use crate::barrier::NewtonOptions;
use crate::error::{Error, Result};
use crate::logloss::{f_value, Dataset, GradientOracle, MinibatchOracle};
use crate::record::{Checkpoint, CheckpointSchedule, RunRecord};
use crate::rng::RngStream;
use crate::setup::Setup;
use rand::Rng;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum Budget {
    Iterations(u64),
    Epochs(f64),
    Seconds(f64),
}

impl std::str::FromStr for Budget {
    type Err = Error;

    /// `iters:N`, `epochs:E` or `seconds:S`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("budget {s:?} is not iters:N, epochs:E or seconds:S"));
        let (kind, value) = s.split_once(':').ok_or_else(bad)?;
        let budget = match kind.trim() {
            "iters" | "iterations" => Budget::Iterations(value.trim().parse().map_err(|_| bad())?),
            "epochs" => Budget::Epochs(value.trim().parse().map_err(|_| bad())?),
            "seconds" | "secs" => Budget::Seconds(value.trim().parse().map_err(|_| bad())?),
            _ => return Err(bad()),
        };
        match budget {
            Budget::Iterations(0) => Err(bad()),
            Budget::Epochs(v) | Budget::Seconds(v) if !(v > 0.0 && v.is_finite()) => Err(bad()),
            b => Ok(b),
        }
    }
}

impl std::fmt::Display for Budget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Budget::Iterations(k) => write!(f, "iters:{k}"),
            Budget::Epochs(e) => write!(f, "epochs:{e}"),
            Budget::Seconds(s) => write!(f, "seconds:{s}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub d: usize,
    pub batch_size: usize,
    /// Gradient bound `G` in the dual local norm.
    pub g_bound: f64,
    /// Regularizer scale `D`.
    pub d_scale: f64,
    /// Self-concordance constant `M`.
    pub m_const: f64,
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    pub budget: Budget,
    pub seed: u64,
    /// Samples per epoch; defaults to the dataset length.
    pub epoch_samples: Option<u64>,
}

impl SolverConfig {
    pub fn new(d: usize) -> Self {
        Self {
            d,
            batch_size: 1,
            g_bound: 1.0,
            d_scale: (d as f64).sqrt(),
            m_const: 1.0,
            newton_tol: 1e-12,
            max_newton_iters: 100,
            budget: Budget::Iterations(1000),
            seed: 0,
            epoch_samples: None,
        }
    }

    pub fn with_batch_size(mut self, b: usize) -> Self {
        self.batch_size = b;
        self
    }

    pub fn with_budget(mut self, budget: Budget) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(what.to_string()));
        if self.d == 0 {
            return bad("dimension must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch size must be at least 1");
        }
        if !(self.g_bound > 0.0) || !(self.d_scale > 0.0) || !(self.m_const > 0.0) {
            return bad("G, D and M must be positive");
        }
        if !(self.newton_tol > 0.0) {
            return bad("newton tolerance must be positive");
        }
        match self.budget {
            Budget::Iterations(0) => bad("iteration budget must be positive"),
            Budget::Epochs(e) | Budget::Seconds(e) if !(e > 0.0) => bad("budget must be positive"),
            _ => Ok(()),
        }
    }

    pub fn newton(&self) -> NewtonOptions {
        NewtonOptions {
            tol: self.newton_tol,
            max_iters: self.max_newton_iters,
        }
    }
}

/// `η = D / √(S + 4M²G²D² + G²)`.
pub fn learning_rate(s: f64, cfg: &SolverConfig) -> f64 {
    let (g, dd, m) = (cfg.g_bound, cfg.d_scale, cfg.m_const);
    dd / (s + 4.0 * m * m * g * g * dd * dd + g * g).sqrt()
}

/// Expected-error bound after `t` iterations with `C_t = ln t + 3`:
/// `(4dC_t³ + 2C_t√(σ²dt + 4d²G² + dG²) + 1) / t`.
pub fn error_bound(t: u64, cfg: &SolverConfig, sigma2: f64) -> f64 {
    let t = t.max(1) as f64;
    let d = cfg.d as f64;
    let g2 = cfg.g_bound * cfg.g_bound;
    let c = t.ln() + 3.0;
    (4.0 * d * c.powi(3) + 2.0 * c * (sigma2 * d * t + 4.0 * d * d * g2 + d * g2).sqrt() + 1.0) / t
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepReport {
    pub eta: f64,
    pub nu: f64,
    pub newton_iters: usize,
    pub kkt_residual: f64,
    pub used_bisection: bool,
    /// `‖g_t + α·I‖_{ρ_t,*}` for the gradient of this step.
    pub shifted_dual_norm: f64,
}

/// Running state after `t` iterates `ρ_1..ρ_t` have been produced.
#[derive(Clone, Debug)]
pub struct SolverState<S: Setup> {
    t: u64,
    g_cum: S::Vector,
    rho_t: S::Point,
    rho_sum: S::Vector,
    s_sum: f64,
}

impl<S: Setup> SolverState<S> {
    /// `t = 1`, `ρ_1 = I/d`.
    pub fn new(d: usize) -> Self {
        let rho = S::center(d);
        let mut rho_sum = S::zero_vector(d);
        S::add_point(&mut rho_sum, &rho);
        Self {
            t: 1,
            g_cum: S::zero_vector(d),
            rho_t: rho,
            rho_sum,
            s_sum: 0.0,
        }
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn current(&self) -> &S::Point {
        &self.rho_t
    }

    pub fn g_cum(&self) -> &S::Vector {
        &self.g_cum
    }

    pub fn rho_sum(&self) -> &S::Vector {
        &self.rho_sum
    }

    /// Running sum of squared shifted dual local norms.
    pub fn s_sum(&self) -> f64 {
        self.s_sum
    }

    /// `ρ̄_t = (1/t) Σ_{τ≤t} ρ_τ`, the output for iteration `t`.
    pub fn averaged(&self) -> Result<S::Point> {
        S::average(&self.rho_sum)
    }

    /// Queries the oracle at `ρ_t` and advances to `ρ_{t+1}`.
    pub fn lbsda_step<O, R>(&mut self, oracle: &mut O, cfg: &SolverConfig, rng: &mut R) -> Result<StepReport>
    where
        O: GradientOracle<S>,
        R: Rng + ?Sized,
    {
        let g = oracle.query(&self.rho_t, rng)?;
        let shifted_sq = S::shifted_dual_norm_sq(&self.rho_t, &g);
        let s_next = self.s_sum + shifted_sq;
        let eta = learning_rate(s_next, cfg);
        let mut g_cum = self.g_cum.clone();
        S::add_scaled(&mut g_cum, 1.0, &g);
        let (rho_next, sub) = S::barrier_argmin(&g_cum, eta, &cfg.newton())?;

        self.s_sum = s_next;
        self.g_cum = g_cum;
        S::add_point(&mut self.rho_sum, &rho_next);
        self.rho_t = rho_next;
        self.t += 1;
        Ok(StepReport {
            eta,
            nu: sub.nu,
            newton_iters: sub.newton_iters,
            kkt_residual: sub.kkt_residual,
            used_bisection: sub.used_bisection,
            shifted_dual_norm: shifted_sq.sqrt(),
        })
    }
}

/// One B-sample step over a dataset, by value.
pub fn lbsda_step<S: Setup, R: Rng + ?Sized>(
    mut state: SolverState<S>,
    ds: &Dataset<S>,
    cfg: &SolverConfig,
    rng: &mut R,
) -> Result<(SolverState<S>, StepReport)> {
    let mut oracle = MinibatchOracle::new(ds, cfg.batch_size);
    let report = state.lbsda_step(&mut oracle, cfg, rng)?;
    Ok((state, report))
}

pub type Metric<'a, P> = &'a dyn Fn(&P) -> Result<f64>;

pub struct RunOutput<S: Setup> {
    pub record: RunRecord,
    pub final_average: S::Point,
    pub state: SolverState<S>,
}

/// Monotonic stopwatch; reads zero where the platform has no clock.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Stopwatch {
    #[cfg(not(target_arch = "wasm32"))]
    start: std::time::Instant,
}

impl Stopwatch {
    pub(crate) fn start() -> Self {
        Self {
            #[cfg(not(target_arch = "wasm32"))]
            start: std::time::Instant::now(),
        }
    }

    pub(crate) fn elapsed(&self) -> f64 {
        #[cfg(not(target_arch = "wasm32"))]
        {
            self.start.elapsed().as_secs_f64()
        }
        #[cfg(target_arch = "wasm32")]
        {
            0.0
        }
    }
}

pub(crate) fn iteration_cap(budget: Budget, batch: usize, epoch_samples: u64) -> u64 {
    match budget {
        Budget::Iterations(k) => k,
        Budget::Epochs(e) => ((e * epoch_samples as f64 / batch as f64).ceil() as u64).max(1),
        Budget::Seconds(_) => u64::MAX,
    }
}

/// Runs B-sample LB-SDA on `ds` until the budget is spent, recording
/// `f(ρ̄_t)` (and `metric(ρ̄_t)`) at scheduled iterations.
pub fn run<S: Setup>(
    ds: &Dataset<S>,
    cfg: &SolverConfig,
    schedule: &CheckpointSchedule,
    metric: Option<Metric<'_, S::Point>>,
) -> Result<RunOutput<S>> {
    let mut oracle = MinibatchOracle::new(ds, cfg.batch_size);
    run_with_oracle(&mut oracle, ds, cfg, schedule, metric)
}

/// As [`run`] with an arbitrary oracle; `objective` supplies the reported `f`.
pub fn run_with_oracle<S: Setup, O: GradientOracle<S>>(
    oracle: &mut O,
    objective: &Dataset<S>,
    cfg: &SolverConfig,
    schedule: &CheckpointSchedule,
    metric: Option<Metric<'_, S::Point>>,
) -> Result<RunOutput<S>> {
    cfg.validate()?;
    if cfg.d != objective.dim() {
        return Err(Error::DimensionMismatch {
            expected: cfg.d,
            got: objective.dim(),
        });
    }
    let epoch_samples = cfg.epoch_samples.unwrap_or(objective.len() as u64).max(1);
    let batch = oracle.batch_size();
    let cap = iteration_cap(cfg.budget, batch, epoch_samples);
    let seconds = match cfg.budget {
        Budget::Seconds(s) => Some(s),
        _ => None,
    };
    let mut rng = RngStream::new(cfg.seed);
    let mut state = SolverState::<S>::new(cfg.d);
    let mut record = RunRecord {
        config: serde_json::to_value(cfg).unwrap_or_default(),
        metric_name: None,
        checkpoints: Vec::new(),
    };
    let clock = Stopwatch::start();
    let mut next_cp = schedule.next_after(0);
    loop {
        let t = state.t();
        let elapsed = clock.elapsed();
        let last = t >= cap || seconds.is_some_and(|s| elapsed >= s);
        if last || next_cp == Some(t) {
            let avg = state.averaged()?;
            record.checkpoints.push(Checkpoint {
                iter: t,
                epochs: t as f64 * batch as f64 / epoch_samples as f64,
                elapsed_s: elapsed,
                objective: f_value(objective, &avg)?,
                metric: metric.map(|m| m(&avg)).transpose()?,
            });
            next_cp = schedule.next_after(t);
        }
        if last {
            break;
        }
        state.lbsda_step(oracle, cfg, &mut rng)?;
    }
    let final_average = state.averaged()?;
    Ok(RunOutput {
        record,
        final_average,
        state,
    })
}
