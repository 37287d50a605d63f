//! Experiment driver: configurations and presets, instance generation, one
//! entry point per (problem, algorithm) pair, and CSV traces.

mod csv;

pub use self::csv::{read_csv, write_compare_csv, write_csv, COMPARE_HEADER, CSV_HEADER, TRACE_SCHEMA};

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{run_baseline, BaselineStep, Em, Imle};
use crate::datagen::{self, QstInstance};
use crate::error::{Error, Result};
use crate::geometry::fidelity;
use crate::hermitian::{DensityMatrix, SimplexVector};
use crate::io;
use crate::logloss::{f_value, Dataset};
use crate::problems::{
    kelly_dataset, normalized_estimation_error, pip_to_classical, qst_dataset, recover_lambda, KellyInstance,
    PermanentInstance, PoissonInstance,
};
use crate::record::{CheckpointSchedule, RunRecord};
use crate::rng::RngStream;
use crate::setup::{Classical, Quantum, Setup};
use crate::solver::{self, Budget, Metric, SolverConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Problem {
    Pip,
    Qst,
    Kelly,
    Permanent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algo {
    Lbsda,
    Em,
    Imle,
}

impl Problem {
    pub const ALL: [Problem; 4] = [Problem::Pip, Problem::Qst, Problem::Kelly, Problem::Permanent];

    pub fn is_quantum(self) -> bool {
        matches!(self, Problem::Qst | Problem::Permanent)
    }

    /// The full-gradient baseline for this problem's setup.
    pub fn baseline(self) -> Algo {
        if self.is_quantum() {
            Algo::Imle
        } else {
            Algo::Em
        }
    }

    pub fn metric_name(self) -> Option<&'static str> {
        match self {
            Problem::Pip => Some("nee"),
            Problem::Qst => Some("fidelity"),
            Problem::Kelly => None,
            Problem::Permanent => Some("rel"),
        }
    }
}

macro_rules! string_enum {
    ($t:ty { $($v:ident => $s:literal),* $(,)? }) => {
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $(Self::$v => $s),* })
            }
        }
        impl FromStr for $t {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($s => Ok(Self::$v),)*
                    _ => Err(Error::Config(format!(
                        concat!("unknown ", stringify!($t), " {:?} (expected one of: ", $($s, " "),* , ")"),
                        s
                    ))),
                }
            }
        }
    };
}

string_enum!(Problem { Pip => "pip", Qst => "qst", Kelly => "kelly", Permanent => "permanent" });
string_enum!(Algo { Lbsda => "lbsda", Em => "em", Imle => "imle" });

fn default_schedule() -> CheckpointSchedule {
    CheckpointSchedule::default()
}

/// Everything needed to reproduce one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub problem: Problem,
    pub algo: Algo,
    pub d: usize,
    /// Sensing vectors (pip), shots (qst) or days (kelly); ignored for permanents.
    pub n: u64,
    #[serde(rename = "B", alias = "batch_size")]
    pub batch_size: usize,
    /// Solver randomness.
    pub seed: u64,
    /// Instance randomness; fixed across the cells of a comparison.
    #[serde(default)]
    pub data_seed: u64,
    pub budget: Budget,
    #[serde(default = "default_schedule")]
    pub checkpoints: CheckpointSchedule,
    /// Measurement settings for qst; defaults to `d²`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<usize>,
    /// Instance file to load instead of generating one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

pub const PRESETS: [&str; 6] = [
    "pip-desk",
    "pip-paper",
    "qst-desk",
    "qst-paper",
    "kelly-desk",
    "permanent-desk",
];

/// Named configurations. `*-desk` presets finish in minutes on a laptop;
/// `*-paper` presets match the published experiment sizes.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let base = |problem, d, n, b, budget| ExperimentConfig {
        preset: Some(name.to_string()),
        problem,
        algo: Algo::Lbsda,
        d,
        n,
        batch_size: b,
        seed: 0,
        data_seed: 0,
        budget,
        checkpoints: CheckpointSchedule::default(),
        groups: None,
        input: None,
        out: None,
    };
    Ok(match name {
        "pip-desk" => base(Problem::Pip, 64, 100_000, 1, Budget::Epochs(20.0)),
        "pip-paper" => base(Problem::Pip, 256, 1_000_000, 1, Budget::Epochs(20.0)),
        "qst-desk" => ExperimentConfig {
            groups: Some(QST_DESK_GROUPS),
            ..base(Problem::Qst, 8, 10_000, 8, Budget::Epochs(QST_DESK_EPOCHS))
        },
        "qst-paper" => base(Problem::Qst, 64, 409_600, 64, Budget::Epochs(200.0)),
        "kelly-desk" => base(Problem::Kelly, 16, 10_000, 1, Budget::Epochs(20.0)),
        "permanent-desk" => base(Problem::Permanent, 3, 3, 3, Budget::Iterations(20_000)),
        _ => {
            return Err(Error::Config(format!(
                "unknown preset {name:?} (expected one of: {})",
                PRESETS.join(", ")
            )))
        }
    })
}

/// Measurement settings of the desk tomography preset.
pub const QST_DESK_GROUPS: usize = 64;
/// Epoch budget of the desk tomography preset.
pub const QST_DESK_EPOCHS: f64 = 6000.0;

impl ExperimentConfig {
    /// Rejects inconsistent configurations before any work is done.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.d == 0 {
            return bad("d must be positive".into());
        }
        if self.batch_size == 0 {
            return bad("B must be at least 1".into());
        }
        match (self.problem.is_quantum(), self.algo) {
            (true, Algo::Em) => return bad(format!("em applies to classical problems, not {}", self.problem)),
            (false, Algo::Imle) => return bad(format!("imle applies to quantum problems, not {}", self.problem)),
            _ => {}
        }
        match self.budget {
            Budget::Iterations(0) => return bad("iteration budget must be positive".into()),
            Budget::Epochs(v) | Budget::Seconds(v) if !(v > 0.0 && v.is_finite()) => {
                return bad("budget must be positive".into())
            }
            _ => {}
        }
        if self.input.is_some() {
            return Ok(());
        }
        match self.problem {
            Problem::Pip => {
                if phantom_side(self.d).is_none() {
                    return bad(format!("pip needs d to be a square of at least 4, got {}", self.d));
                }
                if self.n == 0 {
                    return bad("pip needs n ≥ 1 sensing vectors".into());
                }
            }
            Problem::Qst => {
                if self.d < 4 || !self.d.is_power_of_two() {
                    return bad(format!("qst needs d = 2^q with q ≥ 2, got {}", self.d));
                }
                if self.n == 0 {
                    return bad("qst needs at least one shot".into());
                }
                if self.groups == Some(0) {
                    return bad("qst needs at least one measurement group".into());
                }
            }
            Problem::Kelly => {
                if self.n == 0 {
                    return bad("kelly needs n ≥ 1 days".into());
                }
            }
            Problem::Permanent => {
                if self.d > 64 {
                    return bad("permanent instances are limited to d ≤ 64".into());
                }
            }
        }
        Ok(())
    }

    pub fn solver_config(&self, epoch_samples: u64) -> SolverConfig {
        let mut cfg = SolverConfig::new(self.d)
            .with_batch_size(self.batch_size)
            .with_budget(self.budget)
            .with_seed(self.seed);
        cfg.epoch_samples = Some(epoch_samples.max(1));
        cfg
    }

    /// `{preset}-{algo}-s{seed}` or `{problem}-{algo}-s{seed}`.
    pub fn label(&self) -> String {
        let stem = self.preset.clone().unwrap_or_else(|| self.problem.to_string());
        format!("{stem}-{}-s{}", self.algo, self.seed)
    }
}

fn phantom_side(d: usize) -> Option<usize> {
    let side = (d as f64).sqrt().round() as usize;
    (side >= 2 && side * side == d).then_some(side)
}

/// A generated or loaded problem instance.
#[derive(Clone, Debug)]
pub enum Instance {
    Pip(PoissonInstance),
    Qst(QstInstance),
    Kelly(KellyInstance),
    Permanent(PermanentInstance),
}

impl Instance {
    pub fn problem(&self) -> Problem {
        match self {
            Instance::Pip(_) => Problem::Pip,
            Instance::Qst(_) => Problem::Qst,
            Instance::Kelly(_) => Problem::Kelly,
            Instance::Permanent(_) => Problem::Permanent,
        }
    }
}

/// Builds the instance described by `cfg` from `cfg.data_seed`.
pub fn generate_instance(cfg: &ExperimentConfig) -> Result<Instance> {
    cfg.validate()?;
    let seed = cfg.data_seed;
    Ok(match cfg.problem {
        Problem::Pip => {
            let side = phantom_side(cfg.d).expect("validated");
            let lambda = datagen::shepp_logan(side);
            let sensing = datagen::sensing_vectors(cfg.n as usize, cfg.d, &mut RngStream::substream(seed, 1));
            let y = datagen::poisson_counts(&sensing.rows, &lambda, &mut RngStream::substream(seed, 2))?;
            Instance::Pip(PoissonInstance::new(sensing.rows, y, Some(lambda))?)
        }
        Problem::Qst => {
            let q = cfg.d.trailing_zeros() as usize;
            let truth = datagen::w_state(q)?;
            let groups = cfg.groups.unwrap_or(cfg.d * cfg.d);
            let ens = datagen::random_measurements(cfg.d, cfg.d / 2, groups, &mut RngStream::substream(seed, 1))?;
            Instance::Qst(datagen::sample_outcomes(
                &truth,
                &ens,
                cfg.n,
                &mut RngStream::substream(seed, 2),
            )?)
        }
        Problem::Kelly => Instance::Kelly(KellyInstance::synthetic(
            cfg.n as usize,
            cfg.d,
            &mut RngStream::substream(seed, 1),
        )?),
        Problem::Permanent => Instance::Permanent(PermanentInstance::new(
            datagen::random_density(cfg.d, &mut RngStream::substream(seed, 1))?
                .as_hermitian()
                .clone(),
        )?),
    })
}

/// Reads an instance in the format matching `problem`.
pub fn load_instance(problem: Problem, path: &Path) -> Result<Instance> {
    Ok(match problem {
        Problem::Pip => Instance::Pip(io::read_poisson_instance(path)?),
        Problem::Qst => Instance::Qst(io::read_qst_instance(path)?),
        Problem::Kelly => {
            let ds = io::read_dataset::<Classical>(path)?;
            Instance::Kelly(KellyInstance {
                price_relatives: ds.samples().to_vec(),
                weights: ds.weights().to_vec(),
            })
        }
        Problem::Permanent => Instance::Permanent(io::read_permanent_instance(path)?),
    })
}

pub fn save_instance(inst: &Instance, path: &Path) -> Result<()> {
    match inst {
        Instance::Pip(p) => io::write_poisson_instance(p, path),
        Instance::Qst(q) => io::write_qst_instance(q, path),
        Instance::Kelly(k) => io::write_dataset(&kelly_dataset(k)?, path),
        Instance::Permanent(p) => io::write_permanent_instance(p, path),
    }
}

/// Conventional file name for an instance of `problem`.
pub fn instance_file_name(problem: Problem) -> &'static str {
    match problem {
        Problem::Pip => "instance.pip",
        Problem::Qst => "instance.qst.json",
        Problem::Kelly => "instance.kelly.json",
        Problem::Permanent => "instance.permanent.json",
    }
}

#[derive(Clone, Debug)]
pub enum FinalPoint {
    Simplex(SimplexVector),
    Density(DensityMatrix),
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub record: RunRecord,
    pub final_point: FinalPoint,
    /// Only baselines can diverge.
    pub diverged: bool,
}

/// LB-SDA or the setup's baseline `B`; `validate` guarantees the pairing.
fn run_algo<S: Setup, B: BaselineStep<S>>(
    cfg: &ExperimentConfig,
    ds: &Dataset<S>,
    epoch_samples: u64,
    metric: Option<Metric<'_, S::Point>>,
) -> Result<(RunRecord, S::Point, bool)> {
    if cfg.algo == Algo::Lbsda {
        let out = solver::run(ds, &cfg.solver_config(epoch_samples), &cfg.checkpoints, metric)?;
        return Ok((out.record, out.final_average, false));
    }
    let out = run_baseline::<S, B>(ds, cfg.budget, &cfg.checkpoints, metric)?;
    Ok((out.record, out.final_point, out.diverged))
}

/// Runs `cfg` on `inst`.
pub fn run_on_instance(cfg: &ExperimentConfig, inst: &Instance) -> Result<ExperimentOutput> {
    cfg.validate()?;
    if inst.problem() != cfg.problem {
        return Err(Error::Config(format!(
            "instance is a {} problem but the config asks for {}",
            inst.problem(),
            cfg.problem
        )));
    }
    let (mut record, final_point, diverged) = match inst {
        Instance::Pip(p) => {
            let (ds, ctx) = pip_to_classical(p)?;
            check_dim(cfg, ds.dim())?;
            let nee = |x: &SimplexVector| {
                let truth = p.lambda_true.as_ref().expect("checked below");
                normalized_estimation_error(&recover_lambda(x, &ctx)?, truth)
            };
            let metric: Option<Metric<'_, SimplexVector>> = p.lambda_true.as_ref().map(|_| &nee as _);
            let (rec, x, div) = run_algo::<Classical, Em>(cfg, &ds, ctx.n_original as u64, metric)?;
            (rec, FinalPoint::Simplex(x), div)
        }
        Instance::Qst(q) => {
            let ds = qst_dataset(q)?;
            check_dim(cfg, ds.dim())?;
            let fid = |rho: &DensityMatrix| fidelity(rho, q.rho_true.as_ref().expect("checked below"));
            let metric: Option<Metric<'_, DensityMatrix>> = q.rho_true.as_ref().map(|_| &fid as _);
            let (rec, rho, div) = run_algo::<Quantum, Imle>(cfg, &ds, q.shots(), metric)?;
            (rec, FinalPoint::Density(rho), div)
        }
        Instance::Kelly(k) => {
            let ds = kelly_dataset(k)?;
            check_dim(cfg, ds.dim())?;
            let (rec, x, div) = run_algo::<Classical, Em>(cfg, &ds, ds.len() as u64, None)?;
            (rec, FinalPoint::Simplex(x), div)
        }
        Instance::Permanent(p) => {
            let ds = p.dataset()?;
            check_dim(cfg, ds.dim())?;
            let d = ds.dim() as f64;
            let rel = |rho: &DensityMatrix| Ok((-d * f_value(&ds, rho)?).exp());
            let (rec, rho, div) = run_algo::<Quantum, Imle>(cfg, &ds, ds.len() as u64, Some(&rel))?;
            (rec, FinalPoint::Density(rho), div)
        }
    };
    let has_metric = record.checkpoints.first().is_some_and(|c| c.metric.is_some());
    record.metric_name = has_metric
        .then(|| cfg.problem.metric_name())
        .flatten()
        .map(String::from);
    record.config = serde_json::to_value(cfg).expect("config serializes");
    Ok(ExperimentOutput {
        record,
        final_point,
        diverged,
    })
}

fn check_dim(cfg: &ExperimentConfig, d: usize) -> Result<()> {
    if cfg.d != d {
        return Err(Error::Config(format!(
            "config has d = {} but the instance has d = {d}",
            cfg.d
        )));
    }
    Ok(())
}

/// Generates (or loads) the instance and runs the configured algorithm.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let inst = match &cfg.input {
        Some(path) => load_instance(cfg.problem, path)?,
        None => generate_instance(cfg)?,
    };
    run_on_instance(cfg, &inst)
}

/// One cell per (algorithm, seed) pair, sharing the base instance.
pub fn compare_cells(base: &ExperimentConfig, algos: &[Algo], seeds: &[u64]) -> Result<Vec<ExperimentConfig>> {
    let cells: Vec<ExperimentConfig> = algos
        .iter()
        .flat_map(|&algo| {
            seeds.iter().map(move |&seed| ExperimentConfig {
                algo,
                seed,
                ..base.clone()
            })
        })
        .collect();
    for c in &cells {
        c.validate()?;
    }
    Ok(cells)
}

/// Smallest objective over every checkpoint of every record.
pub fn best_objective(records: &[RunRecord]) -> Option<f64> {
    records
        .iter()
        .filter_map(RunRecord::best_objective)
        .min_by(|a, b| a.total_cmp(b))
}

/// `f(x_t) − f_best` per checkpoint, against the best value across `records`.
pub fn approximate_errors(records: &[RunRecord]) -> Vec<Vec<f64>> {
    let best = best_objective(records).unwrap_or(0.0);
    records
        .iter()
        .map(|r| r.checkpoints.iter().map(|c| c.objective - best).collect())
        .collect()
}
