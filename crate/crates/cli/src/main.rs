use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use logbarrier::harness::{
    self, compare_cells, generate_instance, instance_file_name, load_instance, run_on_instance, save_instance,
    write_compare_csv, write_csv, Algo, ExperimentConfig, ExperimentOutput, Instance, Problem,
};
use logbarrier::{Budget, CheckpointSchedule, Error};

const THREADS_VAR: &str = "LOGBARRIER_THREADS";

#[derive(Parser)]
#[command(
    name = "logbarrier",
    version,
    about = "Log-barrier stochastic dual averaging experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one algorithm on one instance and write its trace.
    Run(RunArgs),
    /// Run several algorithms and seeds on a shared instance.
    Compare(CompareArgs),
    /// Write a preset's instance to disk.
    Gen(GenArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// Start from a named preset (pip-desk, pip-paper, qst-desk, qst-paper, kelly-desk, permanent-desk).
    #[arg(long)]
    preset: Option<String>,
    /// pip, qst, kelly or permanent. Without --preset, defaults come from the desk preset.
    #[arg(long)]
    problem: Option<Problem>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    n: Option<u64>,
    /// Mini-batch size.
    #[arg(long = "B", visible_alias = "batch-size")]
    batch_size: Option<usize>,
    /// Solver seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Instance seed.
    #[arg(long)]
    data_seed: Option<u64>,
    /// iters:N, epochs:E or seconds:S.
    #[arg(long)]
    budget: Option<Budget>,
    /// Measurement groups for qst.
    #[arg(long)]
    groups: Option<usize>,
    /// Load the instance from this file instead of generating it.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Record every N-th iteration instead of a geometric grid.
    #[arg(long, conflicts_with = "checkpoint_ratio")]
    checkpoint_every: Option<u64>,
    /// Ratio of the geometric checkpoint grid.
    #[arg(long)]
    checkpoint_ratio: Option<f64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// lbsda, em (classical problems) or imle (quantum problems).
    #[arg(long, default_value = "lbsda")]
    algo: Algo,
    /// Trace CSV; the JSON sidecar is written next to it. Defaults to `<label>.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Comma-separated; defaults to lbsda plus the problem's baseline.
    #[arg(long, value_delimiter = ',')]
    algos: Vec<Algo>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    seeds: Vec<u64>,
    /// Output directory; defaults to `compare-<preset or problem>`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn desk_preset(problem: Problem) -> &'static str {
    match problem {
        Problem::Pip => "pip-desk",
        Problem::Qst => "qst-desk",
        Problem::Kelly => "kelly-desk",
        Problem::Permanent => "permanent-desk",
    }
}

fn build_config(args: &ConfigArgs, algo: Algo) -> logbarrier::Result<ExperimentConfig> {
    let mut cfg = match (&args.preset, args.problem) {
        (Some(name), problem) => {
            let cfg = harness::preset(name)?;
            if problem.is_some_and(|p| p != cfg.problem) {
                return Err(Error::Config(format!("preset {name} is a {} problem", cfg.problem)));
            }
            cfg
        }
        (None, Some(problem)) => ExperimentConfig {
            preset: None,
            ..harness::preset(desk_preset(problem))?
        },
        (None, None) => return Err(Error::Config("give --preset or --problem".into())),
    };
    cfg.algo = algo;
    if let Some(d) = args.d {
        cfg.d = d;
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(b) = args.batch_size {
        cfg.batch_size = b;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(s) = args.data_seed {
        cfg.data_seed = s;
    }
    if let Some(b) = args.budget {
        cfg.budget = b;
    }
    if args.groups.is_some() {
        cfg.groups = args.groups;
    }
    if let Some(interval) = args.checkpoint_every {
        cfg.checkpoints = CheckpointSchedule::Every { interval };
    }
    if let Some(ratio) = args.checkpoint_ratio {
        if !(ratio > 1.0 && ratio.is_finite()) {
            return Err(Error::Config("checkpoint ratio must exceed 1".into()));
        }
        cfg.checkpoints = CheckpointSchedule::Geometric { ratio };
    }
    cfg.input = args.input.clone();
    cfg.validate()?;
    Ok(cfg)
}

fn instance_for(cfg: &ExperimentConfig) -> logbarrier::Result<Instance> {
    match &cfg.input {
        Some(path) => load_instance(cfg.problem, path),
        None => generate_instance(cfg),
    }
}

fn stem(cfg: &ExperimentConfig) -> String {
    cfg.preset.clone().unwrap_or_else(|| cfg.problem.to_string())
}

fn summarize(label: &str, out: &ExperimentOutput) {
    let Some(last) = out.record.last() else { return };
    let metric = match (&out.record.metric_name, last.metric) {
        (Some(name), Some(v)) => format!(" {name}={v:.6}"),
        _ => String::new(),
    };
    eprintln!(
        "{label}: iter={} epochs={:.3} objective={:.10}{metric} elapsed={:.2}s",
        last.iter, last.epochs, last.objective, last.elapsed_s
    );
    if out.diverged {
        eprintln!("{label}: stopped after the objective rose on consecutive iterations");
    }
}

fn ensure_parent(path: &Path) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(())
}

fn run(args: RunArgs) -> anyhow::Result<()> {
    let mut cfg = build_config(&args.config, args.algo)?;
    let out_path = args
        .out
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", cfg.label())));
    cfg.out = Some(out_path.clone());
    let inst = instance_for(&cfg)?;
    let out = run_on_instance(&cfg, &inst)?;
    ensure_parent(&out_path)?;
    write_csv(&out.record, &out_path)?;
    summarize(&cfg.label(), &out);
    println!("{}", out_path.display());
    Ok(())
}

fn thread_cap() -> anyhow::Result<Option<usize>> {
    match std::env::var(THREADS_VAR) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!("{THREADS_VAR} must be a positive integer, got {v:?}")).into()),
        },
        Err(_) => Ok(None),
    }
}

fn compare(args: CompareArgs) -> anyhow::Result<()> {
    let base = build_config(&args.config, Algo::Lbsda)?;
    let algos = if args.algos.is_empty() {
        vec![Algo::Lbsda, base.problem.baseline()]
    } else {
        args.algos
    };
    if args.seeds.is_empty() {
        bail!(Error::Config("no seeds given".into()));
    }
    let dir = args
        .out
        .unwrap_or_else(|| PathBuf::from(format!("compare-{}", stem(&base))));
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let cells: Vec<ExperimentConfig> = compare_cells(&base, &algos, &args.seeds)?
        .into_iter()
        .map(|c| ExperimentConfig {
            out: Some(dir.join(format!("{}.csv", c.label()))),
            ..c
        })
        .collect();
    let inst = instance_for(&base)?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap()? {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().context("starting worker pool")?;
    let outputs: Vec<ExperimentOutput> = pool.install(|| {
        cells
            .par_iter()
            .map(|c| run_on_instance(c, &inst))
            .collect::<Result<_, _>>()
    })?;

    for (cfg, out) in cells.iter().zip(&outputs) {
        write_csv(&out.record, cfg.out.as_deref().expect("set above"))?;
        summarize(&cfg.label(), out);
    }
    let merged: Vec<_> = cells
        .iter()
        .zip(&outputs)
        .map(|(c, o)| (c.algo, c.seed, &o.record))
        .collect();
    let merged_path = dir.join("compare.csv");
    write_compare_csv(&merged, &merged_path)?;
    println!("{}", merged_path.display());
    Ok(())
}

fn gen(args: GenArgs) -> anyhow::Result<()> {
    if args.config.input.is_some() {
        bail!(Error::Config("gen writes instances; --input does not apply".into()));
    }
    let cfg = build_config(&args.config, Algo::Lbsda)?;
    let path = args
        .out
        .unwrap_or_else(|| PathBuf::from(instance_file_name(cfg.problem)));
    ensure_parent(&path)?;
    save_instance(&generate_instance(&cfg)?, &path)?;
    println!("{}", path.display());
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Config(_)) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Compare(a) => compare(a),
        Command::Gen(a) => gen(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
