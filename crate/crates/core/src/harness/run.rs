use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::config::{Algorithm, ExperimentConfig, KnownDrift};
use super::ledger::write_ledger_file;
use crate::baselines::{FixedOptimalFirst, UniformRandom};
use crate::error::{Error, Result};
use crate::master::{Envelope, Master, MasterConfig, MasterSwitches, MvpBase, MvpBaseConfig};
use crate::model::{drift_stats, DriftSequence, DriftStats, DEFAULT_TOL};
use crate::mvp::{DoublingParams, MvpConfig, MvpDoubling, NsMvp, ProblemDims};
use crate::mvptest::{MvpTest, MvpTestConfig, TwoPhase};
use crate::sim::{run_experiment, stream_seed, HorizonConfig, Learner, RunOptions, RunOutput, RunSummary, LEARNER_STREAM};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "NSSLAB_THREADS";

/// Everything a learner may be told about the problem.
#[derive(Debug, Clone, Copy)]
pub struct LearnerContext {
    pub dims: ProblemDims,
    pub stats: DriftStats,
    pub drift: KnownDrift,
}

impl LearnerContext {
    pub fn new(cfg: &ExperimentConfig, seq: &DriftSequence, stats: DriftStats, horizon: &HorizonConfig) -> Self {
        Self {
            dims: ProblemDims {
                num_states: seq.num_states(),
                num_actions: seq.num_actions(),
                horizon: horizon.horizon,
                episodes: cfg.episodes,
                b_star: stats.b_star,
                delta: cfg.delta,
            },
            stats,
            drift: cfg
                .known_drift
                .unwrap_or(KnownDrift { delta_c: stats.delta_c, delta_p: stats.delta_p }),
        }
    }
}

fn mvp_test(cfg: &ExperimentConfig, ctx: &LearnerContext, seed: u64) -> MvpTest {
    let mut c = MvpTestConfig::tuned(ctx.dims, ctx.stats.t_star, ctx.drift.delta_c, ctx.drift.delta_p);
    c.consts = cfg.confidence;
    c.kappa_c = cfg.calibration.kappa_c;
    c.kappa_p = cfg.calibration.kappa_p;
    MvpTest::new(c, stream_seed(seed, "reset-draws"))
}

fn mvp_doubling(cfg: &ExperimentConfig, ctx: &LearnerContext) -> MvpDoubling {
    let base = MvpConfig { consts: cfg.confidence, ..MvpConfig::new(ctx.dims) };
    let params = DoublingParams::new(ctx.stats.b_star, ctx.stats.t_max, ctx.drift.delta_c, ctx.drift.delta_p);
    MvpDoubling::new(base, params)
}

fn master_config(cfg: &ExperimentConfig, ctx: &LearnerContext) -> MasterConfig {
    let d = &ctx.dims;
    MasterConfig {
        envelope: Envelope::for_mvp_base(d.b_star, d.num_states, d.num_actions, d.horizon, cfg.calibration.kappa),
        delta: cfg.delta,
        switches: MasterSwitches::default(),
    }
}

fn master_mvp(cfg: &ExperimentConfig, ctx: &LearnerContext, seed: u64) -> Box<dyn Learner + Send> {
    let mut base = MvpBaseConfig::new(ctx.dims, ctx.stats.t_star);
    base.consts = cfg.confidence;
    base.kappa_b = cfg.calibration.kappa_b;
    Box::new(Master::new(master_config(cfg, ctx), move || MvpBase::new(base), seed))
}

/// Instantiates the configured learner; `seed` is the run's learner stream.
pub fn build_learner(
    cfg: &ExperimentConfig,
    seq: &DriftSequence,
    ctx: &LearnerContext,
    seed: u64,
) -> Result<Box<dyn Learner + Send>> {
    Ok(match cfg.algorithm {
        Algorithm::NsMvp => {
            let mut c = MvpConfig { consts: cfg.confidence, ..MvpConfig::new(ctx.dims) };
            if let Some(w) = cfg.windows {
                c.window_c = w.w_c;
                c.window_p = w.w_p;
            }
            c.validate()?;
            Box::new(NsMvp::new(c))
        }
        Algorithm::NsMvpDoubling => Box::new(mvp_doubling(cfg, ctx)),
        Algorithm::MvpTest => Box::new(mvp_test(cfg, ctx, seed)),
        Algorithm::TwoPhase => Box::new(TwoPhase::new(mvp_test(cfg, ctx, seed), mvp_doubling(cfg, ctx))),
        Algorithm::MasterMvp => master_mvp(cfg, ctx, stream_seed(seed, "schedule")),
        Algorithm::MasterTwoPhase => {
            let first = master_mvp(cfg, ctx, stream_seed(seed, "schedule-first"));
            let inner = MvpConfig { consts: cfg.confidence, ..MvpConfig::new(ctx.dims) };
            let rest = Master::new(
                master_config(cfg, ctx),
                move || NsMvp::new(inner),
                stream_seed(seed, "schedule-rest"),
            );
            Box::new(TwoPhase::new(first, rest))
        }
        Algorithm::UniformRandom => Box::new(UniformRandom::new(ctx.dims.num_actions, seed)),
        Algorithm::FixedOptimalFirst => Box::new(FixedOptimalFirst::new(seq)?),
    })
}

/// Result of one seed.
#[derive(Debug)]
pub struct SeedRun {
    pub seed: u64,
    pub stats: DriftStats,
    pub horizon: usize,
    pub output: RunOutput,
}

/// Generates the instance and runs the configured learner for one seed.
pub fn run_seed(cfg: &ExperimentConfig, seed: u64) -> Result<SeedRun> {
    let seq = cfg.instance.load(cfg.episodes, seed)?;
    let stats = drift_stats(&seq, DEFAULT_TOL)?;
    let horizon = HorizonConfig::from_stats(&stats, cfg.episodes);
    let ctx = LearnerContext::new(cfg, &seq, stats, &horizon);
    let mut learner = build_learner(cfg, &seq, &ctx, stream_seed(seed, LEARNER_STREAM))?;
    let options = RunOptions {
        cost_noise: cfg.cost_noise,
        step_cap: cfg.step_cap,
        capture_intervals: cfg.trajectory,
        capture_telemetry: cfg.telemetry,
    };
    let output = run_experiment(&seq, &mut learner, &horizon, seed, &options)?;
    Ok(SeedRun { seed, stats, horizon: horizon.horizon, output })
}

/// Worker count: `NSSLAB_THREADS` if set, else the available parallelism.
pub fn thread_count() -> usize {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(available)
}

/// Runs every seed, in parallel up to [`thread_count`]. Results keep the
/// order of `cfg.seeds`; a failing seed does not stop the others.
pub fn run_seeds(cfg: &ExperimentConfig) -> Result<Vec<Result<SeedRun>>> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count())
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    Ok(pool.install(|| cfg.seeds.par_iter().map(|&s| run_seed(cfg, s)).collect()))
}

#[derive(Debug, Clone, Serialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub ledger: Option<PathBuf>,
    pub summary: Option<RunSummary>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Aggregate {
    pub runs: usize,
    pub failures: usize,
    pub mean_regret: f64,
    pub std_regret: f64,
}

/// Mean and sample standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

fn write_trajectory(run: &SeedRun, path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for rec in &run.output.intervals {
        for (i, step) in rec.steps.iter().enumerate() {
            let line = json!({
                "m": rec.m, "k": rec.episode, "h": i + 1,
                "s": step.state, "a": step.action, "c": step.cost, "s'": step.next,
            });
            writeln!(out, "{line}")?;
        }
    }
    out.flush()?;
    Ok(())
}

fn write_telemetry(run: &SeedRun, path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for (m, t) in &run.output.telemetry {
        let mut obj = serde_json::Map::new();
        obj.insert("interval".into(), json!(m));
        for (k, v) in &t.fields {
            obj.insert((*k).into(), json!(v));
        }
        writeln!(out, "{}", serde_json::Value::Object(obj))?;
    }
    out.flush()?;
    Ok(())
}

/// Runs all seeds and writes ledgers, optional dumps and `summary.json`
/// into `out_dir`. Returns the summary document and whether any seed failed.
pub fn run_to_dir(cfg: &ExperimentConfig, out_dir: &Path) -> Result<(serde_json::Value, bool)> {
    std::fs::create_dir_all(out_dir)?;
    let results = run_seeds(cfg)?;
    let mut seeds = Vec::with_capacity(results.len());
    let mut regrets = Vec::new();
    for (i, (seed, res)) in cfg.seeds.iter().zip(results).enumerate() {
        match res {
            Ok(run) => {
                let stem = format!("run{i:03}_seed{seed}");
                let path = out_dir.join(format!("{stem}.csv"));
                write_ledger_file(&run.output.ledger, &path)?;
                if cfg.trajectory {
                    write_trajectory(&run, &out_dir.join(format!("{stem}.trajectory.ndjson")))?;
                }
                if cfg.telemetry {
                    write_telemetry(&run, &out_dir.join(format!("{stem}.telemetry.ndjson")))?;
                }
                regrets.push(run.output.ledger.summary.regret);
                seeds.push(SeedSummary {
                    seed: *seed,
                    ledger: Some(path),
                    summary: Some(run.output.ledger.summary),
                    error: None,
                });
            }
            Err(e) => seeds.push(SeedSummary { seed: *seed, ledger: None, summary: None, error: Some(e.to_string()) }),
        }
    }
    let failures = seeds.len() - regrets.len();
    let (mean_regret, std_regret) = mean_std(&regrets);
    let doc = json!({
        "config": cfg,
        "seeds": seeds,
        "aggregate": Aggregate { runs: regrets.len(), failures, mean_regret, std_regret },
    });
    std::fs::write(out_dir.join("summary.json"), serde_json::to_string_pretty(&doc)?)?;
    Ok((doc, failures > 0))
}
