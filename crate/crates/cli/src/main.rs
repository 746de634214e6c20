use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{Map, Value};

use nsslab::harness::{read_ledger_file, run_to_dir, trend_report, ExperimentConfig, InstanceSpec, Preset};
use nsslab::model::{drift_stats, DEFAULT_TOL};
use nsslab::{Error, Result};

#[derive(Parser)]
#[command(name = "nsslab", version, about = "Dynamic-regret experiments on drifting stochastic shortest path problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a drift sequence built from a preset and print its drift statistics.
    Generate(GenerateArgs),
    /// Run an experiment config and write one ledger per seed plus summary.json.
    Run(RunArgs),
    /// Fit the regret growth exponent over ledgers at several K.
    Eval(EvalArgs),
}

#[derive(Args)]
struct PresetArgs {
    /// Preset name: pair, lower-bound, lb-cost, lb-trans, lb-mixed or random.
    #[arg(long)]
    preset: Option<String>,
    /// Preset parameter as key=value; the value is parsed as JSON when possible.
    #[arg(short = 'p', long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    preset: PresetArgs,
    /// Number of episodes K.
    #[arg(short = 'K', long = "episodes")]
    episodes: usize,
    /// Run seed used for preset randomness that is not pinned by a `seed` param.
    #[arg(long, value_parser = parse_seeds, default_value = "0")]
    seeds: SeedList,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to the config's `output`, then `out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seeds overriding the config, e.g. `1,2,5` or `0..10`.
    #[arg(long, value_parser = parse_seeds)]
    seeds: Option<SeedList>,
    /// Replaces the config's instance.
    #[command(flatten)]
    preset: PresetArgs,
}

#[derive(Args)]
struct EvalArgs {
    /// Ledger CSV files, at two or more distinct K.
    #[arg(required = true)]
    ledgers: Vec<PathBuf>,
    /// Baseline ledgers to report regret ratios against.
    #[arg(long, num_args = 1..)]
    baseline: Vec<PathBuf>,
    #[arg(long, default_value_t = 2000)]
    bootstrap: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone)]
struct SeedList(Vec<u64>);

fn parse_seeds(text: &str) -> std::result::Result<SeedList, String> {
    let mut seeds = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((lo, hi)) = part.split_once("..") {
            let lo: u64 = lo.parse().map_err(|e| format!("{part}: {e}"))?;
            let hi: u64 = hi.parse().map_err(|e| format!("{part}: {e}"))?;
            seeds.extend(lo..hi);
        } else {
            seeds.push(part.parse().map_err(|e| format!("{part}: {e}"))?);
        }
    }
    if seeds.is_empty() {
        return Err("no seeds given".into());
    }
    Ok(SeedList(seeds))
}

impl PresetArgs {
    fn build(&self) -> Result<Option<Preset>> {
        let Some(name) = &self.preset else {
            if !self.params.is_empty() {
                return Err(Error::InvalidConfig("--param needs --preset".into()));
            }
            return Ok(None);
        };
        let mut obj = Map::new();
        obj.insert("preset".into(), Value::String(name.clone()));
        for kv in &self.params {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("parameter {kv:?} is not key=value")))?;
            let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.into()));
            obj.insert(k.trim().into(), value);
        }
        serde_json::from_value(Value::Object(obj))
            .map(Some)
            .map_err(|e| Error::InvalidSpec(format!("preset {name}: {e}")))
    }
}

fn generate(args: &GenerateArgs) -> Result<()> {
    let preset = args.preset.build()?.ok_or_else(|| Error::InvalidConfig("--preset is required".into()))?;
    let seq = preset.generate(args.episodes, args.seeds.0[0])?;
    for (_, inst) in seq.segments() {
        inst.validate().into_result()?;
    }
    let stats = drift_stats(&seq, DEFAULT_TOL)?;
    seq.write_json(&args.out)?;
    println!(
        "delta_c={} delta_p={} pieces={} b_star={} t_star={} t_max={}",
        stats.delta_c, stats.delta_p, stats.num_pieces, stats.b_star, stats.t_star, stats.t_max
    );
    println!("wrote {}", args.out.display());
    Ok(())
}

fn run(args: &RunArgs) -> Result<bool> {
    let mut cfg = ExperimentConfig::read(&args.config)?;
    if let Some(seeds) = &args.seeds {
        cfg.seeds = seeds.0.clone();
    }
    if let Some(p) = args.preset.build()? {
        cfg.instance = InstanceSpec::Preset(p);
    }
    if let InstanceSpec::File { path } = &cfg.instance {
        // relative sequence paths resolve against the config's directory
        if path.is_relative() {
            let base = args.config.parent().unwrap_or(Path::new("."));
            cfg.instance = InstanceSpec::File { path: base.join(path) };
        }
    }
    let out = args.out.clone().or_else(|| cfg.output.clone()).unwrap_or_else(|| "out".into());
    let (doc, failed) = run_to_dir(&cfg, &out)?;
    for seed in doc["seeds"].as_array().into_iter().flatten() {
        match seed["error"].as_str() {
            Some(e) => eprintln!("seed {}: {e}", seed["seed"]),
            None => println!("seed {}: R_K = {}", seed["seed"], seed["summary"]["regret"]),
        }
    }
    let agg = &doc["aggregate"];
    println!(
        "runs={} failures={} mean_regret={} std_regret={}",
        agg["runs"], agg["failures"], agg["mean_regret"], agg["std_regret"]
    );
    println!("wrote {}", out.join("summary.json").display());
    Ok(failed)
}

fn eval(args: &EvalArgs) -> Result<()> {
    let load = |paths: &[PathBuf]| paths.iter().map(|p| read_ledger_file(p)).collect::<Result<Vec<_>>>();
    let ledgers = load(&args.ledgers)?;
    let baseline = load(&args.baseline)?;
    let report = trend_report(&ledgers, &baseline, args.bootstrap, args.seed)?;
    for (k, mean) in &report.points {
        println!("K={k} mean_R_K={mean}");
    }
    println!("slope={} ci95=[{}, {}] bootstrap={}", report.slope, report.ci_low, report.ci_high, report.bootstrap);
    if let Some(ratios) = &report.baseline_ratio {
        for (k, r) in ratios {
            println!("K={k} ratio_vs_baseline={r}");
        }
    }
    if let Some(path) = &args.out {
        std::fs::write(path, serde_json::to_string_pretty(&report)?)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate(a) => generate(a).map(|()| false),
        Command::Run(a) => run(a),
        Command::Eval(a) => eval(a).map(|()| false),
    };
    match result {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
