//! `ghostbandit`: run seeded hidden-bandit and policy-game experiments.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use ghostbandit::adversaries::reference::{commute_zone_table, nested_reference};
use ghostbandit::adversaries::{mrw_adversary, mt_adversary, MrwParams};
use ghostbandit::bridge::build_lb_instance;
use ghostbandit::experiment::config::ScenarioKind;
use ghostbandit::experiment::run::thread_cap;
use ghostbandit::experiment::{
    analyze_string, run_scenario_with_threads, sweep, write_outputs, ExperimentConfig, ExperimentReport,
};
use ghostbandit::game::{RewardRange, RewardTable};
use ghostbandit::repetition::{adversarial_string_with, AdversarialSpec};
use ghostbandit::rng::{stream, Purpose};

#[derive(Debug, Parser)]
#[command(name = "ghostbandit", version, about = "Seeded regret experiments against stateful reference policies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    /// Experiment config (TOML).
    config: PathBuf,
    /// Worker threads; overrides GHOSTBANDIT_THREADS.
    #[arg(long)]
    threads: Option<usize>,
    /// Per-seed CSV, overriding the config.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Summary JSON, overriding the config.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write per-round traces with the hidden state to this directory.
    #[arg(long)]
    reveal: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a hidden-bandit config and print its summary JSON.
    RunHiddenBandit(RunArgs),
    /// Run a stateful-policies config and print its summary JSON.
    RunStateful(RunArgs),
    /// Print repetition statistics of a newline-delimited value file as JSON.
    AnalyzeString {
        path: PathBuf,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long)]
        epsilon: f64,
    },
    /// Export a reward table or value string.
    MakeAdversary {
        #[arg(value_enum)]
        kind: AdversaryKind,
        #[arg(long)]
        horizon: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Construction parameter as `key=value`; repeatable.
        #[arg(long = "set", value_parser = parse_key_value)]
        set: Vec<(String, f64)>,
    },
    /// Run a config over a grid of at least 3 horizons and print the trend table.
    Sweep(RunArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AdversaryKind {
    /// Random walk pair; `epsilon`, `gamma`.
    Mrw,
    /// Constant pair drawn by dyadic class.
    Mt,
    /// Fixed pair; `v0`, `v1`.
    Constant,
    /// Three-action instance around a random walk pair; `epsilon`, `gamma`.
    LowerBound,
    /// Commute routes in their reward zones; `d`.
    CommuteZones,
    /// Nested-block values; `d`, `base`, `amplitude`.
    Nested,
    /// String that defeats local repetition; `d`, `epsilon`, `delta`, `depth`.
    /// The horizon is ignored.
    RepetitionBreaker,
}

fn parse_key_value(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got {s:?}"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("{k}: {e}"))?;
    Ok((k.trim().to_string(), v))
}

struct Params {
    values: BTreeMap<String, f64>,
}

impl Params {
    fn new(pairs: Vec<(String, f64)>, allowed: &[&str]) -> Result<Self> {
        let values: BTreeMap<String, f64> = pairs.into_iter().collect();
        if let Some(k) = values.keys().find(|k| !allowed.contains(&k.as_str())) {
            bail!("unknown parameter {k:?}; expected one of {allowed:?}");
        }
        Ok(Self { values })
    }

    fn get(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }

    fn require(&self, key: &str) -> Result<f64> {
        self.get(key).with_context(|| format!("missing --set {key}=..."))
    }

    fn count(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(v) if v >= 0.0 && v.fract() == 0.0 => Ok(v as usize),
            Some(v) => bail!("{key} must be a non-negative integer, got {v}"),
        }
    }
}

fn load_config(args: &RunArgs, kind: Option<ScenarioKind>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&args.config).with_context(|| format!("reading {}", args.config.display()))?;
    if let Some(kind) = kind {
        if cfg.kind() != kind {
            bail!("{} is a {:?} config", args.config.display(), cfg.kind());
        }
    }
    if args.csv.is_some() {
        cfg.output.csv = args.csv.clone();
    }
    if args.json.is_some() {
        cfg.output.json = args.json.clone();
    }
    if let Some(dir) = &args.reveal {
        cfg.reveal = true;
        cfg.output.trace_dir = Some(dir.clone());
    }
    Ok(cfg)
}

fn run(args: &RunArgs, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let report = run_scenario_with_threads(cfg, args.threads.or_else(thread_cap))?;
    write_outputs(cfg, &report)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for e in &report.errors {
        eprintln!("cell error: {e}");
    }
    eprintln!("runtime: {:.3}s", report.runtime.as_secs_f64());
    Ok(report)
}

fn output(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(File::create(path).with_context(|| format!("creating {}", path.display()))?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn write_values(mut w: Box<dyn Write>, values: &[f64]) -> Result<()> {
    for v in values {
        writeln!(w, "{v}")?;
    }
    Ok(())
}

fn mrw_params(params: &Params, horizon: usize) -> Result<MrwParams> {
    let d = MrwParams::defaults(horizon)?;
    Ok(MrwParams::new(horizon, params.get("epsilon").unwrap_or(d.epsilon), params.get("gamma").unwrap_or(d.gamma))?)
}

fn pair_table(reference: &[f64], decoy: &[f64]) -> Result<RewardTable> {
    Ok(RewardTable::from_columns(&[reference, decoy], RewardRange::UNIT)?)
}

fn make_adversary(kind: AdversaryKind, horizon: usize, seed: u64, out: &Option<PathBuf>, set: Vec<(String, f64)>) -> Result<()> {
    let mut rng = stream(seed, horizon as u64, 0, Purpose::Adversary);
    match kind {
        AdversaryKind::Mrw => {
            let real = mrw_adversary(mrw_params(&Params::new(set, &["epsilon", "gamma"])?, horizon)?, &mut rng);
            pair_table(&real.reference, &real.decoy)?.write_csv(output(out)?)?;
        }
        AdversaryKind::Mt => {
            Params::new(set, &[])?;
            let draw = mt_adversary(horizon as u64, &mut rng)?;
            eprintln!("class {} k1 {} k0 {} v0 {} v1 {}", draw.class, draw.k1, draw.k0, draw.v0, draw.v1);
            let adv = draw.adversary();
            pair_table(&adv.reference(horizon), &adv.decoy(horizon))?.write_csv(output(out)?)?;
        }
        AdversaryKind::Constant => {
            let p = Params::new(set, &["v0", "v1"])?;
            let (v0, v1) = (p.require("v0")?, p.require("v1")?);
            pair_table(&vec![v0; horizon], &vec![v1; horizon])?.write_csv(output(out)?)?;
        }
        AdversaryKind::LowerBound => {
            let real = mrw_adversary(mrw_params(&Params::new(set, &["epsilon", "gamma"])?, horizon)?, &mut rng);
            build_lb_instance(&real.reference, &real.decoy, &mut rng)?.write_csv(output(out)?)?;
        }
        AdversaryKind::CommuteZones => {
            let p = Params::new(set, &["d"])?;
            commute_zone_table(horizon, p.count("d", 4)?, &mut rng)?.write_csv(output(out)?)?;
        }
        AdversaryKind::Nested => {
            let p = Params::new(set, &["d", "base", "amplitude"])?;
            let values = nested_reference(horizon, p.count("d", 2)?, p.require("base")?, p.require("amplitude")?, &mut rng)?;
            write_values(output(out)?, &values)?;
        }
        AdversaryKind::RepetitionBreaker => {
            let p = Params::new(set, &["d", "epsilon", "delta", "depth"])?;
            let mut spec = AdversarialSpec::new(p.count("d", 2)?, p.require("epsilon")?, p.require("delta")?);
            if p.get("depth").is_some() {
                spec.depth = Some(p.count("depth", 0)? as u32);
            }
            write_values(output(out)?, adversarial_string_with(&spec)?.values())?;
        }
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::RunHiddenBandit(args) => {
            let cfg = load_config(&args, Some(ScenarioKind::HiddenBandit))?;
            println!("{}", run(&args, &cfg)?.to_json()?);
        }
        Command::RunStateful(args) => {
            let cfg = load_config(&args, Some(ScenarioKind::Stateful))?;
            println!("{}", run(&args, &cfg)?.to_json()?);
        }
        Command::Sweep(args) => {
            let cfg = load_config(&args, None)?;
            let (report, rows) = sweep(&cfg, args.threads.or_else(thread_cap))?;
            write_outputs(&cfg, &report)?;
            eprintln!("runtime: {:.3}s", report.runtime.as_secs_f64());
            println!("horizon,mean_regret,scaled_regret");
            for r in rows {
                println!("{},{},{}", r.horizon, r.mean_regret, r.scaled_regret);
            }
        }
        Command::AnalyzeString { path, d, epsilon } => {
            let report = analyze_string(&path, d, epsilon).with_context(|| format!("analysing {}", path.display()))?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::MakeAdversary { kind, horizon, seed, out, set } => make_adversary(kind, horizon, seed, &out, set)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
