//! Building players and adversaries from specs and running every cell.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use super::config::{AdversarySpec, ExperimentConfig, PlayerSpec, PolicySource, ReferenceSpec, Setting, TableSpec};
use super::report::{CellRecord, ExperimentReport};
use crate::adversaries::reference::{commute_zone_table, nested_reference};
use crate::adversaries::{mrw_adversary, mt_adversary, ConsistentAdversary, MrwParams};
use crate::bridge::{build_lb_instance, play_game, StatefulPlayer};
use crate::error::{config, Error, Result};
use crate::game::{
    best_reference, commute_example, policy_rollout, reactive_to_stateful, RewardRange, RewardTable, StatefulPolicy,
};
use crate::hidden_bandit::{run_hidden_bandit, Action, Arm, DecoyAdversary, FixedDecoy, HbConfig, HbPlayer, MirrorDecoy, ReturnProb};
use crate::players::{
    AlwaysStay, AlwaysSwitch, ExpSwitchPlayer, GeneralOverrides, GeneralPlayer, RepetitiveParams, RepetitivePlayer,
    SemiMarkovPlayer, UniformRandom,
};
use crate::policy_file::parse_policies;
use crate::repetition::ValueString;
use crate::rng::{stream, Purpose, StreamRng};

/// Environment variable capping the number of worker threads.
pub const THREADS_VAR: &str = "GHOSTBANDIT_THREADS";

/// Builds a hidden-bandit player for an episode of `horizon` rounds.
pub fn build_player(spec: &PlayerSpec, p: ReturnProb, horizon: usize, mut rng: StreamRng) -> Result<Box<dyn HbPlayer>> {
    Ok(match spec {
        PlayerSpec::Alg1 { d, epsilon } => {
            Box::new(RepetitivePlayer::new(RepetitiveParams::new(*d, *epsilon, p, horizon)?))
        }
        PlayerSpec::Alg2 { epsilon, d } => {
            Box::new(GeneralPlayer::new(p, horizon, GeneralOverrides { epsilon: *epsilon, d: *d }, &mut rng))
        }
        PlayerSpec::ExpSwitch { .. } => {
            let eta = spec.eta(horizon)?.expect("exp_switch has an eta");
            Box::new(ExpSwitchPlayer::new(eta, rng)?)
        }
        PlayerSpec::SemiMarkov { threshold, hold_above, hold_below } => {
            if *hold_above == 0 || *hold_below == 0 {
                return Err(config("semi_markov hold lengths must be positive"));
            }
            let (t, above, below) = (*threshold, *hold_above, *hold_below);
            Box::new(SemiMarkovPlayer::new(Box::new(move |r| if r >= t { above } else { below })))
        }
        PlayerSpec::AlwaysStay => Box::new(AlwaysStay),
        PlayerSpec::AlwaysSwitch => Box::new(AlwaysSwitch),
        PlayerSpec::UniformRandom => Box::new(UniformRandom::new(rng)),
    })
}

/// Files a config refers to, read once before the cells run.
#[derive(Debug, Clone, Default)]
struct Loaded {
    reference: Option<Vec<f64>>,
    policies: Option<Vec<StatefulPolicy>>,
    table: Option<RewardTable>,
}

fn read_reference(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    Ok(ValueString::parse_lines(&text)?.values().to_vec())
}

fn load(cfg: &ExperimentConfig) -> Result<Loaded> {
    let mut loaded = Loaded::default();
    match &cfg.setting {
        Setting::HiddenBandit { adversary, .. } => {
            if let AdversarySpec::Consistent { reference: ReferenceSpec::File { path }, .. }
            | AdversarySpec::MirrorDecoy { reference: ReferenceSpec::File { path }, .. } = adversary
            {
                loaded.reference = Some(read_reference(path)?);
            }
        }
        Setting::Stateful { policies, table } => {
            let set = match policies {
                PolicySource::Commute => commute_example().iter().map(reactive_to_stateful).collect(),
                PolicySource::LowerBound => {
                    crate::bridge::lower_bound::lb_policies().iter().map(reactive_to_stateful).collect()
                }
                PolicySource::File(path) => parse_policies(&std::fs::read_to_string(path)?)?,
            };
            StatefulPlayer::return_probability(&set)?;
            loaded.policies = Some(set);
            if let TableSpec::TableFile { path, lo, hi } = table {
                let range = RewardRange::new(lo.unwrap_or(0.0), hi.unwrap_or(1.0))?;
                loaded.table = Some(RewardTable::read_csv(std::fs::File::open(path)?, range)?);
            }
        }
    }
    Ok(loaded)
}

fn resolve_reference(spec: &ReferenceSpec, loaded: &Loaded, horizon: usize, rng: &mut StreamRng) -> Result<Vec<f64>> {
    match spec {
        ReferenceSpec::Constant { value } => {
            if !(0.0..=1.0).contains(value) {
                return Err(config(format!("reference value {value} outside [0, 1]")));
            }
            Ok(vec![*value; horizon])
        }
        ReferenceSpec::Nested { d, base, amplitude } => nested_reference(horizon, *d, *base, *amplitude, rng),
        ReferenceSpec::File { path } => {
            let values = loaded.reference.as_ref().expect("reference file loaded");
            truncate(values, horizon, path)
        }
    }
}

fn truncate(values: &[f64], horizon: usize, path: &Path) -> Result<Vec<f64>> {
    if values.len() < horizon {
        return Err(config(format!("{} holds {} values, horizon is {horizon}", path.display(), values.len())));
    }
    Ok(values[..horizon].to_vec())
}

fn build_hb_adversary(
    spec: &AdversarySpec,
    loaded: &Loaded,
    horizon: usize,
    rng: &mut StreamRng,
) -> Result<(Vec<f64>, Box<dyn DecoyAdversary>)> {
    Ok(match spec {
        AdversarySpec::Mrw { epsilon, gamma } => {
            let real = mrw_adversary(mrw_params(horizon, *epsilon, *gamma)?, rng);
            (real.reference, Box::new(FixedDecoy(real.decoy)))
        }
        AdversarySpec::Constant { v0, v1 } => fixed(ConsistentAdversary::constant(*v0, *v1)?, horizon),
        AdversarySpec::Consistent { delta, reference } => {
            let r = resolve_reference(reference, loaded, horizon, rng)?;
            fixed(ConsistentAdversary::with_reference(*delta, r)?, horizon)
        }
        AdversarySpec::Mt => fixed(mt_adversary(horizon as u64, rng)?.adversary(), horizon),
        AdversarySpec::MirrorDecoy { offset, reference } => {
            if !(*offset >= 0.0 && *offset <= 1.0) {
                return Err(config(format!("mirror offset {offset} outside [0, 1]")));
            }
            let r = resolve_reference(reference, loaded, horizon, rng)?;
            (r, Box::new(MirrorDecoy { offset: *offset }))
        }
    })
}

fn fixed(adv: ConsistentAdversary, horizon: usize) -> (Vec<f64>, Box<dyn DecoyAdversary>) {
    (adv.reference(horizon), Box::new(FixedDecoy(adv.decoy(horizon))))
}

fn mrw_params(horizon: usize, epsilon: Option<f64>, gamma: Option<f64>) -> Result<MrwParams> {
    let d = MrwParams::defaults(horizon)?;
    MrwParams::new(horizon, epsilon.unwrap_or(d.epsilon), gamma.unwrap_or(d.gamma))
}

/// Reward table of one stateful cell.
fn build_table(spec: &TableSpec, loaded: &Loaded, horizon: usize, rng: &mut StreamRng) -> Result<RewardTable> {
    match spec {
        TableSpec::CommuteZones { d } => commute_zone_table(horizon, *d, rng),
        TableSpec::LowerBoundMrw { epsilon, gamma } => {
            let real = mrw_adversary(mrw_params(horizon, *epsilon, *gamma)?, rng);
            Ok(build_lb_instance(&real.reference, &real.decoy, rng)?.table)
        }
        TableSpec::TableFile { path, .. } => {
            let table = loaded.table.as_ref().expect("table file loaded");
            if table.rounds() < horizon {
                return Err(config(format!("{} holds {} rounds, horizon is {horizon}", path.display(), table.rounds())));
            }
            let rows: Vec<Vec<f64>> = (0..horizon).map(|t| table.row(t).to_vec()).collect();
            RewardTable::from_rows(&rows, table.range())
        }
    }
}

struct Cell<'a> {
    cfg: &'a ExperimentConfig,
    loaded: &'a Loaded,
    horizon: usize,
    seed: u64,
}

impl Cell<'_> {
    fn rng(&self, purpose: Purpose) -> StreamRng {
        stream(self.cfg.master_seed, self.horizon as u64, self.seed, purpose)
    }

    fn trace_path(&self) -> Option<PathBuf> {
        let dir = self.cfg.output.trace_dir.as_ref().filter(|_| self.cfg.reveal)?;
        Some(dir.join(format!("trace_T{}_seed{}.csv", self.horizon, self.seed)))
    }

    fn run(&self) -> (CellRecord, Vec<String>) {
        let mut record = CellRecord::empty(self.horizon, self.seed);
        let outcome = match &self.cfg.setting {
            Setting::HiddenBandit { p, adversary } => self.run_hidden_bandit(*p, adversary, &mut record),
            Setting::Stateful { table, .. } => self.run_stateful(table, &mut record),
        };
        match outcome {
            Ok(warnings) => (record, warnings),
            Err(e) => {
                record.error = Some(e.to_string());
                (record, Vec::new())
            }
        }
    }

    fn run_hidden_bandit(&self, p: f64, adversary: &AdversarySpec, record: &mut CellRecord) -> Result<Vec<String>> {
        let hb = HbConfig::new(p, self.horizon)?;
        let (reference, mut decoy) = build_hb_adversary(adversary, self.loaded, self.horizon, &mut self.rng(Purpose::Adversary))?;
        let mut player = build_player(&self.cfg.player, hb.p, self.horizon, self.rng(Purpose::Player))?;
        let trace = run_hidden_bandit(&mut *player, &reference, &mut *decoy, hb, &mut self.rng(Purpose::Environment))?;
        if let Some(path) = self.trace_path() {
            trace.write_csv(std::fs::File::create(path)?, true)?;
        }
        record.regret = Some(trace.regret);
        record.player_reward = trace.player_total;
        record.best_reward = trace.reference_total;
        record.switches = trace.switches();
        record.occupancy = trace.rounds_on(Arm::Reference) as f64 / self.horizon as f64;
        Ok(trace.warnings)
    }

    fn run_stateful(&self, table_spec: &TableSpec, record: &mut CellRecord) -> Result<Vec<String>> {
        let policies = self.loaded.policies.clone().expect("policies loaded");
        let table = build_table(table_spec, self.loaded, self.horizon, &mut self.rng(Purpose::Adversary))?;
        let (best, best_total) = best_reference(&policies, &table)?;
        let mut worst_total = f64::INFINITY;
        for p in &policies {
            worst_total = worst_total.min(policy_rollout(p, &table)?.total_reward);
        }
        let best_actions = policy_rollout(&policies[best], &table)?.actions();
        let p = StatefulPlayer::return_probability(&policies)?;
        let inner = build_player(&self.cfg.player, p, self.horizon, self.rng(Purpose::InnerPlayer))?;
        let mut player = StatefulPlayer::with_inner(policies, inner, self.rng(Purpose::Player))?;
        if self.cfg.reveal {
            player = player.instrumented();
        }
        let trace = play_game(&mut player, &table)?;
        if let Some(path) = self.trace_path() {
            write_stateful_trace(&path, &trace.actions, &trace.rewards, &player)?;
        }
        record.regret = Some(best_total - trace.total);
        record.player_reward = trace.total;
        record.best_reward = best_total;
        record.switches = player.inner_actions().iter().filter(|a| **a == Action::Switch).count();
        let matching = trace.actions.iter().zip(&best_actions).filter(|(a, b)| a == b).count();
        record.occupancy = matching as f64 / self.horizon as f64;
        record.baseline_regret = Some(best_total - worst_total);
        Ok(player.warnings())
    }
}

fn write_stateful_trace(path: &Path, actions: &[usize], rewards: &[f64], player: &StatefulPlayer) -> Result<()> {
    let mut out = csv::Writer::from_writer(std::fs::File::create(path)?);
    out.write_record(["round", "action", "reward", "policy", "state", "decision"])?;
    let log = player.log().ok_or_else(|| Error::Internal("trace requested without instrumentation".into()))?;
    for (t, rec) in log.iter().enumerate() {
        out.write_record([
            t.to_string(),
            actions[t].to_string(),
            rewards[t].to_string(),
            rec.config.policy.to_string(),
            rec.config.state.to_string(),
            rec.action.as_str().to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Thread cap from [`THREADS_VAR`]; `None` when unset or unparsable.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_VAR).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Runs every `(T, seed)` cell using at most [`thread_cap`] threads.
pub fn run_scenario(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    run_scenario_with_threads(cfg, thread_cap())
}

/// Runs every cell on a pool of `threads` workers (rayon's default when
/// `None`). The report does not depend on the thread count.
pub fn run_scenario_with_threads(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<ExperimentReport> {
    let started = Instant::now();
    let loaded = load(cfg)?;
    if let Some(dir) = cfg.output.trace_dir.as_ref().filter(|_| cfg.reveal) {
        std::fs::create_dir_all(dir)?;
    }
    let cells: Vec<(usize, u64)> =
        cfg.horizons.iter().flat_map(|&h| (0..cfg.seeds).map(move |s| (h, s))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    let results: Vec<(CellRecord, Vec<String>)> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(horizon, seed)| Cell { cfg, loaded: &loaded, horizon, seed }.run())
            .collect()
    });
    Ok(ExperimentReport::from_cells(cfg, results, started.elapsed()))
}

/// One row of a sweep's trend table.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TrendRow {
    pub horizon: usize,
    pub mean_regret: f64,
    /// `mean_regret · log₂T / T`.
    pub scaled_regret: f64,
}

/// Runs a config over its horizon grid and returns the trend table. Thread
/// handling is as in [`run_scenario_with_threads`].
pub fn sweep(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<(ExperimentReport, Vec<TrendRow>)> {
    if cfg.horizons.len() < 3 {
        return Err(config(format!("a sweep needs at least 3 horizons, got {}", cfg.horizons.len())));
    }
    let report = run_scenario_with_threads(cfg, threads)?;
    let rows = report.trend();
    Ok((report, rows))
}
