//! The stateful-policies game: oblivious reward tables, finite-state reference
//! policies, deterministic rollouts and regret against a reference set.
//!
//! Actions and states are 0-based throughout. In the commute example route 1
//! is action 0, route 2 is action 1 and route 3 is action 2.

use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{argument, config, Error, Result};

/// Closed interval of admissible reward values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardRange {
    pub lo: f64,
    pub hi: f64,
}

impl RewardRange {
    pub const UNIT: RewardRange = RewardRange { lo: 0.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(argument(format!("reward range [{lo}, {hi}] is empty or not finite")));
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

impl Default for RewardRange {
    fn default() -> Self {
        Self::UNIT
    }
}

/// Per-round, per-action rewards committed to before the game starts.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardTable {
    actions: usize,
    values: Vec<f64>,
    range: RewardRange,
}

impl RewardTable {
    /// Builds a table from row-major values (`rounds × actions`).
    pub fn new(actions: usize, values: Vec<f64>, range: RewardRange) -> Result<Self> {
        if actions == 0 {
            return Err(argument("reward table needs at least one action"));
        }
        if values.is_empty() || values.len() % actions != 0 {
            return Err(argument(format!(
                "{} values do not form whole rounds of {actions} actions",
                values.len()
            )));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !range.contains(**v)) {
            return Err(argument(format!(
                "reward {v} (round {}, action {}) outside [{}, {}]",
                i / actions,
                i % actions,
                range.lo,
                range.hi
            )));
        }
        Ok(Self { actions, values, range })
    }

    pub fn from_rows(rows: &[Vec<f64>], range: RewardRange) -> Result<Self> {
        let actions = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != actions) {
            return Err(argument("ragged reward rows"));
        }
        Self::new(actions, rows.concat(), range)
    }

    /// Table whose column `a` is `columns[a]`.
    pub fn from_columns(columns: &[&[f64]], range: RewardRange) -> Result<Self> {
        let rounds = columns.first().map_or(0, |c| c.len());
        if columns.iter().any(|c| c.len() != rounds) {
            return Err(argument("columns differ in length"));
        }
        let mut values = Vec::with_capacity(rounds * columns.len());
        for t in 0..rounds {
            values.extend(columns.iter().map(|c| c[t]));
        }
        Self::new(columns.len(), values, range)
    }

    pub fn rounds(&self) -> usize {
        self.values.len() / self.actions
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    pub fn range(&self) -> RewardRange {
        self.range
    }

    pub fn get(&self, round: usize, action: usize) -> f64 {
        self.values[round * self.actions + action]
    }

    pub fn row(&self, round: usize) -> &[f64] {
        &self.values[round * self.actions..(round + 1) * self.actions]
    }

    pub fn column(&self, action: usize) -> Vec<f64> {
        self.values.iter().skip(action).step_by(self.actions).copied().collect()
    }

    /// CSV with header `round,a0,a1,...`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["round".to_string()];
        header.extend((0..self.actions).map(|a| format!("a{a}")));
        out.write_record(&header)?;
        for t in 0..self.rounds() {
            let mut rec = vec![t.to_string()];
            rec.extend(self.row(t).iter().map(|v| v.to_string()));
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R, range: RewardRange) -> Result<Self> {
        let mut input = csv::Reader::from_reader(r);
        let actions = input.headers()?.len().saturating_sub(1);
        let mut values = Vec::new();
        for (i, rec) in input.records().enumerate() {
            let rec = rec?;
            for field in rec.iter().skip(1) {
                let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                    line: i + 2,
                    message: format!("not a number: {field:?}"),
                })?;
                values.push(v);
            }
        }
        Self::new(actions, values, range)
    }
}

/// A reward interval whose endpoints may be open or closed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    /// `[lo, hi]`
    pub fn closed(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_closed: true, hi_closed: true }
    }

    /// `[lo, hi)`
    pub fn closed_open(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_closed: true, hi_closed: false }
    }

    /// `(lo, hi]`
    pub fn open_closed(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_closed: false, hi_closed: true }
    }

    /// `(lo, hi)`
    pub fn open(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_closed: false, hi_closed: false }
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    /// Parses bracket notation such as `"[0, 0.5)"`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || argument(format!("malformed interval {s:?}"));
        let lo_closed = match s.chars().next() {
            Some('[') => true,
            Some('(') => false,
            _ => return Err(bad()),
        };
        let hi_closed = match s.chars().last() {
            Some(']') => true,
            Some(')') => false,
            _ => return Err(bad()),
        };
        let inner = &s[1..s.len() - 1];
        let (a, b) = inner.split_once(',').ok_or_else(bad)?;
        let lo = parse_bound(a).ok_or_else(bad)?;
        let hi = parse_bound(b).ok_or_else(bad)?;
        Ok(Self { lo, hi, lo_closed, hi_closed })
    }
}

/// Accepts decimals and simple fractions like `1/3` or `-5/6`.
fn parse_bound(s: &str) -> Option<f64> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => Some(n.trim().parse::<f64>().ok()? / d.trim().parse::<f64>().ok()?),
        None => s.parse().ok(),
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = if self.lo_closed { '[' } else { '(' };
        let r = if self.hi_closed { ']' } else { ')' };
        write!(f, "{l}{}, {}{r}", self.lo, self.hi)
    }
}

/// Checks that `pieces` partition `range` exactly: no gaps, no overlaps.
pub fn check_tiling(pieces: &[Interval], range: RewardRange) -> Result<()> {
    if pieces.is_empty() {
        return Err(config("no transition intervals"));
    }
    if let Some(p) = pieces.iter().find(|p| p.is_empty()) {
        return Err(config(format!("empty interval {p}")));
    }
    let mut sorted: Vec<&Interval> = pieces.iter().collect();
    // at equal left endpoints a closed start precedes an open one
    sorted.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(b.lo_closed.cmp(&a.lo_closed)));
    let first = sorted[0];
    if first.lo != range.lo || !first.lo_closed {
        return Err(config(format!("intervals do not start at {} (closed)", range.lo)));
    }
    for w in sorted.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a.hi != b.lo {
            let kind = if a.hi < b.lo { "gap" } else { "overlap" };
            return Err(config(format!("{kind} between {a} and {b}")));
        }
        match (a.hi_closed, b.lo_closed) {
            (true, true) => return Err(config(format!("{a} and {b} overlap at {}", a.hi))),
            (false, false) => return Err(config(format!("{a} and {b} leave {} uncovered", a.hi))),
            _ => {}
        }
    }
    let last = sorted[sorted.len() - 1];
    if last.hi != range.hi || !last.hi_closed {
        return Err(config(format!("intervals do not end at {} (closed)", range.hi)));
    }
    Ok(())
}

/// One `interval → target` row of a transition map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub interval: Interval,
    pub target: usize,
}

fn lookup(rows: &[Transition], reward: f64) -> Option<usize> {
    rows.iter().find(|r| r.interval.contains(reward)).map(|r| r.target)
}

/// A deterministic, time-independent finite state machine over actions.
#[derive(Debug, Clone, PartialEq)]
pub struct StatefulPolicy {
    initial_state: usize,
    action_of: Vec<usize>,
    transition_of: Vec<Vec<Transition>>,
    range: RewardRange,
}

impl StatefulPolicy {
    pub fn new(
        initial_state: usize,
        action_of: Vec<usize>,
        transition_of: Vec<Vec<Transition>>,
        range: RewardRange,
    ) -> Result<Self> {
        let states = action_of.len();
        if states == 0 {
            return Err(config("policy needs at least one state"));
        }
        if transition_of.len() != states {
            return Err(config(format!(
                "{states} states but {} transition maps",
                transition_of.len()
            )));
        }
        if initial_state >= states {
            return Err(config(format!("initial state {initial_state} out of {states}")));
        }
        for (s, rows) in transition_of.iter().enumerate() {
            if let Some(r) = rows.iter().find(|r| r.target >= states) {
                return Err(config(format!("state {s} transitions to unknown state {}", r.target)));
            }
            let intervals: Vec<Interval> = rows.iter().map(|r| r.interval).collect();
            check_tiling(&intervals, range)
                .map_err(|e| config(format!("state {s}: {e}")))?;
        }
        Ok(Self { initial_state, action_of, transition_of, range })
    }

    pub fn num_states(&self) -> usize {
        self.action_of.len()
    }

    pub fn initial_state(&self) -> usize {
        self.initial_state
    }

    pub fn range(&self) -> RewardRange {
        self.range
    }

    pub fn action(&self, state: usize) -> usize {
        self.action_of[state]
    }

    pub fn transitions(&self, state: usize) -> &[Transition] {
        &self.transition_of[state]
    }

    /// Largest action index the policy can play.
    pub fn max_action(&self) -> usize {
        self.action_of.iter().copied().max().unwrap_or(0)
    }

    /// The same machine started from another state.
    pub fn with_initial_state(&self, initial_state: usize) -> Result<Self> {
        if initial_state >= self.num_states() {
            return Err(config(format!("initial state {initial_state} out of range")));
        }
        Ok(Self { initial_state, ..self.clone() })
    }

    pub fn next_state(&self, state: usize, reward: f64) -> Result<usize> {
        lookup(&self.transition_of[state], reward).ok_or_else(|| {
            Error::ModelViolation(format!("reward {reward} matches no transition of state {state}"))
        })
    }
}

/// A policy whose next action is a function of the last observed reward only.
#[derive(Debug, Clone, PartialEq)]
pub struct ReactivePolicy {
    initial_action: usize,
    num_actions: usize,
    next_action_of: Vec<Transition>,
    range: RewardRange,
}

impl ReactivePolicy {
    pub fn new(
        initial_action: usize,
        num_actions: usize,
        next_action_of: Vec<Transition>,
        range: RewardRange,
    ) -> Result<Self> {
        if initial_action >= num_actions {
            return Err(config(format!("initial action {initial_action} out of {num_actions}")));
        }
        if let Some(r) = next_action_of.iter().find(|r| r.target >= num_actions) {
            return Err(config(format!("maps to unknown action {}", r.target)));
        }
        let intervals: Vec<Interval> = next_action_of.iter().map(|r| r.interval).collect();
        check_tiling(&intervals, range)?;
        Ok(Self { initial_action, num_actions, next_action_of, range })
    }

    pub fn initial_action(&self) -> usize {
        self.initial_action
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn range(&self) -> RewardRange {
        self.range
    }

    pub fn rows(&self) -> &[Transition] {
        &self.next_action_of
    }

    pub fn next_action(&self, reward: f64) -> Result<usize> {
        lookup(&self.next_action_of, reward)
            .ok_or_else(|| Error::ModelViolation(format!("reward {reward} matches no interval")))
    }

    /// Direct rollout, without going through the state-machine view. The
    /// recorded state is the action about to be played.
    pub fn rollout(&self, rewards: &RewardTable) -> Result<Rollout> {
        check_compatible(self.num_actions - 1, self.range, rewards)?;
        let mut steps = Vec::with_capacity(rewards.rounds());
        let mut action = self.initial_action;
        for t in 0..rewards.rounds() {
            let reward = rewards.get(t, action);
            steps.push(RolloutStep { state: action, action, reward });
            action = self.next_action(reward)?;
        }
        Ok(Rollout::from_steps(steps))
    }
}

/// One round of a rollout: the state entering the round, the action played,
/// and the reward received.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RolloutStep {
    pub state: usize,
    pub action: usize,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rollout {
    pub steps: Vec<RolloutStep>,
    pub total_reward: f64,
}

impl Rollout {
    fn from_steps(steps: Vec<RolloutStep>) -> Self {
        let total_reward = steps.iter().map(|s| s.reward).sum();
        Self { steps, total_reward }
    }

    pub fn actions(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.action).collect()
    }

    pub fn rewards(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.reward).collect()
    }
}

fn check_compatible(max_action: usize, range: RewardRange, rewards: &RewardTable) -> Result<()> {
    if max_action >= rewards.actions() {
        return Err(config(format!(
            "policy plays action {max_action} but the table has {} actions",
            rewards.actions()
        )));
    }
    if range != rewards.range() {
        return Err(config(format!(
            "policy reward domain [{}, {}] differs from table range [{}, {}]",
            range.lo,
            range.hi,
            rewards.range().lo,
            rewards.range().hi
        )));
    }
    Ok(())
}

/// Follows `policy` from its initial state through `rewards`.
pub fn policy_rollout(policy: &StatefulPolicy, rewards: &RewardTable) -> Result<Rollout> {
    check_compatible(policy.max_action(), policy.range, rewards)?;
    let mut steps = Vec::with_capacity(rewards.rounds());
    let mut state = policy.initial_state;
    for t in 0..rewards.rounds() {
        let action = policy.action(state);
        let reward = rewards.get(t, action);
        steps.push(RolloutStep { state, action, reward });
        state = policy.next_state(state, reward)?;
    }
    Ok(Rollout::from_steps(steps))
}

/// The state-machine view of a reactive policy: one state per action.
pub fn reactive_to_stateful(policy: &ReactivePolicy) -> StatefulPolicy {
    let n = policy.num_actions;
    StatefulPolicy {
        initial_state: policy.initial_action,
        action_of: (0..n).collect(),
        transition_of: vec![policy.next_action_of.clone(); n],
        range: policy.range,
    }
}

/// Index and total of the best policy in hindsight; ties go to the lowest index.
pub fn best_reference(policies: &[StatefulPolicy], rewards: &RewardTable) -> Result<(usize, f64)> {
    if policies.is_empty() {
        return Err(argument("reference set is empty"));
    }
    let mut best = (0, f64::NEG_INFINITY);
    for (i, p) in policies.iter().enumerate() {
        let total = policy_rollout(p, rewards)?.total_reward;
        if total > best.1 {
            best = (i, total);
        }
    }
    Ok(best)
}

/// `best_total − Σ player_rewards`. Negative when the player beat every reference.
pub fn regret(best_total: f64, player_rewards: &[f64]) -> f64 {
    best_total - player_rewards.iter().sum::<f64>()
}

/// The three reactive route-choice policies of the commute example. They share
/// one reward→route map and differ only in the first route taken.
///
/// Boundaries follow the printed bracket notation: route 1 on `[1/3, 2/3]`
/// (|x−½| ≤ 1/6), route 2 on `[0, 1/6) ∪ (5/6, 1]` (|x−½| > 1/3), route 3 on
/// `[1/6, 1/3) ∪ (2/3, 5/6]`.
pub fn commute_example() -> [ReactivePolicy; 3] {
    let rows = commute_transitions();
    [0, 1, 2].map(|a| {
        ReactivePolicy::new(a, 3, rows.clone(), RewardRange::UNIT)
            .expect("commute intervals tile [0, 1]")
    })
}

fn commute_transitions() -> Vec<Transition> {
    let (s1, s2, s4, s5) = (1.0 / 6.0, 1.0 / 3.0, 2.0 / 3.0, 5.0 / 6.0);
    vec![
        Transition { interval: Interval::closed_open(0.0, s1), target: 1 },
        Transition { interval: Interval::closed_open(s1, s2), target: 2 },
        Transition { interval: Interval::closed(s2, s4), target: 0 },
        Transition { interval: Interval::open_closed(s4, s5), target: 2 },
        Transition { interval: Interval::open_closed(s5, 1.0), target: 1 },
    ]
}
