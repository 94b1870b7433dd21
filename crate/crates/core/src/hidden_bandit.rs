//! The two-armed hidden bandit.
//!
//! The player never learns which arm it is on. It sees the reward of the
//! current arm and may either stay or ask to switch. Switching always leaves
//! the reference arm, but leaves the decoy only with probability `p`.
//!
//! Each round runs in the order: the adversary fixes the decoy reward, the
//! player observes the reward of its arm, the player acts, and the arm moves
//! for the next round.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};

/// Probability that a switch from the decoy lands on the reference arm.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct ReturnProb(f64);

impl ReturnProb {
    pub fn new(p: f64) -> Result<Self> {
        if p > 0.0 && p < 1.0 {
            Ok(Self(p))
        } else {
            Err(argument(format!("p must lie in (0, 1), got {p}")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// Stationary probability of the reference arm under constant switching.
    pub fn stationary_reference(self) -> f64 {
        self.0 / (1.0 + self.0)
    }
}

impl TryFrom<f64> for ReturnProb {
    type Error = Error;
    fn try_from(p: f64) -> Result<Self> {
        Self::new(p)
    }
}

impl From<ReturnProb> for f64 {
    fn from(p: ReturnProb) -> f64 {
        p.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HbConfig {
    pub p: ReturnProb,
    pub horizon: usize,
}

impl HbConfig {
    pub fn new(p: f64, horizon: usize) -> Result<Self> {
        if horizon == 0 {
            return Err(argument("horizon must be at least 1"));
        }
        Ok(Self { p: ReturnProb::new(p)?, horizon })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Arm {
    Reference,
    Decoy,
}

impl Arm {
    pub fn index(self) -> usize {
        match self {
            Arm::Reference => 0,
            Arm::Decoy => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Stay,
    Switch,
}

impl Action {
    pub fn as_str(self) -> &'static str {
        match self {
            Action::Stay => "stay",
            Action::Switch => "switch",
        }
    }
}

/// Everything a player is allowed to see on a round.
#[derive(Debug, Clone, Copy)]
pub struct Observation<'a> {
    /// 0-based round index.
    pub round: usize,
    /// Reward of the arm the player is on this round.
    pub reward: f64,
    /// The player's own earlier actions, oldest first.
    pub history: &'a [Action],
}

/// A hidden-bandit strategy. Implementations own their random stream.
pub trait HbPlayer {
    fn act(&mut self, obs: Observation<'_>) -> Result<Action>;

    /// Notes about clamped or degenerate parameters.
    fn warnings(&self) -> Vec<String> {
        Vec::new()
    }
}

impl<P: HbPlayer + ?Sized> HbPlayer for Box<P> {
    fn act(&mut self, obs: Observation<'_>) -> Result<Action> {
        (**self).act(obs)
    }

    fn warnings(&self) -> Vec<String> {
        (**self).warnings()
    }
}

/// The game so far, as the adversary sees it on round `round`: `arms` includes
/// the current round, the other slices stop at the previous one.
#[derive(Debug, Clone, Copy)]
pub struct GameHistory<'a> {
    pub round: usize,
    pub arms: &'a [Arm],
    pub actions: &'a [Action],
    pub observed: &'a [f64],
    pub reference: &'a [f64],
}

/// Sets the decoy reward of each round, possibly adaptively.
pub trait DecoyAdversary {
    fn decoy_reward(&mut self, history: GameHistory<'_>) -> f64;
}

/// A decoy reward sequence fixed in advance.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedDecoy(pub Vec<f64>);

impl DecoyAdversary for FixedDecoy {
    fn decoy_reward(&mut self, history: GameHistory<'_>) -> f64 {
        self.0[history.round]
    }
}

/// Decoy that pays the reference reward minus a fixed offset, floored at 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MirrorDecoy {
    pub offset: f64,
}

impl DecoyAdversary for MirrorDecoy {
    fn decoy_reward(&mut self, history: GameHistory<'_>) -> f64 {
        (history.reference[history.round] - self.offset).clamp(0.0, 1.0)
    }
}

/// Draws the first arm from the stationary law of the switching chain.
pub fn initial_arm<R: Rng + ?Sized>(p: ReturnProb, rng: &mut R) -> Arm {
    if rng.gen::<f64>() < p.stationary_reference() {
        Arm::Reference
    } else {
        Arm::Decoy
    }
}

pub fn transition<R: Rng + ?Sized>(arm: Arm, action: Action, p: ReturnProb, rng: &mut R) -> Arm {
    match (arm, action) {
        (a, Action::Stay) => a,
        (Arm::Reference, Action::Switch) => Arm::Decoy,
        (Arm::Decoy, Action::Switch) => {
            if rng.gen::<f64>() < p.get() {
                Arm::Reference
            } else {
                Arm::Decoy
            }
        }
    }
}

/// A completed episode.
#[derive(Debug, Clone, PartialEq)]
pub struct HbTrace {
    pub arms: Vec<Arm>,
    pub actions: Vec<Action>,
    pub observed: Vec<f64>,
    pub decoy: Vec<f64>,
    pub reference_total: f64,
    pub player_total: f64,
    /// `reference_total − player_total`.
    pub regret: f64,
    pub warnings: Vec<String>,
}

impl HbTrace {
    pub fn len(&self) -> usize {
        self.arms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arms.is_empty()
    }

    pub fn switches(&self) -> usize {
        self.actions.iter().filter(|a| **a == Action::Switch).count()
    }

    pub fn rounds_on(&self, arm: Arm) -> usize {
        self.arms.iter().filter(|a| **a == arm).count()
    }

    /// CSV with `round,action,observed_reward` and, when `reveal`, `hidden_arm`.
    pub fn write_csv<W: Write>(&self, w: W, reveal: bool) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["round", "action", "observed_reward"];
        if reveal {
            header.push("hidden_arm");
        }
        out.write_record(&header)?;
        for t in 0..self.len() {
            let mut rec = vec![t.to_string(), self.actions[t].as_str().to_string(), self.observed[t].to_string()];
            if reveal {
                rec.push(self.arms[t].index().to_string());
            }
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Plays one episode. `rng` drives only the environment (initial arm and
/// switch outcomes); the player and any randomised decoy carry their own.
pub fn run_hidden_bandit<R: Rng + ?Sized>(
    player: &mut dyn HbPlayer,
    reference: &[f64],
    decoy: &mut dyn DecoyAdversary,
    config: HbConfig,
    rng: &mut R,
) -> Result<HbTrace> {
    let start = initial_arm(config.p, rng);
    run_from(start, player, reference, decoy, config, rng)
}

/// [`run_hidden_bandit`] with the first arm fixed. For deterministic tests.
#[doc(hidden)]
pub fn run_from<R: Rng + ?Sized>(
    start: Arm,
    player: &mut dyn HbPlayer,
    reference: &[f64],
    decoy: &mut dyn DecoyAdversary,
    config: HbConfig,
    rng: &mut R,
) -> Result<HbTrace> {
    let horizon = config.horizon;
    if reference.len() != horizon {
        return Err(argument(format!(
            "{} reference rewards for a horizon of {horizon}",
            reference.len()
        )));
    }
    if let Some(v) = reference.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(argument(format!("reference reward {v} outside [0, 1]")));
    }
    let mut arms = Vec::with_capacity(horizon);
    let mut actions = Vec::with_capacity(horizon);
    let mut observed = Vec::with_capacity(horizon);
    let mut decoy_log = Vec::with_capacity(horizon);
    let mut arm = start;
    for t in 0..horizon {
        arms.push(arm);
        let history = GameHistory { round: t, arms: &arms, actions: &actions, observed: &observed, reference };
        let d = decoy.decoy_reward(history);
        if !(0.0..=1.0).contains(&d) {
            return Err(Error::ModelViolation(format!("decoy reward {d} outside [0, 1] at round {t}")));
        }
        decoy_log.push(d);
        let reward = match arm {
            Arm::Reference => reference[t],
            Arm::Decoy => d,
        };
        observed.push(reward);
        let action = player.act(Observation { round: t, reward, history: &actions })?;
        actions.push(action);
        arm = transition(arm, action, config.p, rng);
    }
    let reference_total: f64 = reference.iter().sum();
    let player_total: f64 = observed.iter().sum();
    Ok(HbTrace {
        arms,
        actions,
        observed,
        decoy: decoy_log,
        reference_total,
        player_total,
        regret: reference_total - player_total,
        warnings: player.warnings(),
    })
}

/// Occupancy frequencies `(reference, decoy)` of the chain that switches every
/// round, started from its stationary law.
pub fn stationary_check<R: Rng + ?Sized>(p: ReturnProb, rounds: usize, rng: &mut R) -> Result<[f64; 2]> {
    if rounds < 10_000 {
        return Err(argument(format!("at least 10000 rounds needed, got {rounds}")));
    }
    let mut arm = initial_arm(p, rng);
    let mut on_reference = 0usize;
    for _ in 0..rounds {
        if arm == Arm::Reference {
            on_reference += 1;
        }
        arm = transition(arm, Action::Switch, p, rng);
    }
    let f = on_reference as f64 / rounds as f64;
    Ok([f, 1.0 - f])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    struct Stay;
    impl HbPlayer for Stay {
        fn act(&mut self, _: Observation<'_>) -> Result<Action> {
            Ok(Action::Stay)
        }
    }

    #[test]
    fn p_validation() {
        assert!(ReturnProb::new(0.0).is_err());
        assert!(ReturnProb::new(1.0).is_err());
        assert!(HbConfig::new(0.5, 0).is_err());
        assert_eq!(ReturnProb::new(0.5).unwrap().stationary_reference(), 1.0 / 3.0);
    }

    #[test]
    fn deterministic_transitions() {
        let p = ReturnProb::new(0.5).unwrap();
        let mut rng = seeded(0);
        for _ in 0..100 {
            assert_eq!(transition(Arm::Reference, Action::Stay, p, &mut rng), Arm::Reference);
            assert_eq!(transition(Arm::Decoy, Action::Stay, p, &mut rng), Arm::Decoy);
            assert_eq!(transition(Arm::Reference, Action::Switch, p, &mut rng), Arm::Decoy);
        }
    }

    #[test]
    fn stuck_on_decoy() {
        let cfg = HbConfig::new(0.5, 50).unwrap();
        let trace =
            run_from(Arm::Decoy, &mut Stay, &[1.0; 50], &mut FixedDecoy(vec![0.0; 50]), cfg, &mut seeded(1))
                .unwrap();
        assert_eq!(trace.regret, 50.0);
        assert_eq!(trace.switches(), 0);
    }

    #[test]
    fn equal_arms_give_zero_regret() {
        let cfg = HbConfig::new(0.5, 20).unwrap();
        let trace =
            run_hidden_bandit(&mut Stay, &[1.0; 20], &mut FixedDecoy(vec![1.0; 20]), cfg, &mut seeded(2))
                .unwrap();
        assert_eq!(trace.regret, 0.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let cfg = HbConfig::new(0.5, 3).unwrap();
        let mut decoy = FixedDecoy(vec![0.0; 3]);
        assert!(run_hidden_bandit(&mut Stay, &[0.5; 2], &mut decoy, cfg, &mut seeded(0)).is_err());
        assert!(run_hidden_bandit(&mut Stay, &[0.5, 2.0, 0.1], &mut decoy, cfg, &mut seeded(0)).is_err());
        let mut bad = FixedDecoy(vec![1.5; 3]);
        let err = run_from(Arm::Decoy, &mut Stay, &[0.5; 3], &mut bad, cfg, &mut seeded(0)).unwrap_err();
        assert!(matches!(err, Error::ModelViolation(_)));
    }

    #[test]
    fn trace_csv_hides_arm_unless_revealed() {
        let cfg = HbConfig::new(0.5, 2).unwrap();
        let trace =
            run_from(Arm::Reference, &mut Stay, &[0.5; 2], &mut FixedDecoy(vec![0.0; 2]), cfg, &mut seeded(0))
                .unwrap();
        let mut hidden = Vec::new();
        trace.write_csv(&mut hidden, false).unwrap();
        assert_eq!(String::from_utf8(hidden).unwrap(), "round,action,observed_reward\n0,stay,0.5\n1,stay,0.5\n");
        let mut shown = Vec::new();
        trace.write_csv(&mut shown, true).unwrap();
        assert!(String::from_utf8(shown).unwrap().starts_with("round,action,observed_reward,hidden_arm\n0,stay,0.5,0"));
    }
}
