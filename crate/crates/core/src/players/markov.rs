//! Players whose switch decisions look only at recent rewards.

use std::fmt;

use rand::Rng;

use crate::error::{argument, Result};
use crate::hidden_bandit::{Action, HbPlayer, Observation};
use crate::rng::StreamRng;

/// Switches with probability `½·exp(−η·r)` after observing reward `r`.
#[derive(Debug, Clone)]
pub struct ExpSwitchPlayer {
    eta: f64,
    rng: StreamRng,
}

impl ExpSwitchPlayer {
    pub fn new(eta: f64, rng: StreamRng) -> Result<Self> {
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(argument(format!("eta must be finite and non-negative, got {eta}")));
        }
        Ok(Self { eta, rng })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn switch_probability(&self, reward: f64) -> f64 {
        0.5 * (-self.eta * reward).exp()
    }

    pub fn decide(&mut self, reward: f64) -> Action {
        if self.rng.gen::<f64>() < self.switch_probability(reward) {
            Action::Switch
        } else {
            Action::Stay
        }
    }
}

impl HbPlayer for ExpSwitchPlayer {
    fn act(&mut self, obs: Observation<'_>) -> Result<Action> {
        Ok(self.decide(obs.reward))
    }
}

/// Rewards observed since the last switch, most recent last.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MemoryString(Vec<f64>);

impl MemoryString {
    pub fn rewards(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn push(&mut self, r: f64) {
        self.0.push(r);
    }

    fn clear(&mut self) {
        self.0.clear();
    }
}

/// Maps the first reward after a switch to the length of the next epoch.
pub type HoldFn = Box<dyn Fn(f64) -> usize + Send + Sync>;

/// Deterministic semi-Markovian player: after each switch it reads the next
/// reward `r`, then switches again once `g(r)` rewards have been observed
/// since the last switch (counting the round the switch is issued on).
pub struct SemiMarkovPlayer {
    hold: HoldFn,
    memory: MemoryString,
    target: usize,
}

impl fmt::Debug for SemiMarkovPlayer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SemiMarkovPlayer").field("memory", &self.memory).field("target", &self.target).finish()
    }
}

impl SemiMarkovPlayer {
    pub fn new(hold: HoldFn) -> Self {
        Self { hold, memory: MemoryString::default(), target: 0 }
    }

    pub fn memory(&self) -> &MemoryString {
        &self.memory
    }

    /// Next action given only the memory string extended by `reward`.
    pub fn decide(&mut self, reward: f64) -> Result<Action> {
        if self.memory.is_empty() {
            self.target = (self.hold)(reward);
            if self.target == 0 {
                return Err(argument(format!("hold function returned 0 for reward {reward}")));
            }
        }
        self.memory.push(reward);
        if self.memory.len() >= self.target {
            self.memory.clear();
            Ok(Action::Switch)
        } else {
            Ok(Action::Stay)
        }
    }
}

impl HbPlayer for SemiMarkovPlayer {
    fn act(&mut self, obs: Observation<'_>) -> Result<Action> {
        self.decide(obs.reward)
    }
}
