//! Hidden-bandit players.

use rand::Rng;

use crate::error::Result;
use crate::hidden_bandit::{Action, HbPlayer, Observation};
use crate::rng::StreamRng;

pub mod general;
pub mod markov;
pub mod repetitive;

pub use general::{GeneralOverrides, GeneralParams, GeneralPlayer};
pub use markov::{ExpSwitchPlayer, HoldFn, MemoryString, SemiMarkovPlayer};
pub use repetitive::{exploration_blocks, required_scale, RepetitiveEvent, RepetitiveParams, RepetitivePlayer};

#[derive(Debug, Clone, Copy, Default)]
pub struct AlwaysStay;

impl HbPlayer for AlwaysStay {
    fn act(&mut self, _: Observation<'_>) -> Result<Action> {
        Ok(Action::Stay)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AlwaysSwitch;

impl HbPlayer for AlwaysSwitch {
    fn act(&mut self, _: Observation<'_>) -> Result<Action> {
        Ok(Action::Switch)
    }
}

/// Stays or switches with equal probability, ignoring all rewards.
#[derive(Debug, Clone)]
pub struct UniformRandom {
    rng: StreamRng,
}

impl UniformRandom {
    pub fn new(rng: StreamRng) -> Self {
        Self { rng }
    }
}

impl HbPlayer for UniformRandom {
    fn act(&mut self, _: Observation<'_>) -> Result<Action> {
        Ok(if self.rng.gen::<bool>() { Action::Switch } else { Action::Stay })
    }
}
