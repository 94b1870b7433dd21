//! Reductions between the stateful-policies game and the hidden bandit.
//!
//! [`stateful`] turns any hidden-bandit player into a player for the policy
//! game. [`lower_bound`] goes the other way: it embeds a two-arm reward pair
//! into a three-action game whose reactive policies can only be told apart
//! through the hidden-bandit interface.

use rand::Rng;

use crate::error::{config, Result};
use crate::game::RewardTable;
use crate::rng::StreamRng;

pub mod lower_bound;
pub mod stateful;

pub use lower_bound::{build_lb_instance, hb_from_lb_play, randomized_round, LbInstance};
pub use stateful::{ConfigRecord, PolicyConfiguration, StatefulPlayer};

/// A player of the policy game with bandit feedback: it picks an action, then
/// sees only that action's reward.
pub trait GamePlayer {
    fn choose(&mut self, round: usize) -> Result<usize>;
    fn observe(&mut self, round: usize, reward: f64) -> Result<()>;
}

/// Actions and rewards of one game.
#[derive(Debug, Clone, PartialEq)]
pub struct GameTrace {
    pub actions: Vec<usize>,
    pub rewards: Vec<f64>,
    pub total: f64,
}

pub fn play_game(player: &mut dyn GamePlayer, table: &RewardTable) -> Result<GameTrace> {
    let mut actions = Vec::with_capacity(table.rounds());
    let mut rewards = Vec::with_capacity(table.rounds());
    for t in 0..table.rounds() {
        let a = player.choose(t)?;
        if a >= table.actions() {
            return Err(config(format!("player chose action {a} of {}", table.actions())));
        }
        let r = table.get(t, a);
        player.observe(t, r)?;
        actions.push(a);
        rewards.push(r);
    }
    let total = rewards.iter().sum();
    Ok(GameTrace { actions, rewards, total })
}

/// Picks actions uniformly at random.
#[derive(Debug, Clone)]
pub struct UniformGamePlayer {
    actions: usize,
    rng: StreamRng,
}

impl UniformGamePlayer {
    pub fn new(actions: usize, rng: StreamRng) -> Self {
        Self { actions, rng }
    }
}

impl GamePlayer for UniformGamePlayer {
    fn choose(&mut self, _: usize) -> Result<usize> {
        Ok(self.rng.gen_range(0..self.actions))
    }

    fn observe(&mut self, _: usize, _: f64) -> Result<()> {
        Ok(())
    }
}
