//! A policy-game player driven by a hidden-bandit player.
//!
//! The player tracks a hypothesis `(policy, state)`. Staying follows that
//! policy's transition on the observed reward; switching replaces the
//! hypothesis by a uniform one. The best policy in hindsight, tracked in its
//! true state, plays the role of the reference arm: staying on it keeps it,
//! and a switch lands on it with probability `1/(kS)`.

use rand::Rng;
use serde::Serialize;

use super::GamePlayer;
use crate::error::{config, Error, Result};
use crate::game::{policy_rollout, RewardTable, StatefulPolicy};
use crate::hidden_bandit::{Action, HbPlayer, Observation, ReturnProb};
use crate::players::{GeneralOverrides, GeneralPlayer};
use crate::rng::StreamRng;

/// A hypothesis: which policy, in which state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct PolicyConfiguration {
    pub policy: usize,
    pub state: usize,
}

/// The hypothesis used on a round and what the inner player decided after it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConfigRecord {
    pub config: PolicyConfiguration,
    pub action: Action,
}

pub struct StatefulPlayer {
    policies: Vec<StatefulPolicy>,
    states: usize,
    inner: Box<dyn HbPlayer>,
    inner_actions: Vec<Action>,
    inner_rewards: Vec<f64>,
    current: PolicyConfiguration,
    rng: StreamRng,
    log: Option<Vec<ConfigRecord>>,
}

impl StatefulPlayer {
    /// Return probability `1/(kS)` handed to the inner player.
    pub fn return_probability(policies: &[StatefulPolicy]) -> Result<ReturnProb> {
        let states = common_states(policies)?;
        ReturnProb::new(1.0 / (policies.len() * states) as f64)
    }

    /// Wraps the scale-randomised player with `p = 1/(kS)`.
    pub fn new(
        policies: Vec<StatefulPolicy>,
        horizon: usize,
        overrides: GeneralOverrides,
        rng: StreamRng,
        mut inner_rng: StreamRng,
    ) -> Result<Self> {
        let p = Self::return_probability(&policies)?;
        let inner = GeneralPlayer::new(p, horizon, overrides, &mut inner_rng);
        Self::with_inner(policies, Box::new(inner), rng)
    }

    /// Wraps an arbitrary hidden-bandit player.
    pub fn with_inner(policies: Vec<StatefulPolicy>, inner: Box<dyn HbPlayer>, mut rng: StreamRng) -> Result<Self> {
        let states = common_states(&policies)?;
        let current = uniform_config(&mut rng, policies.len(), states);
        Ok(Self {
            policies,
            states,
            inner,
            inner_actions: Vec::new(),
            inner_rewards: Vec::new(),
            current,
            rng,
            log: None,
        })
    }

    /// Records the hypothesis and decision of every round.
    pub fn instrumented(mut self) -> Self {
        self.log = Some(Vec::new());
        self
    }

    pub fn log(&self) -> Option<&[ConfigRecord]> {
        self.log.as_deref()
    }

    /// Rewards forwarded to the inner player, in order.
    pub fn inner_rewards(&self) -> &[f64] {
        &self.inner_rewards
    }

    pub fn inner_actions(&self) -> &[Action] {
        &self.inner_actions
    }

    pub fn current(&self) -> PolicyConfiguration {
        self.current
    }

    pub fn warnings(&self) -> Vec<String> {
        self.inner.warnings()
    }
}

fn common_states(policies: &[StatefulPolicy]) -> Result<usize> {
    if policies.len() < 2 {
        return Err(config(format!("need at least 2 policies, got {}", policies.len())));
    }
    let states = policies[0].num_states();
    if let Some((i, p)) = policies.iter().enumerate().find(|(_, p)| p.num_states() != states) {
        return Err(config(format!("policy {i} has {} states, policy 0 has {states}", p.num_states())));
    }
    Ok(states)
}

fn uniform_config<R: Rng + ?Sized>(rng: &mut R, policies: usize, states: usize) -> PolicyConfiguration {
    PolicyConfiguration { policy: rng.gen_range(0..policies), state: rng.gen_range(0..states) }
}

impl GamePlayer for StatefulPlayer {
    fn choose(&mut self, _: usize) -> Result<usize> {
        Ok(self.policies[self.current.policy].action(self.current.state))
    }

    fn observe(&mut self, round: usize, reward: f64) -> Result<()> {
        self.inner_rewards.push(reward);
        let action = self.inner.act(Observation { round, reward, history: &self.inner_actions })?;
        self.inner_actions.push(action);
        if let Some(log) = &mut self.log {
            log.push(ConfigRecord { config: self.current, action });
        }
        self.current = match action {
            Action::Stay => {
                let policy = &self.policies[self.current.policy];
                PolicyConfiguration { policy: self.current.policy, state: policy.next_state(self.current.state, reward)? }
            }
            Action::Switch => uniform_config(&mut self.rng, self.policies.len(), self.states),
        };
        Ok(())
    }
}

/// Outcome of checking an instrumented run against the best policy's rollout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ReductionAudit {
    /// Stays issued while on the best policy in its true state.
    pub reference_stays: usize,
    /// Of those, how many failed to remain on it.
    pub stay_violations: usize,
    pub switches: usize,
    /// Switches that landed on the best policy in its true state.
    pub switch_hits: usize,
}

/// Checks the two properties that make the best policy behave like the
/// reference arm. Only transitions into rounds `< T` are inspected.
pub fn audit_reduction(
    policies: &[StatefulPolicy],
    best: usize,
    table: &RewardTable,
    log: &[ConfigRecord],
) -> Result<ReductionAudit> {
    if log.len() != table.rounds() {
        return Err(Error::Internal(format!("log has {} rounds, table {}", log.len(), table.rounds())));
    }
    let states: Vec<usize> = policy_rollout(&policies[best], table)?.steps.iter().map(|s| s.state).collect();
    let on_reference = |t: usize| log[t].config == PolicyConfiguration { policy: best, state: states[t] };
    let mut audit = ReductionAudit { reference_stays: 0, stay_violations: 0, switches: 0, switch_hits: 0 };
    for t in 0..log.len() - 1 {
        match log[t].action {
            Action::Stay if on_reference(t) => {
                audit.reference_stays += 1;
                if !on_reference(t + 1) {
                    audit.stay_violations += 1;
                }
            }
            Action::Stay => {}
            Action::Switch => {
                audit.switches += 1;
                if on_reference(t + 1) {
                    audit.switch_hits += 1;
                }
            }
        }
    }
    Ok(audit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{commute_example, reactive_to_stateful};
    use crate::players::AlwaysStay;
    use crate::rng::seeded;

    fn commute() -> Vec<StatefulPolicy> {
        commute_example().iter().map(reactive_to_stateful).collect()
    }

    #[test]
    fn return_probability_is_one_over_k_s() {
        assert_eq!(StatefulPlayer::return_probability(&commute()).unwrap().get(), 1.0 / 9.0);
    }

    #[test]
    fn rejects_bad_policy_sets() {
        let one = commute()[..1].to_vec();
        assert!(StatefulPlayer::with_inner(one, Box::new(AlwaysStay), seeded(0)).is_err());
        let single = crate::game::StatefulPolicy::new(
            0,
            vec![0],
            vec![vec![crate::game::Transition {
                interval: crate::game::Interval::closed(0.0, 1.0),
                target: 0,
            }]],
            crate::game::RewardRange::UNIT,
        )
        .unwrap();
        let mixed = vec![commute()[0].clone(), single];
        assert!(matches!(
            StatefulPlayer::with_inner(mixed, Box::new(AlwaysStay), seeded(0)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn staying_follows_the_hypothesis() {
        let policies = commute();
        let table = RewardTable::new(3, vec![0.9; 30], crate::game::RewardRange::UNIT).unwrap();
        let mut player = StatefulPlayer::with_inner(policies.clone(), Box::new(AlwaysStay), seeded(2))
            .unwrap()
            .instrumented();
        let start = player.current();
        let trace = super::super::play_game(&mut player, &table).unwrap();
        let fixed = policies[start.policy].with_initial_state(start.state).unwrap();
        assert_eq!(trace.actions, policy_rollout(&fixed, &table).unwrap().actions());
        assert_eq!(player.inner_rewards(), &trace.rewards[..]);
    }
}
