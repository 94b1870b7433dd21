//! Explore-then-exploit player for reference sequences that are repetitive at
//! one known scale.
//!
//! The horizon is cut into blocks of `horizon / d` rounds. The player first
//! samples `m` blocks, each followed by a switch, and ranks their means. It
//! then keeps staying as long as block means hold up against the current
//! candidate mean, walking down the ranking when `m` consecutive switches fail
//! to find an arm that does.

use serde::Serialize;

use crate::error::{argument, config, Result};
use crate::hidden_bandit::{Action, HbPlayer, Observation, ReturnProb};

/// Number of exploration blocks, `ceil(ln(1/ε) / p)`.
pub fn exploration_blocks(p: ReturnProb, epsilon: f64) -> usize {
    let exact = (1.0 / epsilon).ln() / p.get();
    ((exact - 1e-9).ceil() as usize).max(1)
}

/// Minimal scale `ceil(ln²(1/ε) / (p²ε))` at which the explore-then-exploit
/// regret guarantee holds.
pub fn required_scale(p: ReturnProb, epsilon: f64) -> usize {
    let l = (1.0 / epsilon).ln();
    let exact = l * l / (p.get() * p.get() * epsilon);
    ((exact - 1e-9).ceil() as usize).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RepetitiveParams {
    /// Number of blocks the horizon is split into.
    pub d: usize,
    pub epsilon: f64,
    pub p: ReturnProb,
    pub horizon: usize,
}

impl RepetitiveParams {
    /// Validates and fails fast when exploration does not fit in the horizon.
    pub fn new(d: usize, epsilon: f64, p: ReturnProb, horizon: usize) -> Result<Self> {
        if d == 0 {
            return Err(argument("d must be positive"));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(argument(format!("epsilon {epsilon} outside (0, 1)")));
        }
        if horizon == 0 || horizon % d != 0 {
            return Err(config(format!("horizon {horizon} is not a positive multiple of d = {d}")));
        }
        let params = Self { d, epsilon, p, horizon };
        let needed = params.exploration_rounds();
        if needed > horizon {
            return Err(config(format!(
                "exploration needs {needed} rounds ({} blocks of {} plus a switch each) but the horizon is {horizon}",
                params.m(),
                params.block_len()
            )));
        }
        Ok(params)
    }

    pub fn m(&self) -> usize {
        exploration_blocks(self.p, self.epsilon)
    }

    pub fn block_len(&self) -> usize {
        self.horizon / self.d
    }

    pub fn exploration_rounds(&self) -> usize {
        self.m() * (self.block_len() + 1)
    }
}

/// One logged decision point of [`RepetitivePlayer`]. Rounds are local to the
/// player's horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum RepetitiveEvent {
    /// An exploration block ended with this mean.
    Explored { round: usize, mean: f64 },
    /// Exploration finished; means in descending order.
    Ranked { means: Vec<f64> },
    /// An exploitation block ended.
    Block { round: usize, mean: f64, candidate: usize, threshold: f64, switch: bool },
    /// The candidate index moved after `m` failed switches.
    Advanced { round: usize, candidate: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Stage {
    Explore,
    ExploreSwitch,
    Exploit,
    ExploitSwitch,
}

#[derive(Debug, Clone)]
pub struct RepetitivePlayer {
    params: RepetitiveParams,
    m: usize,
    len: usize,
    round: usize,
    stage: Stage,
    block_sum: f64,
    block_count: usize,
    means: Vec<f64>,
    candidate: usize,
    failures: usize,
    events: Vec<RepetitiveEvent>,
}

impl RepetitivePlayer {
    pub fn new(params: RepetitiveParams) -> Self {
        Self {
            m: params.m(),
            len: params.block_len(),
            params,
            round: 0,
            stage: Stage::Explore,
            block_sum: 0.0,
            block_count: 0,
            means: Vec::new(),
            candidate: 0,
            failures: 0,
            events: Vec::new(),
        }
    }

    pub fn params(&self) -> &RepetitiveParams {
        &self.params
    }

    pub fn events(&self) -> &[RepetitiveEvent] {
        &self.events
    }

    /// Ranked exploration means, once exploration is over.
    pub fn ranking(&self) -> Option<&[f64]> {
        matches!(self.stage, Stage::Exploit | Stage::ExploitSwitch).then_some(&self.means[..])
    }

    /// Current index into the ranking.
    pub fn candidate(&self) -> usize {
        self.candidate
    }

    fn close_block(&mut self) -> f64 {
        let mean = self.block_sum / self.block_count as f64;
        self.block_sum = 0.0;
        self.block_count = 0;
        mean
    }

    /// Decision for the next local round given its observed reward.
    pub fn step(&mut self, reward: f64) -> Action {
        let round = self.round;
        self.round += 1;
        if round >= self.params.horizon {
            return Action::Stay;
        }
        match self.stage {
            Stage::Explore => {
                self.block_sum += reward;
                self.block_count += 1;
                if self.block_count == self.len {
                    let mean = self.close_block();
                    self.means.push(mean);
                    self.events.push(RepetitiveEvent::Explored { round, mean });
                    self.stage = Stage::ExploreSwitch;
                }
                Action::Stay
            }
            Stage::ExploreSwitch => {
                if self.means.len() == self.m {
                    self.means.sort_by(|a, b| b.total_cmp(a));
                    self.events.push(RepetitiveEvent::Ranked { means: self.means.clone() });
                    self.stage = Stage::Exploit;
                } else {
                    self.stage = Stage::Explore;
                }
                Action::Switch
            }
            Stage::Exploit => {
                self.block_sum += reward;
                self.block_count += 1;
                if self.block_count == self.len {
                    let mean = self.close_block();
                    let threshold = self.means[self.candidate] - 2.0 * self.params.epsilon;
                    let switch = mean < threshold;
                    self.events.push(RepetitiveEvent::Block {
                        round,
                        mean,
                        candidate: self.candidate,
                        threshold,
                        switch,
                    });
                    if switch {
                        self.stage = Stage::ExploitSwitch;
                    }
                }
                Action::Stay
            }
            Stage::ExploitSwitch => {
                self.failures += 1;
                if self.failures >= self.m {
                    self.candidate = (self.candidate + 1).min(self.m - 1);
                    self.failures = 0;
                    self.events.push(RepetitiveEvent::Advanced { round, candidate: self.candidate });
                }
                self.stage = Stage::Exploit;
                Action::Switch
            }
        }
    }
}

impl HbPlayer for RepetitivePlayer {
    fn act(&mut self, obs: Observation<'_>) -> Result<Action> {
        Ok(self.step(obs.reward))
    }
}
