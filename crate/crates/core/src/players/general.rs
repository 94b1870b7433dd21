//! Scale-randomised player for arbitrary reference sequences.
//!
//! A block size `b = d^i` is drawn once per game, with `i` uniform over the
//! exponents whose blocks can host a full exploration phase, and the horizon
//! is played as consecutive blocks of `b` rounds, each by a fresh
//! [`RepetitivePlayer`]. The last block is cut short when `b` does not divide
//! the horizon.

use rand::Rng;
use serde::Serialize;

use super::repetitive::{required_scale, RepetitiveParams, RepetitivePlayer};
use crate::error::Result;
use crate::hidden_bandit::{Action, HbPlayer, Observation, ReturnProb};

/// Largest accuracy the default formula is allowed to produce.
pub const MAX_EPSILON: f64 = 0.25;

/// Optional replacements for the formula-derived accuracy and scale.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct GeneralOverrides {
    pub epsilon: Option<f64>,
    pub d: Option<usize>,
}

/// Resolved parameters of a [`GeneralPlayer`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneralParams {
    pub p: ReturnProb,
    pub horizon: usize,
    pub epsilon: f64,
    pub d: usize,
    /// Exponents `i` with `d^i ≤ horizon` whose block fits an exploration phase.
    pub exponents: Vec<u32>,
    pub warnings: Vec<String>,
}

/// `ln ln T / (√p · ln^{1/4} T)`, before clamping.
pub fn formula_epsilon(p: ReturnProb, horizon: usize) -> f64 {
    let l = (horizon as f64).ln();
    l.ln() / (p.get().sqrt() * l.powf(0.25))
}

impl GeneralParams {
    pub fn resolve(p: ReturnProb, horizon: usize, overrides: GeneralOverrides) -> Self {
        let mut warnings = Vec::new();
        let epsilon = match overrides.epsilon {
            Some(e) => e,
            None => {
                let e = formula_epsilon(p, horizon);
                if e.is_finite() && e > 0.0 && e <= MAX_EPSILON {
                    e
                } else {
                    warnings.push(format!(
                        "degenerate parameters: formula epsilon {e:.4} at T = {horizon} clamped to {MAX_EPSILON}"
                    ));
                    MAX_EPSILON
                }
            }
        };
        let d = overrides.d.unwrap_or_else(|| required_scale(p, epsilon)).max(2);
        let mut exponents = Vec::new();
        let mut b = d;
        let mut i = 1;
        while b <= horizon {
            if RepetitiveParams::new(d, epsilon, p, b).is_ok() {
                exponents.push(i);
            }
            match b.checked_mul(d) {
                Some(next) => b = next,
                None => break,
            }
            i += 1;
        }
        if exponents.is_empty() {
            warnings.push(format!(
                "degenerate parameters: no block size d^i ≤ {horizon} with d = {d} fits an exploration phase; playing stay"
            ));
        }
        Self { p, horizon, epsilon, d, exponents, warnings }
    }
}

#[derive(Debug, Clone)]
pub struct GeneralPlayer {
    params: GeneralParams,
    block: Option<usize>,
    inner: Option<RepetitivePlayer>,
    blocks_started: usize,
}

impl GeneralPlayer {
    pub fn new<R: Rng + ?Sized>(p: ReturnProb, horizon: usize, overrides: GeneralOverrides, rng: &mut R) -> Self {
        let params = GeneralParams::resolve(p, horizon, overrides);
        let block = if params.exponents.is_empty() {
            None
        } else {
            let i = params.exponents[rng.gen_range(0..params.exponents.len())];
            Some(params.d.pow(i))
        };
        Self { params, block, inner: None, blocks_started: 0 }
    }

    pub fn params(&self) -> &GeneralParams {
        &self.params
    }

    /// The block size drawn for this game, if any was feasible.
    pub fn block_size(&self) -> Option<usize> {
        self.block
    }

    /// The player of the current block.
    pub fn current(&self) -> Option<&RepetitivePlayer> {
        self.inner.as_ref()
    }

    pub fn step(&mut self, round: usize, reward: f64) -> Action {
        let Some(b) = self.block else {
            return Action::Stay;
        };
        if round >= self.params.horizon {
            return Action::Stay;
        }
        if round % b == 0 {
            let params = RepetitiveParams::new(self.params.d, self.params.epsilon, self.params.p, b)
                .expect("block sizes are pre-validated");
            self.inner = Some(RepetitivePlayer::new(params));
            self.blocks_started += 1;
        }
        self.inner.as_mut().expect("block started").step(reward)
    }
}

impl HbPlayer for GeneralPlayer {
    fn act(&mut self, obs: Observation<'_>) -> Result<Action> {
        Ok(self.step(obs.round, obs.reward))
    }

    fn warnings(&self) -> Vec<String> {
        self.params.warnings.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn half() -> ReturnProb {
        ReturnProb::new(0.5).unwrap()
    }

    #[test]
    fn formula_path_clamps_at_desk_scale() {
        let params = GeneralParams::resolve(half(), 1 << 20, GeneralOverrides::default());
        assert_eq!(params.epsilon, MAX_EPSILON);
        assert!(!params.warnings.is_empty());
        // ln²(4) / (0.25 · 0.25) = 30.75 → 31
        assert_eq!(params.d, 31);
        assert_eq!(params.exponents, vec![1, 2, 3, 4]);
    }

    #[test]
    fn formula_epsilon_value() {
        let t = 1usize << 20;
        let l = (t as f64).ln();
        let want = l.ln() / (0.5f64.sqrt() * l.powf(0.25));
        assert_eq!(formula_epsilon(half(), t), want);
        assert!(want > 1.0);
    }

    #[test]
    fn overrides_and_exponents() {
        let o = GeneralOverrides { epsilon: Some(0.1), d: Some(1024) };
        let params = GeneralParams::resolve(half(), 1 << 20, o);
        assert_eq!(params.exponents, vec![1, 2]);
        assert!(params.warnings.is_empty());
        // d = 8: blocks of 8 hold 8 one-round blocks but exploration needs 10 rounds
        let o = GeneralOverrides { epsilon: Some(0.1), d: Some(8) };
        assert_eq!(GeneralParams::resolve(half(), 4096, o).exponents, vec![2, 3, 4]);
    }

    #[test]
    fn degenerates_to_stay() {
        let o = GeneralOverrides { epsilon: Some(0.1), d: Some(64) };
        let mut player = GeneralPlayer::new(half(), 32, o, &mut seeded(0));
        assert_eq!(player.block_size(), None);
        assert!(!player.warnings().is_empty());
        assert!((0..32).all(|t| player.step(t, 0.3) == Action::Stay));
    }

    #[test]
    fn blocks_restart_exploration() {
        let o = GeneralOverrides { epsilon: Some(0.1), d: Some(16) };
        let mut player = GeneralPlayer::new(half(), 256 * 3, o, &mut seeded(5));
        let b = player.block_size().unwrap();
        let actions: Vec<Action> = (0..256 * 3).map(|t| player.step(t, 0.5)).collect();
        let len = b / 16;
        for start in (0..256 * 3).step_by(b) {
            assert_eq!(actions[start + len], Action::Switch, "block at {start}");
            assert!(actions[start..start + len].iter().all(|a| *a == Action::Stay));
        }
        assert_eq!(player.blocks_started, (256 * 3 + b - 1) / b);
    }
}
