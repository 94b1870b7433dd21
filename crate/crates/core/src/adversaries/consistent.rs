//! Adversaries that keep a fixed gap between the arms, and the randomised
//! constant adversary built from dyadic classes of value pairs.

use rand::Rng;
use serde::Serialize;

use crate::error::{argument, Error, Result};

/// Reference rewards with the decoy always `delta` lower.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistentAdversary {
    delta: f64,
    reference: ReferencePath,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
enum ReferencePath {
    Constant(f64),
    Sequence(Vec<f64>),
}

impl ConsistentAdversary {
    /// Reference at `v0` and decoy at `v1` every round.
    pub fn constant(v0: f64, v1: f64) -> Result<Self> {
        if !(0.0 <= v1 && v1 < v0 && v0 <= 1.0) {
            return Err(argument(format!("need 0 ≤ v1 < v0 ≤ 1, got v0 = {v0}, v1 = {v1}")));
        }
        Ok(Self { delta: v0 - v1, reference: ReferencePath::Constant(v0) })
    }

    /// Arbitrary reference sequence in `[delta, 1]`.
    pub fn with_reference(delta: f64, reference: Vec<f64>) -> Result<Self> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(argument(format!("offset {delta} outside [0, 1]")));
        }
        if let Some(v) = reference.iter().find(|v| !(delta..=1.0).contains(*v)) {
            return Err(argument(format!("reference value {v} outside [{delta}, 1]")));
        }
        Ok(Self { delta, reference: ReferencePath::Sequence(reference) })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn reference_at(&self, round: usize) -> f64 {
        match &self.reference {
            ReferencePath::Constant(v) => *v,
            ReferencePath::Sequence(s) => s[round],
        }
    }

    pub fn decoy_at(&self, round: usize) -> f64 {
        match &self.reference {
            ReferencePath::Constant(v) => *v - self.delta,
            ReferencePath::Sequence(s) => (s[round] - self.delta).max(0.0),
        }
    }

    pub fn reference(&self, horizon: usize) -> Vec<f64> {
        (0..horizon).map(|t| self.reference_at(t)).collect()
    }

    pub fn decoy(&self, horizon: usize) -> Vec<f64> {
        (0..horizon).map(|t| self.decoy_at(t)).collect()
    }
}

/// Exponent of the largest power of two dividing `k ≥ 1`.
pub fn two_adic(k: u32) -> u32 {
    k.trailing_zeros()
}

/// Dyadic class of a positive difference: 0 for 1, else `r` with
/// `2^{r−1} < diff ≤ 2^r`.
pub fn difference_class(diff: u32) -> u32 {
    debug_assert!(diff >= 1);
    32 - (diff - 1).leading_zeros()
}

/// Whether `(k1, k0)` is an admissible pair: `k1 < k0` and the gap is at most
/// the largest power of two dividing either endpoint.
pub fn admissible(k1: u32, k0: u32) -> bool {
    k1 >= 1 && k1 < k0 && k0 - k1 <= 1 << two_adic(k1).max(two_adic(k0))
}

/// Pairs grouped by class for a value grid `{1, …, levels}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MtTable {
    /// Horizon the parameters were derived from, `2^levels ≤` the requested one.
    pub effective_horizon: u64,
    pub levels: u32,
    /// `pairs[r]` lists `(k1, k0)` of class `r`.
    pub pairs: Vec<Vec<(u32, u32)>>,
    /// Normaliser `Σ_r 1/(r+1)²`.
    pub normalizer: f64,
}

impl MtTable {
    /// Uses the largest `levels = 2^j − 1 ≤ floor(log₂ T)`. Every class is
    /// populated from `levels = 7` on, so `T ≥ 2^7` is required.
    pub fn new(horizon: u64) -> Result<Self> {
        if horizon < 1 << 7 {
            return Err(argument(format!("horizon must be at least 128, got {horizon}")));
        }
        let log = 63 - horizon.leading_zeros();
        let levels = (1u32 << (31 - (log + 1).leading_zeros())) - 1;
        let classes = 31 - levels.leading_zeros() + 1;
        let mut pairs = vec![Vec::new(); classes as usize];
        for k1 in 1..=levels {
            for k0 in k1 + 1..=levels {
                if admissible(k1, k0) {
                    let r = difference_class(k0 - k1);
                    if let Some(class) = pairs.get_mut(r as usize) {
                        class.push((k1, k0));
                    }
                }
            }
        }
        if let Some(r) = pairs.iter().position(Vec::is_empty) {
            return Err(Error::Internal(format!("class {r} has no admissible pair at {levels} levels")));
        }
        let normalizer = (0..classes).map(|r| 1.0 / ((r + 1) * (r + 1)) as f64).sum();
        Ok(Self { effective_horizon: 1 << levels, levels, pairs, normalizer })
    }

    pub fn classes(&self) -> usize {
        self.pairs.len()
    }

    pub fn class_probability(&self, r: usize) -> f64 {
        1.0 / (self.normalizer * ((r + 1) * (r + 1)) as f64)
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> MtDraw {
        let mut u = rng.gen::<f64>() * self.normalizer;
        let mut class = self.classes() - 1;
        for r in 0..self.classes() {
            let w = 1.0 / ((r + 1) * (r + 1)) as f64;
            if u < w {
                class = r;
                break;
            }
            u -= w;
        }
        let options = &self.pairs[class];
        let (k1, k0) = options[rng.gen_range(0..options.len())];
        let l = self.levels as f64;
        MtDraw {
            class: class as u32,
            k1,
            k0,
            v0: k0 as f64 / l,
            v1: k1 as f64 / l,
            effective_horizon: self.effective_horizon,
        }
    }
}

/// A sampled pair of constant arm values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MtDraw {
    pub class: u32,
    pub k1: u32,
    pub k0: u32,
    pub v0: f64,
    pub v1: f64,
    pub effective_horizon: u64,
}

impl MtDraw {
    pub fn adversary(&self) -> ConsistentAdversary {
        ConsistentAdversary::constant(self.v0, self.v1).expect("k1 < k0 ≤ levels")
    }
}

/// One draw for horizon `T`; see [`MtTable::new`].
pub fn mt_adversary<R: Rng + ?Sized>(horizon: u64, rng: &mut R) -> Result<MtDraw> {
    Ok(MtTable::new(horizon)?.draw(rng))
}
