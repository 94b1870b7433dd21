//! Multi-scale random walk reward process.
//!
//! Round `t` hangs off its parent `t − lowbit(t)`, and the walk value at `t`
//! is the parent's value plus an independent two-sided geometric step on the
//! grid `εℤ`. Both arms follow the walk around ½, the decoy sitting exactly `ε`
//! below the reference, and are clipped to `[0, 1]`.

use rand::Rng;
use serde::Serialize;

use crate::error::{argument, Result};

/// Largest power of two dividing `t`.
pub fn lowbit(t: u64) -> u64 {
    t & t.wrapping_neg()
}

/// `t − 2^δ(t)`, with `2^δ(t)` the largest power of two dividing `t ≥ 1`.
pub fn parent(t: u64) -> u64 {
    debug_assert!(t >= 1);
    t - lowbit(t)
}

/// Ancestor-chain length and cut size of the parent structure on `1..=T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DepthWidth {
    /// Largest number of ancestors `|{ρ(t), ρ(ρ(t)), …, 0}|` over `t ≤ T`.
    pub depth: usize,
    /// Largest number of rounds `s` with `ρ(s) < t ≤ s` over `t ≤ T`.
    pub width: usize,
}

pub fn depth_width(horizon: usize) -> Result<DepthWidth> {
    if horizon == 0 {
        return Err(argument("horizon must be at least 1"));
    }
    let mut ancestors = vec![0usize; horizon + 1];
    // cut(t) counts s with ρ(s)+1 ≤ t ≤ s; accumulate as a difference array
    let mut diff = vec![0i64; horizon + 2];
    let mut depth = 0;
    for s in 1..=horizon {
        let r = parent(s as u64) as usize;
        ancestors[s] = ancestors[r] + 1;
        depth = depth.max(ancestors[s]);
        diff[r + 1] += 1;
        diff[s + 1] -= 1;
    }
    let mut width = 0i64;
    let mut running = 0i64;
    for d in &diff[1..=horizon] {
        running += d;
        width = width.max(running);
    }
    Ok(DepthWidth { depth, width: width as usize })
}

/// Step size `ε`, decay `γ` of the step law, and horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MrwParams {
    pub horizon: usize,
    pub epsilon: f64,
    pub gamma: f64,
}

impl MrwParams {
    /// `ε = 1/(320·log₂^{3/2} T)`, `γ = 1/(4·log₂ T)`.
    pub fn defaults(horizon: usize) -> Result<Self> {
        if horizon < 2 {
            return Err(argument(format!("horizon must be at least 2, got {horizon}")));
        }
        let l = (horizon as f64).log2();
        Ok(Self { horizon, epsilon: 1.0 / (320.0 * l.powf(1.5)), gamma: 1.0 / (4.0 * l) })
    }

    pub fn new(horizon: usize, epsilon: f64, gamma: f64) -> Result<Self> {
        if horizon < 2 {
            return Err(argument(format!("horizon must be at least 2, got {horizon}")));
        }
        check_step_params(epsilon, gamma)?;
        Ok(Self { horizon, epsilon, gamma })
    }
}

fn check_step_params(epsilon: f64, gamma: f64) -> Result<()> {
    if !(epsilon > 0.0 && gamma > 0.0 && epsilon.is_finite() && gamma.is_finite()) {
        return Err(argument(format!("epsilon and gamma must be positive, got {epsilon}, {gamma}")));
    }
    Ok(())
}

/// Probability of the step `n` on the grid: `((1−q)/(1+q))·q^|n|`, `q = e^{−γ}`.
pub fn step_pmf(n: i64, gamma: f64) -> f64 {
    let q = (-gamma).exp();
    (1.0 - q) / (1.0 + q) * q.powf(n.unsigned_abs() as f64)
}

/// Draws the integer `n` of a step `εn`. Zero has probability `(1−q)/(1+q)`;
/// otherwise the magnitude is geometric on `{1, 2, …}` with success `1 − q`,
/// drawn by inversion, and the sign is fair.
pub fn sample_step_units<R: Rng + ?Sized>(gamma: f64, rng: &mut R) -> i64 {
    let q = (-gamma).exp();
    if rng.gen::<f64>() < (1.0 - q) / (1.0 + q) {
        return 0;
    }
    let u = 1.0 - rng.gen::<f64>();
    let magnitude = 1 + (u.ln() / -gamma).floor() as i64;
    if rng.gen::<bool>() {
        magnitude
    } else {
        -magnitude
    }
}

pub fn sample_step<R: Rng + ?Sized>(epsilon: f64, gamma: f64, rng: &mut R) -> Result<f64> {
    check_step_params(epsilon, gamma)?;
    Ok(epsilon * sample_step_units(gamma, rng) as f64)
}

/// One draw of the process over rounds `1..=T`, stored 0-based by round.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MrwRealization {
    pub params: MrwParams,
    /// Step of each round, in units of `ε`.
    pub steps: Vec<i64>,
    /// Walk `W_0..=W_T` in units of `ε`; `walk[0] = 0`.
    pub walk: Vec<i64>,
    /// Clipped reference rewards.
    pub reference: Vec<f64>,
    /// Clipped decoy rewards.
    pub decoy: Vec<f64>,
    /// Rounds at which clipping changed either arm.
    pub clipped_rounds: usize,
}

impl MrwRealization {
    /// Reward of `arm` (0 = reference) at `round` before clipping.
    pub fn unclipped(&self, round: usize, arm: usize) -> f64 {
        0.5 + self.params.epsilon * (self.walk[round + 1] - arm.min(1) as i64) as f64
    }

    pub fn walk_value(&self, t: usize) -> f64 {
        self.params.epsilon * self.walk[t] as f64
    }

    pub fn clipped_fraction(&self) -> f64 {
        self.clipped_rounds as f64 / self.params.horizon as f64
    }
}

/// Draws a realization with the given parameters.
pub fn mrw_adversary<R: Rng + ?Sized>(params: MrwParams, rng: &mut R) -> MrwRealization {
    let horizon = params.horizon;
    let mut steps = Vec::with_capacity(horizon);
    let mut walk = Vec::with_capacity(horizon + 1);
    walk.push(0i64);
    for t in 1..=horizon {
        let xi = sample_step_units(params.gamma, rng);
        steps.push(xi);
        walk.push(walk[parent(t as u64) as usize] + xi);
    }
    let mut reference = Vec::with_capacity(horizon);
    let mut decoy = Vec::with_capacity(horizon);
    let mut clipped_rounds = 0;
    for w in &walk[1..] {
        let r0 = 0.5 + params.epsilon * *w as f64;
        let r1 = 0.5 + params.epsilon * (*w - 1) as f64;
        if !(0.0..=1.0).contains(&r0) || !(0.0..=1.0).contains(&r1) {
            clipped_rounds += 1;
        }
        reference.push(r0.clamp(0.0, 1.0));
        decoy.push(r1.clamp(0.0, 1.0));
    }
    MrwRealization { params, steps, walk, reference, decoy, clipped_rounds }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn parents() {
        assert_eq!(parent(1), 0);
        assert_eq!(parent(6), 4);
        assert_eq!(parent(8), 0);
        assert_eq!(parent(7), 6);
        assert_eq!(parent(12), 8);
    }

    #[test]
    fn small_horizons() {
        assert_eq!(depth_width(1).unwrap(), DepthWidth { depth: 1, width: 1 });
        let dw = depth_width(8).unwrap();
        assert!(dw.depth <= 4 && dw.width <= 4);
        assert!(depth_width(0).is_err());
    }

    #[test]
    fn default_params_at_two_to_sixteen() {
        let p = MrwParams::defaults(1 << 16).unwrap();
        assert_eq!(p.epsilon, 1.0 / 20480.0);
        assert_eq!(p.gamma, 1.0 / 64.0);
        assert!(MrwParams::defaults(1).is_err());
    }

    #[test]
    fn walk_recursion_and_gap() {
        let r = mrw_adversary(MrwParams::new(64, 0.01, 0.5).unwrap(), &mut seeded(4));
        assert_eq!(r.walk[0], 0);
        for t in 1..=64usize {
            assert_eq!(r.walk[t], r.walk[parent(t as u64) as usize] + r.steps[t - 1]);
            let gap = r.unclipped(t - 1, 0) - r.unclipped(t - 1, 1);
            assert!((gap - 0.01).abs() < 1e-12);
        }
        assert!(r.reference.iter().chain(&r.decoy).all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn pmf_sums_to_one() {
        let gamma = 0.3;
        let total: f64 = (-400..=400).map(|n| step_pmf(n, gamma)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
