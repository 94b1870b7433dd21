//! Two-state arm chains induced by Markovian players, and the regret bounds
//! for the exponential switching rule against gap-preserving adversaries.

/// Row-stochastic 2×2 matrix.
pub type Kernel = [[f64; 2]; 2];

/// Chain on (reference, decoy) when the player switches with probability `q0`
/// on the reference and `q1` on the decoy.
pub fn two_state_kernel(q0: f64, q1: f64, p: f64) -> Kernel {
    [[1.0 - q0, q0], [p * q1, 1.0 - p * q1]]
}

/// Stationary law `(p, e^{−ηΔ}) / (p + e^{−ηΔ})` of the exponential switching
/// chain with reward gap `Δ = r0 − r1`. It does not depend on the level of the
/// rewards, only on their gap.
pub fn exp_switch_stationary(p: f64, eta: f64, delta: f64) -> [f64; 2] {
    let e = (-eta * delta).exp();
    [p / (p + e), e / (p + e)]
}

/// Kernel of the exponential switching player on rewards `(r0, r1)`.
pub fn exp_switch_kernel(p: f64, eta: f64, r0: f64, r1: f64) -> Kernel {
    two_state_kernel(0.5 * (-eta * r0).exp(), 0.5 * (-eta * r1).exp(), p)
}

pub fn apply(mu: [f64; 2], k: &Kernel) -> [f64; 2] {
    [mu[0] * k[0][0] + mu[1] * k[1][0], mu[0] * k[0][1] + mu[1] * k[1][1]]
}

pub fn l1(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).abs() + (a[1] - b[1]).abs()
}

pub fn min_entry(k: &Kernel) -> f64 {
    k.iter().flatten().copied().fold(f64::INFINITY, f64::min)
}

/// Worst-case regret bound `2e^η/p + T/(2ηp)` of exponential switching against
/// any consistent adversary.
pub fn exp_switch_regret_bound(horizon: f64, eta: f64, p: f64) -> f64 {
    2.0 * eta.exp() / p + horizon / (2.0 * eta * p)
}

/// Gap-specific bound `T·Δe^{−ηΔ}/(p + e^{−ηΔ}) + 2e^η/p`.
pub fn exp_switch_gap_bound(horizon: f64, eta: f64, p: f64, delta: f64) -> f64 {
    let e = (-eta * delta).exp();
    horizon * delta * e / (p + e) + 2.0 * eta.exp() / p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_rows() {
        assert_eq!(two_state_kernel(0.0, 0.0, 0.3), [[1.0, 0.0], [0.0, 1.0]]);
        let k = two_state_kernel(0.2, 0.7, 0.4);
        for row in k {
            assert!((row[0] + row[1] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn stationary_at_a_point() {
        let (p, eta, r0, r1) = (0.5, 2.0, 0.8, 0.2);
        let mu = exp_switch_stationary(p, eta, r0 - r1);
        let next = apply(mu, &exp_switch_kernel(p, eta, r0, r1));
        assert!(l1(mu, next) < 1e-12);
    }

    #[test]
    fn bounds() {
        assert_eq!(exp_switch_regret_bound(100.0, 1.0, 0.5), 4.0 * 1f64.exp() + 100.0);
        let gap = exp_switch_gap_bound(100.0, 1.0, 0.5, 0.0);
        assert!((gap - 4.0 * 1f64.exp()).abs() < 1e-12);
    }
}
