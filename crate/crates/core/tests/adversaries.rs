use ghostbandit::adversaries::consistent::{admissible, difference_class, two_adic};
use ghostbandit::adversaries::kernel::{
    apply, exp_switch_gap_bound, exp_switch_kernel, exp_switch_stationary, l1, min_entry, two_state_kernel,
};
use ghostbandit::adversaries::mrw::{sample_step_units, step_pmf};
use ghostbandit::adversaries::reference::nested_reference;
use ghostbandit::adversaries::{depth_width, mrw_adversary, mt_adversary, parent, ConsistentAdversary, MrwParams, MtTable};
use ghostbandit::rng::seeded;
use proptest::prelude::*;

#[test]
fn parents_and_small_structures() {
    assert_eq!(parent(6), 4);
    assert_eq!(parent(8), 0);
    let dw = depth_width(1).unwrap();
    assert_eq!((dw.depth, dw.width), (1, 1));
    let dw = depth_width(8).unwrap();
    assert!(dw.depth <= 4 && dw.width <= 4);
}

/// Brute force over explicit ancestor chains and cuts.
fn naive_depth_width(horizon: usize) -> (usize, usize) {
    let mut depth = 0;
    for t in 1..=horizon as u64 {
        let mut count = 0;
        let mut u = t;
        while u > 0 {
            u = parent(u);
            count += 1;
        }
        depth = depth.max(count);
    }
    let width = (1..=horizon as u64)
        .map(|t| (1..=horizon as u64).filter(|&s| parent(s) < t && t <= s).count())
        .max()
        .unwrap();
    (depth, width)
}

proptest! {
    #[test]
    fn structure_matches_brute_force(horizon in 1usize..300) {
        let dw = depth_width(horizon).unwrap();
        prop_assert_eq!((dw.depth, dw.width), naive_depth_width(horizon));
        let bound = (horizon as f64).log2().floor() as usize + 1;
        prop_assert!(dw.depth <= bound && dw.width <= bound);
    }

    #[test]
    fn walk_steps_follow_parents(seed in any::<u64>(), horizon in 2usize..2000) {
        let params = MrwParams::new(horizon, 0.01, 0.2).unwrap();
        let real = mrw_adversary(params, &mut seeded(seed));
        prop_assert_eq!(real.walk.len(), horizon + 1);
        for t in 1..=horizon {
            prop_assert_eq!(real.walk[t], real.walk[parent(t as u64) as usize] + real.steps[t - 1]);
            prop_assert!(real.reference[t - 1] >= real.decoy[t - 1]);
        }
    }

    #[test]
    fn admissible_pairs_meet_both_conditions(k1 in 1u32..200, k0 in 1u32..200) {
        let ok = k1 < k0 && k0 - k1 <= 1 << two_adic(k1).max(two_adic(k0));
        prop_assert_eq!(admissible(k1, k0), ok);
    }

    #[test]
    fn nested_reference_preserves_block_means(seed in any::<u64>(), k in 1u32..6, amp in 0.0..0.2f64) {
        let d = 3usize;
        let len = d.pow(k);
        let v = nested_reference(len, d, 0.5, amp, &mut seeded(seed)).unwrap();
        let mean = v.iter().sum::<f64>() / len as f64;
        prop_assert!((mean - 0.5).abs() < 1e-12);
        for chunk in v.chunks(len / d) {
            let m = chunk.iter().sum::<f64>() / chunk.len() as f64;
            prop_assert!((m - 0.5).abs() <= amp + 1e-12);
        }
    }

    #[test]
    fn stationary_law_is_fixed(p in 0.01..1.0f64, eta in 0.0..10.0f64, r0 in 0.0..=1.0f64, r1 in 0.0..=1.0f64) {
        let mu = exp_switch_stationary(p, eta, r0 - r1);
        prop_assert!(l1(mu, apply(mu, &exp_switch_kernel(p, eta, r0, r1))) < 1e-12);
    }

    #[test]
    fn two_state_contraction(a in 0.0..=1.0f64, b in 0.0..=1.0f64, x in 0.0..=1.0f64, y in 0.0..=1.0f64) {
        let k = [[1.0 - a, a], [b, 1.0 - b]];
        let lhs = l1(apply([x, 1.0 - x], &k), apply([y, 1.0 - y], &k));
        prop_assert!(lhs <= (1.0 - 2.0 * min_entry(&k)) * l1([x, 1.0 - x], [y, 1.0 - y]) + 1e-12);
    }
}

#[test]
fn step_law() {
    let gamma = 0.3;
    let total: f64 = (-400..=400).map(|n| step_pmf(n, gamma)).sum();
    assert!((total - 1.0).abs() < 1e-12);
    let mut rng = seeded(11);
    let n = 400_000;
    let mut counts = [0usize; 5];
    for _ in 0..n {
        let s = sample_step_units(gamma, &mut rng);
        if s.abs() <= 2 {
            counts[(s + 2) as usize] += 1;
        }
    }
    for (i, c) in counts.iter().enumerate() {
        let q = step_pmf(i as i64 - 2, gamma);
        let f = *c as f64 / n as f64;
        assert!((f - q).abs() < 4.0 * (q * (1.0 - q) / n as f64).sqrt(), "step {}: {f} vs {q}", i as i64 - 2);
    }
}

#[test]
fn default_walk_parameters() {
    let p = MrwParams::defaults(1 << 16).unwrap();
    assert!((p.epsilon - 1.0 / 20480.0).abs() < 1e-18);
    assert!((p.gamma - 1.0 / 64.0).abs() < 1e-18);
}

#[test]
fn consistent_examples() {
    let a = ConsistentAdversary::constant(1.0, 0.0).unwrap();
    assert_eq!(a.delta(), 1.0);
    let a = ConsistentAdversary::constant(0.8, 0.2).unwrap();
    assert!((a.delta() - 0.6).abs() < 1e-15);
    assert_eq!(a.reference(4), vec![0.8; 4]);
    assert!(ConsistentAdversary::constant(0.2, 0.8).is_err());
}

#[test]
fn dyadic_classes() {
    assert!(admissible(3, 4));
    assert_eq!(difference_class(1), 0);
    assert_eq!(difference_class(3), 2);
    assert_eq!(MtTable::new(1 << 7).unwrap().pairs.iter().map(Vec::len).collect::<Vec<_>>(), vec![6, 2, 2]);
    assert_eq!(MtTable::new(1 << 15).unwrap().pairs.iter().map(Vec::len).collect::<Vec<_>>(), vec![14, 6, 8, 6]);
    for log in [7u32, 15, 31] {
        let table = MtTable::new(1 << log).unwrap();
        assert!(table.normalizer < 2.0);
        assert!(table.pairs.iter().all(|c| c.len() <= log as usize), "log {log}");
        let total: f64 = (0..table.classes()).map(|r| table.class_probability(r)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
    assert!(MtTable::new(100).is_err());
    let draw = mt_adversary(1 << 12, &mut seeded(2)).unwrap();
    assert!(draw.v1 < draw.v0 && draw.v0 <= 1.0);
}

#[test]
fn gap_bound_limits() {
    let k = two_state_kernel(0.0, 0.0, 0.5);
    assert_eq!(k, [[1.0, 0.0], [0.0, 1.0]]);
    // a large gap makes the stationary decoy mass, and the bound's linear part, vanish
    let b = exp_switch_gap_bound(1e6, 20.0, 0.5, 1.0);
    assert!(b - 2.0 * 20f64.exp() / 0.5 < 1.0);
}
