//! Acceptance checks. Each prints one PASS/FAIL line; the process fails if any
//! check fails or overruns its time budget.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use ghostbandit::adversaries::kernel::{apply, exp_switch_kernel, exp_switch_regret_bound, exp_switch_stationary, l1, min_entry};
use ghostbandit::adversaries::reference::commute_zone_table;
use ghostbandit::adversaries::consistent::admissible;
use ghostbandit::adversaries::{depth_width, mrw_adversary, sample_step, MrwParams, MtTable};
use ghostbandit::bridge::lower_bound::lb_policies;
use ghostbandit::bridge::stateful::audit_reduction;
use ghostbandit::bridge::{build_lb_instance, hb_from_lb_play, play_game, StatefulPlayer, UniformGamePlayer};
use ghostbandit::experiment::{run_scenario, sweep, ExperimentConfig};
use ghostbandit::game::{best_reference, commute_example, reactive_to_stateful, StatefulPolicy};
use ghostbandit::hidden_bandit::{Arm, HbPlayer, ReturnProb};
use ghostbandit::players::{required_scale, AlwaysStay, AlwaysSwitch, GeneralOverrides, GeneralPlayer, UniformRandom};
use ghostbandit::repetition::{
    adversarial_string, adversarial_string_with, repetitive_deficiency, variability, AdversarialSpec, ValueString,
};
use ghostbandit::rng::{seeded, stream, Purpose};
use rand::Rng;

type Outcome = Result<(bool, String), String>;

struct Check {
    id: &'static str,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn main() -> ExitCode {
    let checks = [
        Check { id: "01", name: "local repetition deficiency", budget: secs(5), run: local_repetition },
        Check { id: "02", name: "variability spread and monotonicity", budget: secs(30), run: variability_bounds },
        Check { id: "03", name: "repetition-breaking string", budget: secs(5), run: breaker_string },
        Check { id: "04", name: "single-scale player on repetitive reference", budget: secs(60), run: repetitive_player },
        Check { id: "05", name: "random walk depth and width", budget: secs(10), run: walk_structure },
        Check { id: "06", name: "random walk steps and clipping", budget: secs(60), run: walk_statistics },
        Check { id: "07", name: "switching chain stationarity and contraction", budget: secs(1), run: kernels },
        Check { id: "08", name: "exponential switching vs constant pair", budget: secs(120), run: exp_switch_constant },
        Check { id: "09", name: "dyadic constant adversary", budget: secs(600), run: dyadic_adversary },
        Check { id: "10", name: "three-path instance invariants", budget: secs(60), run: path_instance },
        Check { id: "11", name: "policy reduction mechanics", budget: secs(60), run: reduction_mechanics },
        Check { id: "12", name: "commute end to end", budget: secs(300), run: commute_end_to_end },
    ];
    let mut failed = 0;
    for c in &checks {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok((ok, detail)) => (ok, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let in_time = elapsed <= c.budget;
        let pass = ok && in_time;
        if !pass {
            failed += 1;
        }
        let timing = format!("{:.2}s of {}s", elapsed.as_secs_f64(), c.budget.as_secs());
        let late = if in_time { "" } else { " OVER BUDGET" };
        println!("[{}] {} {}: {detail} ({timing}{late})", if pass { "PASS" } else { "FAIL" }, c.id, c.name);
    }
    println!("{} of {} checks passed", checks.len() - failed, checks.len());
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Mean and standard error.
fn moments(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn local_repetition() -> Outcome {
    let len = 1 << 16;
    let mut strings = Vec::new();
    let mut rng = seeded(101);
    for _ in 0..100 {
        strings.push(ValueString::new((0..len).map(|_| rng.gen::<f64>()).collect()).map_err(err)?);
    }
    for eps in [0.1, 0.15, 0.2, 0.24, 0.3] {
        let mut spec = AdversarialSpec::new(2, eps, 0.1);
        spec.depth = Some(16);
        strings.push(adversarial_string_with(&spec).map_err(err)?);
    }
    let (mut worst25, mut worst20) = (0.0f64, 0.0f64);
    for s in &strings {
        if s.len() != len {
            return Err(format!("string of length {}", s.len()));
        }
        worst25 = worst25.max(repetitive_deficiency(s, 2, 0.25).map_err(err)?);
        worst20 = worst20.max(repetitive_deficiency(s, 2, 0.2).map_err(err)?);
    }
    Ok((
        worst25 < 0.5 && worst20 < 0.78,
        format!("{} strings, max deficiency {worst25:.4} at 0.25 (< 0.5), {worst20:.4} at 0.2 (< 0.78)", strings.len()),
    ))
}

fn variability_bounds() -> Outcome {
    let mut worst_spread = f64::NEG_INFINITY;
    let mut non_monotone = 0;
    let mut check = |values: Vec<f64>| -> Result<(), String> {
        let v = variability(&ValueString::new(values).map_err(err)?, 2).map_err(err)?;
        worst_spread = worst_spread.max(v.spread());
        if !v.is_monotone() {
            non_monotone += 1;
        }
        Ok(())
    };
    for bits in 0u32..1 << 16 {
        check((0..16).map(|i| ((bits >> i) & 1) as f64).collect())?;
    }
    let mut rng = seeded(202);
    for _ in 0..10_000 {
        check((0..256).map(|_| rng.gen::<f64>()).collect())?;
    }
    Ok((
        worst_spread <= 0.25 && non_monotone == 0,
        format!("65536 binary + 10000 real strings, max spread {worst_spread:.6}, {non_monotone} non-monotone"),
    ))
}

fn breaker_string() -> Outcome {
    let spec = AdversarialSpec::new(2, 0.24, 0.1);
    let s = adversarial_string(2, 0.24, 0.1).map_err(err)?;
    let def = repetitive_deficiency(&s, 2, 0.24).map_err(err)?;
    Ok((def > 0.1, format!("depth {}, length {}, deficiency {def:.6} (> 0.1)", spec.resolved_depth(), s.len())))
}

fn repetitive_player() -> Outcome {
    let eps = 0.1;
    let p = ReturnProb::new(0.5).map_err(err)?;
    let d = required_scale(p, eps);
    let horizon = 64 * d;
    let text = format!(
        r#"
schema_version = 1
scenario = "single-scale"
kind = "hidden_bandit"
horizons = [{horizon}]
p = 0.5
[seeds]
count = 200
master = 4
[player]
name = "alg1"
d = {d}
epsilon = {eps}
[adversary]
name = "mirror_decoy"
offset = {offset}
reference = {{ kind = "nested", d = {d}, base = 0.5, amplitude = {amp} }}
"#,
        offset = 3.0 * eps,
        amp = 0.9 * eps,
    );
    let report = run_scenario(&ExperimentConfig::from_toml_str(&text).map_err(err)?).map_err(err)?;
    let s = report.summary(horizon).ok_or("no summary")?;
    if s.failed > 0 {
        return Err(format!("{} cells failed: {:?}", s.failed, report.errors));
    }
    let bound = 8.0 * eps * horizon as f64;
    Ok((
        s.regret.mean <= bound + 3.0 * s.regret.se,
        format!("d = {d}, T = {horizon}, mean regret {:.1} ± {:.1}, bound {bound:.1}", s.regret.mean, s.regret.se),
    ))
}

fn walk_structure() -> Outcome {
    let mut worst = String::new();
    let mut ok = true;
    for k in 10..=20 {
        let dw = depth_width(1 << k).map_err(err)?;
        let limit = k as usize + 1;
        ok &= dw.depth <= limit && dw.width <= limit;
        worst = format!("at T = 2^20 depth {} width {} limit {limit}", dw.depth, dw.width);
    }
    Ok((ok, worst))
}

fn walk_statistics() -> Outcome {
    let horizon = 1 << 16;
    let params = MrwParams::defaults(horizon).map_err(err)?;
    let (eps, gamma) = (params.epsilon, params.gamma);
    let mut rng = seeded(606);
    let n = 1_000_000;
    let draws: Vec<f64> = (0..n).map(|_| sample_step(eps, gamma, &mut rng)).collect::<Result<_, _>>().map_err(err)?;
    let mean = draws.iter().sum::<f64>() / n as f64;
    let m2 = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    let m4 = draws.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n as f64;
    let mean_ok = mean.abs() <= 3.0 * (m2 / n as f64).sqrt();
    let var_bound = 8.0 * eps * eps / (gamma * gamma);
    let var_ok = m2 <= var_bound + 3.0 * ((m4 - m2 * m2) / n as f64).sqrt();

    let fractions: Vec<f64> = (0..100u64)
        .map(|s| mrw_adversary(params, &mut stream(6, horizon as u64, s, Purpose::Adversary)).clipped_fraction())
        .collect();
    let (clip, clip_se) = moments(&fractions);
    let clip_ok = clip <= 1.0 / 25.0 + 3.0 * clip_se;
    Ok((
        mean_ok && var_ok && clip_ok,
        format!(
            "step mean {:.3}ε, var {:.4} of bound {:.4} (in ε²), clipped fraction {clip:.5} ± {clip_se:.5}",
            mean / eps,
            m2 / (eps * eps),
            var_bound / (eps * eps)
        ),
    ))
}

fn kernels() -> Outcome {
    let mut rng = seeded(707);
    let mut worst_fixed = 0.0f64;
    for _ in 0..50 {
        let p = rng.gen_range(0.01..=1.0);
        let eta = rng.gen_range(0.0..10.0);
        let (r0, r1) = (rng.gen::<f64>(), rng.gen::<f64>());
        let mu = exp_switch_stationary(p, eta, r0 - r1);
        worst_fixed = worst_fixed.max(l1(mu, apply(mu, &exp_switch_kernel(p, eta, r0, r1))));
    }
    let mut contraction_failures = 0;
    for _ in 0..100 {
        let (a, b) = (rng.gen::<f64>(), rng.gen::<f64>());
        let k = [[1.0 - a, a], [b, 1.0 - b]];
        let x = rng.gen::<f64>();
        let y = rng.gen::<f64>();
        let (mu, nu) = ([x, 1.0 - x], [y, 1.0 - y]);
        let lhs = l1(apply(mu, &k), apply(nu, &k));
        if lhs > (1.0 - 2.0 * min_entry(&k)) * l1(mu, nu) + 1e-15 {
            contraction_failures += 1;
        }
    }
    Ok((
        worst_fixed <= 1e-12 && contraction_failures == 0,
        format!("max stationarity residual {worst_fixed:.2e}, {contraction_failures} contraction failures"),
    ))
}

fn exp_switch_constant() -> Outcome {
    let horizon = 1_000_000;
    let text = format!(
        r#"
schema_version = 1
scenario = "exp-switch-constant"
kind = "hidden_bandit"
horizons = [{horizon}]
p = 0.5
[seeds]
count = 100
master = 8
[player]
name = "exp_switch"
eta_log_factor = 0.5
[adversary]
name = "constant"
v0 = 0.8
v1 = 0.2
"#
    );
    let report = run_scenario(&ExperimentConfig::from_toml_str(&text).map_err(err)?).map_err(err)?;
    let s = report.summary(horizon).ok_or("no summary")?;
    let eta = 0.5 * (horizon as f64).ln();
    let bound = exp_switch_regret_bound(horizon as f64, eta, 0.5);
    Ok((
        s.regret.mean <= bound + 3.0 * s.regret.se,
        format!("mean regret {:.1} ± {:.1}, bound {bound:.1}", s.regret.mean, s.regret.se),
    ))
}

/// Upper 1% points of the chi-square law for 1 to 10 degrees of freedom.
const CHI2_99: [f64; 10] = [6.635, 9.210, 11.345, 13.277, 15.086, 16.812, 18.475, 20.090, 21.666, 23.209];

fn dyadic_adversary() -> Outcome {
    let table = MtTable::new(1 << 16).map_err(err)?;
    let mut rng = seeded(909);
    let n = 1_000_000;
    let mut counts = vec![0u64; table.classes()];
    let mut bad_pairs = 0;
    for _ in 0..n {
        let draw = table.draw(&mut rng);
        counts[draw.class as usize] += 1;
        if !admissible(draw.k1, draw.k0) || draw.k0 > table.levels {
            bad_pairs += 1;
        }
    }
    let chi2: f64 = counts
        .iter()
        .enumerate()
        .map(|(r, &c)| {
            let e = n as f64 * table.class_probability(r);
            (c as f64 - e).powi(2) / e
        })
        .sum();
    let critical = CHI2_99[table.classes() - 2];
    let dist_ok = chi2 < critical && bad_pairs == 0;

    let text = r#"
schema_version = 1
scenario = "exp-switch-vs-dyadic"
kind = "hidden_bandit"
horizons = [16384, 65536, 262144]
p = 0.5
[seeds]
count = 2000
master = 9
[player]
name = "exp_switch"
eta_log_factor = 0.5
[adversary]
name = "mt"
"#;
    let (_, rows) = sweep(&ExperimentConfig::from_toml_str(text).map_err(err)?, ghostbandit::experiment::run::thread_cap())
        .map_err(err)?;
    let trend_ok = rows.iter().all(|r| r.scaled_regret >= 0.001);
    let trend: Vec<String> = rows.iter().map(|r| format!("{:.4}", r.scaled_regret)).collect();
    Ok((
        dist_ok && trend_ok,
        format!(
            "chi2 {chi2:.2} < {critical} over {} classes, {bad_pairs} bad pairs; regret·log2T/T = [{}] (≥ 0.001)",
            table.classes(),
            trend.join(", ")
        ),
    ))
}

fn path_instance() -> Outcome {
    let horizon = 1 << 10;
    let params = MrwParams::defaults(horizon).map_err(err)?;
    let signal = &lb_policies()[0];
    let instances = 10_000u64;
    let (mut identity_failures, mut inconsistent) = (0usize, 0usize);
    let (mut initial_ref, mut switches, mut returns) = (0u64, 0u64, 0u64);
    for seed in 0..instances {
        let mut rng = stream(10, horizon as u64, seed, Purpose::Instance);
        let real = mrw_adversary(params, &mut rng);
        let inst = build_lb_instance(&real.reference, &real.decoy, &mut rng).map_err(err)?;
        for t in 0..horizon {
            for path in 0..3 {
                let r = inst.table.get(t, inst.perms[t][path] as usize);
                if signal.next_action(r).map_err(err)? != inst.next_on_path(t, path) {
                    identity_failures += 1;
                }
            }
        }
        let mut player = UniformGamePlayer::new(3, stream(10, horizon as u64, seed, Purpose::Player));
        let game = play_game(&mut player, &inst.table).map_err(err)?;
        let c = hb_from_lb_play(&inst, &game.actions).map_err(err)?;
        if !c.is_consistent() {
            inconsistent += 1;
        }
        initial_ref += u64::from(c.arms[0] == Arm::Reference);
        switches += c.decoy_switches as u64;
        returns += c.decoy_returns as u64;
    }
    let within = |hits: u64, n: u64, p: f64| {
        let f = hits as f64 / n as f64;
        (f, (f - p).abs() <= 4.0 * (p * (1.0 - p) / n as f64).sqrt())
    };
    let (f_init, init_ok) = within(initial_ref, instances, 1.0 / 3.0);
    let (f_ret, ret_ok) = within(returns, switches, 0.5);
    Ok((
        identity_failures == 0 && inconsistent == 0 && init_ok && ret_ok,
        format!(
            "{identity_failures} signal mismatches, {inconsistent} inconsistent plays, initial reference {f_init:.4}, return after switch {f_ret:.4} over {switches} switches"
        ),
    ))
}

fn commute_policies() -> Vec<StatefulPolicy> {
    commute_example().iter().map(reactive_to_stateful).collect()
}

fn reduction_mechanics() -> Outcome {
    let policies = commute_policies();
    let horizon = 1 << 16;
    let (mut stay_violations, mut reference_stays) = (0, 0);
    let (mut switches, mut hits) = (0u64, 0u64);
    for seed in 0..40u64 {
        let rng = |purpose| stream(11, horizon as u64, seed, purpose);
        let table = commute_zone_table(horizon, 4, &mut rng(Purpose::Adversary)).map_err(err)?;
        let (best, _) = best_reference(&policies, &table).map_err(err)?;
        let p = StatefulPlayer::return_probability(&policies).map_err(err)?;
        let inner: Box<dyn HbPlayer> = match seed % 4 {
            0 | 1 => Box::new(AlwaysSwitch),
            2 => Box::new(UniformRandom::new(rng(Purpose::InnerPlayer))),
            _ => match seed % 8 {
                3 => Box::new(AlwaysStay),
                _ => Box::new(GeneralPlayer::new(
                    p,
                    horizon,
                    GeneralOverrides { epsilon: Some(0.1), d: Some(64) },
                    &mut rng(Purpose::InnerPlayer),
                )),
            },
        };
        let mut player = StatefulPlayer::with_inner(policies.clone(), inner, rng(Purpose::Player))
            .map_err(err)?
            .instrumented();
        play_game(&mut player, &table).map_err(err)?;
        let audit = audit_reduction(&policies, best, &table, player.log().ok_or("no log")?).map_err(err)?;
        stay_violations += audit.stay_violations;
        reference_stays += audit.reference_stays;
        switches += audit.switches as u64;
        hits += audit.switch_hits as u64;
    }
    let target = 1.0 / 9.0;
    let rate = hits as f64 / switches as f64;
    let rate_ok = (rate - target).abs() <= 4.0 * (target * (1.0 - target) / switches as f64).sqrt();
    Ok((
        stay_violations == 0 && reference_stays > 0 && switches >= 1_000_000 && rate_ok,
        format!(
            "{stay_violations} stay violations in {reference_stays} reference stays, hit rate {rate:.5} over {switches} switches (target {target:.5})"
        ),
    ))
}

fn commute_end_to_end() -> Outcome {
    let horizon = 1 << 16;
    let text = format!(
        r#"
schema_version = 1
scenario = "commute"
kind = "stateful"
horizons = [{horizon}]
policies = "commute"
[seeds]
count = 100
master = 12
[player]
name = "alg2"
epsilon = 0.1
d = 64
[table]
name = "commute_zones"
d = 4
"#
    );
    let report = run_scenario(&ExperimentConfig::from_toml_str(&text).map_err(err)?).map_err(err)?;
    let s = report.summary(horizon).ok_or("no summary")?;
    if s.failed > 0 {
        return Err(format!("{} cells failed: {:?}", s.failed, report.errors));
    }
    let baseline = s.baseline.ok_or("no baseline")?.mean / horizon as f64;
    Ok((
        s.mean_per_round < baseline,
        format!("regret per round {:.4} vs worst-policy baseline {baseline:.4}", s.mean_per_round),
    ))
}
