//! Three-action instance that hides a two-arm reward pair behind reactive
//! policies.
//!
//! Each round a fresh uniform permutation `σ_t` of the actions assigns path
//! `i` to action `σ_t(i)`. Path 0 carries the reference rewards and paths 1
//! and 2 the decoy rewards, each randomly rounded to `±j` where the magnitude
//! `j` encodes the action the path moves to next. The three reactive policies
//! read `|r|` and so each follow one path exactly.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::error::{argument, Error, Result};
use crate::game::{Interval, ReactivePolicy, RewardRange, RewardTable, Transition};
use crate::hidden_bandit::{Action, Arm};

/// Reward range of the instance.
pub const LB_RANGE: RewardRange = RewardRange { lo: -3.0, hi: 3.0 };

/// `±j` with `P(+j) = ½(1 + r/j)`, so that the mean is `r`.
pub fn randomized_round<R: Rng + ?Sized>(r: f64, j: u8, rng: &mut R) -> Result<f64> {
    let j = j as f64;
    if !(r.abs() <= j) {
        return Err(argument(format!("cannot round {r} to ±{j}")));
    }
    Ok(if rng.gen::<f64>() < 0.5 * (1.0 + r / j) { j } else { -j })
}

/// Action signalled by an instance reward: `floor(|r|) − 1`, extended to the
/// whole range so the intervals tile `[−3, 3]`.
pub fn lb_transitions() -> Vec<Transition> {
    vec![
        Transition { interval: Interval::closed(-3.0, -3.0), target: 2 },
        Transition { interval: Interval::open_closed(-3.0, -2.0), target: 1 },
        Transition { interval: Interval::open(-2.0, 2.0), target: 0 },
        Transition { interval: Interval::closed_open(2.0, 3.0), target: 1 },
        Transition { interval: Interval::closed(3.0, 3.0), target: 2 },
    ]
}

/// The three reactive policies, starting on actions 0, 1 and 2.
pub fn lb_policies() -> [ReactivePolicy; 3] {
    [0, 1, 2].map(|a| ReactivePolicy::new(a, 3, lb_transitions(), LB_RANGE).expect("intervals tile [-3, 3]"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LbInstance {
    /// `perms[t][i]` is the action carrying path `i` on round `t`, for
    /// `t = 0..=T` (one more than the number of rounds).
    pub perms: Vec<[u8; 3]>,
    pub table: RewardTable,
    /// The reward pair the instance was built from.
    pub reference: Vec<f64>,
    pub decoy: Vec<f64>,
}

impl LbInstance {
    pub fn rounds(&self) -> usize {
        self.table.rounds()
    }

    pub fn policies(&self) -> [ReactivePolicy; 3] {
        lb_policies()
    }

    /// Path index of `action` on round `t`.
    pub fn path_of(&self, t: usize, action: usize) -> usize {
        self.perms[t].iter().position(|&a| a as usize == action).expect("permutation")
    }

    /// Action that path `path` moves to after round `t`.
    pub fn next_on_path(&self, t: usize, path: usize) -> usize {
        self.perms[t + 1][path] as usize
    }

    /// Index of the policy that follows the reference path.
    pub fn reference_policy(&self) -> usize {
        self.perms[0][0] as usize
    }

    /// CSV with `round,sigma0,sigma1,sigma2,a0,a1,a2`; the last permutation row
    /// has no rewards.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["round", "sigma0", "sigma1", "sigma2", "a0", "a1", "a2"])?;
        for (t, perm) in self.perms.iter().enumerate() {
            let mut rec: Vec<String> = vec![t.to_string()];
            rec.extend(perm.iter().map(|a| a.to_string()));
            if t < self.rounds() {
                rec.extend(self.table.row(t).iter().map(|v| v.to_string()));
            } else {
                rec.extend(std::iter::repeat(String::new()).take(3));
            }
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Draws permutations and roundings for the pair `(reference, decoy)`.
pub fn build_lb_instance<R: Rng + ?Sized>(reference: &[f64], decoy: &[f64], rng: &mut R) -> Result<LbInstance> {
    let horizon = reference.len();
    if horizon == 0 || decoy.len() != horizon {
        return Err(argument(format!("need equal non-empty sequences, got {horizon} and {}", decoy.len())));
    }
    if let Some(v) = reference.iter().chain(decoy).find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(argument(format!("reward {v} outside [0, 1]")));
    }
    let perms: Vec<[u8; 3]> = (0..=horizon)
        .map(|_| {
            let mut p = [0u8, 1, 2];
            p.shuffle(rng);
            p
        })
        .collect();
    let mut values = Vec::with_capacity(3 * horizon);
    for t in 0..horizon {
        let mut row = [0.0; 3];
        for (path, &action) in perms[t].iter().enumerate() {
            let base = if path == 0 { reference[t] } else { decoy[t] };
            let magnitude = perms[t + 1][path] + 1;
            row[action as usize] = randomized_round(base, magnitude, rng)?;
        }
        values.extend(row);
    }
    Ok(LbInstance {
        table: RewardTable::new(3, values, LB_RANGE)?,
        perms,
        reference: reference.to_vec(),
        decoy: decoy.to_vec(),
    })
}

/// A game on an instance read as a hidden-bandit episode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HbCorrespondence {
    /// Reference when the action is on path 0.
    pub arms: Vec<Arm>,
    /// Stay when the next action follows the current path; one fewer than `arms`.
    pub actions: Vec<Action>,
    /// Stays that changed the path.
    pub stay_violations: usize,
    /// Switches from the reference that stayed on it.
    pub leave_violations: usize,
    pub decoy_switches: usize,
    /// Switches from a decoy path onto the reference path.
    pub decoy_returns: usize,
}

impl HbCorrespondence {
    pub fn is_consistent(&self) -> bool {
        self.stay_violations == 0 && self.leave_violations == 0
    }
}

/// Maps the actions a player took on `instance` to arms and stay/switch.
pub fn hb_from_lb_play(instance: &LbInstance, actions: &[usize]) -> Result<HbCorrespondence> {
    if actions.len() != instance.rounds() {
        return Err(Error::Protocol(format!(
            "trace has {} rounds, instance {}",
            actions.len(),
            instance.rounds()
        )));
    }
    if let Some(a) = actions.iter().find(|a| **a >= 3) {
        return Err(Error::Protocol(format!("action {a} outside the instance")));
    }
    let paths: Vec<usize> = actions.iter().enumerate().map(|(t, &a)| instance.path_of(t, a)).collect();
    let arms: Vec<Arm> = paths.iter().map(|&p| if p == 0 { Arm::Reference } else { Arm::Decoy }).collect();
    let mut out = HbCorrespondence {
        arms,
        actions: Vec::with_capacity(actions.len().saturating_sub(1)),
        stay_violations: 0,
        leave_violations: 0,
        decoy_switches: 0,
        decoy_returns: 0,
    };
    for t in 0..actions.len().saturating_sub(1) {
        let signalled = instance.next_on_path(t, paths[t]);
        let action = if actions[t + 1] == signalled { Action::Stay } else { Action::Switch };
        out.actions.push(action);
        match (action, out.arms[t]) {
            (Action::Stay, _) => {
                if paths[t + 1] != paths[t] {
                    out.stay_violations += 1;
                }
            }
            (Action::Switch, Arm::Reference) => {
                if out.arms[t + 1] == Arm::Reference {
                    out.leave_violations += 1;
                }
            }
            (Action::Switch, Arm::Decoy) => {
                out.decoy_switches += 1;
                if out.arms[t + 1] == Arm::Reference {
                    out.decoy_returns += 1;
                }
            }
        }
    }
    Ok(out)
}
