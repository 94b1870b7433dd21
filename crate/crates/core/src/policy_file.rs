//! Text format for sets of stateful policies.
//!
//! ```toml
//! range = [0.0, 1.0]
//!
//! [[policies]]
//! initial_state = 0
//!
//! [[policies.states]]
//! action = 0
//! transitions = [
//!     { interval = "[0, 1/2)", target = 0 },
//!     { interval = "[1/2, 1]", target = 1 },
//! ]
//!
//! [[policies.states]]
//! action = 1
//! transitions = [{ interval = "[0, 1]", target = 0 }]
//! ```
//!
//! Interval endpoints accept decimals or fractions, and brackets set whether
//! each end is included.

use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::game::{Interval, RewardRange, StatefulPolicy, Transition};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RowFile {
    interval: String,
    target: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    action: usize,
    transitions: Vec<RowFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolicyFile {
    initial_state: usize,
    states: Vec<StateFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolicySetFile {
    #[serde(default = "unit_range")]
    range: [f64; 2],
    policies: Vec<PolicyFile>,
}

fn unit_range() -> [f64; 2] {
    [0.0, 1.0]
}

/// Parses a policy set.
pub fn parse_policies(text: &str) -> Result<Vec<StatefulPolicy>> {
    let file: PolicySetFile = toml::from_str(text).map_err(|e| config(format!("policy file: {e}")))?;
    let range = RewardRange::new(file.range[0], file.range[1])?;
    if file.policies.is_empty() {
        return Err(config("policy file lists no policies"));
    }
    file.policies
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut actions = Vec::with_capacity(p.states.len());
            let mut transitions = Vec::with_capacity(p.states.len());
            for s in p.states {
                actions.push(s.action);
                let rows = s
                    .transitions
                    .into_iter()
                    .map(|r| Ok(Transition { interval: Interval::parse(&r.interval)?, target: r.target }))
                    .collect::<Result<Vec<_>>>()?;
                transitions.push(rows);
            }
            StatefulPolicy::new(p.initial_state, actions, transitions, range)
                .map_err(|e| config(format!("policy {i}: {e}")))
        })
        .collect()
}

/// Writes a policy set in the format [`parse_policies`] reads. Endpoints are
/// printed with full precision, so parsing the output reproduces the set.
pub fn format_policies(policies: &[StatefulPolicy]) -> Result<String> {
    let range = policies.first().map_or(RewardRange::UNIT, StatefulPolicy::range);
    let file = PolicySetFile {
        range: [range.lo, range.hi],
        policies: policies
            .iter()
            .map(|p| PolicyFile {
                initial_state: p.initial_state(),
                states: (0..p.num_states())
                    .map(|s| StateFile {
                        action: p.action(s),
                        transitions: p
                            .transitions(s)
                            .iter()
                            .map(|r| RowFile { interval: r.interval.to_string(), target: r.target })
                            .collect(),
                    })
                    .collect(),
            })
            .collect(),
    };
    toml::to_string(&file).map_err(|e| config(format!("cannot format policies: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{commute_example, reactive_to_stateful};

    #[test]
    fn parses_documented_example() {
        let text = r#"
range = [0.0, 1.0]

[[policies]]
initial_state = 0

[[policies.states]]
action = 0
transitions = [
    { interval = "[0, 1/2)", target = 0 },
    { interval = "[1/2, 1]", target = 1 },
]

[[policies.states]]
action = 1
transitions = [{ interval = "[0, 1]", target = 0 }]
"#;
        let ps = parse_policies(text).unwrap();
        assert_eq!(ps.len(), 1);
        assert_eq!(ps[0].num_states(), 2);
        assert_eq!(ps[0].next_state(0, 0.5).unwrap(), 1);
    }

    #[test]
    fn commute_set_survives_formatting() {
        let set: Vec<StatefulPolicy> = commute_example().iter().map(reactive_to_stateful).collect();
        let text = format_policies(&set).unwrap();
        assert_eq!(parse_policies(&text).unwrap(), set);
    }

    #[test]
    fn rejects_gaps_and_unknown_keys() {
        let gap = r#"
[[policies]]
initial_state = 0
[[policies.states]]
action = 0
transitions = [{ interval = "[0, 0.5)", target = 0 }]
"#;
        assert!(parse_policies(gap).is_err());
        let extra = r#"
colour = "red"
[[policies]]
initial_state = 0
[[policies.states]]
action = 0
transitions = [{ interval = "[0, 1]", target = 0 }]
"#;
        assert!(parse_policies(extra).is_err());
    }
}
