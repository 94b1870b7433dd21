//! Experiment configuration files.
//!
//! ```toml
//! schema_version = 1
//! scenario = "stay-vs-constant"
//! kind = "hidden_bandit"
//! horizons = [100]
//! p = 0.5
//!
//! [seeds]
//! count = 1000
//! master = 7
//!
//! [player]
//! name = "always_stay"
//!
//! [adversary]
//! name = "constant"
//! v0 = 1.0
//! v1 = 0.0
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{config, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    HiddenBandit,
    Stateful,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedSpec {
    pub count: u64,
    #[serde(default)]
    pub master: u64,
}

/// Where artifacts go. Relative paths resolve against the working directory.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    /// Directory for per-round traces; written only when `reveal` is set.
    pub trace_dir: Option<PathBuf>,
}

/// Hidden-bandit player and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum PlayerSpec {
    /// Explore-then-exploit at a single scale; the horizon is the episode length.
    Alg1 { d: usize, epsilon: f64 },
    /// Scale-randomised player; both parameters default to the formulas.
    Alg2 { epsilon: Option<f64>, d: Option<usize> },
    /// Switch with probability `½·exp(−η r)`; `η` is `eta`, or
    /// `eta_log_factor · ln T` when that is given instead.
    ExpSwitch { eta: Option<f64>, eta_log_factor: Option<f64> },
    /// Hold `hold_above` rounds after a first reward `≥ threshold`, else `hold_below`.
    SemiMarkov { threshold: f64, hold_above: usize, hold_below: usize },
    AlwaysStay,
    AlwaysSwitch,
    UniformRandom,
}

impl PlayerSpec {
    pub fn eta(&self, horizon: usize) -> Result<Option<f64>> {
        match self {
            PlayerSpec::ExpSwitch { eta: Some(e), eta_log_factor: None } => Ok(Some(*e)),
            PlayerSpec::ExpSwitch { eta: None, eta_log_factor: Some(f) } => Ok(Some(f * (horizon as f64).ln())),
            PlayerSpec::ExpSwitch { .. } => Err(config("exp_switch needs exactly one of eta, eta_log_factor")),
            _ => Ok(None),
        }
    }
}

/// Reference sequence for gap-preserving adversaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReferenceSpec {
    Constant { value: f64 },
    /// Nested block structure; see `nested_reference`.
    Nested { d: usize, base: f64, amplitude: f64 },
    /// Newline-delimited values.
    File { path: PathBuf },
}

/// Hidden-bandit adversary and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum AdversarySpec {
    /// Multi-scale random walk; omitted parameters take their defaults.
    Mrw { epsilon: Option<f64>, gamma: Option<f64> },
    Constant { v0: f64, v1: f64 },
    /// Decoy exactly `delta` below the reference.
    Consistent { delta: f64, reference: ReferenceSpec },
    /// Random constant pair from dyadic classes.
    Mt,
    /// Decoy at the reference minus `offset`, floored at 0.
    MirrorDecoy { offset: f64, reference: ReferenceSpec },
}

/// Reference policies of a stateful scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicySource {
    /// The three route-choice policies.
    Commute,
    /// The three path-following policies of the lower-bound instance.
    LowerBound,
    /// A policy file.
    File(PathBuf),
}

impl PolicySource {
    fn from_name(s: &str) -> Self {
        match s {
            "commute" => Self::Commute,
            "lower_bound" => Self::LowerBound,
            path => Self::File(PathBuf::from(path)),
        }
    }
}

/// Reward table of a stateful scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum TableSpec {
    /// Routes held in their own zones with nested noise of arity `d`.
    CommuteZones {
        #[serde(default = "default_noise_arity")]
        d: usize,
    },
    /// Random walk pair embedded in the three-action instance.
    LowerBoundMrw { epsilon: Option<f64>, gamma: Option<f64> },
    /// A reward-table CSV with columns `round,a0,a1,...`.
    TableFile { path: PathBuf, lo: Option<f64>, hi: Option<f64> },
}

fn default_noise_arity() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema_version: u32,
    scenario: String,
    kind: ScenarioKind,
    horizons: Vec<usize>,
    p: Option<f64>,
    seeds: SeedSpec,
    player: PlayerSpec,
    adversary: Option<AdversarySpec>,
    policies: Option<String>,
    table: Option<TableSpec>,
    #[serde(default)]
    reveal: bool,
    #[serde(default)]
    output: OutputSpec,
}

/// What the episodes play against.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Setting {
    HiddenBandit { p: f64, adversary: AdversarySpec },
    /// The player is the hidden-bandit player wrapped by the policy reduction.
    Stateful { policies: PolicySource, table: TableSpec },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub scenario: String,
    pub horizons: Vec<usize>,
    pub seeds: u64,
    pub master_seed: u64,
    pub player: PlayerSpec,
    pub setting: Setting,
    pub reveal: bool,
    pub output: OutputSpec,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| config(e.to_string()))?;
        if raw.schema_version != SCHEMA_VERSION {
            return Err(config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                raw.schema_version
            )));
        }
        if raw.horizons.is_empty() || raw.horizons.contains(&0) {
            return Err(config("horizons must be a non-empty list of positive counts"));
        }
        if raw.seeds.count == 0 {
            return Err(config("seeds.count must be positive"));
        }
        let setting = match raw.kind {
            ScenarioKind::HiddenBandit => {
                if raw.policies.is_some() || raw.table.is_some() {
                    return Err(config("policies/table belong to stateful scenarios"));
                }
                let p = raw.p.ok_or_else(|| config("hidden_bandit scenarios need p"))?;
                let adversary = raw.adversary.ok_or_else(|| config("hidden_bandit scenarios need [adversary]"))?;
                Setting::HiddenBandit { p, adversary }
            }
            ScenarioKind::Stateful => {
                if raw.adversary.is_some() || raw.p.is_some() {
                    return Err(config("stateful scenarios take [table] and policies, not [adversary] or p"));
                }
                let policies = raw.policies.ok_or_else(|| config("stateful scenarios need policies"))?;
                let table = raw.table.ok_or_else(|| config("stateful scenarios need [table]"))?;
                Setting::Stateful { policies: PolicySource::from_name(&policies), table }
            }
        };
        Ok(Self {
            scenario: raw.scenario,
            horizons: raw.horizons,
            seeds: raw.seeds.count,
            master_seed: raw.seeds.master,
            player: raw.player,
            setting,
            reveal: raw.reveal,
            output: raw.output,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn kind(&self) -> ScenarioKind {
        match self.setting {
            Setting::HiddenBandit { .. } => ScenarioKind::HiddenBandit,
            Setting::Stateful { .. } => ScenarioKind::Stateful,
        }
    }
}
