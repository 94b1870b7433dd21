//! Per-seed records, per-horizon summaries and their CSV/JSON forms.
//!
//! Summaries are folded from the per-seed values in seed order, and the CSV
//! prints every float in shortest round-trip form, so reading the CSV back
//! and repeating the fold reproduces the summary bit for bit.

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ScenarioKind, SCHEMA_VERSION};
use super::run::TrendRow;
use crate::error::Result;

/// Column order of the per-seed CSV.
pub const CSV_HEADER: [&str; 9] = [
    "horizon",
    "seed",
    "regret",
    "player_reward",
    "best_reward",
    "switches",
    "occupancy",
    "baseline_regret",
    "error",
];

/// Outcome of one `(T, seed)` episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub horizon: usize,
    pub seed: u64,
    /// `None` when the cell failed.
    pub regret: Option<f64>,
    pub player_reward: f64,
    /// Reference arm total, or the best policy's total.
    pub best_reward: f64,
    pub switches: usize,
    /// Fraction of rounds on the reference arm, or playing the best policy's action.
    pub occupancy: f64,
    /// Regret of always following the worst policy (stateful runs only).
    pub baseline_regret: Option<f64>,
    pub error: Option<String>,
}

impl CellRecord {
    pub(crate) fn empty(horizon: usize, seed: u64) -> Self {
        Self {
            horizon,
            seed,
            regret: None,
            player_reward: 0.0,
            best_reward: 0.0,
            switches: 0,
            occupancy: 0.0,
            baseline_regret: None,
            error: None,
        }
    }
}

/// Mean and standard error of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation over `√n`; 0 for a single value.
    pub se: f64,
}

impl Moments {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self { n, mean: f64::NAN, se: f64::NAN };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let se = if n > 1 {
            let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
            (ss / (n - 1) as f64).sqrt() / (n as f64).sqrt()
        } else {
            0.0
        };
        Self { n, mean, se }
    }
}

/// Statistics of the successful cells at one horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonSummary {
    pub horizon: usize,
    pub failed: usize,
    pub regret: Moments,
    pub mean_per_round: f64,
    /// `mean · log₂T / T`.
    pub scaled_regret: f64,
    pub mean_switches: f64,
    pub mean_occupancy: f64,
    pub baseline: Option<Moments>,
}

impl HorizonSummary {
    pub fn from_cells<'a>(horizon: usize, cells: impl IntoIterator<Item = &'a CellRecord>) -> Self {
        let mut regrets = Vec::new();
        let mut baselines = Vec::new();
        let (mut failed, mut switches, mut occupancy) = (0, 0.0, 0.0);
        for c in cells {
            match c.regret {
                Some(r) => {
                    regrets.push(r);
                    switches += c.switches as f64;
                    occupancy += c.occupancy;
                    baselines.extend(c.baseline_regret);
                }
                None => failed += 1,
            }
        }
        let regret = Moments::of(&regrets);
        let t = horizon as f64;
        let n = regrets.len().max(1) as f64;
        Self {
            horizon,
            failed,
            regret,
            mean_per_round: regret.mean / t,
            scaled_regret: regret.mean * t.log2() / t,
            mean_switches: switches / n,
            mean_occupancy: occupancy / n,
            baseline: (!baselines.is_empty()).then(|| Moments::of(&baselines)),
        }
    }
}

/// Everything a run produces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub scenario: String,
    pub kind: ScenarioKind,
    pub master_seed: u64,
    pub seeds: u64,
    #[serde(skip)]
    pub cells: Vec<CellRecord>,
    pub summaries: Vec<HorizonSummary>,
    /// Distinct warnings from all cells, sorted.
    pub warnings: Vec<String>,
    /// Distinct cell errors, sorted.
    pub errors: Vec<String>,
    /// Wall-clock time; left out of the JSON so reports stay reproducible.
    #[serde(skip)]
    pub runtime: Duration,
}

impl ExperimentReport {
    pub(crate) fn from_cells(cfg: &ExperimentConfig, results: Vec<(CellRecord, Vec<String>)>, runtime: Duration) -> Self {
        let mut warnings = BTreeSet::new();
        let mut errors = BTreeSet::new();
        let mut cells = Vec::with_capacity(results.len());
        for (cell, w) in results {
            warnings.extend(w);
            errors.extend(cell.error.clone());
            cells.push(cell);
        }
        let summaries = summarize(&cfg.horizons, &cells);
        Self {
            schema_version: SCHEMA_VERSION,
            scenario: cfg.scenario.clone(),
            kind: cfg.kind(),
            master_seed: cfg.master_seed,
            seeds: cfg.seeds,
            cells,
            summaries,
            warnings: warnings.into_iter().collect(),
            errors: errors.into_iter().collect(),
            runtime,
        }
    }

    pub fn summary(&self, horizon: usize) -> Option<&HorizonSummary> {
        self.summaries.iter().find(|s| s.horizon == horizon)
    }

    pub fn regrets(&self, horizon: usize) -> Vec<f64> {
        self.cells.iter().filter(|c| c.horizon == horizon).filter_map(|c| c.regret).collect()
    }

    pub fn trend(&self) -> Vec<TrendRow> {
        self.summaries
            .iter()
            .map(|s| TrendRow { horizon: s.horizon, mean_regret: s.regret.mean, scaled_regret: s.scaled_regret })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_cells(w, &self.cells)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Per-horizon summaries, in the order the horizons are listed.
pub fn summarize(horizons: &[usize], cells: &[CellRecord]) -> Vec<HorizonSummary> {
    horizons
        .iter()
        .map(|&h| HorizonSummary::from_cells(h, cells.iter().filter(|c| c.horizon == h)))
        .collect()
}

pub fn write_cells<W: Write>(w: W, cells: &[CellRecord]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_HEADER)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for c in cells {
        out.write_record([
            c.horizon.to_string(),
            c.seed.to_string(),
            opt(c.regret),
            c.player_reward.to_string(),
            c.best_reward.to_string(),
            c.switches.to_string(),
            c.occupancy.to_string(),
            opt(c.baseline_regret),
            c.error.clone().unwrap_or_default(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a per-seed CSV written by [`write_cells`].
pub fn read_cells<R: Read>(r: R) -> Result<Vec<CellRecord>> {
    let mut input = csv::Reader::from_reader(r);
    input.deserialize().map(|row| Ok(row?)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_small_samples() {
        let m = Moments::of(&[1.0, 3.0]);
        assert_eq!((m.n, m.mean), (2, 2.0));
        assert!((m.se - 1.0).abs() < 1e-15);
        assert_eq!(Moments::of(&[5.0]).se, 0.0);
    }

    #[test]
    fn cells_survive_csv() {
        let mut a = CellRecord::empty(10, 0);
        a.regret = Some(0.1 + 0.2);
        a.player_reward = 1.0 / 3.0;
        let mut b = CellRecord::empty(10, 1);
        b.error = Some("bad, \"quoted\"".into());
        let mut buf = Vec::new();
        write_cells(&mut buf, &[a.clone(), b.clone()]).unwrap();
        assert_eq!(read_cells(buf.as_slice()).unwrap(), vec![a, b]);
    }
}
