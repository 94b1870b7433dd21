//! Seeded experiments.
//!
//! A config names a player, an adversary or policy game, a horizon grid and a
//! seed count. Every `(T, seed)` cell draws its randomness from streams keyed
//! by the master seed, so a report depends only on the config.

pub mod analyze;
pub mod config;
pub mod report;
pub mod run;
pub mod svg;

pub use analyze::{analyze_string, analyze_values, StringAnalysis};
pub use config::{AdversarySpec, ExperimentConfig, PlayerSpec, PolicySource, ReferenceSpec, Setting, TableSpec};
pub use report::{read_cells, CellRecord, ExperimentReport, HorizonSummary, Moments, CSV_HEADER};
pub use run::{build_player, run_scenario, run_scenario_with_threads, sweep, TrendRow};
pub use svg::render_svg;

use crate::error::Result;

/// Writes the CSV, JSON and SVG outputs a config asks for.
pub fn write_outputs(cfg: &ExperimentConfig, report: &ExperimentReport) -> Result<()> {
    if let Some(path) = &cfg.output.csv {
        report.write_csv(std::fs::File::create(path)?)?;
    }
    if let Some(path) = &cfg.output.json {
        std::fs::write(path, report.to_json()? + "\n")?;
    }
    if let Some(path) = &cfg.output.svg {
        std::fs::write(path, render_svg(report))?;
    }
    Ok(())
}
