//! Repetition statistics of a string read from a file.

use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::repetition::{exact_log, repetition_profile, variability, SamplingPiece, ValueString};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PieceReport {
    #[serde(flatten)]
    pub piece: SamplingPiece,
    /// Fraction of `(d, ε)`-repetitive blocks at each level of this piece.
    pub repetitive_by_level: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StringAnalysis {
    pub length: usize,
    pub d: usize,
    pub epsilon: f64,
    pub mean: f64,
    /// Probability that a d-sampled block is not repetitive.
    pub deficiency: f64,
    pub pieces: Vec<PieceReport>,
    /// `V_0..=V_k`; present when the length is a power of `d`.
    pub variability: Option<Vec<f64>>,
}

pub fn analyze_values(s: &ValueString, d: usize, epsilon: f64) -> Result<StringAnalysis> {
    let profile = repetition_profile(s, d, epsilon)?;
    let pieces = profile
        .pieces
        .iter()
        .zip(&profile.nonrepetitive_by_level)
        .map(|(p, bad)| PieceReport { piece: *p, repetitive_by_level: bad.iter().map(|f| 1.0 - f).collect() })
        .collect();
    let variability = match exact_log(s.len(), d) {
        Some(_) => Some(variability(s, d)?.0),
        None => None,
    };
    Ok(StringAnalysis {
        length: s.len(),
        d,
        epsilon,
        mean: s.mean(),
        deficiency: profile.deficiency,
        pieces,
        variability,
    })
}

/// Reads newline-delimited values in `[0, 1]` and analyses them.
pub fn analyze_string(path: &Path, d: usize, epsilon: f64) -> Result<StringAnalysis> {
    let text = std::fs::read_to_string(path)?;
    analyze_values(&ValueString::parse_lines(&text)?, d, epsilon)
}
