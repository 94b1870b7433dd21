//! Synthetic reference sequences with controlled multi-scale structure.

use rand::Rng;

use crate::error::{argument, Result};
use crate::game::{RewardRange, RewardTable};

/// Values around `base` whose block means nest: every block whose length is
/// a multiple of `d` is split into `d` children whose means differ from the
/// parent's by at most `amplitude` at the top level, halving at each level
/// below. Offsets come in `(+u, −u)` pairs so every parent mean is exactly the
/// mean of its children. Blocks that cannot be split are constant.
///
/// All values stay within `base ± 2·amplitude`.
pub fn nested_reference<R: Rng + ?Sized>(
    len: usize,
    d: usize,
    base: f64,
    amplitude: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if d < 2 {
        return Err(argument(format!("d must be at least 2, got {d}")));
    }
    if !(amplitude >= 0.0) || base - 2.0 * amplitude < 0.0 || base + 2.0 * amplitude > 1.0 {
        return Err(argument(format!("base {base} ± 2·{amplitude} leaves [0, 1]")));
    }
    let mut out = vec![0.0; len];
    fill(&mut out, d, base, amplitude, rng);
    Ok(out)
}

fn fill<R: Rng + ?Sized>(out: &mut [f64], d: usize, mean: f64, amplitude: f64, rng: &mut R) {
    let len = out.len();
    if len < d || len % d != 0 {
        out.fill(mean);
        return;
    }
    let mut offsets = vec![0.0; d];
    for pair in offsets.chunks_exact_mut(2) {
        let u = if amplitude > 0.0 { rng.gen_range(-amplitude..=amplitude) } else { 0.0 };
        pair[0] = u;
        pair[1] = -u;
    }
    let child = len / d;
    for (chunk, off) in out.chunks_exact_mut(child).zip(offsets) {
        fill(chunk, d, mean + off, amplitude / 2.0, rng);
    }
}

/// Route centres and noise amplitudes of the commute-zone table. Each centre
/// sits in the reward zone that sends the commute policies back to the same
/// route, so every policy keeps its first route.
pub const COMMUTE_ZONES: [(f64, f64); 3] = [(0.5, 0.05), (0.92, 0.02), (0.25, 0.02)];

/// Three-route table for the commute policies with nested noise of arity `d`.
pub fn commute_zone_table<R: Rng + ?Sized>(rounds: usize, d: usize, rng: &mut R) -> Result<RewardTable> {
    let columns: Vec<Vec<f64>> = COMMUTE_ZONES
        .iter()
        .map(|&(c, a)| nested_reference(rounds, d, c, a, rng))
        .collect::<Result<_>>()?;
    let refs: Vec<&[f64]> = columns.iter().map(Vec::as_slice).collect();
    RewardTable::from_columns(&refs, RewardRange::UNIT)
}
