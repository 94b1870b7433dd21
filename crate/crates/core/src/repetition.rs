//! Locally repetitive strings.
//!
//! A string over `[0, 1]` of length `d^k` is viewed as a complete `d`-ary tree
//! of aligned blocks. Level 0 is the whole string and level `k` holds the
//! single characters. Block averages are computed bottom-up, each parent from
//! its `d` children, which amounts to tree summation and keeps rounding error
//! far below [`TOLERANCE`] at any practical length.

use rand::Rng;
use serde::Serialize;

use crate::error::{argument, Error, Result};

/// Slack used when comparing averages that are mathematically equal.
pub const TOLERANCE: f64 = 1e-12;

/// Default constant in the depth of [`adversarial_string`].
pub const DEFAULT_DEPTH_CONSTANT: f64 = 0.125;

/// Longest string [`adversarial_string`] will materialise.
pub const MAX_CONSTRUCTION_LEN: usize = 1 << 26;

/// A finite sequence of values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueString(Vec<f64>);

impl ValueString {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(argument(format!("value {v} at index {i} is outside [0, 1]")));
        }
        Ok(Self(values))
    }

    /// Reads one decimal per line. Blank lines are skipped.
    pub fn parse_lines(text: &str) -> Result<Self> {
        let mut values = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let v: f64 = line.parse().map_err(|_| Error::Parse {
                line: i + 1,
                message: format!("not a number: {line:?}"),
            })?;
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Parse { line: i + 1, message: format!("value {v} outside [0, 1]") });
            }
            values.push(v);
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mean(&self) -> f64 {
        pairwise_mean(&self.0)
    }
}

/// A contiguous window of a string. `level` is the depth in the block tree the
/// window was drawn from (0 = the whole piece).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BlockView {
    pub start: usize,
    pub length: usize,
    pub level: u32,
}

impl BlockView {
    pub fn whole(s: &ValueString) -> Self {
        Self { start: 0, length: s.len(), level: 0 }
    }

    fn slice<'a>(&self, s: &'a ValueString) -> Result<&'a [f64]> {
        let end = self.start.checked_add(self.length);
        match end {
            Some(end) if self.length > 0 && end <= s.len() => Ok(&s.0[self.start..end]),
            _ => Err(argument(format!(
                "view [{}, {}+{}) outside string of length {}",
                self.start,
                self.start,
                self.length,
                s.len()
            ))),
        }
    }
}

fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        xs.iter().sum()
    } else {
        let (a, b) = xs.split_at(xs.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

fn pairwise_mean(xs: &[f64]) -> f64 {
    pairwise_sum(xs) / xs.len() as f64
}

/// Mean of the values covered by `view`.
pub fn block_average(s: &ValueString, view: BlockView) -> Result<f64> {
    Ok(pairwise_mean(view.slice(s)?))
}

/// Whether each of the `d` equal sub-blocks of `view` has average within
/// `epsilon` of the average of `view`.
pub fn is_repetitive(s: &ValueString, view: BlockView, d: usize, epsilon: f64) -> Result<bool> {
    let xs = view.slice(s)?;
    if d == 0 || xs.len() % d != 0 {
        return Err(argument(format!("view length {} not divisible by d = {d}", xs.len())));
    }
    let whole = pairwise_mean(xs);
    Ok(xs
        .chunks_exact(xs.len() / d)
        .all(|c| (pairwise_mean(c) - whole).abs() <= epsilon + TOLERANCE))
}

/// `Some(k)` when `n == d^k`.
pub fn exact_log(n: usize, d: usize) -> Option<u32> {
    if d < 2 || n == 0 {
        return None;
    }
    let (mut m, mut k) = (n, 0);
    while m % d == 0 {
        m /= d;
        k += 1;
    }
    (m == 1).then_some(k)
}

fn check_arity(d: usize) -> Result<()> {
    if d < 2 {
        return Err(argument(format!("d must be at least 2, got {d}")));
    }
    Ok(())
}

/// Block averages of a string of length `d^k`, one vector per level.
#[derive(Debug, Clone)]
pub struct Pyramid {
    d: usize,
    levels: Vec<Vec<f64>>,
}

impl Pyramid {
    pub fn new(values: &[f64], d: usize) -> Result<Self> {
        check_arity(d)?;
        let k = exact_log(values.len(), d)
            .ok_or_else(|| argument(format!("length {} is not a power of {d}", values.len())))?;
        let mut levels = vec![values.to_vec()];
        for _ in 0..k {
            let below = levels.last().expect("non-empty");
            let above: Vec<f64> = below.chunks_exact(d).map(|c| c.iter().sum::<f64>() / d as f64).collect();
            levels.push(above);
        }
        levels.reverse();
        Ok(Self { d, levels })
    }

    /// Number of splitting levels `k`; there are `k + 1` levels of averages.
    pub fn depth(&self) -> u32 {
        (self.levels.len() - 1) as u32
    }

    pub fn arity(&self) -> usize {
        self.d
    }

    /// Averages of the `d^level` aligned blocks at `level`.
    pub fn level(&self, level: u32) -> &[f64] {
        &self.levels[level as usize]
    }

    /// Whether block `index` at `level < depth` is repetitive.
    pub fn block_is_repetitive(&self, level: u32, index: usize, epsilon: f64) -> bool {
        let x = self.levels[level as usize][index];
        self.levels[level as usize + 1][index * self.d..(index + 1) * self.d]
            .iter()
            .all(|c| (c - x).abs() <= epsilon + TOLERANCE)
    }

    /// Fraction of blocks at each level `0..depth` that are not repetitive.
    pub fn nonrepetitive_fractions(&self, epsilon: f64) -> Vec<f64> {
        (0..self.depth())
            .map(|l| {
                let n = self.levels[l as usize].len();
                let bad = (0..n).filter(|&j| !self.block_is_repetitive(l, j, epsilon)).count();
                bad as f64 / n as f64
            })
            .collect()
    }
}

/// A maximal power-of-`d` piece of a string, with its sampling weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplingPiece {
    pub start: usize,
    pub length: usize,
    pub depth: u32,
    pub weight: f64,
}

/// Splits a string of length `n ≥ d` into the pieces d-sampling draws from.
///
/// The first piece is the longest power-of-`d` prefix, and the rest is split
/// the same way until fewer than `d` characters remain; that fragment is
/// dropped. Piece weights are proportional to length and sum to 1 over the
/// retained prefix.
pub fn sampling_pieces(n: usize, d: usize) -> Result<Vec<SamplingPiece>> {
    check_arity(d)?;
    if n < d {
        return Err(argument(format!("string of length {n} is shorter than d = {d}")));
    }
    let mut pieces = Vec::new();
    let mut start = 0;
    while n - start >= d {
        let rest = n - start;
        let (mut length, mut depth) = (d, 1);
        while let Some(next) = length.checked_mul(d).filter(|&l| l <= rest) {
            length = next;
            depth += 1;
        }
        pieces.push(SamplingPiece { start, length, depth, weight: 0.0 });
        start += length;
    }
    let kept = start as f64;
    for p in &mut pieces {
        p.weight = p.length as f64 / kept;
    }
    Ok(pieces)
}

/// Draws an aligned block by d-sampling. The returned `level` is relative to
/// the piece the block came from.
pub fn d_sample<R: Rng + ?Sized>(s: &ValueString, d: usize, rng: &mut R) -> Result<BlockView> {
    let pieces = sampling_pieces(s.len(), d)?;
    let kept: usize = pieces.iter().map(|p| p.length).sum();
    let mut pick = rng.gen_range(0..kept);
    let piece = pieces
        .iter()
        .find(|p| {
            if pick < p.length {
                true
            } else {
                pick -= p.length;
                false
            }
        })
        .expect("pick < kept");
    let level = rng.gen_range(0..piece.depth);
    let length = piece.length / d.pow(level);
    let index = rng.gen_range(0..d.pow(level));
    Ok(BlockView { start: piece.start + index * length, length, level })
}

/// Per-piece non-repetitive fractions and the overall failure probability.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepetitionProfile {
    pub pieces: Vec<SamplingPiece>,
    /// For each piece, the fraction of non-repetitive blocks at each level.
    pub nonrepetitive_by_level: Vec<Vec<f64>>,
    /// Probability that a d-sampled block is not repetitive.
    pub deficiency: f64,
}

/// Exact d-sampling statistics by enumerating every aligned block.
pub fn repetition_profile(s: &ValueString, d: usize, epsilon: f64) -> Result<RepetitionProfile> {
    let pieces = sampling_pieces(s.len(), d)?;
    let mut nonrepetitive_by_level = Vec::with_capacity(pieces.len());
    let mut deficiency = 0.0;
    for p in &pieces {
        let pyramid = Pyramid::new(&s.0[p.start..p.start + p.length], d)?;
        let fractions = pyramid.nonrepetitive_fractions(epsilon);
        deficiency += p.weight * fractions.iter().sum::<f64>() / fractions.len() as f64;
        nonrepetitive_by_level.push(fractions);
    }
    Ok(RepetitionProfile { pieces, nonrepetitive_by_level, deficiency })
}

/// Probability that a d-sampled block of `s` is not `(d, epsilon)`-repetitive.
pub fn repetitive_deficiency(s: &ValueString, d: usize, epsilon: f64) -> Result<f64> {
    Ok(repetition_profile(s, d, epsilon)?.deficiency)
}

/// Mean squared block average at every level `0..=k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariabilitySpectrum(pub Vec<f64>);

impl VariabilitySpectrum {
    pub fn levels(&self) -> &[f64] {
        &self.0
    }

    /// `V_k − V_0`.
    pub fn spread(&self) -> f64 {
        self.0[self.0.len() - 1] - self.0[0]
    }

    pub fn is_monotone(&self) -> bool {
        self.0.windows(2).all(|w| w[0] <= w[1] + TOLERANCE)
    }
}

pub fn variability(s: &ValueString, d: usize) -> Result<VariabilitySpectrum> {
    Ok(variability_of(&Pyramid::new(&s.0, d)?))
}

pub fn variability_of(pyramid: &Pyramid) -> VariabilitySpectrum {
    VariabilitySpectrum(
        (0..=pyramid.depth())
            .map(|l| {
                let xs = pyramid.level(l);
                xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64
            })
            .collect(),
    )
}

/// Parameters of the string that defeats local repetition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdversarialSpec {
    pub d: usize,
    pub epsilon: f64,
    pub delta: f64,
    /// Constant multiplying `d/η²` in the number of "active" top levels.
    pub depth_constant: f64,
    /// Fixes the depth instead of deriving it from `delta`.
    pub depth: Option<u32>,
}

impl AdversarialSpec {
    pub fn new(d: usize, epsilon: f64, delta: f64) -> Self {
        Self { d, epsilon, delta, depth_constant: DEFAULT_DEPTH_CONSTANT, depth: None }
    }

    fn validate(&self) -> Result<()> {
        check_arity(self.d)?;
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(argument(format!("epsilon {} outside (0, 1/2)", self.epsilon)));
        }
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return Err(argument(format!("delta {} outside (0, 1/2)", self.delta)));
        }
        if !(self.depth_constant > 0.0 && self.depth_constant.is_finite()) {
            return Err(argument("depth constant must be positive"));
        }
        Ok(())
    }

    /// Number of grid steps between 0 and ½: the largest `m` with `2mε < 1`.
    pub fn half_steps(&self) -> u64 {
        let mut m = (0.5 / self.epsilon).floor() as u64;
        while m > 1 && 2.0 * m as f64 * self.epsilon >= 1.0 {
            m -= 1;
        }
        while 2.0 * (m + 1) as f64 * self.epsilon < 1.0 {
            m += 1;
        }
        m.max(1)
    }

    /// Step size `η = 1/(2m)`: the smallest value above ε whose reciprocal
    /// doubled is an integer.
    pub fn eta(&self) -> f64 {
        1.0 / (2 * self.half_steps()) as f64
    }

    /// `ceil(c·d/η² / (2δ))` unless overridden.
    pub fn resolved_depth(&self) -> u32 {
        if let Some(k) = self.depth {
            return k;
        }
        let eta = self.eta();
        let active = self.depth_constant * self.d as f64 / (eta * eta);
        let k = (active / (2.0 * self.delta) - 1e-9).ceil();
        k.max(1.0) as u32
    }
}

/// Builds the string for `spec` top-down.
///
/// The root average is ½. Every block whose average is strictly between 0 and 1
/// gives `+η` to its first child and `−η` to its second, and its own average to
/// the rest; blocks at 0 or 1 pass their value to every child.
pub fn adversarial_string_with(spec: &AdversarialSpec) -> Result<ValueString> {
    spec.validate()?;
    let k = spec.resolved_depth();
    let len = spec
        .d
        .checked_pow(k)
        .filter(|&n| n <= MAX_CONSTRUCTION_LEN)
        .ok_or_else(|| argument(format!("{}^{k} characters exceeds the construction limit", spec.d)))?;
    let top = 2 * spec.half_steps() as i64;
    // averages live on the grid j·η, j ∈ 0..=top
    let mut level = vec![top / 2];
    for _ in 0..k {
        let mut next = Vec::with_capacity(level.len() * spec.d);
        for &j in &level {
            if j == 0 || j == top {
                next.extend(std::iter::repeat(j).take(spec.d));
            } else {
                next.push(j + 1);
                next.push(j - 1);
                next.extend(std::iter::repeat(j).take(spec.d - 2));
            }
        }
        level = next;
    }
    debug_assert_eq!(level.len(), len);
    ValueString::new(level.into_iter().map(|j| j as f64 / top as f64).collect())
}

/// [`adversarial_string_with`] at the default depth constant.
pub fn adversarial_string(d: usize, epsilon: f64, delta: f64) -> Result<ValueString> {
    adversarial_string_with(&AdversarialSpec::new(d, epsilon, delta))
}

/// Total number of ε-upcrossings of `path`, summed over the bands
/// `[mε, (m+1)ε]`. An upcrossing of a band starts at a value `≤ mε` and ends at
/// the next value `≥ (m+1)ε`.
pub fn epsilon_upcrossings(path: &[f64], epsilon: f64) -> Result<usize> {
    let bands = (1.0 / epsilon).round();
    if !(epsilon > 0.0) || bands < 1.0 || ((1.0 / epsilon) - bands).abs() > 1e-9 {
        return Err(argument(format!("1/epsilon must be a positive integer, got epsilon = {epsilon}")));
    }
    let mut total = 0;
    for m in 0..bands as usize {
        let lo = m as f64 / bands;
        let hi = (m + 1) as f64 / bands;
        let mut below = false;
        for &x in path {
            if !below && x <= lo + TOLERANCE {
                below = true;
            } else if below && x >= hi - TOLERANCE {
                below = false;
                total += 1;
            }
        }
    }
    Ok(total)
}

/// Averages seen on a uniformly random walk from the whole string down to a
/// single character; `k + 1` values for a string of length `d^k`.
pub fn martingale_path<R: Rng + ?Sized>(s: &ValueString, d: usize, rng: &mut R) -> Result<Vec<f64>> {
    Ok(martingale_path_in(&Pyramid::new(&s.0, d)?, rng))
}

/// [`martingale_path`] on a precomputed pyramid.
pub fn martingale_path_in<R: Rng + ?Sized>(pyramid: &Pyramid, rng: &mut R) -> Vec<f64> {
    let mut index = 0;
    let mut path = vec![pyramid.level(0)[0]];
    for l in 1..=pyramid.depth() {
        index = index * pyramid.arity() + rng.gen_range(0..pyramid.arity());
        path.push(pyramid.level(l)[index]);
    }
    path
}
