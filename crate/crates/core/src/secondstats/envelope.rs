//! Pointwise Monte Carlo envelopes under complete spatial randomness.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::{k2_index, l_function, pair_correlation, ripley_k, CurveEstimate, StatisticKind};
use crate::error::{invalid, Error, Result};
use crate::generators::gen_uniform;
use crate::pattern::PointPattern;
use crate::rng::RandomStream;

/// Statistic to envelope, with the smoothing parameters it needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SummaryStatistic {
    K,
    L,
    G { bandwidth: f64 },
    K2 { g_bandwidth: f64, k2_bandwidth: f64 },
}

impl SummaryStatistic {
    pub fn kind(&self) -> StatisticKind {
        match self {
            SummaryStatistic::K => StatisticKind::K,
            SummaryStatistic::L => StatisticKind::L,
            SummaryStatistic::G { .. } => StatisticKind::G,
            SummaryStatistic::K2 { .. } => StatisticKind::K2,
        }
    }

    /// Value of the statistic under CSR.
    pub fn theory(&self, r: f64) -> f64 {
        match self {
            SummaryStatistic::K => PI * r * r,
            SummaryStatistic::L => 0.0,
            SummaryStatistic::G { .. } => 1.0,
            SummaryStatistic::K2 { .. } => 0.0,
        }
    }
}

pub fn evaluate_statistic(
    pattern: &PointPattern,
    statistic: &SummaryStatistic,
    r_grid: &[f64],
) -> Result<CurveEstimate> {
    match *statistic {
        SummaryStatistic::K => ripley_k(pattern, r_grid),
        SummaryStatistic::L => l_function(&ripley_k(pattern, r_grid)?),
        SummaryStatistic::G { bandwidth } => pair_correlation(pattern, r_grid, bandwidth),
        SummaryStatistic::K2 { g_bandwidth, k2_bandwidth } => {
            k2_index(&pair_correlation(pattern, r_grid, g_bandwidth)?, k2_bandwidth)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeBand {
    pub r: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub theory: Vec<f64>,
    pub n_sims: usize,
    pub level: f64,
    pub kind: StatisticKind,
}

impl EnvelopeBand {
    /// Fraction of grid points where `curve` lies within the band.
    pub fn coverage(&self, curve: &CurveEstimate) -> f64 {
        let inside = self
            .r
            .iter()
            .enumerate()
            .filter(|&(i, &r)| {
                let v = curve.value_at(r);
                v >= self.lower[i] && v <= self.upper[i]
            })
            .count();
        inside as f64 / self.r.len() as f64
    }

    /// Whether `curve` lies strictly above the band at some grid point with
    /// distance at most `r_max`.
    pub fn exceeds_above(&self, curve: &CurveEstimate, r_max: f64) -> bool {
        self.r
            .iter()
            .enumerate()
            .any(|(i, &r)| r <= r_max && curve.value_at(r) > self.upper[i])
    }
}

/// Smallest simulation count supporting a pointwise two-sided `level`:
/// `2/(1 − level) − 1`.
pub fn required_sims(level: f64) -> usize {
    (2.0 / (1.0 - level) - 1.0 - 1e-9).ceil().max(1.0) as usize
}

/// Rank of the envelope order statistics: the `k`-th smallest and largest.
fn envelope_rank(n_sims: usize, level: f64) -> usize {
    ((((1.0 - level) / 2.0) * (n_sims as f64 + 1.0)) + 1e-9).floor().max(1.0) as usize
}

/// Simulates `n_sims` binomial CSR patterns with the same count and window,
/// simulation `i` drawing from `rng.derive(i)`, and returns the pointwise
/// rank envelope.
pub fn csr_envelope(
    pattern: &PointPattern,
    statistic: &SummaryStatistic,
    r_grid: &[f64],
    n_sims: usize,
    level: f64,
    rng: &RandomStream,
) -> Result<EnvelopeBand> {
    if !(level > 0.0 && level < 1.0) {
        return Err(invalid("envelope level must lie in (0, 1)"));
    }
    let required = required_sims(level);
    if n_sims < required {
        return Err(Error::InsufficientSims { n_sims, level, required });
    }
    let n = pattern.len();
    let window = *pattern.window();
    let curves = (0..n_sims)
        .into_par_iter()
        .map(|i| {
            let mut stream = rng.derive(i as u64);
            let sim = gen_uniform(&window, n, &mut stream)?;
            evaluate_statistic(&sim, statistic, r_grid)
        })
        .collect::<Result<Vec<_>>>()?;
    let r = curves[0].r.clone();
    let k = envelope_rank(n_sims, level);
    let mut lower = Vec::with_capacity(r.len());
    let mut upper = Vec::with_capacity(r.len());
    let mut column = vec![0.0; n_sims];
    for j in 0..r.len() {
        for (c, curve) in column.iter_mut().zip(&curves) {
            *c = curve.values[j];
        }
        column.sort_by(f64::total_cmp);
        lower.push(column[k - 1]);
        upper.push(column[n_sims - k]);
    }
    let theory = r.iter().map(|&x| statistic.theory(x)).collect();
    Ok(EnvelopeBand { r, lower, upper, theory, n_sims, level, kind: statistic.kind() })
}
