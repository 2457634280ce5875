//! Knuth's Bayesian optimal binning.
//!
//! For a grid of `M = m_x·m_y` equal bins over a span of area `V`, the
//! marginal posterior of the grid given `N` points with bin counts `n_k` is,
//! up to a constant,
//!
//! ```text
//! log p(M | d) = N·log(M/V) + logΓ(M/2) − M·logΓ(1/2)
//!              + Σ_k logΓ(n_k + 1/2) − logΓ(N + M/2)
//! ```
//!
//! The optimal grid maximizes this over `1 ≤ m_x ≤ c_x`, `1 ≤ m_y ≤ c_y`.
//! Every candidate is evaluated (the surface can be multi-modal), so the
//! search costs one counting pass per candidate. The one-dimensional variant
//! uses the same expression with `V` the sample range.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::grid::{axis_bin, sample_range, BinGrid, Histogram1D, OptimalHistogram};
use crate::pattern::{PointPattern, Window};

/// `logΓ(1/2) = log(π)/2`.
pub const LN_GAMMA_HALF: f64 = 0.572_364_942_924_700_1;

/// Log-posterior values closer than this are treated as ties.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Caps on the number of bins per axis; the grid prior is uniform over
/// `[1, c_x] × [1, c_y]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KnuthSearchConfig {
    pub c_x: usize,
    pub c_y: usize,
}

impl KnuthSearchConfig {
    pub fn new(c_x: usize, c_y: usize) -> Result<Self> {
        if c_x == 0 || c_y == 0 {
            return Err(invalid("bin caps must be at least 1"));
        }
        Ok(Self { c_x, c_y })
    }
}

impl Default for KnuthSearchConfig {
    fn default() -> Self {
        Self { c_x: 50, c_y: 50 }
    }
}

/// Log-posterior of every candidate grid, sharing one additive constant.
#[derive(Debug, Clone, PartialEq)]
pub struct LogPosteriorSurface {
    c_x: usize,
    c_y: usize,
    values: Vec<f64>,
    argmax: (usize, usize),
}

impl LogPosteriorSurface {
    pub fn c_x(&self) -> usize {
        self.c_x
    }

    pub fn c_y(&self) -> usize {
        self.c_y
    }

    /// Value at grid `m_x × m_y` (1-based bin counts).
    pub fn get(&self, m_x: usize, m_y: usize) -> f64 {
        assert!((1..=self.c_x).contains(&m_x) && (1..=self.c_y).contains(&m_y));
        self.values[(m_x - 1) * self.c_y + (m_y - 1)]
    }

    pub fn argmax(&self) -> (usize, usize) {
        self.argmax
    }

    pub fn max_value(&self) -> f64 {
        self.get(self.argmax.0, self.argmax.1)
    }

    /// `(m_x, m_y, value)` triples, m_x-major.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let c_y = self.c_y;
        self.values.iter().enumerate().map(move |(i, &v)| (i / c_y + 1, i % c_y + 1, v))
    }
}

/// `logΓ(n + 1/2)` for `n = 0..=n_max`.
struct HalfGammaTable(Vec<f64>);

impl HalfGammaTable {
    fn new(n_max: usize) -> Self {
        Self((0..=n_max).map(|n| ln_gamma(n as f64 + 0.5)).collect())
    }

    #[inline]
    fn get(&self, n: u64) -> f64 {
        self.0[n as usize]
    }
}

/// Assembles the log-posterior from its data term `Σ_k logΓ(n_k + 1/2)`.
#[inline]
fn assemble(n: usize, m: usize, volume: f64, count_term: f64) -> f64 {
    let nf = n as f64;
    let mf = m as f64;
    nf * (mf / volume).ln() + ln_gamma(0.5 * mf) - mf * LN_GAMMA_HALF + count_term
        - ln_gamma(nf + 0.5 * mf)
}

/// Log-posterior of one grid, dropping only the grid-independent constant.
pub fn log_posterior(pattern: &PointPattern, grid: &BinGrid) -> Result<f64> {
    if pattern.is_empty() {
        return Err(Error::EmptyPattern(0, 1));
    }
    let counts = grid.counts(pattern)?;
    let count_term: f64 = counts.iter().map(|&c| ln_gamma(c as f64 + 0.5)).sum();
    Ok(assemble(pattern.len(), grid.m(), grid.span().area(), count_term))
}

/// Strictly better candidate under the tie rule: higher value, or within
/// tolerance and smaller `M`, then smaller `m_x`.
fn better(candidate: (usize, usize, f64), best: (usize, usize, f64)) -> bool {
    let (cx, cy, cv) = candidate;
    let (bx, by, bv) = best;
    if cv > bv + TIE_TOLERANCE {
        return true;
    }
    if cv < bv - TIE_TOLERANCE {
        return false;
    }
    (cx * cy, cx) < (bx * by, bx)
}

/// Exhaustive MAP search over all grids up to the configured caps.
///
/// The span defaults to the data bounding box; `span_override` replaces it
/// and must contain every point.
pub fn optimal_binning(
    pattern: &PointPattern,
    config: &KnuthSearchConfig,
    span_override: Option<Window>,
) -> Result<(OptimalHistogram, LogPosteriorSurface)> {
    let n = pattern.len();
    if n < 2 {
        return Err(Error::EmptyPattern(n, 2));
    }
    let span = match span_override {
        Some(w) => w,
        None => pattern.data_span()?,
    };
    if let Some(p) = pattern.points().iter().find(|p| !span.contains(p)) {
        return Err(Error::OutOfSpan { x: p.x, y: p.y });
    }
    let KnuthSearchConfig { c_x, c_y } = *config;
    let volume = span.area();
    let table = HalfGammaTable::new(n);

    let axis_indices = |coords: Vec<f64>, lo: f64, width: f64, cap: usize| -> Vec<Vec<u32>> {
        (1..=cap)
            .map(|m| coords.iter().map(|&v| axis_bin(v, lo, width, m) as u32).collect())
            .collect()
    };
    let ix = axis_indices(pattern.xs(), span.x_min(), span.width(), c_x);
    let iy = axis_indices(pattern.ys(), span.y_min(), span.height(), c_y);

    let rows: Vec<Vec<f64>> = (1..=c_x)
        .into_par_iter()
        .map(|m_x| {
            let xs = &ix[m_x - 1];
            let mut counts = vec![0u64; m_x * c_y];
            (1..=c_y)
                .map(|m_y| {
                    let m = m_x * m_y;
                    let buf = &mut counts[..m];
                    buf.fill(0);
                    for (&bx, &by) in xs.iter().zip(&iy[m_y - 1]) {
                        buf[by as usize * m_x + bx as usize] += 1;
                    }
                    let count_term: f64 = buf.iter().map(|&c| table.get(c)).sum();
                    assemble(n, m, volume, count_term)
                })
                .collect()
        })
        .collect();
    let values: Vec<f64> = rows.into_iter().flatten().collect();

    let mut best = (1, 1, values[0]);
    for m_x in 1..=c_x {
        for m_y in 1..=c_y {
            let cand = (m_x, m_y, values[(m_x - 1) * c_y + (m_y - 1)]);
            if better(cand, best) {
                best = cand;
            }
        }
    }
    let surface = LogPosteriorSurface { c_x, c_y, values, argmax: (best.0, best.1) };
    let grid = BinGrid::new(best.0, best.1, span)?;
    let hist = OptimalHistogram::from_counts(grid, grid.counts(pattern)?, best.2);
    Ok((hist, surface))
}

/// Result of the one-dimensional search.
#[derive(Debug, Clone, PartialEq)]
pub struct Knuth1D {
    pub histogram: Histogram1D,
    pub m_hat: usize,
    /// `log_posterior[m - 1]` is the value for `m` bins.
    pub log_posterior: Vec<f64>,
}

/// Log-posterior of `m` equal bins over the sample range.
pub fn log_posterior_1d(samples: &[f64], m: usize) -> Result<f64> {
    let (lo, hi) = sample_range(samples)?;
    if m == 0 {
        return Err(invalid("bin count must be positive"));
    }
    let counts = Histogram1D::count(samples, lo, hi, m);
    let count_term: f64 = counts.iter().map(|&c| ln_gamma(c as f64 + 0.5)).sum();
    Ok(assemble(samples.len(), m, hi - lo, count_term))
}

pub fn optimal_binning_1d(samples: &[f64], c: usize) -> Result<Knuth1D> {
    let (lo, hi) = sample_range(samples)?;
    if c == 0 {
        return Err(invalid("bin cap must be at least 1"));
    }
    let n = samples.len();
    let table = HalfGammaTable::new(n);
    let curve: Vec<f64> = (1..=c)
        .into_par_iter()
        .map(|m| {
            let counts = Histogram1D::count(samples, lo, hi, m);
            let count_term: f64 = counts.iter().map(|&k| table.get(k)).sum();
            assemble(n, m, hi - lo, count_term)
        })
        .collect();
    let mut m_hat = 1;
    for (i, &v) in curve.iter().enumerate() {
        if v > curve[m_hat - 1] + TIE_TOLERANCE {
            m_hat = i + 1;
        }
    }
    Ok(Knuth1D {
        histogram: Histogram1D::posterior_mean(samples, m_hat)?,
        m_hat,
        log_posterior: curve,
    })
}
