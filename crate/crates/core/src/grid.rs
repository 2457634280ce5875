//! Rectangular bin grids and the histograms built on them.
//!
//! Bins are half-open `[lo, hi)` along each axis, except the last bin which
//! also takes the upper boundary, so a grid partitions its closed span
//! exactly once.

use crate::error::{invalid, Error, Result};
use crate::pattern::{Point, PointPattern, Window};

/// Index of the bin holding `v` among `m` equal bins over `[lo, hi]`.
///
/// Caller guarantees `lo <= v <= hi`.
#[inline]
pub(crate) fn axis_bin(v: f64, lo: f64, width: f64, m: usize) -> usize {
    let t = (v - lo) / width * m as f64;
    // t >= 0 for in-span values; the cast saturates negatives to 0 anyway
    (t as usize).min(m - 1)
}

/// An `m_x × m_y` partition of a span into equal rectangular bins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinGrid {
    m_x: usize,
    m_y: usize,
    span: Window,
}

impl BinGrid {
    pub fn new(m_x: usize, m_y: usize, span: Window) -> Result<Self> {
        if m_x == 0 || m_y == 0 {
            return Err(invalid("bin counts must be positive"));
        }
        Ok(Self { m_x, m_y, span })
    }

    pub fn m_x(&self) -> usize {
        self.m_x
    }

    pub fn m_y(&self) -> usize {
        self.m_y
    }

    /// Total number of bins.
    pub fn m(&self) -> usize {
        self.m_x * self.m_y
    }

    pub fn span(&self) -> &Window {
        &self.span
    }

    /// Bin width along x.
    pub fn a_x(&self) -> f64 {
        self.span.width() / self.m_x as f64
    }

    /// Bin width along y.
    pub fn a_y(&self) -> f64 {
        self.span.height() / self.m_y as f64
    }

    pub fn bin_area(&self) -> f64 {
        self.a_x() * self.a_y()
    }

    /// Column and row `(ix, iy)` of the bin containing `p`.
    pub fn cell_of(&self, p: &Point) -> Result<(usize, usize)> {
        if !self.span.contains(p) {
            return Err(Error::OutOfSpan { x: p.x, y: p.y });
        }
        let ix = axis_bin(p.x, self.span.x_min(), self.span.width(), self.m_x);
        let iy = axis_bin(p.y, self.span.y_min(), self.span.height(), self.m_y);
        Ok((ix, iy))
    }

    /// Flat bin index `k = iy·m_x + ix`.
    pub fn bin_index(&self, p: &Point) -> Result<usize> {
        let (ix, iy) = self.cell_of(p)?;
        Ok(iy * self.m_x + ix)
    }

    /// Inverse of the flat index.
    pub fn cell(&self, k: usize) -> (usize, usize) {
        (k % self.m_x, k / self.m_x)
    }

    pub fn counts(&self, pattern: &PointPattern) -> Result<Vec<u64>> {
        let mut counts = vec![0u64; self.m()];
        for p in pattern.points() {
            counts[self.bin_index(p)?] += 1;
        }
        Ok(counts)
    }
}

/// Posterior-mean histogram on a grid, with per-bin variances.
///
/// Heights are densities per unit area of the normalized histogram; multiply
/// by the abundance to get an intensity.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalHistogram {
    pub grid: BinGrid,
    pub counts: Vec<u64>,
    pub heights_mean: Vec<f64>,
    pub heights_var: Vec<f64>,
    pub log_posterior: f64,
}

impl OptimalHistogram {
    pub fn from_counts(grid: BinGrid, counts: Vec<u64>, log_posterior: f64) -> Self {
        let m = grid.m() as f64;
        let n: u64 = counts.iter().sum();
        let n = n as f64;
        let scale = m / grid.span().area();
        let denom = n + 0.5 * m;
        let var_denom = (denom + 1.0) * denom * denom;
        let heights_mean = counts.iter().map(|&c| scale * (c as f64 + 0.5) / denom).collect();
        let heights_var = counts
            .iter()
            .map(|&c| {
                let c = c as f64;
                scale * scale * (c + 0.5) * (n - c + 0.5 * (m - 1.0)) / var_denom
            })
            .collect();
        Self { grid, counts, heights_mean, heights_var, log_posterior }
    }

    pub fn abundance(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Posterior-mean density at `p`, zero outside the span.
    pub fn density_at(&self, p: &Point) -> f64 {
        match self.grid.bin_index(p) {
            Ok(k) => self.heights_mean[k],
            Err(_) => 0.0,
        }
    }

    /// Integral of the posterior-mean density over the span.
    pub fn total_mass(&self) -> f64 {
        self.heights_mean.iter().sum::<f64>() * self.grid.bin_area()
    }
}

/// One-dimensional equal-width histogram normalized to unit mass.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram1D {
    pub m: usize,
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    pub heights: Vec<f64>,
}

impl Histogram1D {
    pub fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.m as f64
    }

    /// Raw counts over `m` bins spanning the sample range.
    pub(crate) fn count(samples: &[f64], lo: f64, hi: f64, m: usize) -> Vec<u64> {
        let width = hi - lo;
        let mut counts = vec![0u64; m];
        for &s in samples {
            counts[axis_bin(s, lo, width, m)] += 1;
        }
        counts
    }

    /// Plain empirical histogram: heights are bin mass over bin width.
    pub fn empirical(samples: &[f64], m: usize) -> Result<Self> {
        let (lo, hi) = sample_range(samples)?;
        if m == 0 {
            return Err(invalid("bin count must be positive"));
        }
        let counts = Self::count(samples, lo, hi, m);
        let n = samples.len() as f64;
        let v = (hi - lo) / m as f64;
        let heights = counts.iter().map(|&c| c as f64 / n / v).collect();
        Ok(Self { m, lo, hi, counts, heights })
    }

    /// Posterior-mean heights `(M/V)(n_k + 1/2)/(N + M/2)`.
    pub fn posterior_mean(samples: &[f64], m: usize) -> Result<Self> {
        let (lo, hi) = sample_range(samples)?;
        if m == 0 {
            return Err(invalid("bin count must be positive"));
        }
        let counts = Self::count(samples, lo, hi, m);
        let n = samples.len() as f64;
        let mf = m as f64;
        let scale = mf / (hi - lo);
        let heights = counts.iter().map(|&c| scale * (c as f64 + 0.5) / (n + 0.5 * mf)).collect();
        Ok(Self { m, lo, hi, counts, heights })
    }

    /// Histogram density at `x`, zero outside `[lo, hi]`.
    pub fn value_at(&self, x: f64) -> f64 {
        if x < self.lo || x > self.hi {
            return 0.0;
        }
        self.heights[axis_bin(x, self.lo, self.hi - self.lo, self.m)]
    }

    pub fn total_mass(&self) -> f64 {
        self.heights.iter().sum::<f64>() * self.bin_width()
    }
}

/// `(min, max)` of a sample; requires two or more finite values and a
/// positive range.
pub(crate) fn sample_range(samples: &[f64]) -> Result<(f64, f64)> {
    if samples.len() < 2 {
        return Err(Error::EmptyPattern(samples.len(), 2));
    }
    if samples.iter().any(|s| !s.is_finite()) {
        return Err(invalid("samples must be finite"));
    }
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo >= hi {
        return Err(Error::DegenerateSpan);
    }
    Ok((lo, hi))
}
