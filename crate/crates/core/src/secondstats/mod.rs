//! Second-order summary statistics with Ripley's isotropic edge correction:
//! the K function, its variance-stabilized L transform, the kernel pair
//! correlation g, its derivative (the K2 index), and the relative
//! neighbourhood density Ω.

mod edge;
mod envelope;

use std::f64::consts::PI;

pub use edge::edge_weight;
pub use envelope::{csr_envelope, evaluate_statistic, required_sims, EnvelopeBand, SummaryStatistic};

use crate::error::{invalid, Error, Result};
use crate::pattern::PointPattern;

pub const DEFAULT_R_POINTS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StatisticKind {
    K,
    L,
    G,
    K2,
    Omega,
}

impl StatisticKind {
    pub fn name(&self) -> &'static str {
        match self {
            StatisticKind::K => "K",
            StatisticKind::L => "L",
            StatisticKind::G => "g",
            StatisticKind::K2 => "K2",
            StatisticKind::Omega => "Omega",
        }
    }
}

/// A summary function sampled on an increasing distance grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveEstimate {
    pub r: Vec<f64>,
    pub values: Vec<f64>,
    pub kind: StatisticKind,
}

impl CurveEstimate {
    pub fn new(r: Vec<f64>, values: Vec<f64>, kind: StatisticKind) -> Result<Self> {
        if r.len() != values.len() {
            return Err(invalid("distance grid and values differ in length"));
        }
        validate_grid(&r)?;
        Ok(Self { r, values, kind })
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Linear interpolation; clamps to the end values outside the grid.
    pub fn value_at(&self, r: f64) -> f64 {
        let i = self.r.partition_point(|&x| x < r);
        if i == 0 {
            return self.values[0];
        }
        if i == self.r.len() {
            return self.values[self.r.len() - 1];
        }
        let (r0, r1) = (self.r[i - 1], self.r[i]);
        let t = (r - r0) / (r1 - r0);
        self.values[i - 1] + t * (self.values[i] - self.values[i - 1])
    }
}

/// `n` evenly spaced values from `start` to `end` inclusive.
pub fn linear_grid(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (end - start) / (n - 1) as f64;
            (0..n).map(|i| if i == n - 1 { end } else { start + step * i as f64 }).collect()
        }
    }
}

fn validate_grid(r: &[f64]) -> Result<()> {
    if r.is_empty() {
        return Err(invalid("distance grid is empty"));
    }
    if r.iter().any(|v| !v.is_finite()) || r[0] < 0.0 {
        return Err(invalid("distances must be finite and non-negative"));
    }
    if r.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("distance grid must be strictly increasing"));
    }
    Ok(())
}

/// Largest distance for which the edge correction is used: half the shorter
/// window side.
pub fn max_valid_distance(pattern: &PointPattern) -> f64 {
    0.5 * pattern.window().shorter_side()
}

fn check_range(pattern: &PointPattern, r: &[f64]) -> Result<()> {
    validate_grid(r)?;
    let bound = max_valid_distance(pattern);
    let r_max = r[r.len() - 1];
    if r_max > bound * (1.0 + 1e-12) {
        return Err(Error::RangeTooLarge { r: r_max, bound });
    }
    Ok(())
}

/// Unordered pairs closer than `limit`, each with the sum of its two
/// inverse edge weights `1/w(s_i, s_j) + 1/w(s_j, s_i)`, sorted by distance.
fn weighted_pairs(pattern: &PointPattern, limit: f64) -> Vec<(f64, f64)> {
    let pts = pattern.points();
    let window = pattern.window();
    let mut pairs = Vec::new();
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            let d = a.distance(b);
            if d <= limit {
                let c = 1.0 / edge_weight(window, a, d) + 1.0 / edge_weight(window, b, d);
                pairs.push((d, c));
            }
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    pairs
}

/// Edge-corrected Ripley K: `(A/n²) Σ_i Σ_{j≠i} 1(‖s_i − s_j‖ ≤ r) / w(s_i, s_j)`.
pub fn ripley_k(pattern: &PointPattern, r_grid: &[f64]) -> Result<CurveEstimate> {
    let n = pattern.len();
    if n < 2 {
        return Err(Error::EmptyPattern(n, 2));
    }
    check_range(pattern, r_grid)?;
    let pairs = weighted_pairs(pattern, r_grid[r_grid.len() - 1]);
    let scale = pattern.window().area() / (n as f64 * n as f64);
    let mut values = Vec::with_capacity(r_grid.len());
    let mut acc = 0.0;
    let mut next = 0;
    for &r in r_grid {
        while next < pairs.len() && pairs[next].0 <= r {
            acc += pairs[next].1;
            next += 1;
        }
        values.push(scale * acc);
    }
    CurveEstimate::new(r_grid.to_vec(), values, StatisticKind::K)
}

/// `L(r) = √(K(r)/π) − r`.
pub fn l_function(k: &CurveEstimate) -> Result<CurveEstimate> {
    if k.kind != StatisticKind::K {
        return Err(invalid("L is derived from a K curve"));
    }
    let values = k
        .r
        .iter()
        .zip(&k.values)
        .map(|(&r, &v)| if v < 0.0 { Err(Error::NegativeK(v)) } else { Ok((v / PI).sqrt() - r) })
        .collect::<Result<Vec<_>>>()?;
    CurveEstimate::new(k.r.clone(), values, StatisticKind::L)
}

/// Default kernel half-width for g: `0.15/√λ̂`.
pub fn default_g_bandwidth(pattern: &PointPattern) -> f64 {
    0.15 / pattern.intensity().sqrt()
}

/// Default distance grid: [`DEFAULT_R_POINTS`] points from the g bandwidth
/// to half the shorter window side.
pub fn default_r_grid(pattern: &PointPattern) -> Vec<f64> {
    linear_grid(default_g_bandwidth(pattern), max_valid_distance(pattern), DEFAULT_R_POINTS)
}

#[inline]
fn epanechnikov(u: f64, b: f64) -> f64 {
    let t = u / b;
    if t.abs() >= 1.0 {
        0.0
    } else {
        0.75 * (1.0 - t * t) / b
    }
}

/// Kernel estimate of the pair correlation function,
/// `ĝ(r) = (A / (2πr n²)) Σ_i Σ_{j≠i} κ_b(r − ‖s_i − s_j‖) / w(s_i, s_j)`
/// with `κ_b` the Epanechnikov density of half-width `b`.
pub fn pair_correlation(
    pattern: &PointPattern,
    r_grid: &[f64],
    smoothing_bandwidth: f64,
) -> Result<CurveEstimate> {
    let n = pattern.len();
    if n < 2 {
        return Err(Error::EmptyPattern(n, 2));
    }
    if !(smoothing_bandwidth > 0.0 && smoothing_bandwidth.is_finite()) {
        return Err(invalid("smoothing bandwidth must be positive"));
    }
    check_range(pattern, r_grid)?;
    if r_grid[0] < smoothing_bandwidth {
        return Err(invalid("distance grid must start at or beyond the bandwidth"));
    }
    let b = smoothing_bandwidth;
    let pairs = weighted_pairs(pattern, r_grid[r_grid.len() - 1] + b);
    let mut sums = vec![0.0; r_grid.len()];
    for &(d, c) in &pairs {
        let lo = r_grid.partition_point(|&r| r <= d - b);
        let hi = r_grid.partition_point(|&r| r < d + b);
        for (s, &r) in sums[lo..hi].iter_mut().zip(&r_grid[lo..hi]) {
            *s += c * epanechnikov(r - d, b);
        }
    }
    let area = pattern.window().area();
    let nn = n as f64 * n as f64;
    let values = r_grid.iter().zip(&sums).map(|(&r, &s)| area * s / (2.0 * PI * r * nn)).collect();
    CurveEstimate::new(r_grid.to_vec(), values, StatisticKind::G)
}

/// Default K2 window: four grid steps, i.e. five grid points on a uniform
/// grid.
pub fn default_k2_bandwidth(g: &CurveEstimate) -> f64 {
    let n = g.r.len();
    if n < 2 {
        return 0.0;
    }
    4.0 * (g.r[n - 1] - g.r[0]) / (n - 1) as f64
}

/// K2 index: the derivative of g by windowed least-squares slope.
///
/// The window covers `bandwidth` distance units centred on each grid
/// point; only grid points whose full window lies on the grid are returned.
pub fn k2_index(g: &CurveEstimate, bandwidth: f64) -> Result<CurveEstimate> {
    if g.kind != StatisticKind::G {
        return Err(invalid("K2 is derived from a pair correlation curve"));
    }
    if g.len() < 5 {
        return Err(Error::GridTooShort(g.len(), 5));
    }
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(invalid("K2 bandwidth must be positive"));
    }
    let half = 0.5 * bandwidth;
    let tol = 1e-9 * (1.0 + g.r[g.len() - 1].abs());
    let (first, last) = (g.r[0], g.r[g.len() - 1]);
    let mut r_out = Vec::new();
    let mut values = Vec::new();
    for (i, &r) in g.r.iter().enumerate() {
        if r - half < first - tol || r + half > last + tol {
            continue;
        }
        let lo = g.r.partition_point(|&x| x < r - half - tol);
        let hi = g.r.partition_point(|&x| x <= r + half + tol);
        if hi - lo < 2 {
            continue;
        }
        let xs = &g.r[lo..hi];
        let ys = &g.values[lo..hi];
        let m = xs.len() as f64;
        let x_bar = xs.iter().sum::<f64>() / m;
        let y_bar = ys.iter().sum::<f64>() / m;
        let sxx: f64 = xs.iter().map(|x| (x - x_bar).powi(2)).sum();
        let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - x_bar) * (y - y_bar)).sum();
        debug_assert!(i >= lo && i < hi);
        r_out.push(r);
        values.push(sxy / sxx);
    }
    if r_out.is_empty() {
        return Err(Error::GridTooShort(g.len(), 5));
    }
    CurveEstimate::new(r_out, values, StatisticKind::K2)
}

/// First distance at which the curve crosses `level` transversally, by
/// linear interpolation between the bracketing grid points.
pub fn crossing_scale(curve: &CurveEstimate, level: f64) -> Option<f64> {
    if curve.len() < 2 {
        return None;
    }
    let sign = |v: f64| {
        if v > level {
            1
        } else if v < level {
            -1
        } else {
            0
        }
    };
    let mut last_sign = 0;
    for i in 0..curve.len() {
        let s = sign(curve.values[i]);
        if s == 0 {
            continue;
        }
        if last_sign != 0 && s != last_sign {
            let (r0, v0) = (curve.r[i - 1], curve.values[i - 1]);
            let (r1, v1) = (curve.r[i], curve.values[i]);
            if v0 == level {
                return Some(r0);
            }
            return Some(r0 + (v0 - level) / (v0 - v1) * (r1 - r0));
        }
        last_sign = s;
    }
    None
}

/// Relative neighbourhood density `Ω = K̂(radius) / (π·radius²)`: the
/// edge-corrected neighbour density within `radius` relative to the overall
/// intensity.
pub fn relative_neighbourhood_density(pattern: &PointPattern, radius: f64) -> Result<f64> {
    if !(radius > 0.0) {
        return Err(invalid("radius must be positive"));
    }
    let k = ripley_k(pattern, &[radius])?;
    Ok(k.values[0] / (PI * radius * radius))
}
