//! Stone's cross-validation bin-count rule, and histogram-to-density
//! distances used to compare it with Knuth's rule.
//!
//! The origin is pinned at the sample minimum and only the number of bins
//! varies, so the rule is a one-dimensional search like the Knuth one.

use crate::error::{invalid, Error, Result};
use crate::grid::{sample_range, Histogram1D};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoneScore {
    pub m: usize,
    /// `(2/N − Σ π_k²) / v`, with `v` the bin width and `π_k` bin masses.
    pub k_value: f64,
}

/// Minimizes Stone's criterion over `m ∈ [1, c]`; ties go to the smaller `m`.
pub fn stone_optimal_bins(samples: &[f64], c: usize) -> Result<(usize, Vec<StoneScore>)> {
    let (lo, hi) = sample_range(samples)?;
    if c == 0 {
        return Err(invalid("bin cap must be at least 1"));
    }
    let n = samples.len() as f64;
    let scores: Vec<StoneScore> = (1..=c)
        .map(|m| {
            let v = (hi - lo) / m as f64;
            let sum_sq: f64 = Histogram1D::count(samples, lo, hi, m)
                .iter()
                .map(|&k| {
                    let pi = k as f64 / n;
                    pi * pi
                })
                .sum();
            StoneScore { m, k_value: (2.0 / n - sum_sq) / v }
        })
        .collect();
    let best = scores
        .iter()
        .fold(scores[0], |best, s| if s.k_value < best.k_value { *s } else { best });
    Ok((best.m, scores))
}

/// `(∫ |h(x) − p(x)|^p dx)^(1/p)` over the histogram span by the midpoint
/// rule. The step is shrunk so it divides the span evenly.
pub fn histogram_density_distance<F>(
    hist: &Histogram1D,
    true_pdf: F,
    p: u32,
    quadrature_step: f64,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if p != 1 && p != 2 {
        return Err(invalid("distance order must be 1 or 2"));
    }
    if !(quadrature_step > 0.0) {
        return Err(invalid("quadrature step must be positive"));
    }
    let mass = hist.total_mass();
    if (mass - 1.0).abs() > 1e-6 {
        return Err(Error::BadNorm(mass));
    }
    let width = hist.hi - hist.lo;
    let cells = (width / quadrature_step).ceil().max(1.0) as usize;
    let h = width / cells as f64;
    let total: f64 = (0..cells)
        .map(|i| {
            let x = hist.lo + (i as f64 + 0.5) * h;
            (hist.value_at(x) - true_pdf(x)).abs().powi(p as i32)
        })
        .sum::<f64>()
        * h;
    Ok(total.powf(1.0 / p as f64))
}
