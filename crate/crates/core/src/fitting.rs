//! Minimum-contrast fitting of the modified Thomas process, the species
//! selection rules built on the fit, and scalar indices derived from Knuth
//! bin sizes.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::grid::OptimalHistogram;
use crate::pattern::PointPattern;
use crate::secondstats::{linear_grid, max_valid_distance, ripley_k, CurveEstimate, StatisticKind};

pub const DEFAULT_D_MAX: f64 = 300.0;
pub const DEFAULT_FIT_STEP: f64 = 1.0;
pub const SCAN_POINTS: usize = 40;
pub const MAX_CLUSTER_DIAMETER: f64 = 500.0;
pub const MAX_CLUMP_AREA: f64 = 1e4;
pub const MIN_ABUNDANCE: usize = 20;
pub const MAX_ABUNDANCE: usize = 3000;
const MIN_FIT_POINTS: usize = 10;

/// `K(d) = πd² + (1 − exp(−d²/(4σ²)))/ρ`.
pub fn thomas_k(rho: f64, sigma: f64, d: f64) -> f64 {
    PI * d * d + (-(-d * d / (4.0 * sigma * sigma)).exp_m1()) / rho
}

pub fn theoretical_k_thomas(rho: f64, sigma: f64, r_grid: &[f64]) -> Result<CurveEstimate> {
    if !(rho > 0.0 && sigma > 0.0) {
        return Err(invalid("rho and sigma must be positive"));
    }
    let values = r_grid.iter().map(|&d| thomas_k(rho, sigma, d)).collect();
    CurveEstimate::new(r_grid.to_vec(), values, StatisticKind::K)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThomasFit {
    pub rho_hat: f64,
    pub sigma_hat: f64,
    /// Abundance over the rounded parent count.
    pub mu_hat: f64,
    pub contrast: f64,
    pub d_max: f64,
}

impl ThomasFit {
    pub fn cluster_diameter(&self) -> f64 {
        self.sigma_hat * (2.0 * PI).sqrt()
    }

    pub fn cluster_count(&self, area: f64) -> usize {
        (self.rho_hat * area + 0.5).floor() as usize
    }

    pub fn clump_area(&self) -> f64 {
        self.sigma_hat * self.sigma_hat * PI / 2.0
    }
}

/// Fits on K̂ computed from 0 to `d_max` (capped at the edge-correction
/// bound) in steps of about `grid_step`.
pub fn fit_thomas(pattern: &PointPattern, d_max: f64, grid_step: f64) -> Result<ThomasFit> {
    let n = pattern.len();
    if n < MIN_FIT_POINTS {
        return Err(Error::EmptyPattern(n, MIN_FIT_POINTS));
    }
    if !(d_max > 0.0 && grid_step > 0.0 && grid_step < d_max) {
        return Err(invalid("need 0 < grid_step < d_max"));
    }
    let d_max = d_max.min(max_valid_distance(pattern));
    let cells = (d_max / grid_step).ceil().max(2.0) as usize;
    let r = linear_grid(0.0, d_max, cells + 1);
    let k_hat = ripley_k(pattern, &r)?;
    fit_thomas_curve(&k_hat, n, pattern.window().area())
}

/// Minimum-contrast fit against an arbitrary K curve sampled from 0: a
/// 40×40 log-spaced scan over ρ ∈ [1/A, n/A] and σ ∈ [step, d_max/2]
/// followed by a simplex refinement in log coordinates.
pub fn fit_thomas_curve(k_hat: &CurveEstimate, n: usize, area: f64) -> Result<ThomasFit> {
    if k_hat.kind != StatisticKind::K || k_hat.len() < 3 {
        return Err(invalid("fit needs a K curve with at least 3 points"));
    }
    if n == 0 || !(area > 0.0) {
        return Err(invalid("abundance and area must be positive"));
    }
    if k_hat.values.iter().any(|&v| v < 0.0) {
        return Err(Error::NegativeK(k_hat.values.iter().cloned().fold(0.0, f64::min)));
    }
    let r = &k_hat.r;
    let d_max = r[r.len() - 1];
    let step = r[1] - r[0];
    let target: Vec<f64> = k_hat.values.iter().map(|v| v.powf(0.25)).collect();
    let lo = [(1.0 / area).ln(), step.ln()];
    let hi = [(n as f64 / area).ln(), (0.5 * d_max).ln()];
    if hi[0] < lo[0] || hi[1] <= lo[1] {
        return Err(invalid("empty parameter box"));
    }

    let objective = |p: &[f64; 2]| -> f64 {
        if (0..2).any(|i| p[i] < lo[i] || p[i] > hi[i]) {
            return f64::INFINITY;
        }
        contrast(r, &target, p[0].exp(), p[1].exp())
    };

    let axis = |i: usize, j: usize| lo[i] + (hi[i] - lo[i]) * j as f64 / (SCAN_POINTS - 1) as f64;
    let mut best = ([axis(0, 0), axis(1, 0)], f64::INFINITY);
    for a in 0..SCAN_POINTS {
        for b in 0..SCAN_POINTS {
            let p = [axis(0, a), axis(1, b)];
            let v = objective(&p);
            if v < best.1 {
                best = (p, v);
            }
        }
    }
    if !best.1.is_finite() {
        return Err(Error::FitDiverged("contrast is not finite on the scan grid".into()));
    }
    let cell = [
        (hi[0] - lo[0]).max(1e-6) / (SCAN_POINTS - 1) as f64,
        (hi[1] - lo[1]) / (SCAN_POINTS - 1) as f64,
    ];
    let (p, value) = nelder_mead(&objective, best.0, cell);
    if !value.is_finite() || !p.iter().all(|v| v.is_finite()) {
        return Err(Error::FitDiverged(format!("refinement ended at {p:?}")));
    }
    let (rho_hat, sigma_hat) = (p[0].exp(), p[1].exp());
    let parents = ((rho_hat * area + 0.5).floor() as usize).max(1);
    Ok(ThomasFit { rho_hat, sigma_hat, mu_hat: n as f64 / parents as f64, contrast: value, d_max })
}

/// Trapezoid integral of `(K̂^{1/4} − K^{1/4})²`.
fn contrast(r: &[f64], target: &[f64], rho: f64, sigma: f64) -> f64 {
    let sq = |i: usize| (target[i] - thomas_k(rho, sigma, r[i]).powf(0.25)).powi(2);
    let mut prev = sq(0);
    let mut total = 0.0;
    for i in 1..r.len() {
        let cur = sq(i);
        total += 0.5 * (prev + cur) * (r[i] - r[i - 1]);
        prev = cur;
    }
    total
}

fn nelder_mead<F>(f: &F, start: [f64; 2], scale: [f64; 2]) -> ([f64; 2], f64)
where
    F: Fn(&[f64; 2]) -> f64,
{
    let mut simplex = [
        start,
        [start[0] + scale[0], start[1]],
        [start[0], start[1] + scale[1]],
    ];
    // a vertex outside the box is mirrored inward
    for (v, d) in simplex.iter_mut().skip(1).zip(0..) {
        if !f(v).is_finite() {
            v[d] = start[d] - scale[d];
        }
    }
    let mut values = simplex.map(|v| f(&v));
    let lerp = |a: &[f64; 2], b: &[f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
    for _ in 0..5000 {
        let mut order = [0, 1, 2];
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        simplex = order.map(|i| simplex[i]);
        values = order.map(|i| values[i]);
        let spread = (values[2] - values[0]).abs();
        let size = (1..3)
            .map(|i| (simplex[i][0] - simplex[0][0]).abs().max((simplex[i][1] - simplex[0][1]).abs()))
            .fold(0.0, f64::max);
        if size < 1e-12 || (spread <= 1e-16 * values[0].abs().max(1e-300) && size < 1e-9) {
            break;
        }
        let centroid = lerp(&simplex[0], &simplex[1], 0.5);
        let reflected = lerp(&simplex[2], &centroid, 2.0);
        let fr = f(&reflected);
        if fr < values[0] {
            let expanded = lerp(&simplex[2], &centroid, 3.0);
            let fe = f(&expanded);
            if fe < fr {
                simplex[2] = expanded;
                values[2] = fe;
            } else {
                simplex[2] = reflected;
                values[2] = fr;
            }
            continue;
        }
        if fr < values[1] {
            simplex[2] = reflected;
            values[2] = fr;
            continue;
        }
        let (contracted, fc) = if fr < values[2] {
            let c = lerp(&centroid, &reflected, 0.5);
            (c, f(&c))
        } else {
            let c = lerp(&centroid, &simplex[2], 0.5);
            (c, f(&c))
        };
        if fc < values[2].min(fr) {
            simplex[2] = contracted;
            values[2] = fc;
            continue;
        }
        for i in 1..3 {
            simplex[i] = lerp(&simplex[0], &simplex[i], 0.5);
            values[i] = f(&simplex[i]);
        }
    }
    let best = (0..3).min_by(|&i, &j| values[i].total_cmp(&values[j])).unwrap_or(0);
    (simplex[best], values[best])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    /// `σ̂√(2π)` is not below the diameter cap.
    ClusterDiameter,
    /// The rounded cluster count is not below the abundance.
    ClusterCount,
    Both,
}

impl RejectReason {
    pub fn label(&self) -> &'static str {
        match self {
            RejectReason::ClusterDiameter => "cluster-diameter",
            RejectReason::ClusterCount => "cluster-count",
            RejectReason::Both => "cluster-diameter+cluster-count",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterOutcome {
    Accept,
    Reject(RejectReason),
}

/// Accepts a fitted species iff its mean cluster diameter is below 500
/// units and it has fewer clusters than individuals.
pub fn species_filter(fit: &ThomasFit, n: usize, area: f64) -> FilterOutcome {
    let diameter_ok = fit.cluster_diameter() < MAX_CLUSTER_DIAMETER;
    let count_ok = fit.cluster_count(area) < n;
    match (diameter_ok, count_ok) {
        (true, true) => FilterOutcome::Accept,
        (false, true) => FilterOutcome::Reject(RejectReason::ClusterDiameter),
        (true, false) => FilterOutcome::Reject(RejectReason::ClusterCount),
        (false, false) => FilterOutcome::Reject(RejectReason::Both),
    }
}

/// Optional stricter filter: clump area `σ̂²π/2` below 10⁴ square units.
pub fn clump_area_filter(fit: &ThomasFit) -> bool {
    fit.clump_area() < MAX_CLUMP_AREA
}

pub fn abundance_in_range(n: usize) -> bool {
    (MIN_ABUNDANCE..=MAX_ABUNDANCE).contains(&n)
}

/// `|a_y − a_x| / max(a_x, a_y)` for bin side lengths.
pub fn anisotropy_from_sides(a_x: f64, a_y: f64) -> f64 {
    (a_y - a_x).abs() / a_x.max(a_y)
}

pub fn anisotropy_index(hist: &OptimalHistogram) -> f64 {
    anisotropy_from_sides(hist.grid.a_x(), hist.grid.a_y())
}

/// `Δ = a_mtp − a_real`; positive when the fitted model produces coarser
/// structure than the data.
pub fn difference_index(a_mtp: f64, a_real: f64) -> Result<f64> {
    if !(a_mtp > 0.0 && a_real > 0.0) {
        return Err(invalid("bin areas must be positive"));
    }
    Ok(a_mtp - a_real)
}

/// Tail membership: `|Δ|` larger than twice the smaller of the two areas.
pub fn delta_in_tail(a_mtp: f64, a_real: f64) -> bool {
    (a_mtp - a_real).abs() > 2.0 * a_mtp.min(a_real)
}

pub fn equivalent_radius(bin_area: f64) -> f64 {
    (bin_area / PI).sqrt()
}

pub fn binning_diameter(bin_area: f64) -> f64 {
    2.0 * equivalent_radius(bin_area)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeciesIndices {
    pub bin_area: f64,
    pub equivalent_radius: f64,
    pub binning_diameter: f64,
    pub anisotropy: f64,
    pub delta: Option<f64>,
    pub omega: Option<f64>,
}

impl SpeciesIndices {
    pub fn from_histogram(hist: &OptimalHistogram) -> Self {
        let a = hist.grid.bin_area();
        Self {
            bin_area: a,
            equivalent_radius: equivalent_radius(a),
            binning_diameter: binning_diameter(a),
            anisotropy: anisotropy_index(hist),
            delta: None,
            omega: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regression {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares with `R² = 1 − SS_res/SS_tot`.
pub fn linear_regression(xs: &[f64], ys: &[f64]) -> Result<Regression> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(invalid("regression needs at least 3 paired values"));
    }
    let n = xs.len() as f64;
    let x_bar = xs.iter().sum::<f64>() / n;
    let y_bar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - x_bar).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateX);
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - x_bar) * (y - y_bar)).sum();
    let slope = sxy / sxx;
    let intercept = y_bar - slope * x_bar;
    let ss_tot: f64 = ys.iter().map(|y| (y - y_bar).powi(2)).sum();
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(Regression { slope, intercept, r_squared })
}
