//! Seeded simulators for the point processes used in the experiments:
//! homogeneous and inhomogeneous Poisson, modified Thomas, Matérn cluster,
//! sequential hard-core inhibition, and single shaped clusters.
//!
//! Cluster offspring that land outside the window are wrapped toroidally.
//! CSR and hard-core points are drawn directly inside the window.

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::pattern::{Point, PointPattern, Window};
use crate::rng::RandomStream;

pub const DEFAULT_MAX_ATTEMPTS: usize = 1_000_000;

fn uniform_in(window: &Window, rng: &mut RandomStream) -> Point {
    let x = window.x_min() + rng.random::<f64>() * window.width();
    let y = window.y_min() + rng.random::<f64>() * window.height();
    Point::new(x, y)
}

fn poisson_count(mean: f64, rng: &mut RandomStream) -> Result<usize> {
    if !(mean >= 0.0 && mean.is_finite()) {
        return Err(invalid("Poisson mean must be finite and non-negative"));
    }
    if mean == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).map_err(|e| invalid(e.to_string()))?;
    Ok(dist.sample(rng) as usize)
}

fn normal(rng: &mut RandomStream) -> f64 {
    StandardNormal.sample(rng)
}

/// Homogeneous Poisson pattern of intensity `lambda`.
pub fn gen_csr(window: &Window, lambda: f64, rng: &mut RandomStream) -> Result<PointPattern> {
    if !(lambda > 0.0) {
        return Err(invalid("intensity must be positive"));
    }
    let n = poisson_count(lambda * window.area(), rng)?;
    let points = (0..n).map(|_| uniform_in(window, rng)).collect();
    PointPattern::new(points, *window)
}

/// `n` i.i.d. uniform points (binomial process).
pub fn gen_uniform(window: &Window, n: usize, rng: &mut RandomStream) -> Result<PointPattern> {
    let points = (0..n).map(|_| uniform_in(window, rng)).collect();
    PointPattern::new(points, *window)
}

/// Inhomogeneous Poisson pattern by thinning a CSR pattern at `lambda_max`.
pub fn gen_inhomogeneous_poisson<F>(
    window: &Window,
    lambda_fn: F,
    lambda_max: f64,
    rng: &mut RandomStream,
) -> Result<PointPattern>
where
    F: Fn(&Point) -> f64,
{
    let candidates = gen_csr(window, lambda_max, rng)?;
    let mut kept = Vec::with_capacity(candidates.len());
    for p in candidates.into_points() {
        let value = lambda_fn(&p);
        if !(0.0..=lambda_max).contains(&value) {
            return Err(Error::ThinningBound { x: p.x, y: p.y, value, bound: lambda_max });
        }
        if rng.random::<f64>() * lambda_max < value {
            kept.push(p);
        }
    }
    PointPattern::new(kept, *window)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Intensity rising linearly from `low` to `high` across the window along
/// `axis`.
pub fn linear_gradient(window: Window, axis: Axis, low: f64, high: f64) -> impl Fn(&Point) -> f64 {
    move |p: &Point| {
        let t = match axis {
            Axis::X => (p.x - window.x_min()) / window.width(),
            Axis::Y => (p.y - window.y_min()) / window.height(),
        };
        low + (high - low) * t.clamp(0.0, 1.0)
    }
}

/// Poisson pattern with a linear intensity gradient along one axis.
pub fn gen_gradient_poisson(
    window: &Window,
    axis: Axis,
    low: f64,
    high: f64,
    rng: &mut RandomStream,
) -> Result<PointPattern> {
    if !(low >= 0.0 && high > 0.0) {
        return Err(invalid("gradient intensities must be non-negative with a positive maximum"));
    }
    let max = low.max(high);
    gen_inhomogeneous_poisson(window, linear_gradient(*window, axis, low, high), max, rng)
}

/// Modified Thomas process parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThomasParams {
    /// Parent intensity (parents per unit area).
    pub rho: f64,
    /// Standard deviation of the offspring displacement per coordinate.
    pub sigma: f64,
    /// Mean offspring per parent.
    pub mu: f64,
}

impl ThomasParams {
    pub fn new(rho: f64, sigma: f64, mu: f64) -> Result<Self> {
        if !(rho > 0.0 && sigma >= 0.0 && mu > 0.0) {
            return Err(invalid("need rho > 0, sigma >= 0, mu > 0"));
        }
        if !(rho.is_finite() && sigma.is_finite() && mu.is_finite()) {
            return Err(invalid("Thomas parameters must be finite"));
        }
        Ok(Self { rho, sigma, mu })
    }

    /// `⌊ρ·A + 1/2⌋`, the parent count used when the abundance is fixed.
    pub fn rounded_parents(&self, area: f64) -> usize {
        (self.rho * area + 0.5).floor() as usize
    }
}

/// How offspring totals are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThomasMode {
    /// Poisson(ρA) parents, each with Poisson(μ) offspring.
    PoissonOffspring,
    /// `⌊ρA + 1/2⌋` parents; exactly `n` offspring assigned to parents
    /// uniformly at random.
    FixedN(usize),
}

fn cluster_process<D>(
    window: &Window,
    rho: f64,
    mu: f64,
    mode: ThomasMode,
    rng: &mut RandomStream,
    mut displacement: D,
) -> Result<PointPattern>
where
    D: FnMut(&mut RandomStream) -> (f64, f64),
{
    let area = window.area();
    let mut points = Vec::new();
    match mode {
        ThomasMode::PoissonOffspring => {
            let parents = poisson_count(rho * area, rng)?;
            for _ in 0..parents {
                let parent = uniform_in(window, rng);
                let kids = poisson_count(mu, rng)?;
                for _ in 0..kids {
                    let (dx, dy) = displacement(rng);
                    points.push(window.wrap(Point::new(parent.x + dx, parent.y + dy)));
                }
            }
        }
        ThomasMode::FixedN(n) => {
            if n == 0 {
                return Err(invalid("fixed-N mode needs n >= 1"));
            }
            let parents = (rho * area + 0.5).floor() as usize;
            if parents == 0 {
                return Err(Error::NoParents);
            }
            let centers: Vec<Point> = (0..parents).map(|_| uniform_in(window, rng)).collect();
            points.reserve(n);
            for _ in 0..n {
                let parent = centers[rng.random_range(0..parents)];
                let (dx, dy) = displacement(rng);
                points.push(window.wrap(Point::new(parent.x + dx, parent.y + dy)));
            }
        }
    }
    PointPattern::new(points, *window)
}

/// Modified Thomas process: Gaussian offspring around uniform parents,
/// parents removed.
pub fn gen_thomas(
    window: &Window,
    params: &ThomasParams,
    mode: ThomasMode,
    rng: &mut RandomStream,
) -> Result<PointPattern> {
    let sigma = params.sigma;
    cluster_process(window, params.rho, params.mu, mode, rng, |rng| {
        (sigma * normal(rng), sigma * normal(rng))
    })
}

/// Matérn cluster process: offspring uniform on a disk around each parent.
pub fn gen_matern(
    window: &Window,
    rho: f64,
    disk_radius: f64,
    mu: f64,
    rng: &mut RandomStream,
) -> Result<PointPattern> {
    if !(rho > 0.0 && disk_radius > 0.0 && mu > 0.0) {
        return Err(invalid("need rho > 0, disk_radius > 0, mu > 0"));
    }
    cluster_process(window, rho, mu, ThomasMode::PoissonOffspring, rng, |rng| {
        disk_offset(disk_radius, disk_radius, rng)
    })
}

fn disk_offset(a: f64, b: f64, rng: &mut RandomStream) -> (f64, f64) {
    let r = rng.random::<f64>().sqrt();
    let theta = std::f64::consts::TAU * rng.random::<f64>();
    let (s, c) = theta.sin_cos();
    (a * r * c, b * r * s)
}

/// Simple sequential inhibition: uniform proposals closer than `radius` to
/// an accepted point are rejected.
pub fn gen_hardcore(
    window: &Window,
    n_target: usize,
    radius: f64,
    max_attempts: usize,
    rng: &mut RandomStream,
) -> Result<PointPattern> {
    if n_target == 0 {
        return Err(invalid("n_target must be at least 1"));
    }
    if !(radius >= 0.0 && radius.is_finite()) {
        return Err(invalid("hard-core radius must be non-negative"));
    }
    if radius == 0.0 {
        return gen_uniform(window, n_target, rng);
    }
    // Bucket grid with cells no smaller than the radius, so neighbours of a
    // proposal live in the surrounding 3×3 block.
    let nx = ((window.width() / radius).floor() as usize).clamp(1, 4096);
    let ny = ((window.height() / radius).floor() as usize).clamp(1, 4096);
    let cell_of = |p: &Point| {
        let cx = (((p.x - window.x_min()) / window.width() * nx as f64) as usize).min(nx - 1);
        let cy = (((p.y - window.y_min()) / window.height() * ny as f64) as usize).min(ny - 1);
        (cx, cy)
    };
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); nx * ny];
    let mut accepted: Vec<Point> = Vec::with_capacity(n_target);
    let r2 = radius * radius;
    let mut failures = 0;
    while accepted.len() < n_target {
        let p = uniform_in(window, rng);
        let (cx, cy) = cell_of(&p);
        let clash = (cy.saturating_sub(1)..=(cy + 1).min(ny - 1)).any(|j| {
            (cx.saturating_sub(1)..=(cx + 1).min(nx - 1)).any(|i| {
                buckets[j * nx + i].iter().any(|&k| {
                    let q = accepted[k];
                    let (dx, dy) = (q.x - p.x, q.y - p.y);
                    dx * dx + dy * dy < r2
                })
            })
        });
        if clash {
            failures += 1;
            if failures >= max_attempts {
                return Err(Error::PackingFailure(failures));
            }
            continue;
        }
        failures = 0;
        buckets[cy * nx + cx].push(accepted.len());
        accepted.push(p);
    }
    PointPattern::new(accepted, *window)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClusterKind {
    /// Uniform on a square (rectangle when `axis_ratio > 1`) of side `size`.
    SquareUniform,
    /// Uniform on a disk (ellipse when `axis_ratio > 1`) of radius `size`.
    DiskUniform,
    /// Bivariate Gaussian with `σ_y = size`.
    Gaussian,
}

/// A single cluster. `axis_ratio` stretches the x extent before rotation
/// (`σ_x = axis_ratio · σ_y` for the Gaussian).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterShape {
    pub kind: ClusterKind,
    pub size: f64,
    pub center: Point,
    /// Counter-clockwise, degrees in `[0, 360)`.
    pub rotation: f64,
    pub axis_ratio: f64,
}

impl ClusterShape {
    pub fn new(kind: ClusterKind, size: f64, center: Point) -> Self {
        Self { kind, size, center, rotation: 0.0, axis_ratio: 1.0 }
    }

    pub fn with_rotation(mut self, degrees: f64) -> Self {
        self.rotation = degrees;
        self
    }

    pub fn with_axis_ratio(mut self, ratio: f64) -> Self {
        self.axis_ratio = ratio;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.size > 0.0 && self.size.is_finite()) {
            return Err(invalid("cluster size must be positive"));
        }
        if !(0.0..360.0).contains(&self.rotation) {
            return Err(invalid("rotation must lie in [0, 360)"));
        }
        if !(self.axis_ratio >= 1.0 && self.axis_ratio.is_finite()) {
            return Err(invalid("axis ratio must be >= 1"));
        }
        Ok(())
    }

    /// Half-extents of the axis-aligned bounding box of the support.
    fn support_half_extents(&self) -> Option<(f64, f64)> {
        let (s, c) = self.rotation.to_radians().sin_cos();
        let (s, c) = (s.abs(), c.abs());
        match self.kind {
            ClusterKind::SquareUniform => {
                let (hx, hy) = (0.5 * self.axis_ratio * self.size, 0.5 * self.size);
                Some((hx * c + hy * s, hx * s + hy * c))
            }
            ClusterKind::DiskUniform => {
                let (a, b) = (self.axis_ratio * self.size, self.size);
                Some(((a * c).hypot(b * s), (a * s).hypot(b * c)))
            }
            ClusterKind::Gaussian => None,
        }
    }
}

fn rotate_about(p: Point, pivot: Point, sin: f64, cos: f64) -> Point {
    let (dx, dy) = (p.x - pivot.x, p.y - pivot.y);
    Point::new(pivot.x + cos * dx - sin * dy, pivot.y + sin * dx + cos * dy)
}

/// `n` points drawn from one shaped cluster. Gaussian draws falling outside
/// the window are redrawn.
pub fn gen_shaped_cluster(
    window: &Window,
    shape: &ClusterShape,
    n: usize,
    rng: &mut RandomStream,
) -> Result<PointPattern> {
    shape.validate()?;
    if !window.contains(&shape.center) {
        return Err(Error::ShapeExceedsWindow);
    }
    if let Some((hx, hy)) = shape.support_half_extents() {
        let c = shape.center;
        let bbox = Window::new(c.x - hx, c.x + hx, c.y - hy, c.y + hy)?;
        if !window.contains_window(&bbox) {
            return Err(Error::ShapeExceedsWindow);
        }
    }
    let (sin, cos) = shape.rotation.to_radians().sin_cos();
    let (sx, sy) = (shape.axis_ratio * shape.size, shape.size);
    let mut points = Vec::with_capacity(n);
    let mut attempts = 0usize;
    while points.len() < n {
        attempts += 1;
        if attempts > 1000 * n.max(1) {
            return Err(Error::ShapeExceedsWindow);
        }
        let (dx, dy) = match shape.kind {
            ClusterKind::SquareUniform => {
                (sx * (rng.random::<f64>() - 0.5), sy * (rng.random::<f64>() - 0.5))
            }
            ClusterKind::DiskUniform => disk_offset(sx, sy, rng),
            ClusterKind::Gaussian => (sx * normal(rng), sy * normal(rng)),
        };
        let c = shape.center;
        let p = rotate_about(Point::new(c.x + dx, c.y + dy), c, sin, cos);
        if window.contains(&p) {
            points.push(p);
        }
    }
    PointPattern::new(points, *window)
}

/// Rigid counter-clockwise rotation about `pivot`; the window is kept.
pub fn rotate_pattern(pattern: &PointPattern, angle_deg: f64, pivot: Point) -> Result<PointPattern> {
    let angle = angle_deg.rem_euclid(360.0);
    if angle == 0.0 {
        return Ok(pattern.clone());
    }
    let (sin, cos) = angle.to_radians().sin_cos();
    let points = pattern.points().iter().map(|&p| rotate_about(p, pivot, sin, cos)).collect();
    PointPattern::new(points, *pattern.window())
}
