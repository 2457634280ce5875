//! Epanechnikov kernel intensity on a raster, and the matching raster of a
//! Knuth posterior-mean histogram for side-by-side comparison.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::grid::OptimalHistogram;
use crate::pattern::{Point, PointPattern, Window};

pub const DEFAULT_RASTER_NX: usize = 256;
pub const DEFAULT_RASTER_NY: usize = 128;
pub const BANDWIDTH_FACTOR: f64 = 4.5;

/// Intensity sampled at raster cell centres, row-major with `y` rows.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityRaster {
    pub window: Window,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
}

impl IntensityRaster {
    pub fn cell_width(&self) -> f64 {
        self.window.width() / self.nx as f64
    }

    pub fn cell_height(&self) -> f64 {
        self.window.height() / self.ny as f64
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> Point {
        Point::new(
            self.window.x_min() + (ix as f64 + 0.5) * self.cell_width(),
            self.window.y_min() + (iy as f64 + 0.5) * self.cell_height(),
        )
    }

    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.nx + ix]
    }

    /// Riemann sum of the raster: expected number of points.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_width() * self.cell_height()
    }

    /// Standard deviation over mean of the cell values; zero for a flat
    /// raster.
    pub fn coefficient_of_variation(&self) -> f64 {
        let n = self.values.len() as f64;
        let mean = self.values.iter().sum::<f64>() / n;
        if mean == 0.0 {
            return 0.0;
        }
        let var = self.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        var.sqrt() / mean
    }

    fn from_fn<F>(window: Window, nx: usize, ny: usize, f: F) -> Result<Self>
    where
        F: Fn(Point) -> f64 + Sync,
    {
        if nx < 2 || ny < 2 {
            return Err(invalid("raster needs at least 2 cells per axis"));
        }
        let mut raster = Self { window, nx, ny, values: vec![0.0; nx * ny] };
        let (cw, ch) = (raster.cell_width(), raster.cell_height());
        raster.values.par_chunks_mut(nx).enumerate().for_each(|(iy, row)| {
            let y = window.y_min() + (iy as f64 + 0.5) * ch;
            for (ix, v) in row.iter_mut().enumerate() {
                *v = f(Point::new(window.x_min() + (ix as f64 + 0.5) * cw, y));
            }
        });
        Ok(raster)
    }
}

/// `λ̂(x) = (1/πR²) Σ_i 2(1 − d_i²/R²)` over points within `R` of `x`.
/// No edge correction.
pub fn epanechnikov_intensity(
    pattern: &PointPattern,
    bandwidth: f64,
    nx: usize,
    ny: usize,
) -> Result<IntensityRaster> {
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(invalid("kernel bandwidth must be positive"));
    }
    let r2 = bandwidth * bandwidth;
    let norm = 1.0 / (PI * r2);
    let mut pts = pattern.points().to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x));
    IntensityRaster::from_fn(*pattern.window(), nx, ny, |c| {
        let lo = pts.partition_point(|p| p.x < c.x - bandwidth);
        let mut acc = 0.0;
        for p in pts[lo..].iter().take_while(|p| p.x <= c.x + bandwidth) {
            let d2 = (p.x - c.x).powi(2) + (p.y - c.y).powi(2);
            if d2 <= r2 {
                acc += 2.0 * (1.0 - d2 / r2);
            }
        }
        norm * acc
    })
}

/// `R = 4.5/√(n/A)`.
pub fn default_bandwidth(pattern: &PointPattern) -> Result<f64> {
    if pattern.is_empty() {
        return Err(Error::EmptyPattern(0, 1));
    }
    Ok(BANDWIDTH_FACTOR / pattern.intensity().sqrt())
}

/// Posterior-mean histogram intensity (abundance times density) sampled on
/// the same raster layout; zero outside the histogram span.
pub fn histogram_intensity(
    hist: &OptimalHistogram,
    window: Window,
    nx: usize,
    ny: usize,
) -> Result<IntensityRaster> {
    let n = hist.abundance() as f64;
    IntensityRaster::from_fn(window, nx, ny, |c| n * hist.density_at(&c))
}
