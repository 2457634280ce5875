//! Points, rectangular windows and point patterns.

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Swaps the coordinates.
    pub fn transposed(&self) -> Point {
        Point::new(self.y, self.x)
    }
}

/// Axis-aligned rectangle `[x_min, x_max] × [y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Window {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let finite = [x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite());
        if !finite {
            return Err(invalid("window bounds must be finite"));
        }
        if !(x_min < x_max && y_min < y_max) {
            return Err(Error::DegenerateSpan);
        }
        Ok(Self { x_min, x_max, y_min, y_max })
    }

    /// `[0, width] × [0, height]`.
    pub fn with_size(width: f64, height: f64) -> Result<Self> {
        Self::new(0.0, width, 0.0, height)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn y_min(&self) -> f64 {
        self.y_min
    }

    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point {
        Point::new(0.5 * (self.x_min + self.x_max), 0.5 * (self.y_min + self.y_max))
    }

    pub fn shorter_side(&self) -> f64 {
        self.width().min(self.height())
    }

    /// Closed containment: boundary points are inside.
    pub fn contains(&self, p: &Point) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    pub fn contains_window(&self, other: &Window) -> bool {
        other.x_min >= self.x_min
            && other.x_max <= self.x_max
            && other.y_min >= self.y_min
            && other.y_max <= self.y_max
    }

    pub fn transposed(&self) -> Window {
        Window { x_min: self.y_min, x_max: self.y_max, y_min: self.x_min, y_max: self.x_max }
    }

    /// Grows the window downwards by `extra` units, keeping the top edge.
    pub fn extended_below(&self, extra: f64) -> Result<Window> {
        Window::new(self.x_min, self.x_max, self.y_min - extra, self.y_max)
    }

    /// Maps a point back into the window by periodic (toroidal) wrapping.
    pub fn wrap(&self, p: Point) -> Point {
        let x = self.x_min + (p.x - self.x_min).rem_euclid(self.width());
        let y = self.y_min + (p.y - self.y_min).rem_euclid(self.height());
        // rem_euclid may round up to the full period for tiny negative offsets
        Point::new(x.min(self.x_max), y.min(self.y_max))
    }
}

/// A finite set of points observed in a window.
#[derive(Debug, Clone, PartialEq)]
pub struct PointPattern {
    points: Vec<Point>,
    window: Window,
}

impl PointPattern {
    pub fn new(points: Vec<Point>, window: Window) -> Result<Self> {
        for p in &points {
            if !p.is_finite() {
                return Err(invalid("point coordinates must be finite"));
            }
            if !window.contains(p) {
                return Err(Error::OutOfWindow { x: p.x, y: p.y });
            }
        }
        Ok(Self { points, window })
    }

    pub fn empty(window: Window) -> Self {
        Self { points: Vec::new(), window }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Estimated intensity `n / area` over the observation window.
    pub fn intensity(&self) -> f64 {
        self.points.len() as f64 / self.window.area()
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }

    /// The same points observed through a different window.
    pub fn with_window(&self, window: Window) -> Result<Self> {
        Self::new(self.points.clone(), window)
    }

    /// Tight axis-aligned bounding box of the points.
    ///
    /// This is the default binning span: empty regions of the observation
    /// window beyond the outermost points are ignored.
    pub fn data_span(&self) -> Result<Window> {
        if self.points.len() < 2 {
            return Err(Error::EmptyPattern(self.points.len(), 2));
        }
        let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in &self.points {
            x_min = x_min.min(p.x);
            x_max = x_max.max(p.x);
            y_min = y_min.min(p.y);
            y_max = y_max.max(p.y);
        }
        if !(x_min < x_max && y_min < y_max) {
            return Err(Error::DegenerateSpan);
        }
        Window::new(x_min, x_max, y_min, y_max)
    }

    /// Swaps x and y for every point and for the window.
    pub fn transposed(&self) -> Self {
        Self {
            points: self.points.iter().map(Point::transposed).collect(),
            window: self.window.transposed(),
        }
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Result<Self> {
        let w = &self.window;
        let window = Window::new(w.x_min + dx, w.x_max + dx, w.y_min + dy, w.y_max + dy)?;
        let points = self.points.iter().map(|p| Point::new(p.x + dx, p.y + dy)).collect();
        Ok(Self { points, window })
    }

    /// Multiplies every coordinate (points and window) by `s > 0`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(invalid("scale factor must be positive"));
        }
        let w = &self.window;
        let window = Window::new(w.x_min * s, w.x_max * s, w.y_min * s, w.y_max * s)?;
        let points = self.points.iter().map(|p| Point::new(p.x * s, p.y * s)).collect();
        Ok(Self { points, window })
    }

    /// Concatenates two patterns observed in the same window.
    pub fn union(&self, other: &PointPattern) -> Result<Self> {
        if self.window != other.window {
            return Err(invalid("patterns must share a window to be merged"));
        }
        let mut points = self.points.clone();
        points.extend_from_slice(&other.points);
        Ok(Self { points, window: self.window })
    }

    pub fn xs(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.x).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.y).collect()
    }
}
