//! Ripley's isotropic edge correction for rectangular windows.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::pattern::{Point, Window};

/// Fraction of the circle of radius `r` centred at `center` that lies
/// inside `window`.
///
/// Each window side closer than `r` cuts an arc of half-angle
/// `acos(d/r)`; arcs cut by two adjacent sides overlap when the corner lies
/// inside the circle and the overlap `α + β − π/2` is counted once.
/// Exact for `r` up to half the shorter side, where at most two adjacent
/// sides can interact.
pub fn edge_weight(window: &Window, center: &Point, r: f64) -> f64 {
    if r <= 0.0 {
        return 1.0;
    }
    let d_left = (center.x - window.x_min()).max(0.0);
    let d_right = (window.x_max() - center.x).max(0.0);
    let d_bottom = (center.y - window.y_min()).max(0.0);
    let d_top = (window.y_max() - center.y).max(0.0);
    let half = |d: f64| if d >= r { 0.0 } else { (d / r).acos() };
    let (a_l, a_r, a_b, a_t) = (half(d_left), half(d_right), half(d_bottom), half(d_top));
    let mut outside = 2.0 * (a_l + a_r + a_b + a_t);
    let r2 = r * r;
    for (dx, ax) in [(d_left, a_l), (d_right, a_r)] {
        for (dy, ay) in [(d_bottom, a_b), (d_top, a_t)] {
            if dx * dx + dy * dy < r2 {
                outside -= ax + ay - FRAC_PI_2;
            }
        }
    }
    (1.0 - outside / (2.0 * PI)).clamp(0.0, 1.0)
}
