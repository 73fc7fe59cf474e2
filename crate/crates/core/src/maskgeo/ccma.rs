//! Curvature-corrected moving average smoothing.
//!
//! A plain moving average pulls points toward the local center of curvature. For a
//! window of `2h + 1` uniformly weighted samples spaced by angle `θ` on a circle of
//! radius `R`, the average lies at radius `R · c(θ)` with `c(θ) = Σ cos(kθ) / (2h + 1)`.
//! The averaged points therefore lie on a circle of radius `r = R · c`, with the same
//! angular spacing, so `θ` can be recovered from the averaged polyline alone and each
//! point is pushed back outward by `r (1/c − 1)`.

use super::contour::Contour;
use crate::error::{Error, Result};
use crate::geom::{cross, Point, Vec2};

fn shrink_factor(theta: f64, half: usize) -> f64 {
    let w = (2 * half + 1) as f64;
    let mut s = 1.0;
    for k in 1..=half {
        s += 2.0 * (k as f64 * theta).cos();
    }
    s / w
}

/// Signed curvature and unit normal (toward the center) of the circle through a, b, c.
fn circle_through(a: Point, b: Point, c: Point) -> Option<(f64, Vec2)> {
    let ab = b - a;
    let bc = c - b;
    let ac = c - a;
    let denom = ab.norm() * bc.norm() * ac.norm();
    if denom == 0.0 {
        return None;
    }
    let k = 2.0 * cross(ab, bc) / denom;
    if k.abs() < 1e-12 {
        return None;
    }
    // Circumcenter
    let d = 2.0 * cross(ab, ac);
    let ab2 = ab.norm_squared();
    let ac2 = ac.norm_squared();
    let ux = (ac.y * ab2 - ab.y * ac2) / d;
    let uy = (ab.x * ac2 - ac.x * ab2) / d;
    let center = a + Vec2::new(ux, uy);
    let n = center - b;
    let len = n.norm();
    if len == 0.0 {
        return None;
    }
    Some((k, n / len))
}

/// Pushes the averaged point `cur` outward, never farther than its shrinkage from `orig`.
fn correct(prev: Point, cur: Point, next: Point, orig: Point, half: usize) -> Point {
    let Some((k, normal)) = circle_through(prev, cur, next) else {
        return cur;
    };
    let r = 1.0 / k.abs();
    let chord = 0.5 * ((cur - prev).norm() + (next - cur).norm());
    let theta = 2.0 * (chord / (2.0 * r)).min(1.0).asin();
    let c = shrink_factor(theta, half);
    if c < 0.2 {
        // Window spans too much of the circle for the correction to be meaningful.
        return cur;
    }
    let push = (r / c - r).min((orig - cur).norm());
    cur - normal * push
}

fn check_window(len: usize, window: usize) -> Result<()> {
    if window < 3 || window.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("window must be odd and >= 3, got {window}")));
    }
    if len <= window {
        return Err(Error::DegenerateContour(format!(
            "{len} points cannot be smoothed with window {window}"
        )));
    }
    Ok(())
}

/// Smooths a closed point sequence with a cyclic window; output length equals input length.
pub fn smooth_closed(points: &[Point], window: usize) -> Result<Vec<Point>> {
    check_window(points.len(), window)?;
    let n = points.len();
    let half = window / 2;
    let avg: Vec<Point> = (0..n)
        .map(|i| {
            let s = (0..window).fold(Vec2::zeros(), |acc, k| acc + points[(i + n + k - half) % n].coords);
            Point::from(s / window as f64)
        })
        .collect();
    Ok((0..n)
        .map(|i| correct(avg[(i + n - 1) % n], avg[i], avg[(i + 1) % n], points[i], half))
        .collect())
}

/// Smooths an open polyline. The first and last `window / 2` points have no full window
/// and are kept as they are.
pub fn smooth_open(points: &[Point], window: usize) -> Result<Vec<Point>> {
    check_window(points.len(), window)?;
    let n = points.len();
    let half = window / 2;
    let mut avg: Vec<Point> = points.to_vec();
    for (i, slot) in avg.iter_mut().enumerate().take(n - half).skip(half) {
        let s = points[i - half..=i + half].iter().fold(Vec2::zeros(), |acc, p| acc + p.coords);
        *slot = Point::from(s / window as f64);
    }
    let mut out = avg.clone();
    for i in half + 1..n.saturating_sub(half + 1) {
        out[i] = correct(avg[i - 1], avg[i], avg[i + 1], points[i], half);
    }
    Ok(out)
}

/// Curvature-corrected smoothing of a closed contour.
pub fn smooth_ccma(contour: &Contour, window: usize) -> Result<Contour> {
    let pts = smooth_closed(contour.points(), window)?;
    Contour::new(pts)
}
