//! Two-handed trajectory extraction from a closed outline.
//!
//! Points are in a y-up frame. Both hands start at the top cutting point; the dominant
//! hand walks forward along the contour and the other hand walks backward. The hand that
//! moves is handed over whenever it passes the other hand's height, so the two paths
//! descend side by side.

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::skeleton::Side;

const Y_TIE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct HandPathPair {
    pub left: Vec<Point>,
    pub right: Vec<Point>,
    pub cut: Point,
}

fn sign(v: f64) -> i8 {
    if v > Y_TIE {
        1
    } else if v < -Y_TIE {
        -1
    } else {
        0
    }
}

/// Top point of the contour closest to the centroid in x, then followed uphill.
///
/// Returns the index into `points` and the point itself.
pub fn find_cutting_point(points: &[Point]) -> Result<(usize, Point)> {
    let n = points.len();
    if n < 3 {
        return Err(Error::DegenerateContour(format!("{n} points, need at least 3")));
    }
    let cx = points.iter().map(|p| p.x).sum::<f64>() / n as f64;
    let ymax = points.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
    let mut best = None::<(usize, f64)>;
    for (i, p) in points.iter().enumerate() {
        if p.y < ymax - Y_TIE {
            continue;
        }
        let d = (p.x - cx).abs();
        if best.is_none_or(|(_, bd)| d < bd - Y_TIE) {
            best = Some((i, d));
        }
    }
    let (mut i, _) = best.expect("non-empty");

    // Walk in the direction the local slope rises, while y keeps increasing.
    let next = |k: usize| (k + 1) % n;
    let prev = |k: usize| (k + n - 1) % n;
    let step: Option<fn(usize, usize) -> usize> = if points[next(i)].y > points[i].y + Y_TIE {
        Some(|k, n| (k + 1) % n)
    } else if points[prev(i)].y > points[i].y + Y_TIE {
        Some(|k, n| (k + n - 1) % n)
    } else {
        None
    };
    if let Some(step) = step {
        for _ in 0..n {
            let j = step(i, n);
            if points[j].y > points[i].y + Y_TIE {
                i = j;
            } else {
                break;
            }
        }
    }
    Ok((i, points[i]))
}

/// Splits a closed contour into two hand paths starting at `cut`.
///
/// Both lists start with the cut. The dominant hand consumes points forward along the
/// contour and the other hand backward, until every point is assigned. The travel
/// direction is the sign of `y` from the cut to its first forward neighbor with a
/// different height. The active hand yields to the other one after it passes the other
/// hand's last height in the travel direction. Equal heights never cause a handover.
pub fn seesaw_split(points: &[Point], cut: Point, dominant: Side) -> Result<HandPathPair> {
    let n = points.len();
    let c = points
        .iter()
        .position(|p| *p == cut)
        .ok_or_else(|| Error::InvalidArgument(format!("cutting point ({}, {}) is not on the contour", cut.x, cut.y)))?;

    let mut travel = (1..n)
        .map(|k| sign(points[(c + k) % n].y - cut.y))
        .find(|&s| s != 0)
        .unwrap_or(-1);

    let mut dominant_path = vec![cut];
    let mut other_path = vec![cut];
    // Remaining points, as offsets from the cut: forward pointer and backward pointer.
    let (mut fwd, mut bwd) = (1usize, n - 1);
    let mut dominant_active = true;
    while fwd <= bwd {
        let p = if dominant_active {
            let p = points[(c + fwd) % n];
            fwd += 1;
            p
        } else {
            let p = points[(c + bwd) % n];
            bwd -= 1;
            p
        };
        let (active, inactive) = if dominant_active {
            (&mut dominant_path, &other_path)
        } else {
            (&mut other_path, &dominant_path)
        };
        active.push(p);
        let y_last = inactive.last().expect("starts with cut").y;
        let s = sign(p.y - y_last);
        if s != 0 && s == travel {
            dominant_active = !dominant_active;
            travel = s;
        }
    }

    let (left, right) = match dominant {
        Side::Right => (other_path, dominant_path),
        Side::Left => (dominant_path, other_path),
    };
    Ok(HandPathPair { left, right, cut })
}
