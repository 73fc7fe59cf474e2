//! Ramer–Douglas–Peucker simplification for open polylines and closed contours.

use super::contour::Contour;
use crate::geom::{point_segment_distance, Point};

fn rdp_mark(points: &[Point], lo: usize, hi: usize, epsilon: f64, keep: &mut [bool]) {
    // Explicit stack; deep recursion on long contours otherwise.
    let mut stack = vec![(lo, hi)];
    while let Some((lo, hi)) = stack.pop() {
        if hi <= lo + 1 {
            continue;
        }
        let (mut best, mut dmax) = (lo, -1.0);
        for i in lo + 1..hi {
            let d = point_segment_distance(points[i], points[lo], points[hi]);
            if d > dmax {
                dmax = d;
                best = i;
            }
        }
        if dmax > epsilon {
            keep[best] = true;
            stack.push((lo, best));
            stack.push((best, hi));
        }
    }
}

/// Simplifies an open polyline. Endpoints are always kept; every dropped point lies
/// within `epsilon` of the simplified polyline. `epsilon == 0` returns the input.
pub fn simplify_rdp(points: &[Point], epsilon: f64) -> Vec<Point> {
    assert!(epsilon >= 0.0, "epsilon must be non-negative");
    if points.len() < 3 || epsilon == 0.0 {
        return points.to_vec();
    }
    let mut keep = vec![false; points.len()];
    keep[0] = true;
    keep[points.len() - 1] = true;
    rdp_mark(points, 0, points.len() - 1, epsilon, &mut keep);
    points.iter().zip(keep).filter(|(_, k)| *k).map(|(p, _)| *p).collect()
}

/// Simplifies a closed contour.
///
/// The contour is split at two stable anchors (the lexicographically smallest point and
/// the point farthest from it), so repeated simplification is idempotent.
pub fn simplify_contour(contour: &Contour, epsilon: f64) -> Contour {
    assert!(epsilon >= 0.0, "epsilon must be non-negative");
    let pts = contour.points();
    if epsilon == 0.0 {
        return contour.clone();
    }
    let a = (0..pts.len())
        .min_by(|&i, &j| pts[i].x.total_cmp(&pts[j].x).then(pts[i].y.total_cmp(&pts[j].y)))
        .expect("non-empty");
    let ring = contour.rotated(a);
    let pts = ring.points();
    let n = pts.len();
    let b = (1..n)
        .max_by(|&i, &j| {
            (pts[i] - pts[0])
                .norm_squared()
                .total_cmp(&(pts[j] - pts[0]).norm_squared())
                .then(j.cmp(&i))
        })
        .expect("at least 3 points");

    let mut closed: Vec<Point> = pts.to_vec();
    closed.push(pts[0]);
    let mut keep = vec![false; n + 1];
    keep[0] = true;
    keep[b] = true;
    keep[n] = true;
    rdp_mark(&closed, 0, b, epsilon, &mut keep);
    rdp_mark(&closed, b, n, epsilon, &mut keep);
    let mut out: Vec<Point> = closed[..n].iter().zip(&keep[..n]).filter(|(_, k)| **k).map(|(p, _)| *p).collect();
    if out.len() < 3 {
        // Keep the point farthest from the anchor chord so the result stays a polygon.
        let far = (1..n)
            .filter(|&i| i != b)
            .max_by(|&i, &j| {
                point_segment_distance(pts[i], pts[0], pts[b])
                    .total_cmp(&point_segment_distance(pts[j], pts[0], pts[b]))
                    .then(j.cmp(&i))
            })
            .expect("at least 3 points");
        out = if far < b {
            vec![pts[0], pts[far], pts[b]]
        } else {
            vec![pts[0], pts[b], pts[far]]
        };
    }
    Contour::new(out).unwrap_or_else(|_| contour.clone())
}
