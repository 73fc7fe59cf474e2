//! Small planar geometry helpers shared by the mask and trajectory code.

use nalgebra::{Point2, Vector2};

pub type Point = Point2<f64>;
pub type Vec2 = Vector2<f64>;

#[inline]
pub fn cross(a: Vec2, b: Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Shoelace signed area of a closed polygon (positive for counterclockwise in a y-up frame).
pub fn signed_area(points: &[Point]) -> f64 {
    let n = points.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        let a = points[i];
        let b = points[(i + 1) % n];
        acc += a.x * b.y - b.x * a.y;
    }
    0.5 * acc
}

pub fn mean(points: &[Point]) -> Point {
    let n = points.len().max(1) as f64;
    let s = points.iter().fold(Vec2::zeros(), |acc, p| acc + p.coords);
    Point::from(s / n)
}

/// `n` points evenly spaced by arc length around a closed polygon, starting at its first vertex.
pub fn resample_closed(points: &[Point], n: usize) -> Vec<Point> {
    let m = points.len();
    if m < 2 || n == 0 {
        return points.iter().copied().cycle().take(n.min(m)).collect();
    }
    let mut cum = vec![0.0];
    for i in 0..m {
        cum.push(cum[i] + (points[(i + 1) % m] - points[i]).norm());
    }
    let total = cum[m];
    if total == 0.0 {
        return vec![points[0]; n];
    }
    let mut seg = 0;
    (0..n)
        .map(|k| {
            let s = total * k as f64 / n as f64;
            while seg + 1 < m && cum[seg + 1] <= s {
                seg += 1;
            }
            let len = cum[seg + 1] - cum[seg];
            let u = if len > 0.0 { (s - cum[seg]) / len } else { 0.0 };
            points[seg] + (points[(seg + 1) % m] - points[seg]) * u
        })
        .collect()
}

/// Distance from `p` to the closed segment `a`–`b`.
pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Convex hull (Andrew's monotone chain), counterclockwise, collinear points dropped.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let turn = |o: &Point, a: &Point, b: &Point| cross(a - o, b - o);
    let mut lower: Vec<Point> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && turn(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<Point> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && turn(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Total absolute turning angle of a closed polyline, radians.
pub fn total_absolute_curvature(points: &[Point]) -> f64 {
    let n = points.len();
    let mut total = 0.0;
    for i in 0..n {
        let a = points[(i + n - 1) % n];
        let b = points[i];
        let c = points[(i + 1) % n];
        let u = b - a;
        let v = c - b;
        if u.norm() == 0.0 || v.norm() == 0.0 {
            continue;
        }
        total += cross(u, v).atan2(u.dot(&v)).abs();
    }
    total
}
