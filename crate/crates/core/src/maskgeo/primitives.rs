//! Primitive shape fitting: minimum-area rectangle, minimum enclosing triangle and circle,
//! and a second-moment ellipse. Each candidate is rasterized at mask resolution and scored
//! by intersection over union with the mask.

use std::fmt;

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use super::mask::BinaryMask;
use crate::geom::{convex_hull, cross, Point, Vec2};

/// Best score must exceed this for a primitive to be reported.
pub const PRIMITIVE_THRESHOLD: f64 = 0.85;
/// Scores within this margin of the best count as equal; the simpler shape wins.
pub const PRIMITIVE_TIE_MARGIN: f64 = 0.02;

const MAX_TRIANGLE_DIRECTIONS: usize = 120;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrimitiveKind {
    Rectangle,
    Triangle,
    Circle,
    Ellipse,
    None,
}

impl fmt::Display for PrimitiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PrimitiveKind::Rectangle => "rectangle",
            PrimitiveKind::Triangle => "triangle",
            PrimitiveKind::Circle => "circle",
            PrimitiveKind::Ellipse => "ellipse",
            PrimitiveKind::None => "none",
        };
        f.write_str(s)
    }
}

/// Fitted primitive in pixel coordinates of the mask (pixel `(x, y)` covers `[x, x+1] × [y, y+1]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Primitive {
    Rectangle { center: [f64; 2], size: [f64; 2], angle_deg: f64 },
    Triangle { vertices: [[f64; 2]; 3] },
    Circle { center: [f64; 2], radius: f64 },
    Ellipse { center: [f64; 2], semi_axes: [f64; 2], angle_deg: f64 },
}

impl Primitive {
    pub fn kind(&self) -> PrimitiveKind {
        match self {
            Primitive::Rectangle { .. } => PrimitiveKind::Rectangle,
            Primitive::Triangle { .. } => PrimitiveKind::Triangle,
            Primitive::Circle { .. } => PrimitiveKind::Circle,
            Primitive::Ellipse { .. } => PrimitiveKind::Ellipse,
        }
    }

    fn bounds(&self) -> (f64, f64, f64, f64) {
        match self {
            Primitive::Rectangle { .. } | Primitive::Triangle { .. } => {
                let vs = self.polygon();
                let xs = vs.iter().map(|p| p.x);
                let ys = vs.iter().map(|p| p.y);
                (
                    xs.clone().fold(f64::INFINITY, f64::min),
                    ys.clone().fold(f64::INFINITY, f64::min),
                    xs.fold(f64::NEG_INFINITY, f64::max),
                    ys.fold(f64::NEG_INFINITY, f64::max),
                )
            }
            Primitive::Circle { center, radius } => {
                (center[0] - radius, center[1] - radius, center[0] + radius, center[1] + radius)
            }
            Primitive::Ellipse { center, semi_axes, .. } => {
                let r = semi_axes[0].max(semi_axes[1]);
                (center[0] - r, center[1] - r, center[0] + r, center[1] + r)
            }
        }
    }

    fn polygon(&self) -> Vec<Point> {
        match self {
            Primitive::Rectangle { center, size, angle_deg } => {
                let (s, c) = angle_deg.to_radians().sin_cos();
                let u = Vec2::new(c, s) * (size[0] / 2.0);
                let v = Vec2::new(-s, c) * (size[1] / 2.0);
                let o = Point::new(center[0], center[1]);
                vec![o - u - v, o + u - v, o + u + v, o - u + v]
            }
            Primitive::Triangle { vertices } => vertices.iter().map(|v| Point::new(v[0], v[1])).collect(),
            _ => Vec::new(),
        }
    }

    /// Inside test for a point; used on pixel centers.
    pub fn contains(&self, p: Point) -> bool {
        match self {
            Primitive::Rectangle { .. } | Primitive::Triangle { .. } => {
                let vs = self.polygon();
                let orient = cross(vs[1] - vs[0], vs[2] - vs[1]).signum();
                (0..vs.len()).all(|i| {
                    let a = vs[i];
                    let b = vs[(i + 1) % vs.len()];
                    cross(b - a, p - a) * orient >= -1e-9
                })
            }
            Primitive::Circle { center, radius } => {
                (p - Point::new(center[0], center[1])).norm_squared() <= radius * radius + 1e-9
            }
            Primitive::Ellipse { center, semi_axes, angle_deg } => {
                let (s, c) = angle_deg.to_radians().sin_cos();
                let d = p - Point::new(center[0], center[1]);
                let u = d.x * c + d.y * s;
                let v = -d.x * s + d.y * c;
                (u / semi_axes[0]).powi(2) + (v / semi_axes[1]).powi(2) <= 1.0 + 1e-9
            }
        }
    }

    /// Intersection over union with the mask, testing pixel centers.
    pub fn iou(&self, mask: &BinaryMask) -> f64 {
        let (x0, y0, x1, y1) = self.bounds();
        let (xa, ya) = (x0.floor() as i64 - 1, y0.floor() as i64 - 1);
        let (xb, yb) = (x1.ceil() as i64 + 1, y1.ceil() as i64 + 1);
        let mut prim = 0usize;
        let mut inter = 0usize;
        for y in ya..=yb {
            for x in xa..=xb {
                if self.contains(Point::new(x as f64 + 0.5, y as f64 + 0.5)) {
                    prim += 1;
                    inter += mask.get_signed(x, y) as usize;
                }
            }
        }
        let union = prim + mask.count() - inter;
        if union == 0 {
            0.0
        } else {
            inter as f64 / union as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PrimitiveScores {
    pub rectangle: f64,
    pub triangle: f64,
    pub circle: f64,
    pub ellipse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveFit {
    pub kind: PrimitiveKind,
    /// Overlap of the selected primitive; the best candidate's overlap when `kind` is none.
    pub overlap: f64,
    pub primitive: Option<Primitive>,
    pub scores: PrimitiveScores,
}

/// Corner points of the boundary pixels in each row; their hull equals the hull of the
/// full pixel squares.
fn corner_points(mask: &BinaryMask) -> Vec<Point> {
    let mut pts = Vec::new();
    for y in 0..mask.height() {
        let row = (0..mask.width()).filter(|&x| mask.get(x, y));
        let (mut lo, mut hi) = (usize::MAX, 0usize);
        for x in row {
            lo = lo.min(x);
            hi = hi.max(x);
        }
        if lo == usize::MAX {
            continue;
        }
        let (yt, yb) = (y as f64, y as f64 + 1.0);
        pts.push(Point::new(lo as f64, yt));
        pts.push(Point::new(lo as f64, yb));
        pts.push(Point::new(hi as f64 + 1.0, yt));
        pts.push(Point::new(hi as f64 + 1.0, yb));
    }
    pts
}

/// Minimum-area enclosing rectangle; one side is collinear with a hull edge.
pub fn min_area_rectangle(hull: &[Point]) -> Primitive {
    let n = hull.len();
    let mut best: Option<(f64, Primitive)> = None;
    for i in 0..n {
        let e = hull[(i + 1) % n] - hull[i];
        let len = e.norm();
        if len == 0.0 {
            continue;
        }
        let u = e / len;
        let v = Vec2::new(-u.y, u.x);
        let (mut umin, mut umax, mut vmin, mut vmax) =
            (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in hull {
            let a = p.coords.dot(&u);
            let b = p.coords.dot(&v);
            umin = umin.min(a);
            umax = umax.max(a);
            vmin = vmin.min(b);
            vmax = vmax.max(b);
        }
        let area = (umax - umin) * (vmax - vmin);
        if best.as_ref().is_none_or(|(a, _)| area < *a - 1e-9) {
            let c = u * ((umin + umax) / 2.0) + v * ((vmin + vmax) / 2.0);
            best = Some((
                area,
                Primitive::Rectangle {
                    center: [c.x, c.y],
                    size: [umax - umin, vmax - vmin],
                    angle_deg: u.y.atan2(u.x).to_degrees(),
                },
            ));
        }
    }
    best.expect("hull has an edge").1
}

fn circle_from_two(a: Point, b: Point) -> (Point, f64) {
    let c = Point::from((a.coords + b.coords) / 2.0);
    (c, (a - c).norm())
}

fn circle_from_three(a: Point, b: Point, c: Point) -> Option<(Point, f64)> {
    let ab = b - a;
    let ac = c - a;
    let d = 2.0 * cross(ab, ac);
    if d.abs() < 1e-12 {
        return None;
    }
    let ab2 = ab.norm_squared();
    let ac2 = ac.norm_squared();
    let o = a + Vec2::new((ac.y * ab2 - ab.y * ac2) / d, (ab.x * ac2 - ac.x * ab2) / d);
    Some((o, (a - o).norm()))
}

/// Minimum enclosing circle (incremental Welzl construction).
pub fn min_enclosing_circle(points: &[Point]) -> Primitive {
    let inside = |c: &(Point, f64), p: &Point| (p - c.0).norm() <= c.1 * (1.0 + 1e-12) + 1e-9;
    let mut circ = (points[0], 0.0);
    for i in 1..points.len() {
        if inside(&circ, &points[i]) {
            continue;
        }
        circ = (points[i], 0.0);
        for j in 0..i {
            if inside(&circ, &points[j]) {
                continue;
            }
            circ = circle_from_two(points[i], points[j]);
            for k in 0..j {
                if !inside(&circ, &points[k]) {
                    circ = circle_from_three(points[i], points[j], points[k])
                        .unwrap_or_else(|| circle_from_two(points[i], points[k]));
                }
            }
        }
    }
    Primitive::Circle { center: [circ.0.x, circ.0.y], radius: circ.1 }
}

fn line_intersection(n1: Vec2, h1: f64, n2: Vec2, h2: f64) -> Option<Point> {
    let det = cross(n1, n2);
    if det.abs() < 1e-12 {
        return None;
    }
    Some(Point::new((h1 * n2.y - h2 * n1.y) / det, (n1.x * h2 - n2.x * h1) / det))
}

/// Smallest triangle formed by three supporting lines of the hull.
///
/// Candidate directions are the hull edge normals; long hulls use evenly spaced normals instead.
pub fn min_enclosing_triangle(hull: &[Point]) -> Primitive {
    let n = hull.len();
    let mut angles: Vec<f64> = if n <= MAX_TRIANGLE_DIRECTIONS {
        (0..n)
            .filter_map(|i| {
                let e = hull[(i + 1) % n] - hull[i];
                (e.norm() > 0.0).then(|| (-e.x).atan2(e.y))
            })
            .collect()
    } else {
        (0..MAX_TRIANGLE_DIRECTIONS)
            .map(|i| -std::f64::consts::PI + std::f64::consts::TAU * i as f64 / MAX_TRIANGLE_DIRECTIONS as f64)
            .collect()
    };
    angles.sort_by(f64::total_cmp);
    let lines: Vec<(Vec2, f64)> = angles
        .iter()
        .map(|&a| {
            let nrm = Vec2::new(a.cos(), a.sin());
            let h = hull.iter().map(|p| p.coords.dot(&nrm)).fold(f64::NEG_INFINITY, f64::max);
            (nrm, h)
        })
        .collect();

    let m = lines.len();
    let mut best: Option<(f64, [Point; 3])> = None;
    for i in 0..m {
        for j in i + 1..m {
            for k in j + 1..m {
                let (ni, hi) = lines[i];
                let (nj, hj) = lines[j];
                let (nk, hk) = lines[k];
                // Normals sorted by angle must leave no gap of π or more.
                if cross(ni, nj) <= 1e-12 || cross(nj, nk) <= 1e-12 || cross(nk, ni) <= 1e-12 {
                    continue;
                }
                let (Some(a), Some(b), Some(c)) = (
                    line_intersection(nk, hk, ni, hi),
                    line_intersection(ni, hi, nj, hj),
                    line_intersection(nj, hj, nk, hk),
                ) else {
                    continue;
                };
                let area = 0.5 * cross(b - a, c - a).abs();
                if best.as_ref().is_none_or(|(ba, _)| area < *ba - 1e-9) {
                    best = Some((area, [a, b, c]));
                }
            }
        }
    }
    let verts = best.map(|(_, v)| v).unwrap_or_else(|| {
        // Unreachable for a hull with area; fall back to a bounding triangle.
        let p = hull[0];
        [p, p, p]
    });
    Primitive::Triangle { vertices: verts.map(|p| [p.x, p.y]) }
}

/// Ellipse with the same centroid and second moments as the mask (uniform pixel squares).
pub fn moment_ellipse(mask: &BinaryMask) -> Primitive {
    let n = mask.count() as f64;
    let (mut sx, mut sy) = (0.0, 0.0);
    for (x, y) in mask.pixels() {
        sx += x as f64 + 0.5;
        sy += y as f64 + 0.5;
    }
    let (cx, cy) = (sx / n, sy / n);
    let (mut xx, mut xy, mut yy) = (0.0, 0.0, 0.0);
    for (x, y) in mask.pixels() {
        let dx = x as f64 + 0.5 - cx;
        let dy = y as f64 + 0.5 - cy;
        xx += dx * dx;
        xy += dx * dy;
        yy += dy * dy;
    }
    let cov = Matrix2::new(xx / n + 1.0 / 12.0, xy / n, xy / n, yy / n + 1.0 / 12.0);
    let eig = cov.symmetric_eigen();
    let (i, j) = if eig.eigenvalues[0] >= eig.eigenvalues[1] { (0, 1) } else { (1, 0) };
    let axis = eig.eigenvectors.column(i);
    // A uniform ellipse with semi-axis a has variance a²/4 along it.
    Primitive::Ellipse {
        center: [cx, cy],
        semi_axes: [2.0 * eig.eigenvalues[i].max(0.0).sqrt(), 2.0 * eig.eigenvalues[j].max(0.0).sqrt()],
        angle_deg: axis[1].atan2(axis[0]).to_degrees(),
    }
}

/// Area-matched circle from the second moments: the isotropic counterpart of
/// [`moment_ellipse`]. Less sensitive to a ragged rim than the enclosing circle.
fn moment_circle(ellipse: &Primitive) -> Primitive {
    let Primitive::Ellipse { center, semi_axes, .. } = ellipse else { unreachable!("moment fit is an ellipse") };
    Primitive::Circle { center: *center, radius: (semi_axes[0] * semi_axes[1]).sqrt() }
}

/// Fits all four primitives and selects the best one.
///
/// The circle candidate is the better of the minimum enclosing circle and the
/// moment-matched circle.
///
/// Kind is none when the best overlap is at most 0.85. Otherwise, among candidates within
/// 0.02 of the best and above the threshold, the first of rectangle, triangle, circle,
/// ellipse is chosen.
pub fn fit_primitives(mask: &BinaryMask) -> PrimitiveFit {
    let corners = corner_points(mask);
    let hull = convex_hull(&corners);
    let ellipse = moment_ellipse(mask);
    let enclosing = min_enclosing_circle(&hull);
    let matched = moment_circle(&ellipse);
    let circle = if matched.iou(mask) > enclosing.iou(mask) { matched } else { enclosing };
    let candidates = [min_area_rectangle(&hull), min_enclosing_triangle(&hull), circle, ellipse];
    let s: Vec<f64> = candidates.iter().map(|p| p.iou(mask)).collect();
    let scores = PrimitiveScores { rectangle: s[0], triangle: s[1], circle: s[2], ellipse: s[3] };
    let best = s.iter().copied().fold(0.0, f64::max);
    if best <= PRIMITIVE_THRESHOLD {
        return PrimitiveFit { kind: PrimitiveKind::None, overlap: best, primitive: None, scores };
    }
    let pick = (0..4)
        .find(|&i| s[i] > PRIMITIVE_THRESHOLD && s[i] >= best - PRIMITIVE_TIE_MARGIN)
        .expect("best candidate qualifies");
    PrimitiveFit {
        kind: candidates[pick].kind(),
        overlap: s[pick],
        primitive: Some(candidates[pick].clone()),
        scores,
    }
}
