//! Cross-object alignment: straight lines, circles, scattered clusters.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::geom::{Point, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlignmentParams {
    /// Maximum angle (degrees) between the seed line and the line to a candidate point.
    pub linear_tolerance_deg: f64,
    pub min_linear: usize,
    /// Maximum radial residual as a fraction of the fitted radius.
    pub circular_tolerance: f64,
    pub min_circular: usize,
    /// Remaining objects must exceed this count to form a scattered group.
    pub scattered_above: usize,
}

impl Default for AlignmentParams {
    fn default() -> Self {
        AlignmentParams {
            linear_tolerance_deg: 5.0,
            min_linear: 3,
            circular_tolerance: 0.05,
            min_circular: 5,
            scattered_above: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlignmentKind {
    Linear,
    Circular,
    Scattered,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum GroupGeometry {
    Line { point: [f64; 2], direction: [f64; 2] },
    Circle { center: [f64; 2], radius: f64 },
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentGroup {
    pub id: String,
    pub label: String,
    pub kind: AlignmentKind,
    /// Member object ids in the order the group geometry visits them.
    pub members: Vec<String>,
    pub geometry: GroupGeometry,
}

/// An object center with its id, input to the detectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Located {
    pub id: String,
    pub center: Point,
}

impl Located {
    pub fn new(id: impl Into<String>, x: f64, y: f64) -> Self {
        Located { id: id.into(), center: Point::new(x, y) }
    }
}

/// Acute angle in degrees between the lines spanned by `a` and `b`.
fn line_angle_deg(a: Vec2, b: Vec2) -> f64 {
    let ang = a.perp(&b).abs().atan2(a.dot(&b)).to_degrees();
    ang.min(180.0 - ang)
}

struct Candidate {
    members: Vec<usize>,
    mean_dev: f64,
    sorted_ids: Vec<String>,
}

fn better(a: &Candidate, b: &Candidate) -> bool {
    if a.members.len() != b.members.len() {
        return a.members.len() > b.members.len();
    }
    if (a.mean_dev - b.mean_dev).abs() > 1e-9 {
        return a.mean_dev < b.mean_dev;
    }
    a.sorted_ids < b.sorted_ids
}

fn best_line(points: &[Located], tol_deg: f64) -> Option<Candidate> {
    let n = points.len();
    let mut best: Option<Candidate> = None;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let base = points[j].center - points[i].center;
            if base.norm() == 0.0 {
                continue;
            }
            let mut members = vec![i, j];
            let mut dev = 0.0;
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                let d = points[k].center - points[i].center;
                if d.norm() == 0.0 {
                    continue;
                }
                let a = line_angle_deg(base, d);
                if a <= tol_deg {
                    members.push(k);
                    dev += a;
                }
            }
            let extra = members.len() - 2;
            let mean_dev = if extra == 0 { 0.0 } else { dev / extra as f64 };
            let mut sorted_ids: Vec<String> = members.iter().map(|&m| points[m].id.clone()).collect();
            sorted_ids.sort();
            let cand = Candidate { members, mean_dev, sorted_ids };
            if best.as_ref().is_none_or(|b| better(&cand, b)) {
                best = Some(cand);
            }
        }
    }
    best
}

/// Centroid and principal direction of a point set (direction with `x >= 0`).
fn principal_line(points: &[Point]) -> ([f64; 2], [f64; 2]) {
    let c = crate::geom::mean(points);
    let (mut xx, mut xy, mut yy) = (0.0, 0.0, 0.0);
    for p in points {
        let d = p - c;
        xx += d.x * d.x;
        xy += d.x * d.y;
        yy += d.y * d.y;
    }
    let theta = 0.5 * (2.0 * xy).atan2(xx - yy);
    let mut dir = Vec2::new(theta.cos(), theta.sin());
    if dir.x < 0.0 || (dir.x == 0.0 && dir.y < 0.0) {
        dir = -dir;
    }
    ([c.x, c.y], [dir.x, dir.y])
}

/// Repeatedly extracts the largest set of points lying on a common line through a seed pair.
///
/// A point joins the seed pair `(p1, p2)` when the line `p1 → p` is within the angular
/// tolerance of `p1 → p2`. Returned member lists are ordered along the line.
pub fn detect_linear_groups(points: &[Located], params: &AlignmentParams) -> Vec<(Vec<String>, GroupGeometry)> {
    let mut remaining: Vec<Located> = points.to_vec();
    let mut out = Vec::new();
    while remaining.len() >= params.min_linear {
        let Some(cand) = best_line(&remaining, params.linear_tolerance_deg) else {
            break;
        };
        if cand.members.len() < params.min_linear {
            break;
        }
        let pts: Vec<Point> = cand.members.iter().map(|&m| remaining[m].center).collect();
        let (point, direction) = principal_line(&pts);
        let dir = Vec2::new(direction[0], direction[1]);
        let mut ordered: Vec<(f64, String)> = cand
            .members
            .iter()
            .map(|&m| (remaining[m].center.coords.dot(&dir), remaining[m].id.clone()))
            .collect();
        ordered.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        out.push((
            ordered.into_iter().map(|(_, id)| id).collect(),
            GroupGeometry::Line { point, direction },
        ));
        let mut drop = cand.members.clone();
        drop.sort_unstable();
        for m in drop.into_iter().rev() {
            remaining.remove(m);
        }
    }
    out
}

/// Algebraic (Kåsa) least-squares circle: minimizes `Σ (x² + y² + D x + E y + F)²`.
pub fn fit_circle_kasa(points: &[Point]) -> Option<(Point, f64)> {
    if points.len() < 3 {
        return None;
    }
    // Center the data for conditioning.
    let c = crate::geom::mean(points);
    let mut ata = Matrix3::zeros();
    let mut atb = Vector3::zeros();
    for p in points {
        let d = p - c;
        let row = Vector3::new(d.x, d.y, 1.0);
        ata += row * row.transpose();
        atb += row * -(d.x * d.x + d.y * d.y);
    }
    let sol = ata.lu().solve(&atb)?;
    let (cx, cy) = (-sol[0] / 2.0, -sol[1] / 2.0);
    let r2 = cx * cx + cy * cy - sol[2];
    if !(r2 > 0.0) || !r2.is_finite() {
        return None;
    }
    Some((Point::new(c.x + cx, c.y + cy), r2.sqrt()))
}

/// Fits one circle through all points; accepts when every radial residual is within tolerance.
/// Members are ordered by angle around the center.
pub fn detect_circular_group(points: &[Located], params: &AlignmentParams) -> Option<(Vec<String>, GroupGeometry)> {
    if points.len() < params.min_circular {
        return None;
    }
    let pts: Vec<Point> = points.iter().map(|p| p.center).collect();
    let (center, radius) = fit_circle_kasa(&pts)?;
    let ok = pts
        .iter()
        .all(|p| ((p - center).norm() - radius).abs() <= params.circular_tolerance * radius);
    if !ok {
        return None;
    }
    let mut ordered: Vec<(f64, String)> = points
        .iter()
        .map(|p| {
            let d = p.center - center;
            (d.y.atan2(d.x), p.id.clone())
        })
        .collect();
    ordered.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    Some((
        ordered.into_iter().map(|(_, id)| id).collect(),
        GroupGeometry::Circle { center: [center.x, center.y], radius },
    ))
}

/// All remaining objects form one scattered group when there are more than the threshold.
pub fn classify_scattered(points: &[Located], params: &AlignmentParams) -> Option<Vec<String>> {
    (points.len() > params.scattered_above).then(|| {
        let mut ids: Vec<String> = points.iter().map(|p| p.id.clone()).collect();
        ids.sort();
        ids
    })
}

/// Runs linear, circular and scattered detection on objects that share a label.
pub fn analyze_label(label: &str, points: &[Located], params: &AlignmentParams) -> Vec<AlignmentGroup> {
    let mut groups = Vec::new();
    let mut remaining: Vec<Located> = points.to_vec();
    let take = |remaining: &mut Vec<Located>, ids: &[String]| remaining.retain(|p| !ids.contains(&p.id));

    for (members, geometry) in detect_linear_groups(&remaining, params) {
        take(&mut remaining, &members);
        groups.push(AlignmentGroup {
            id: String::new(),
            label: label.to_string(),
            kind: AlignmentKind::Linear,
            members,
            geometry,
        });
    }
    if let Some((members, geometry)) = detect_circular_group(&remaining, params) {
        take(&mut remaining, &members);
        groups.push(AlignmentGroup {
            id: String::new(),
            label: label.to_string(),
            kind: AlignmentKind::Circular,
            members,
            geometry,
        });
    }
    if let Some(members) = classify_scattered(&remaining, params) {
        groups.push(AlignmentGroup {
            id: String::new(),
            label: label.to_string(),
            kind: AlignmentKind::Scattered,
            members,
            geometry: GroupGeometry::None,
        });
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(c: &[(f64, f64)]) -> Vec<Located> {
        c.iter().enumerate().map(|(i, &(x, y))| Located::new(format!("o{i}"), x, y)).collect()
    }

    /// Oracle: max over the three vertices of the acute angle between the two other lines.
    fn max_pairwise_deviation(p: &[(f64, f64)]) -> f64 {
        let v = |a: (f64, f64), b: (f64, f64)| Vec2::new(b.0 - a.0, b.1 - a.1);
        line_angle_deg(v(p[0], p[1]), v(p[0], p[2]))
            .max(line_angle_deg(v(p[1], p[0]), v(p[1], p[2])))
            .max(line_angle_deg(v(p[2], p[0]), v(p[2], p[1])))
    }

    #[test]
    fn near_collinear_triple_forms_group() {
        let c = [(0.0, 0.0), (10.0, 1.0), (20.0, 1.8)];
        assert!(max_pairwise_deviation(&c) < 5.0);
        let g = detect_linear_groups(&pts(&c), &AlignmentParams::default());
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].0, vec!["o0", "o1", "o2"]);
    }

    #[test]
    fn bent_triple_is_not_a_line() {
        let c = [(0.0, 0.0), (10.0, 0.0), (20.0, 9.0)];
        // atan2(9, 20) ≈ 24.2°
        assert!((9f64.atan2(20.0).to_degrees() - 24.23).abs() < 0.01);
        assert!(detect_linear_groups(&pts(&c), &AlignmentParams::default()).is_empty());
    }

    #[test]
    fn larger_line_emitted_first() {
        let mut c: Vec<(f64, f64)> = (0..6).map(|i| (i as f64 * 20.0, 50.0)).collect();
        c.extend((0..3).map(|i| (37.0 + i as f64 * 3.0, i as f64 * 40.0 - 20.0)));
        let g = detect_linear_groups(&pts(&c), &AlignmentParams::default());
        assert_eq!(g.len(), 2);
        assert_eq!(g[0].0.len(), 6);
        assert_eq!(g[1].0, vec!["o6", "o7", "o8"]);
    }

    #[test]
    fn exact_circle_is_recovered() {
        let c: Vec<(f64, f64)> = (0..8)
            .map(|i| {
                let t = i as f64 * std::f64::consts::TAU / 8.0;
                (300.0 + 100.0 * t.cos(), 200.0 + 100.0 * t.sin())
            })
            .collect();
        let p = pts(&c);
        assert!(detect_linear_groups(&p, &AlignmentParams::default()).is_empty());
        let (members, geo) = detect_circular_group(&p, &AlignmentParams::default()).unwrap();
        assert_eq!(members.len(), 8);
        let GroupGeometry::Circle { center, radius } = geo else { panic!() };
        assert!((radius - 100.0).abs() < 1e-9);
        assert!((center[0] - 300.0).abs() < 1e-9 && (center[1] - 200.0).abs() < 1e-9);
    }

    #[test]
    fn displaced_point_breaks_circle() {
        let c: Vec<(f64, f64)> = (0..8)
            .map(|i| {
                let t = i as f64 * std::f64::consts::TAU / 8.0;
                let r = if i == 3 { 110.0 } else { 100.0 };
                (r * t.cos(), r * t.sin())
            })
            .collect();
        assert!(detect_circular_group(&pts(&c), &AlignmentParams::default()).is_none());
    }

    #[test]
    fn four_points_too_few_for_circle() {
        let c = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];
        assert!(detect_circular_group(&pts(&c), &AlignmentParams::default()).is_none());
    }

    #[test]
    fn scattered_threshold() {
        let p = AlignmentParams::default();
        let mk = |n: usize| pts(&(0..n).map(|i| (i as f64, (i * i) as f64)).collect::<Vec<_>>());
        assert_eq!(classify_scattered(&mk(21), &p).unwrap().len(), 21);
        assert!(classify_scattered(&mk(20), &p).is_none());
        assert!(classify_scattered(&[], &p).is_none());
    }
}
