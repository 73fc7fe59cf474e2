use std::collections::VecDeque;

use super::mask::BinaryMask;
use crate::error::{Error, Result};
use crate::geom::{signed_area, Point};

/// Closed polyline with an implicit closing edge.
///
/// At least three points, no consecutive duplicates (including across the closing edge),
/// and non-negative signed area in the coordinates as stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    points: Vec<Point>,
}

impl Contour {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        let mut pts: Vec<Point> = Vec::with_capacity(points.len());
        for p in points {
            if pts.last() != Some(&p) {
                pts.push(p);
            }
        }
        while pts.len() > 1 && pts.first() == pts.last() {
            pts.pop();
        }
        if pts.len() < 3 {
            return Err(Error::DegenerateContour(format!(
                "{} distinct points, need at least 3",
                pts.len()
            )));
        }
        if signed_area(&pts) < 0.0 {
            pts[1..].reverse();
        }
        Ok(Contour { points: pts })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.points)
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }

    /// Same cyclic sequence starting at `start`.
    pub fn rotated(&self, start: usize) -> Contour {
        let mut pts = self.points.clone();
        let n = pts.len();
        pts.rotate_left(start % n);
        Contour { points: pts }
    }
}

/// Labels 4-connected foreground components; returns per-pixel labels and component sizes.
pub fn label_components(mask: &BinaryMask) -> (Vec<Option<usize>>, Vec<usize>) {
    let (w, h) = (mask.width(), mask.height());
    let mut labels: Vec<Option<usize>> = vec![None; w * h];
    let mut sizes = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        if !mask.bits()[start] || labels[start].is_some() {
            continue;
        }
        let id = sizes.len();
        let mut size = 0;
        labels[start] = Some(id);
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            size += 1;
            let (x, y) = (i % w, i / w);
            let mut visit = |j: usize| {
                if mask.bits()[j] && labels[j].is_none() {
                    labels[j] = Some(id);
                    queue.push_back(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        sizes.push(size);
    }
    (labels, sizes)
}

/// Largest 4-connected component as its own mask (ties go to the first in scan order).
pub fn largest_component(mask: &BinaryMask) -> BinaryMask {
    let (labels, sizes) = label_components(mask);
    let best = sizes
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
        .expect("mask has a set pixel");
    BinaryMask::new(
        mask.width(),
        mask.height(),
        labels.iter().map(|l| *l == Some(best)).collect(),
    )
    .expect("component is non-empty")
}

// 8-neighborhood, clockwise on screen (y down), starting west.
const RING: [(i64, i64); 8] = [(-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1)];

fn ring_index(dx: i64, dy: i64) -> usize {
    RING.iter().position(|&d| d == (dx, dy)).expect("unit neighbor offset")
}

/// Outer boundary of the largest 4-connected component, as pixel coordinates.
///
/// Moore-neighbor tracing with Jacob's stopping criterion. Points are pixel indices
/// `(column, row)` of boundary pixels.
pub fn extract_contour(mask: &BinaryMask) -> Result<Contour> {
    let comp = largest_component(mask);
    let (sx, sy) = comp.pixels().next().expect("non-empty component");
    let start = (sx as i64, sy as i64);
    // Raster-first pixel: its west neighbor is background.
    let start_back = (start.0 - 1, start.1);

    let mut points = vec![start];
    let mut cur = start;
    let mut back = start_back;
    let limit = 4 * comp.width() * comp.height() + 8;
    for _ in 0..limit {
        let b = ring_index(back.0 - cur.0, back.1 - cur.1);
        let mut next = None;
        let mut prev = back;
        for k in 1..=8 {
            let (dx, dy) = RING[(b + k) % 8];
            let cand = (cur.0 + dx, cur.1 + dy);
            if comp.get_signed(cand.0, cand.1) {
                next = Some((cand, prev));
                break;
            }
            prev = cand;
        }
        let Some((n, nb)) = next else {
            // isolated pixel
            break;
        };
        if n == start && nb == start_back {
            break;
        }
        if cur == start && n == points.get(1).copied().unwrap_or((i64::MIN, 0)) && points.len() > 2 {
            break;
        }
        points.push(n);
        cur = n;
        back = nb;
    }
    if points.len() > 1 && points.last() == Some(&start) {
        points.pop();
    }
    Contour::new(points.into_iter().map(|(x, y)| Point::new(x as f64, y as f64)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect_mask(w: usize, h: usize) -> BinaryMask {
        BinaryMask::from_fn(w, h, |_, _| true).unwrap()
    }

    #[test]
    fn full_three_by_three_gives_eight_ring() {
        let c = extract_contour(&rect_mask(3, 3)).unwrap();
        assert_eq!(c.len(), 8);
        assert!(!c.points().contains(&Point::new(1.0, 1.0)));
    }

    #[test]
    fn picks_the_larger_component() {
        // 50-pixel block (10x5) and a separate 3-pixel bar.
        let m = BinaryMask::from_fn(20, 10, |x, y| (x < 10 && y < 5) || ((15..18).contains(&x) && y == 8)).unwrap();
        let (_, sizes) = label_components(&m);
        let mut s = sizes.clone();
        s.sort();
        assert_eq!(s, vec![3, 50]);
        let c = extract_contour(&m).unwrap();
        assert!(c.points().iter().all(|p| p.x < 10.0 && p.y < 5.0));
        // Perimeter ring of a 10x5 block: 2*10 + 2*3 pixels.
        assert_eq!(c.len(), 26);
    }

    #[test]
    fn single_pixel_is_degenerate() {
        let m = BinaryMask::from_fn(3, 3, |x, y| x == 1 && y == 1).unwrap();
        assert!(matches!(extract_contour(&m), Err(Error::DegenerateContour(_))));
    }

    #[test]
    fn traces_concave_shape_without_repeats_at_start() {
        // U shape
        let m = BinaryMask::from_fn(7, 7, |x, y| {
            (1..6).contains(&x) && (1..6).contains(&y) && !((3..4).contains(&x) && y < 4)
        })
        .unwrap();
        let c = extract_contour(&m).unwrap();
        let n = m.count() as f64;
        let area = c.area();
        assert!(area > 0.0);
        assert!((n - area).abs() <= c.len() as f64);
    }

    #[test]
    fn contour_new_canonicalizes_winding() {
        let cw = vec![
            Point::new(0.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
        ];
        let c = Contour::new(cw).unwrap();
        assert!(c.area() > 0.0);
        assert_eq!(c.points()[0], Point::new(0.0, 0.0));
    }
}
