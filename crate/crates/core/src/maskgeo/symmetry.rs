use serde::{Deserialize, Serialize};

use super::mask::BinaryMask;

pub const MIN_ANGLE: i32 = -90;
pub const MAX_ANGLE: i32 = 90;

/// Scores closer than this to the maximum count as ties; ties go to the smallest |angle|.
pub const SCORE_TIE_EPS: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetryResult {
    pub best_angle_deg: i32,
    pub score: f64,
    /// One score per integer angle from -90 to +90.
    pub scores: Vec<f64>,
}

impl SymmetryResult {
    pub fn score_at(&self, angle: i32) -> f64 {
        self.scores[(angle - MIN_ANGLE) as usize]
    }
}

/// Foreground pixel centers relative to the centroid.
fn centered_pixels(mask: &BinaryMask) -> (f64, f64, f64) {
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0.0);
    for (x, y) in mask.pixels() {
        sx += x as f64 + 0.5;
        sy += y as f64 + 0.5;
        n += 1.0;
    }
    let (cx, cy) = (sx / n, sy / n);
    let r2 = mask
        .pixels()
        .map(|(x, y)| {
            let dx = x as f64 + 0.5 - cx;
            let dy = y as f64 + 0.5 - cy;
            dx * dx + dy * dy
        })
        .fold(0.0, f64::max);
    (cx, cy, r2.sqrt())
}

/// Bilateral overlap after rotating by `angle_deg` (counterclockwise as displayed) about
/// the centroid and bisecting along the vertical axis through it.
///
/// Score is `|left ∩ mirror(right)| / max(|left|, |right|)`. Resampling is nearest-neighbor.
pub fn overlap_at(mask: &BinaryMask, angle_deg: f64) -> f64 {
    let (cx, cy, radius) = centered_pixels(mask);
    let half = radius.ceil() as i64 + 2;
    let size = (2 * half) as usize;
    let (s, c) = angle_deg.to_radians().sin_cos();

    let mut left = 0usize;
    let mut right = 0usize;
    let mut both = 0usize;
    let mut row = vec![false; size];
    for v in 0..size {
        let dv = v as f64 + 0.5 - half as f64;
        for (u, cell) in row.iter_mut().enumerate() {
            let du = u as f64 + 0.5 - half as f64;
            let sx = cx + du * c - dv * s;
            let sy = cy + du * s + dv * c;
            *cell = mask.get_signed(sx.floor() as i64, sy.floor() as i64);
        }
        for u in 0..size / 2 {
            let l = row[u];
            let r = row[size - 1 - u];
            left += l as usize;
            right += r as usize;
            both += (l && r) as usize;
        }
    }
    let denom = left.max(right);
    if denom == 0 {
        0.0
    } else {
        both as f64 / denom as f64
    }
}

/// Sweeps integer angles from -90 to +90 degrees and reports the most symmetric one.
pub fn symmetry_sweep(mask: &BinaryMask) -> SymmetryResult {
    let scores: Vec<f64> = (MIN_ANGLE..=MAX_ANGLE).map(|a| overlap_at(mask, a as f64)).collect();
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let best = (MIN_ANGLE..=MAX_ANGLE)
        .filter(|&a| scores[(a - MIN_ANGLE) as usize] >= max - SCORE_TIE_EPS)
        .min_by(|&a, &b| {
            a.abs().cmp(&b.abs()).then_with(|| {
                scores[(b - MIN_ANGLE) as usize].total_cmp(&scores[(a - MIN_ANGLE) as usize])
            })
        })
        .expect("181 angles");
    SymmetryResult {
        best_angle_deg: best,
        score: scores[(best - MIN_ANGLE) as usize],
        scores,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rotated_rect(w: f64, h: f64, angle_deg: f64) -> BinaryMask {
        // Rasterize a rectangle rotated counterclockwise (as displayed) by `angle_deg`.
        let size = 160;
        let c = size as f64 / 2.0;
        let (s, co) = angle_deg.to_radians().sin_cos();
        BinaryMask::from_fn(size, size, |x, y| {
            let dx = x as f64 + 0.5 - c;
            let dy = y as f64 + 0.5 - c;
            // undo the rotation
            let u = dx * co - dy * s;
            let v = dx * s + dy * co;
            u.abs() <= w / 2.0 && v.abs() <= h / 2.0
        })
        .unwrap()
        .cropped()
    }

    #[test]
    fn upright_rectangle_is_symmetric_at_zero() {
        let r = symmetry_sweep(&rotated_rect(60.0, 100.0, 0.0));
        assert_eq!(r.best_angle_deg, 0);
        assert!(r.score >= 0.99);
        assert_eq!(r.scores.len(), 181);
    }

    #[test]
    fn pre_rotated_rectangle_recovers_negative_angle() {
        let r = symmetry_sweep(&rotated_rect(60.0, 100.0, 10.0));
        assert!((r.best_angle_deg + 10).abs() <= 1, "got {}", r.best_angle_deg);
    }

    #[test]
    fn l_shape_is_not_symmetric() {
        // Arms of different length and width: no mirror axis at any angle.
        let m = BinaryMask::from_fn(90, 120, |x, y| x < 20 || (y >= 100 && x < 90 && y < 112)).unwrap();
        let r = symmetry_sweep(&m);
        // Brute-force oracle: count mirrored overlap directly at every angle.
        let oracle_max = (MIN_ANGLE..=MAX_ANGLE).map(|a| overlap_at(&m, a as f64)).fold(0.0, f64::max);
        assert!((r.scores.iter().copied().fold(0.0, f64::max) - oracle_max).abs() < 1e-12);
        assert!(r.score < 0.9, "score {}", r.score);
    }

    #[test]
    fn mirroring_negates_best_angle() {
        let m = BinaryMask::from_fn(80, 80, |x, y| {
            let (fx, fy) = (x as f64 - 30.0, y as f64 - 40.0);
            // tilted isosceles-ish wedge
            let u = fx * 0.94 + fy * 0.34;
            let v = -fx * 0.34 + fy * 0.94;
            v > -30.0 && v < 30.0 && u.abs() < (v + 30.0) * 0.5
        })
        .unwrap();
        let a = symmetry_sweep(&m).best_angle_deg;
        let b = symmetry_sweep(&m.mirrored_horizontally()).best_angle_deg;
        assert!((a + b).abs() <= 1, "{a} vs {b}");
    }
}
