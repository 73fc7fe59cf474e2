use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use super::mask::BinaryMask;

/// Ratios above this mark a shape as abnormally elongated.
pub const ELONGATION_THRESHOLD: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Elongation {
    /// `sqrt(λ1 / λ2)` of the coordinate covariance; infinite for collinear pixels.
    pub ratio: f64,
    /// Principal axis in image coordinates, with `x >= 0`.
    pub axis: [f64; 2],
}

impl Elongation {
    pub fn is_abnormal(&self) -> bool {
        self.ratio > ELONGATION_THRESHOLD
    }
}

fn from_covariance(cov: Matrix2<f64>) -> Elongation {
    let eig = cov.symmetric_eigen();
    let (i, j) = if eig.eigenvalues[0] >= eig.eigenvalues[1] { (0, 1) } else { (1, 0) };
    let (l1, l2) = (eig.eigenvalues[i], eig.eigenvalues[j]);
    let mut axis: Vector2<f64> = eig.eigenvectors.column(i).into_owned();
    if axis.x < 0.0 || (axis.x == 0.0 && axis.y < 0.0) {
        axis = -axis;
    }
    let ratio = if l2 <= l1 * 1e-15 { f64::INFINITY } else { (l1 / l2).sqrt() };
    Elongation { ratio, axis: [axis.x, axis.y] }
}

/// Elongation of the foreground pixel coordinates.
pub fn elongation_ratio(mask: &BinaryMask) -> Elongation {
    let n = mask.count() as f64;
    let (mut sx, mut sy) = (0.0, 0.0);
    for (x, y) in mask.pixels() {
        sx += x as f64;
        sy += y as f64;
    }
    let (mx, my) = (sx / n, sy / n);
    let (mut xx, mut xy, mut yy) = (0.0, 0.0, 0.0);
    for (x, y) in mask.pixels() {
        let dx = x as f64 - mx;
        let dy = y as f64 - my;
        xx += dx * dx;
        xy += dx * dy;
        yy += dy * dy;
    }
    from_covariance(Matrix2::new(xx / n, xy / n, xy / n, yy / n))
}

/// Elongation of a filled axis-aligned box of the given size.
pub fn box_elongation(width: f64, height: f64) -> Elongation {
    from_covariance(Matrix2::new(width * width / 12.0, 0.0, 0.0, height * height / 12.0))
}
