//! Brute-force duration search matching a segment's kinematics to the beat motion.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Resamples `segment` to `len` frames by linear interpolation, keeping both endpoints.
pub fn linear_stretch(segment: &[Vec<f64>], len: usize) -> Vec<Vec<f64>> {
    let t = segment.len();
    if t == 0 || len == 0 {
        return Vec::new();
    }
    if len == 1 || t == 1 {
        return vec![segment[0].clone(); len];
    }
    (0..len)
        .map(|j| {
            let u = j as f64 * (t - 1) as f64 / (len - 1) as f64;
            let i = (u.floor() as usize).min(t - 2);
            let w = u - i as f64;
            segment[i].iter().zip(&segment[i + 1]).map(|(a, b)| a + w * (b - a)).collect()
        })
        .collect()
}

/// Forward differences scaled by `fps`.
pub fn forward_difference(frames: &[Vec<f64>], fps: f64) -> Vec<Vec<f64>> {
    frames.windows(2).map(|w| w[1].iter().zip(&w[0]).map(|(b, a)| (b - a) * fps).collect()).collect()
}

fn mean_abs_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for (x, y) in a.iter().zip(b) {
        for (p, q) in x.iter().zip(y) {
            sum += (p - q).abs();
            n += 1;
        }
    }
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Mean absolute difference of velocity, acceleration and jerk, summed.
pub fn kinematic_distance(a: &[Vec<f64>], b: &[Vec<f64>], fps: f64) -> f64 {
    let (va, vb) = (forward_difference(a, fps), forward_difference(b, fps));
    let (aa, ab) = (forward_difference(&va, fps), forward_difference(&vb, fps));
    let (ja, jb) = (forward_difference(&aa, fps), forward_difference(&ab, fps));
    mean_abs_diff(&va, &vb) + mean_abs_diff(&aa, &ab) + mean_abs_diff(&ja, &jb)
}

/// Inclusive candidate lengths `ceil(T(1-r)) ..= floor(T(1+r))`.
pub fn candidate_range(t: usize, range: f64) -> (usize, usize) {
    let lo = (t as f64 * (1.0 - range) - 1e-9).ceil().max(1.0) as usize;
    let hi = (t as f64 * (1.0 + range) + 1e-9).floor() as usize;
    (lo, hi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingResult {
    pub original: usize,
    pub chosen: usize,
    pub score: f64,
    /// Every candidate length with its score, in ascending length.
    pub candidates: Vec<(usize, f64)>,
    /// True when the beat reference was too short and the original length was kept.
    pub fallback: bool,
    #[serde(skip)]
    pub frames: Vec<Vec<f64>>,
}

/// Tries every length in the `±range` band, stretching `segment` linearly and comparing its
/// kinematics with the equally long window of `beat` starting at its first frame. Returns the
/// lowest-scoring length; ties go to the shortest.
pub fn timing_optimize(segment: &[Vec<f64>], beat: &[Vec<f64>], fps: f64, range: f64) -> Result<TimingResult> {
    if !(range > 0.0 && range < 1.0) {
        return Err(Error::InvalidArgument(format!("timing range {range} outside (0, 1)")));
    }
    if segment.is_empty() {
        return Err(Error::InvalidArgument("empty segment".into()));
    }
    let t = segment.len();
    let (lo, hi) = candidate_range(t, range);
    if beat.len() < hi {
        log::warn!("beat reference has {} frames, need {hi}; keeping {t} frames", beat.len());
        return Ok(TimingResult { original: t, chosen: t, score: f64::NAN, candidates: Vec::new(), fallback: true, frames: segment.to_vec() });
    }
    let mut best: Option<(usize, f64, Vec<Vec<f64>>)> = None;
    let mut candidates = Vec::with_capacity(hi + 1 - lo);
    for len in lo..=hi {
        let stretched = linear_stretch(segment, len);
        let score = kinematic_distance(&stretched, &beat[..len], fps);
        candidates.push((len, score));
        if best.as_ref().is_none_or(|(_, s, _)| score < *s) {
            best = Some((len, score, stretched));
        }
    }
    let (chosen, score, frames) = best.expect("band is nonempty");
    Ok(TimingResult { original: t, chosen, score, candidates, fallback: false, frames })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stretch_keeps_endpoints_and_linear_data() {
        let seg: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
        let s = linear_stretch(&seg, 9);
        assert_eq!(s.len(), 9);
        assert_eq!(s[0], vec![0.0, 0.0]);
        assert_eq!(s[8], vec![4.0, 8.0]);
        assert!((s[3][0] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn identical_kinematics_keep_length() {
        let beat: Vec<Vec<f64>> = (0..60).map(|i| vec![(i as f64 * 0.2).sin()]).collect();
        let r = timing_optimize(&beat[..40], &beat, 30.0, 0.25).unwrap();
        assert_eq!(r.chosen, 40);
        assert_eq!(r.score, 0.0);
    }

    #[test]
    fn constant_inputs_pick_shortest() {
        let seg = vec![vec![0.3]; 40];
        let beat = vec![vec![1.0]; 60];
        let r = timing_optimize(&seg, &beat, 30.0, 0.25).unwrap();
        assert_eq!(r.chosen, 30);
        assert_eq!(r.candidates.len(), 50 - 30 + 1);
    }

    #[test]
    fn recovers_planted_stretch() {
        // Beat moves linearly; the segment is the same motion compressed by 1.1.
        let t = 40;
        let target = (1.1 * t as f64).round() as usize;
        let beat: Vec<Vec<f64>> = (0..80).map(|j| vec![0.01 * j as f64, -0.03 * j as f64 + 1.0]).collect();
        let seg: Vec<Vec<f64>> = (0..t)
            .map(|i| {
                let u = i as f64 * (target - 1) as f64 / (t - 1) as f64;
                vec![0.01 * u, -0.03 * u + 1.0]
            })
            .collect();
        let r = timing_optimize(&seg, &beat, 30.0, 0.25).unwrap();
        assert_eq!(r.chosen, target);
    }

    #[test]
    fn short_beat_falls_back() {
        let seg = vec![vec![0.0]; 40];
        let r = timing_optimize(&seg, &seg, 30.0, 0.25).unwrap();
        assert!(r.fallback);
        assert_eq!(r.chosen, 40);
    }

    #[test]
    fn band_edges() {
        assert_eq!(candidate_range(40, 0.25), (30, 50));
        assert_eq!(candidate_range(7, 0.25), (6, 8));
    }
}
