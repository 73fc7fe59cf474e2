//! Beat and idle blending under a speech envelope, and overlay of solved gestures.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::skeleton::{KinematicChain, MotionClip, Pose};

/// Intervals of active speech, seconds.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeechActivity {
    pub intervals: Vec<[f64; 2]>,
}

impl SpeechActivity {
    pub fn validate(&self) -> Result<()> {
        let mut prev_end = f64::NEG_INFINITY;
        for (i, [s, e]) in self.intervals.iter().enumerate() {
            if !(s.is_finite() && e.is_finite() && s < e) {
                return Err(Error::InvalidArgument(format!("speech interval {i} is not a forward range: [{s}, {e}]")));
            }
            if *s < prev_end {
                return Err(Error::InvalidArgument(format!("speech interval {i} overlaps or is out of order")));
            }
            prev_end = *e;
        }
        Ok(())
    }

    pub fn from_json(text: &str, name: &str) -> Result<Self> {
        let s: SpeechActivity = serde_json::from_str(text).map_err(|e| Error::json(name, e))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn is_active(&self, t: f64) -> bool {
        self.intervals.iter().any(|[s, e]| *s <= t && t < *e)
    }

    /// A single interval covering `[0, duration)`.
    pub fn continuous(duration: f64) -> Self {
        SpeechActivity { intervals: vec![[0.0, duration]] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BlendParams {
    /// Idle share of the speaking blend.
    pub idle_weight: f64,
    /// Seconds of silence before fading to idle.
    pub grace: f64,
    /// Seconds for a full fade.
    pub fade: f64,
}

impl Default for BlendParams {
    fn default() -> Self {
        BlendParams { idle_weight: 0.25, grace: 0.5, fade: 2.0 }
    }
}

impl BlendParams {
    pub fn validate(&self) -> Result<()> {
        if !((0.0..=1.0).contains(&self.idle_weight) && self.grace >= 0.0 && self.fade > 0.0) {
            return Err(Error::Config(format!("bad blend parameters {self:?}")));
        }
        Ok(())
    }
}

/// Weight of the speaking blend at each frame: 1 while speaking, held for the grace
/// period after speech stops, then falling linearly to 0 over the fade time. When speech
/// resumes it rises again at the same rate. The clip starts fully speaking.
pub fn speech_envelope(speech: &SpeechActivity, frames: usize, fps: u32, params: &BlendParams) -> Vec<f64> {
    let rate = 1.0 / params.fade;
    // Switch points (time, becomes_active), non-decreasing in time.
    let mut events: Vec<(f64, bool)> = vec![(0.0, false)];
    for [s, e] in &speech.intervals {
        events.push((s.max(0.0), true));
        events.push((e.max(0.0), false));
    }
    let value_after = |start_val: f64, start: f64, becomes_active: bool, t: f64| -> f64 {
        let dt = (t - start).max(0.0);
        if becomes_active {
            (start_val + dt * rate).min(1.0)
        } else {
            (start_val - (dt - params.grace).max(0.0) * rate).max(0.0)
        }
    };
    // Envelope value at each switch point.
    let mut starts = vec![1.0];
    for i in 1..events.len() {
        let (pt, pact) = events[i - 1];
        starts.push(value_after(starts[i - 1], pt, pact, events[i].0));
    }
    let mut out = Vec::with_capacity(frames);
    let mut k = 0;
    for f in 0..frames {
        let t = f as f64 / fps as f64;
        while k + 1 < events.len() && events[k + 1].0 <= t {
            k += 1;
        }
        let (et, act) = events[k];
        out.push(value_after(starts[k], et, act, t));
    }
    out
}

/// Per-frame, per-DOF values written by plan solves, each with a blend weight in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Overlay {
    values: Vec<Vec<f64>>,
    weights: Vec<Vec<f64>>,
}

impl Overlay {
    pub fn new(frames: usize, dofs: usize) -> Self {
        Overlay { values: vec![vec![0.0; dofs]; frames], weights: vec![vec![0.0; dofs]; frames] }
    }

    pub fn frames(&self) -> usize {
        self.values.len()
    }

    pub fn weight(&self, frame: usize, dof: usize) -> f64 {
        self.weights[frame][dof]
    }

    pub fn is_empty(&self) -> bool {
        self.weights.iter().all(|w| w.iter().all(|v| *v == 0.0))
    }

    /// Layers `value` over whatever is already there with weight `s`; `s = 1` replaces.
    pub fn write(&mut self, frame: usize, dof: usize, value: f64, s: f64) {
        let wp = self.weights[frame][dof];
        let w = 1.0 - (1.0 - s) * (1.0 - wp);
        if w <= 0.0 {
            return;
        }
        self.values[frame][dof] = (s * value + (1.0 - s) * wp * self.values[frame][dof]) / w;
        self.weights[frame][dof] = w;
    }

    /// `base` with the overlay applied.
    pub fn apply(&self, frame: usize, base: &Pose) -> Pose {
        let mut out = base.clone();
        if let (Some(v), Some(w)) = (self.values.get(frame), self.weights.get(frame)) {
            for ((o, v), w) in out.0.iter_mut().zip(v).zip(w) {
                if *w > 0.0 {
                    *o = w * v + (1.0 - w) * *o;
                }
            }
        }
        out
    }
}

fn check_clip(clip: &MotionClip, chain: &KinematicChain) -> Result<()> {
    clip.validate()?;
    clip.check_chain(chain)
}

/// Beat blended with idle under the speech envelope, clamped to joint limits.
pub fn blend_base(chain: &KinematicChain, beat: &MotionClip, idle: &Pose, speech: &SpeechActivity, params: &BlendParams) -> Result<MotionClip> {
    check_clip(beat, chain)?;
    chain.check_pose(idle)?;
    speech.validate()?;
    params.validate()?;
    let env = speech_envelope(speech, beat.len(), beat.fps, params);
    let wi = params.idle_weight;
    let frames = beat
        .frames
        .iter()
        .zip(&env)
        .map(|(b, s)| {
            let mut p = Pose(
                b.0.iter().zip(&idle.0).map(|(bv, iv)| s * (wi * iv + (1.0 - wi) * bv) + (1.0 - s) * iv).collect(),
            );
            chain.clamp_pose(&mut p);
            p
        })
        .collect();
    MotionClip::new(beat.fps, beat.chain_id.clone(), frames)
}

/// Final clip: the blended base with the overlay on top, clamped to joint limits.
pub fn composite(
    chain: &KinematicChain,
    beat: &MotionClip,
    idle: &Pose,
    speech: &SpeechActivity,
    overlay: Option<&Overlay>,
    params: &BlendParams,
) -> Result<MotionClip> {
    let mut clip = blend_base(chain, beat, idle, speech, params)?;
    if let Some(o) = overlay {
        if o.frames() != clip.len() {
            return Err(Error::ShapeMismatch(format!("overlay has {} frames, clip {}", o.frames(), clip.len())));
        }
        for (f, p) in clip.frames.iter_mut().enumerate() {
            *p = o.apply(f, p);
            chain.clamp_pose(p);
        }
    }
    Ok(clip)
}
