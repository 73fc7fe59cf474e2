//! Phase allocation and temporal placement of plans.

use serde::{Deserialize, Serialize};

use super::plan::{GesturePlan, PhaseWindows, PlanSource};
use crate::error::{Error, Result};

/// Fractions of a plan's frames per phase: preparation, stroke, hold, retraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseShares {
    pub preparation: f64,
    pub stroke: f64,
    pub hold: f64,
    pub retraction: f64,
}

impl PhaseShares {
    pub const TRAJECTORY: PhaseShares = PhaseShares { preparation: 0.20, stroke: 0.55, hold: 0.05, retraction: 0.20 };
    pub const POINTING: PhaseShares = PhaseShares { preparation: 0.40, stroke: 0.0, hold: 0.40, retraction: 0.20 };

    /// Shares in thousandths, so allocation is exact integer arithmetic.
    pub fn per_mille(&self) -> Result<[u64; 4]> {
        let raw = [self.preparation, self.stroke, self.hold, self.retraction];
        if raw.iter().any(|s| !(0.0..=1.0).contains(s)) {
            return Err(Error::Config(format!("phase shares must lie in [0, 1]: {raw:?}")));
        }
        let pm = raw.map(|s| (s * 1000.0).round() as u64);
        if pm.iter().sum::<u64>() != 1000 {
            return Err(Error::Config(format!("phase shares must sum to 1: {raw:?}")));
        }
        Ok(pm)
    }
}

/// Splits `total` frames by largest remainder. Ties in the remainder go to the earlier
/// phase. The lengths always sum to `total`.
pub fn allocate_phases(total: usize, shares: &PhaseShares) -> Result<[usize; 4]> {
    let pm = shares.per_mille()?;
    let t = total as u64;
    let mut out = [0usize; 4];
    let mut rem = [0u64; 4];
    for i in 0..4 {
        out[i] = (t * pm[i] / 1000) as usize;
        rem[i] = t * pm[i] % 1000;
    }
    let mut left = total - out.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| rem[b].cmp(&rem[a]).then(a.cmp(&b)));
    for &i in &order {
        if left == 0 {
            break;
        }
        if rem[i] > 0 {
            out[i] += 1;
            left -= 1;
        }
    }
    debug_assert_eq!(left, 0);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleParams {
    pub trajectory_shares: PhaseShares,
    pub pointing_shares: PhaseShares,
    /// Seconds.
    pub min_duration_automatic: f64,
    pub min_duration_manual: f64,
}

impl Default for ScheduleParams {
    fn default() -> Self {
        ScheduleParams {
            trajectory_shares: PhaseShares::TRAJECTORY,
            pointing_shares: PhaseShares::POINTING,
            min_duration_automatic: 3.0,
            min_duration_manual: 2.0,
        }
    }
}

impl ScheduleParams {
    pub fn validate(&self) -> Result<()> {
        self.trajectory_shares.per_mille()?;
        self.pointing_shares.per_mille()?;
        if !(self.min_duration_automatic > 0.0 && self.min_duration_manual > 0.0) {
            return Err(Error::Config("minimum durations must be positive".into()));
        }
        Ok(())
    }

    pub fn min_duration(&self, source: PlanSource) -> f64 {
        match source {
            PlanSource::Automatic => self.min_duration_automatic,
            PlanSource::Manual => self.min_duration_manual,
        }
    }
}

/// Frame count for a duration, never below the source's minimum.
pub fn plan_frames(duration: f64, source: PlanSource, fps: u32, params: &ScheduleParams) -> usize {
    let secs = duration.max(params.min_duration(source));
    (secs * fps as f64 - 1e-9).ceil().max(1.0) as usize
}

/// Places every plan in the clip and returns warnings.
///
/// The stroke (hold for pointing plans) starts on the frame of the focus word. Plans that
/// would run off either end are shifted inside the clip; plans longer than the clip are
/// left unscheduled. The returned order is the solve order: ascending priority, stable.
pub fn schedule(plans: &mut [GesturePlan], clip_frames: usize, fps: u32, params: &ScheduleParams) -> Result<(Vec<usize>, Vec<String>)> {
    params.validate()?;
    if fps == 0 {
        return Err(Error::InvalidArgument("fps must be positive".into()));
    }
    let mut warnings = Vec::new();
    for plan in plans.iter_mut() {
        let total = plan_frames(plan.duration, plan.source, fps, params);
        let shares = if plan.category.is_pointing() { &params.pointing_shares } else { &params.trajectory_shares };
        let lengths = allocate_phases(total, shares)?;
        if total > clip_frames {
            warnings.push(format!("plan {} needs {total} frames but the clip has {clip_frames}; skipped", plan.id));
            plan.phases = None;
            continue;
        }
        let onset = (plan.focus_time * fps as f64).round();
        let wanted = onset - lengths[0] as f64;
        let max_start = (clip_frames - total) as f64;
        let start = wanted.clamp(0.0, max_start);
        if start != wanted {
            warnings.push(format!("plan {} shifted from frame {wanted} to {start} to fit the clip", plan.id));
        }
        plan.phases = Some(PhaseWindows::from_lengths(start as usize, lengths));
    }
    let mut order: Vec<usize> = (0..plans.len()).filter(|&i| plans[i].phases.is_some()).collect();
    order.sort_by(|&a, &b| plans[a].priority.total_cmp(&plans[b].priority));
    Ok((order, warnings))
}
