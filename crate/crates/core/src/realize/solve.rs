//! IK realization of scheduled plans into an overlay.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::composite::Overlay;
use super::plan::{FrameRange, GestureCategory, GesturePlan, HandShape, PhaseWindows};
use super::timing::{linear_stretch, timing_optimize, TimingResult};
use crate::error::{Error, Result};
use crate::ik::{reach, solve, ReachParams, CostBreakdown, DirectionTarget, IkProblem, KnownPose, ObjectiveWeights, PointTarget, SolverParams, StopReason};
use crate::skeleton::{forward_state, Axis, KinematicChain, MotionClip, Pose, Side};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveParams {
    pub weights: ObjectiveWeights,
    pub solver: SolverParams,
    /// Iteration cap of the per-frame warm start.
    pub warm_start_iterations: usize,
    /// Pull toward the underlying motion during the warm start.
    pub regularization: f64,
    /// Frames of ease at each end of a plan's overlay.
    pub seam_frames: usize,
    /// Fractional duration band searched by the timing optimizer.
    pub timing_range: f64,
    /// Mean stroke tracking error, meters, under which a plan counts as converged. The
    /// solver's own stop reason is reported separately.
    pub tracking_tolerance: f64,
}

impl Default for SolveParams {
    fn default() -> Self {
        SolveParams {
            weights: ObjectiveWeights::default(),
            solver: SolverParams::default(),
            warm_start_iterations: 150,
            regularization: 0.02,
            seam_frames: 5,
            timing_range: 0.25,
            tracking_tolerance: 0.02,
        }
    }
}

impl SolveParams {
    pub fn validate(&self) -> Result<()> {
        self.weights.validate().map_err(|e| Error::Config(e.to_string()))?;
        if !(self.timing_range > 0.0 && self.timing_range < 1.0) {
            return Err(Error::Config(format!("timing_range {} outside (0, 1)", self.timing_range)));
        }
        if !(self.regularization >= 0.0 && self.tracking_tolerance > 0.0 && self.solver.tolerance > 0.0) {
            return Err(Error::Config("regularization, tracking_tolerance and solver tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// What happened to one plan during realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanOutcome {
    pub plan: String,
    pub skipped: bool,
    pub converged: bool,
    pub stop_reason: Option<StopReason>,
    pub iterations: usize,
    pub final_cost: Option<CostBreakdown>,
    /// Mean effector-to-target distance over the stroke (hold for pointing plans), meters.
    pub tracking_error: Option<f64>,
    pub timing: Option<TimingResult>,
    /// Frames written into the overlay.
    pub frames: Option<FrameRange>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub trajectory: Vec<Pose>,
}

fn smoothstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * (3.0 - 2.0 * u)
}

fn lerp(a: Vector3<f64>, b: Vector3<f64>, u: f64) -> Vector3<f64> {
    a + (b - a) * u
}

/// Resamples a polyline to `n` points evenly spaced by arc length.
pub fn resample_by_arc_length(path: &[Vector3<f64>], n: usize) -> Vec<Vector3<f64>> {
    if n == 0 || path.is_empty() {
        return Vec::new();
    }
    if path.len() == 1 || n == 1 {
        return vec![path[0]; n];
    }
    let mut cum = vec![0.0];
    for w in path.windows(2) {
        cum.push(cum.last().unwrap() + (w[1] - w[0]).norm());
    }
    let total = *cum.last().unwrap();
    if total == 0.0 {
        return vec![path[0]; n];
    }
    let mut seg = 0;
    (0..n)
        .map(|i| {
            let s = total * i as f64 / (n - 1) as f64;
            while seg + 2 < cum.len() && cum[seg + 1] < s {
                seg += 1;
            }
            let len = cum[seg + 1] - cum[seg];
            let u = if len > 0.0 { (s - cum[seg]) / len } else { 0.0 };
            lerp(path[seg], path[seg + 1], u.clamp(0.0, 1.0))
        })
        .collect()
}

/// Local palm normal at rest: palms face the body.
pub fn palm_normal_local(side: Side) -> Vector3<f64> {
    match side {
        Side::Left => Vector3::new(-1.0, 0.0, 0.0),
        Side::Right => Vector3::new(1.0, 0.0, 0.0),
    }
}

/// Finger DOF values for a hand shape. Curl direction follows each joint's wider limit.
pub fn hand_shape_values(chain: &KinematicChain, side: Side, shape: HandShape) -> Vec<(usize, f64)> {
    let hand = chain.hand(side);
    let mut out = Vec::new();
    for &b in &hand.fingers {
        let is_index = hand.index.contains(&b);
        for i in chain.bone(b).dof_range() {
            let d = chain.dof(i);
            let extreme = if d.max.abs() >= d.min.abs() { d.max } else { d.min };
            let v = match shape {
                HandShape::Flat => 0.0,
                HandShape::Point if is_index => 0.0,
                HandShape::Point => 0.8 * extreme,
                HandShape::Cup => 0.3 * extreme,
            };
            out.push((i, d.clamp(v)));
        }
    }
    out
}

fn effector(chain: &KinematicChain, plan: &GesturePlan, side: Side) -> usize {
    let h = chain.hand(side);
    if plan.category == GestureCategory::Position {
        h.wrist
    } else {
        h.palm
    }
}

struct HandTargets {
    side: Side,
    bone: usize,
    /// One target per plan frame.
    points: Vec<Vector3<f64>>,
    palm: Vector3<f64>,
    fingers: Vec<(usize, f64)>,
}

fn hand_targets(
    chain: &KinematicChain,
    plan: &GesturePlan,
    ph: &PhaseWindows,
    side: Side,
    entry: &Pose,
    exit: &Pose,
) -> Result<HandTargets> {
    let bone = effector(chain, plan, side);
    let world = plan.world_path(side);
    if world.is_empty() {
        return Err(Error::InvalidArgument(format!("plan {} has no path for the {side:?} hand", plan.id)));
    }
    let [p, k, h, r] = ph.lengths();
    let stroke = if plan.category.is_pointing() { Vec::new() } else { resample_by_arc_length(&world, k) };
    let hold_target = stroke.last().copied().unwrap_or(if plan.category.is_pointing() { world[0] } else { *world.last().unwrap() });
    let first = stroke.first().copied().unwrap_or(hold_target);
    let entry_pos = forward_state(chain, entry)?.position(bone);
    let exit_pos = forward_state(chain, exit)?.position(bone);
    let mut points = Vec::with_capacity(ph.len());
    points.extend((0..p).map(|i| lerp(entry_pos, first, smoothstep((i + 1) as f64 / p as f64))));
    if plan.category.is_pointing() {
        points.extend(std::iter::repeat_n(hold_target, k));
    } else {
        points.extend(stroke);
    }
    points.extend(std::iter::repeat_n(hold_target, h));
    points.extend((0..r).map(|i| lerp(hold_target, exit_pos, smoothstep((i + 1) as f64 / r as f64))));
    let path = plan.path(side).expect("checked above");
    Ok(HandTargets {
        side,
        bone,
        points,
        palm: Vector3::from(path.palm),
        fingers: hand_shape_values(chain, side, plan.hand_shape),
    })
}

/// Finger values at one plan frame: blend in during preparation, out during retraction.
fn finger_weight(ph: &PhaseWindows, local: usize) -> f64 {
    let [p, k, h, r] = ph.lengths();
    if local < p {
        smoothstep((local + 1) as f64 / p as f64)
    } else if local < p + k + h {
        1.0
    } else {
        1.0 - smoothstep((local - p - k - h + 1) as f64 / r.max(1) as f64)
    }
}

/// `base` with the active arm DOFs in a neutral reaching posture: upper arm raised
/// forward, joints between shoulder and wrist bent. Restart seed for the point reach.
fn ready_pose(chain: &KinematicChain, base: &Pose, active: &[usize]) -> Pose {
    let mut pose = base.clone();
    for &i in active {
        pose.0[i] = 0.0;
    }
    for side in [Side::Left, Side::Right] {
        let h = chain.hand(side);
        let shoulder = chain.shoulder(side);
        let (Some(s), Some(w)) = (h.arm.iter().position(|&b| b == shoulder), h.arm.iter().position(|&b| b == h.wrist)) else {
            continue;
        };
        for (n, &b) in h.arm.iter().enumerate().take(w).skip(s) {
            let angle = if n == s { -45f64 } else { -90.0 };
            let bone = chain.bone(b);
            if let Some(k) = bone.dofs.iter().position(|d| d.axis == Axis::X) {
                let i = bone.first_dof + k;
                if active.contains(&i) {
                    pose.0[i] = angle.to_radians();
                }
            }
        }
    }
    chain.clamp_pose(&mut pose);
    pose
}

struct PlanSolve {
    trajectory: Vec<Pose>,
    stop_reason: StopReason,
    iterations: usize,
    final_cost: CostBreakdown,
    tracking: f64,
    timing: Option<TimingResult>,
    written: Vec<usize>,
    warnings: Vec<String>,
}

fn solve_plan(
    chain: &KinematicChain,
    plan: &GesturePlan,
    current: &[Pose],
    beat: &MotionClip,
    clip_frames: usize,
    params: &SolveParams,
) -> Result<PlanSolve> {
    let ph = plan.phases.ok_or_else(|| Error::InvalidArgument(format!("plan {} is not scheduled", plan.id)))?;
    let t = ph.len();
    let window = &current[ph.start()..ph.end()];
    let (entry, exit) = (&window[0], &window[t - 1]);
    let sides = plan.hands.sides();
    let mut active: Vec<usize> = sides.iter().flat_map(|s| chain.dofs_of(&chain.hand(*s).arm)).collect();
    active.sort_unstable();
    active.dedup();
    let hands: Vec<HandTargets> = sides.iter().map(|s| hand_targets(chain, plan, &ph, *s, entry, exit)).collect::<Result<_>>()?;
    let [p, k, h, _] = ph.lengths();
    let directed = |local: usize| local >= p && local < p + k + h;

    // Underlying motion with the hand shape blended in.
    let mut guide: Vec<Pose> = window.to_vec();
    for (local, pose) in guide.iter_mut().enumerate() {
        let w = finger_weight(&ph, local);
        for hand in &hands {
            for &(i, v) in &hand.fingers {
                pose.0[i] = (1.0 - w) * pose.0[i] + w * v;
            }
        }
    }

    let frame_targets = |local: usize, frame: usize| -> (Vec<PointTarget>, Vec<DirectionTarget>) {
        let pts = hands.iter().map(|hd| PointTarget { frame, bone: hd.bone, target: hd.points[local] }).collect();
        let dirs = if directed(local) {
            hands
                .iter()
                .filter(|hd| hd.palm.norm() > 0.0)
                .map(|hd| DirectionTarget {
                    frame,
                    bone: chain.hand(hd.side).palm,
                    local_axis: palm_normal_local(hd.side),
                    direction: hd.palm,
                })
                .collect()
        } else {
            Vec::new()
        };
        (pts, dirs)
    };

    // Warm start: independent per-frame solves, each seeded with the previous answer.
    let warm_weights = ObjectiveWeights {
        distance: params.weights.distance.max(1e-3),
        known: params.regularization,
        derivative: [0.0; 3],
        direction: params.weights.direction,
    };
    let warm_params = SolverParams { max_iterations: params.warm_start_iterations, ..params.solver };
    let mut warm: Vec<Pose> = Vec::with_capacity(t);
    for local in 0..t {
        let mut init = guide[local].clone();
        if let Some(prev) = warm.last() {
            for &i in &active {
                init.0[i] = prev.0[i];
            }
        }
        // Position first, then palm direction from there.
        let (pts, dirs) = frame_targets(local, 0);
        let goals: Vec<(usize, Vector3<f64>)> = pts.iter().map(|t| (t.bone, t.target)).collect();
        let rp = ReachParams::default();
        let missed = reach(chain, &mut init, &active, &goals, &rp)?;
        if missed > params.tracking_tolerance * 0.1 {
            let mut alt = ready_pose(chain, &guide[local], &active);
            if reach(chain, &mut alt, &active, &goals, &rp)? < missed {
                init = alt;
            }
        }
        let mut pose = vec![init.clone()];
        if !dirs.is_empty() {
            let mut prob = IkProblem::new(chain, pose, warm_weights);
            prob.active = active.clone();
            prob.points = pts;
            prob.directions = dirs;
            prob.known = vec![KnownPose { frame: 0, pose: init }];
            pose = solve(&prob, &warm_params)?.trajectory;
        }
        warm.push(pose.pop().expect("one frame"));
    }

    // Joint refinement with smoothness and the entry and exit poses.
    let mut prob = IkProblem::new(chain, warm, params.weights);
    prob.active = active.clone();
    for local in 0..t {
        let (pts, dirs) = frame_targets(local, local);
        prob.points.extend(pts);
        prob.directions.extend(dirs);
    }
    prob.known = vec![KnownPose { frame: 0, pose: entry.clone() }, KnownPose { frame: t - 1, pose: exit.clone() }];
    let sol = solve(&prob, &params.solver)?;
    let mut traj = sol.trajectory;

    let tracked = if plan.category.is_pointing() { p + k..p + k + h } else { p..p + k };
    let mut err_sum = 0.0;
    let mut err_n = 0usize;
    for local in tracked.clone() {
        let fk = forward_state(chain, &traj[local])?;
        for hd in &hands {
            err_sum += (fk.position(hd.bone) - hd.points[local]).norm();
            err_n += 1;
        }
    }
    let tracking = if err_n > 0 { err_sum / err_n as f64 } else { 0.0 };

    let mut warnings = Vec::new();
    let mut timing = None;
    if !plan.category.is_pointing() && k >= 2 {
        let pick = |frames: &[Pose]| -> Vec<Vec<f64>> { frames.iter().map(|f| active.iter().map(|&i| f.0[i]).collect()).collect() };
        let seg = pick(&traj[p..p + k]);
        let beat_start = ph.stroke.start.min(beat.len());
        let reference = pick(&beat.frames[beat_start..]);
        let res = timing_optimize(&seg, &reference, beat.fps as f64, params.timing_range)?;
        if res.fallback {
            warnings.push(format!("plan {}: beat window too short for timing search", plan.id));
        } else if res.chosen != k {
            let new_len = t - k + res.chosen;
            if ph.start() + new_len > clip_frames {
                warnings.push(format!("plan {}: stretched stroke would overrun the clip; kept {k} frames", plan.id));
            } else {
                let full: Vec<Vec<f64>> = traj[p..p + k].iter().map(|f| f.0.clone()).collect();
                let stretched = linear_stretch(&full, res.chosen).into_iter().map(Pose);
                let mut out: Vec<Pose> = traj[..p].to_vec();
                out.extend(stretched);
                out.extend_from_slice(&traj[p + k..]);
                traj = out;
            }
        }
        timing = Some(res);
    }

    let mut written = active;
    for hd in &hands {
        written.extend(hd.fingers.iter().map(|(i, _)| *i));
    }
    written.sort_unstable();
    written.dedup();
    Ok(PlanSolve {
        trajectory: traj,
        stop_reason: sol.report.reason,
        iterations: sol.report.iterations,
        final_cost: sol.report.final_cost,
        tracking,
        timing,
        written,
        warnings,
    })
}

/// Ease weight of overlay frame `local` out of `len` with `seam` frames at each end.
pub fn seam_weight(local: usize, len: usize, seam: usize) -> f64 {
    if seam == 0 {
        return 1.0;
    }
    let d = (local + 1).min(len - local) as f64 / (seam + 1) as f64;
    smoothstep(d.min(1.0))
}

/// Solves every scheduled plan in `order` (ascending priority) on top of `base`, layering
/// results so later plans override earlier ones. A plan whose solve fails or does not
/// converge leaves the overlay untouched.
pub fn solve_plans(
    chain: &KinematicChain,
    plans: &[GesturePlan],
    order: &[usize],
    base: &MotionClip,
    beat: &MotionClip,
    params: &SolveParams,
) -> Result<(Overlay, Vec<PlanOutcome>)> {
    params.validate()?;
    base.check_chain(chain)?;
    beat.check_chain(chain)?;
    if base.fps != beat.fps {
        return Err(Error::FpsMismatch(base.fps, beat.fps));
    }
    let n = base.len();
    let mut overlay = Overlay::new(n, chain.dof_count());
    let mut outcomes = Vec::with_capacity(order.len());
    for &idx in order {
        let plan = &plans[idx];
        let mut outcome = PlanOutcome {
            plan: plan.id.clone(),
            skipped: true,
            converged: false,
            stop_reason: None,
            iterations: 0,
            final_cost: None,
            tracking_error: None,
            timing: None,
            frames: None,
            warnings: Vec::new(),
            trajectory: Vec::new(),
        };
        let Some(ph) = plan.phases else {
            outcome.warnings.push("not scheduled".into());
            outcomes.push(outcome);
            continue;
        };
        if ph.end() > n || ph.is_empty() {
            outcome.warnings.push(format!("window {}..{} outside clip of {n} frames", ph.start(), ph.end()));
            outcomes.push(outcome);
            continue;
        }
        let current: Vec<Pose> = (0..n).map(|f| overlay.apply(f, &base.frames[f])).collect();
        match solve_plan(chain, plan, &current, beat, n, params) {
            Err(e) => {
                log::warn!("plan {} skipped: {e}", plan.id);
                outcome.warnings.push(format!("solve failed: {e}"));
            }
            Ok(s) => {
                outcome.stop_reason = Some(s.stop_reason);
                outcome.iterations = s.iterations;
                outcome.final_cost = Some(s.final_cost);
                outcome.tracking_error = Some(s.tracking);
                outcome.timing = s.timing;
                outcome.warnings.extend(s.warnings);
                outcome.converged = s.tracking < params.tracking_tolerance;
                if outcome.converged {
                    let len = s.trajectory.len();
                    for (local, pose) in s.trajectory.iter().enumerate() {
                        let w = seam_weight(local, len, params.seam_frames);
                        for &i in &s.written {
                            overlay.write(ph.start() + local, i, pose.0[i], w);
                        }
                    }
                    outcome.frames = Some(FrameRange { start: ph.start(), end: ph.start() + len });
                    outcome.skipped = false;
                    outcome.trajectory = s.trajectory;
                } else {
                    log::warn!("plan {} skipped: solver did not converge (tracking {:.3} m)", plan.id, s.tracking);
                    outcome.warnings.push("did not converge".into());
                }
            }
        }
        outcomes.push(outcome);
    }
    Ok((overlay, outcomes))
}
