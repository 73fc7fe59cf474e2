//! Gesture realization: planning, scheduling, IK solving, timing and compositing.
//!
//! Plans come from annotated phrases and analyzed scene objects. Each is placed so its
//! stroke starts on the focus word, solved by trajectory IK on top of the blended beat
//! motion, re-timed against the beat kinematics, and layered into an overlay that the
//! compositor applies to the beat/idle blend.

mod composite;
mod plan;
mod schedule;
mod solve;
mod timing;

pub use composite::{blend_base, composite, speech_envelope, BlendParams, Overlay, SpeechActivity};
pub use plan::{
    normalize_path, plan_from_annotation, plan_origin, rest_shoulders, FrameRange, GestureCategory, GesturePlan, HandPath,
    HandShape, HandUse, NormalizationVolume, PathMap, PhaseWindows, PlanParams, PlanSource,
};
pub use schedule::{allocate_phases, plan_frames, schedule, PhaseShares, ScheduleParams};
pub use solve::{
    hand_shape_values, palm_normal_local, resample_by_arc_length, seam_weight, solve_plans, PlanOutcome, SolveParams,
};
pub use timing::{candidate_range, forward_difference, kinematic_distance, linear_stretch, timing_optimize, TimingResult};
