//! Trajectory inverse kinematics.
//!
//! The objective combines effector distance, closeness to known poses, smoothness
//! (velocity, acceleration, jerk) and bone direction alignment. It is minimized by
//! projected gradient descent inside the joint limits, using analytic gradients.

mod objectives;
mod problem;
mod reach;
mod solver;

pub use objectives::{angle_between, eval_objectives, finite_difference_coefficients, objective_gradient, CostBreakdown, Objective};
pub use problem::{DirectionTarget, IkProblem, KnownPose, ObjectiveWeights, PointTarget};
pub use reach::{reach, ReachParams};
pub use solver::{solve, IkSolution, SolveReport, SolverParams, StopReason};
