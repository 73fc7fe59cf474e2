use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::skeleton::{KinematicChain, Pose};

/// Weights of the four objective terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObjectiveWeights {
    pub distance: f64,
    pub known: f64,
    /// Velocity, acceleration and jerk.
    pub derivative: [f64; 3],
    pub direction: f64,
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        ObjectiveWeights { distance: 1.0, known: 0.5, derivative: [0.1, 0.05, 0.01], direction: 0.3 }
    }
}

impl ObjectiveWeights {
    pub fn validate(&self) -> Result<()> {
        let all = [self.distance, self.known, self.derivative[0], self.derivative[1], self.derivative[2], self.direction];
        if all.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidArgument(format!("objective weights must be finite and >= 0: {all:?}")));
        }
        if all.iter().all(|w| *w == 0.0) {
            return Err(Error::InvalidArgument("at least one objective weight must be positive".into()));
        }
        Ok(())
    }

    pub fn only_known(w: f64) -> Self {
        ObjectiveWeights { distance: 0.0, known: w, derivative: [0.0; 3], direction: 0.0 }
    }
}

/// Effector position target at one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointTarget {
    pub frame: usize,
    pub bone: usize,
    pub target: Vector3<f64>,
}

/// Desired angles for the optimized DOFs at one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct KnownPose {
    pub frame: usize,
    pub pose: Pose,
}

/// Align a bone's local axis, mapped to world, with a target direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionTarget {
    pub frame: usize,
    pub bone: usize,
    pub local_axis: Vector3<f64>,
    pub direction: Vector3<f64>,
}

/// Trajectory IK problem over `initial.len()` frames.
///
/// Only the DOFs listed in `active` are optimized; every other DOF keeps its value from
/// `initial`. The known-pose and derivative terms are taken over the active DOFs.
#[derive(Debug, Clone)]
pub struct IkProblem<'a> {
    pub chain: &'a KinematicChain,
    pub initial: Vec<Pose>,
    pub active: Vec<usize>,
    pub points: Vec<PointTarget>,
    pub known: Vec<KnownPose>,
    pub directions: Vec<DirectionTarget>,
    pub weights: ObjectiveWeights,
}

impl<'a> IkProblem<'a> {
    /// Problem with every DOF active and no targets.
    pub fn new(chain: &'a KinematicChain, initial: Vec<Pose>, weights: ObjectiveWeights) -> Self {
        IkProblem {
            chain,
            initial,
            active: (0..chain.dof_count()).collect(),
            points: Vec::new(),
            known: Vec::new(),
            directions: Vec::new(),
            weights,
        }
    }

    pub fn frames(&self) -> usize {
        self.initial.len()
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.frames();
        let nb = self.chain.bones().len();
        if t == 0 {
            return Err(Error::ShapeMismatch("trajectory needs at least one frame".into()));
        }
        for p in &self.initial {
            self.chain.check_pose(p)?;
        }
        self.weights.validate()?;
        if let Some(&a) = self.active.iter().find(|&&a| a >= self.chain.dof_count()) {
            return Err(Error::ShapeMismatch(format!("active DOF {a} out of range")));
        }
        if self.active.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::ShapeMismatch("active DOFs must be strictly increasing".into()));
        }
        for p in &self.points {
            if p.frame >= t || p.bone >= nb || !p.target.iter().all(|v| v.is_finite()) {
                return Err(Error::ShapeMismatch(format!("bad point target at frame {}", p.frame)));
            }
            if !self.chain.effectors().contains(&p.bone) {
                return Err(Error::ShapeMismatch(format!(
                    "bone `{}` is not an effector",
                    self.chain.bone(p.bone).name
                )));
            }
        }
        for k in &self.known {
            if k.frame >= t {
                return Err(Error::ShapeMismatch(format!("known pose frame {} out of range", k.frame)));
            }
            self.chain.check_pose(&k.pose)?;
        }
        for d in &self.directions {
            if d.frame >= t || d.bone >= nb {
                return Err(Error::ShapeMismatch(format!("bad direction target at frame {}", d.frame)));
            }
            if d.local_axis.norm() == 0.0 || d.direction.norm() == 0.0 {
                return Err(Error::ZeroDirection(self.chain.bone(d.bone).name.clone()));
            }
        }
        Ok(())
    }

    pub fn check_trajectory(&self, traj: &[Pose]) -> Result<()> {
        if traj.len() != self.frames() {
            return Err(Error::ShapeMismatch(format!("trajectory has {} frames, problem {}", traj.len(), self.frames())));
        }
        for p in traj {
            self.chain.check_pose(p)?;
        }
        Ok(())
    }
}
