//! Single-pose point reaching by damped least squares.

use nalgebra::{DMatrix, DVector, Vector3};

use crate::error::{Error, Result};
use crate::skeleton::{forward_state, KinematicChain, Pose};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReachParams {
    pub max_iterations: usize,
    /// Damping, meters.
    pub damping: f64,
    /// Largest change of any DOF per iteration, radians.
    pub max_step: f64,
    /// Stop when every effector is this close, meters.
    pub tolerance: f64,
}

impl Default for ReachParams {
    fn default() -> Self {
        ReachParams { max_iterations: 200, damping: 0.03, max_step: 0.2, tolerance: 1e-4 }
    }
}

/// Moves the `active` DOFs of `pose` so each `(bone, target)` pair's bone lands on its
/// target, staying inside the joint limits. Returns the largest remaining distance.
///
/// DOFs resting on a limit are frozen for any step that would push them further out.
/// Like any local method it can stall at a straight-arm singularity; callers retry from
/// another seed.
pub fn reach(chain: &KinematicChain, pose: &mut Pose, active: &[usize], targets: &[(usize, Vector3<f64>)], params: &ReachParams) -> Result<f64> {
    chain.check_pose(pose)?;
    if let Some(&(b, _)) = targets.iter().find(|(b, _)| *b >= chain.bones().len()) {
        return Err(Error::InvalidArgument(format!("bone {b} out of range")));
    }
    let owner: Vec<usize> = active
        .iter()
        .map(|&k| chain.bones().iter().position(|b| b.dof_range().contains(&k)).ok_or_else(|| Error::InvalidArgument(format!("DOF {k} out of range"))))
        .collect::<Result<_>>()?;
    let m = 3 * targets.len();
    let distance = |pose: &Pose| -> Result<f64> {
        let fk = forward_state(chain, pose)?;
        Ok(targets.iter().map(|(b, t)| (t - fk.position(*b)).norm()).fold(0.0, f64::max))
    };
    let lambda2 = params.damping * params.damping;
    for _ in 0..params.max_iterations {
        let fk = forward_state(chain, pose)?;
        let mut err = DVector::zeros(m);
        let mut worst = 0.0f64;
        for (t, (bone, target)) in targets.iter().enumerate() {
            let e = target - fk.position(*bone);
            worst = worst.max(e.norm());
            err.fixed_rows_mut::<3>(3 * t).copy_from(&e);
        }
        if worst < params.tolerance {
            break;
        }
        let mut full = DMatrix::zeros(m, active.len());
        for (c, &k) in active.iter().enumerate() {
            for (t, (bone, _)) in targets.iter().enumerate() {
                if chain.is_ancestor_or_self(owner[c], *bone) {
                    let v = fk.dof_axes[k].cross(&(fk.position(*bone) - fk.dof_pivots[k]));
                    full.fixed_view_mut::<3, 1>(3 * t, c).copy_from(&v);
                }
            }
        }
        // Active set: a DOF on a limit whose step points outward is frozen and the step recomputed.
        let mut free = vec![true; active.len()];
        let mut step = DVector::zeros(active.len());
        for _ in 0..=active.len() {
            let mut jac = full.clone();
            for (c, f) in free.iter().enumerate() {
                if !f {
                    jac.column_mut(c).fill(0.0);
                }
            }
            let jjt = &jac * jac.transpose() + DMatrix::identity(m, m) * lambda2;
            let Some(y) = jjt.lu().solve(&err) else {
                break;
            };
            step = jac.transpose() * y;
            let mut changed = false;
            for (c, &k) in active.iter().enumerate() {
                let d = chain.dof(k);
                let v = pose.0[k];
                if free[c] && ((v >= d.max && step[c] > 0.0) || (v <= d.min && step[c] < 0.0)) {
                    free[c] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let biggest = step.amax();
        if biggest < 1e-12 {
            break;
        }
        if biggest > params.max_step {
            step *= params.max_step / biggest;
        }
        for (c, &k) in active.iter().enumerate() {
            pose.0[k] = chain.dof(k).clamp(pose.0[k] + step[c]);
        }
    }
    distance(pose)
}
