//! Upper-body kinematic chain, forward kinematics and motion clips.

mod chain;
mod clip;
mod fk;

pub use chain::{
    Axis, Bone, BoneConfig, ChainConfig, Dof, HandBones, HandConfig, HandsConfig, KinematicChain, Pose,
    Side, DEFAULT_CHAIN,
};
pub use clip::MotionClip;
pub use fk::{forward_kinematics, forward_state, BoneTransform, FkState};

use crate::error::Result;
#[cfg(test)]
use crate::error::Error;

/// Record of the DOF values removed by [`zero_lower_body`], so they can be restored later.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Zeroing {
    removed: Vec<(usize, f64)>,
}

impl Zeroing {
    pub fn removed(&self) -> &[(usize, f64)] {
        &self.removed
    }

    /// Puts the zeroed values back into `pose`.
    pub fn revert(&self, pose: &mut Pose) {
        for &(i, v) in &self.removed {
            pose.0[i] = v;
        }
    }
}

/// Zeroes every DOF whose bone is not in `retained`.
pub fn zero_lower_body(chain: &KinematicChain, pose: &Pose, retained: &[&str]) -> Result<(Pose, Zeroing)> {
    chain.check_pose(pose)?;
    let mut keep = vec![false; chain.bones().len()];
    for name in retained {
        keep[chain.bone_index(name)?] = true;
    }
    let mut out = pose.clone();
    let mut zeroing = Zeroing::default();
    for (b, bone) in chain.bones().iter().enumerate() {
        if keep[b] {
            continue;
        }
        for i in bone.dof_range() {
            zeroing.removed.push((i, out.0[i]));
            out.0[i] = 0.0;
        }
    }
    Ok((out, zeroing))
}

/// Names of the bones that gesture synthesis drives: collar, shoulder, elbow, wrist,
/// palm and every finger bone of both hands.
pub fn retained_bones(chain: &KinematicChain) -> Vec<&str> {
    let mut idx: Vec<usize> = Vec::new();
    for side in [Side::Left, Side::Right] {
        let h = chain.hand(side);
        idx.extend(&h.arm);
        idx.push(h.palm);
        idx.extend(&h.fingers);
    }
    idx.sort_unstable();
    idx.dedup();
    idx.into_iter().map(|b| chain.bone(b).name.as_str()).collect()
}
