use std::collections::BTreeMap;

use nalgebra::{Matrix3, Rotation3, Unit, Vector3};

use super::chain::{KinematicChain, Pose};
use crate::error::Result;

/// World transform of one bone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoneTransform {
    pub position: Vector3<f64>,
    pub rotation: Matrix3<f64>,
}

/// World transforms of every bone plus the world axis and pivot of every DOF.
///
/// The per-DOF data is what the IK gradients need: a DOF rotating about world axis
/// `w` at pivot `o` moves a descendant point `q` with velocity `w × (q − o)`.
#[derive(Debug, Clone)]
pub struct FkState {
    pub transforms: Vec<BoneTransform>,
    pub dof_axes: Vec<Vector3<f64>>,
    pub dof_pivots: Vec<Vector3<f64>>,
}

impl FkState {
    pub fn position(&self, bone: usize) -> Vector3<f64> {
        self.transforms[bone].position
    }
}

fn axis_rotation(axis: Vector3<f64>, angle: f64) -> Matrix3<f64> {
    Rotation3::from_axis_angle(&Unit::new_unchecked(axis), angle).into_inner()
}

/// Forward kinematics with per-DOF world axes.
pub fn forward_state(chain: &KinematicChain, pose: &Pose) -> Result<FkState> {
    chain.check_pose(pose)?;
    let n = chain.bones().len();
    let mut transforms: Vec<BoneTransform> = Vec::with_capacity(n);
    let mut dof_axes = Vec::with_capacity(chain.dof_count());
    let mut dof_pivots = Vec::with_capacity(chain.dof_count());
    for bone in chain.bones() {
        let (parent_pos, parent_rot) = match bone.parent {
            Some(p) => (transforms[p].position, transforms[p].rotation),
            None => (Vector3::zeros(), Matrix3::identity()),
        };
        let position = parent_pos + parent_rot * bone.offset;
        let mut rotation = parent_rot;
        for (k, dof) in bone.dofs.iter().enumerate() {
            let local = dof.axis.unit();
            dof_axes.push(rotation * local);
            dof_pivots.push(position);
            rotation *= axis_rotation(local, pose.0[bone.first_dof + k]);
        }
        transforms.push(BoneTransform { position, rotation });
    }
    Ok(FkState {
        transforms,
        dof_axes,
        dof_pivots,
    })
}

/// World transform for every bone, keyed by bone name.
///
/// Root sits at its rest offset (the origin for the bundled chain); each child is its
/// parent's transform composed with the rest offset, then the bone's DOF rotations
/// in declared axis order.
pub fn forward_kinematics(
    chain: &KinematicChain,
    pose: &Pose,
) -> Result<BTreeMap<String, BoneTransform>> {
    let state = forward_state(chain, pose)?;
    Ok(chain
        .bones()
        .iter()
        .zip(state.transforms)
        .map(|(b, t)| (b.name.clone(), t))
        .collect())
}
