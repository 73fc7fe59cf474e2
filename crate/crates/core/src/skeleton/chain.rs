use std::collections::HashMap;
use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rotation axis of a single degree of freedom, expressed in the bone's local frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn unit(self) -> Vector3<f64> {
        match self {
            Axis::X => Vector3::x(),
            Axis::Y => Vector3::y(),
            Axis::Z => Vector3::z(),
        }
    }

    fn from_char(c: char) -> Option<Self> {
        match c.to_ascii_lowercase() {
            'x' => Some(Axis::X),
            'y' => Some(Axis::Y),
            'z' => Some(Axis::Z),
            _ => None,
        }
    }
}

/// One rotational degree of freedom with its joint limits in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dof {
    pub axis: Axis,
    pub min: f64,
    pub max: f64,
}

impl Dof {
    pub fn clamp(&self, value: f64) -> f64 {
        value.clamp(self.min, self.max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bone {
    pub name: String,
    pub parent: Option<usize>,
    /// Rest offset from the parent joint, meters, in the parent's frame.
    pub offset: Vector3<f64>,
    pub dofs: Vec<Dof>,
    /// Index of this bone's first DOF in the flat pose vector.
    pub first_dof: usize,
}

impl Bone {
    pub fn dof_range(&self) -> std::ops::Range<usize> {
        self.first_dof..self.first_dof + self.dofs.len()
    }
}

/// Bones that make up one arm and hand.
#[derive(Debug, Clone, PartialEq)]
pub struct HandBones {
    pub shoulder: usize,
    pub wrist: usize,
    /// Palm-center bone used as the end effector for hand placement.
    pub palm: usize,
    /// Bones whose DOFs are optimized when the hand gestures.
    pub arm: Vec<usize>,
    /// Index finger bones (kept straight for pointing).
    pub index: Vec<usize>,
    /// All finger bones, including the index finger.
    pub fingers: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// A rooted tree of bones with rotational DOFs.
///
/// Bones are stored parent-first, so a single forward pass computes world transforms.
#[derive(Debug, Clone, PartialEq)]
pub struct KinematicChain {
    id: String,
    bones: Vec<Bone>,
    index: HashMap<String, usize>,
    effectors: Vec<usize>,
    left: HandBones,
    right: HandBones,
    dof_count: usize,
}

/// Angles for every DOF of a chain, radians, in chain DOF order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Pose(pub Vec<f64>);

impl Pose {
    pub fn zeros(n: usize) -> Self {
        Pose(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl KinematicChain {
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn bones(&self) -> &[Bone] {
        &self.bones
    }

    pub fn bone(&self, index: usize) -> &Bone {
        &self.bones[index]
    }

    pub fn bone_index(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownBone(name.to_string()))
    }

    pub fn dof_count(&self) -> usize {
        self.dof_count
    }

    pub fn effectors(&self) -> &[usize] {
        &self.effectors
    }

    pub fn hand(&self, side: Side) -> &HandBones {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    pub fn shoulder(&self, side: Side) -> usize {
        self.hand(side).shoulder
    }

    /// Iterator over every DOF with its owning bone index.
    pub fn dofs(&self) -> impl Iterator<Item = (usize, &Dof)> {
        self.bones
            .iter()
            .enumerate()
            .flat_map(|(b, bone)| bone.dofs.iter().map(move |d| (b, d)))
    }

    pub fn dof(&self, index: usize) -> &Dof {
        self.dofs().nth(index).map(|(_, d)| d).expect("dof index in range")
    }

    /// DOF indices belonging to the given bones, in chain order.
    pub fn dofs_of(&self, bones: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = bones
            .iter()
            .flat_map(|&b| self.bones[b].dof_range())
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// True if `ancestor` is `bone` or lies on its parent path.
    pub fn is_ancestor_or_self(&self, ancestor: usize, bone: usize) -> bool {
        let mut cur = Some(bone);
        while let Some(b) = cur {
            if b == ancestor {
                return true;
            }
            cur = self.bones[b].parent;
        }
        false
    }

    pub fn check_pose(&self, pose: &Pose) -> Result<()> {
        if pose.len() != self.dof_count {
            return Err(Error::DofMismatch {
                expected: self.dof_count,
                actual: pose.len(),
            });
        }
        Ok(())
    }

    /// Projects every angle onto its joint limits.
    pub fn clamp_pose(&self, pose: &mut Pose) {
        for (value, (_, dof)) in pose.0.iter_mut().zip(self.dofs()) {
            *value = dof.clamp(*value);
        }
    }

    pub fn within_limits(&self, pose: &Pose, tol: f64) -> bool {
        pose.0
            .iter()
            .zip(self.dofs())
            .all(|(v, (_, d))| *v >= d.min - tol && *v <= d.max + tol)
    }

    /// Builds a chain from a parsed config, resolving names and validating the tree.
    pub fn from_config(config: ChainConfig) -> Result<Self> {
        let mut declared: HashMap<&str, usize> = HashMap::new();
        for (i, b) in config.bones.iter().enumerate() {
            if b.name.is_empty() {
                return Err(Error::Chain(format!("bone #{i} has an empty name")));
            }
            if declared.insert(b.name.as_str(), i).is_some() {
                return Err(Error::Chain(format!("duplicate bone `{}`", b.name)));
            }
        }
        let roots: Vec<&str> = config
            .bones
            .iter()
            .filter(|b| b.parent.is_none())
            .map(|b| b.name.as_str())
            .collect();
        if roots.len() != 1 {
            return Err(Error::Chain(format!(
                "expected exactly one root bone, found {}",
                roots.len()
            )));
        }
        for b in &config.bones {
            if let Some(p) = &b.parent {
                if !declared.contains_key(p.as_str()) {
                    return Err(Error::Chain(format!(
                        "bone `{}` references unknown parent `{p}`",
                        b.name
                    )));
                }
            }
        }

        // Stable topological order: repeatedly take declared bones whose parent is placed.
        let mut order: Vec<usize> = Vec::with_capacity(config.bones.len());
        let mut placed = vec![false; config.bones.len()];
        loop {
            let before = order.len();
            for (i, b) in config.bones.iter().enumerate() {
                if placed[i] {
                    continue;
                }
                let ready = match &b.parent {
                    None => true,
                    Some(p) => placed[declared[p.as_str()]],
                };
                if ready {
                    placed[i] = true;
                    order.push(i);
                }
            }
            if order.len() == config.bones.len() {
                break;
            }
            if order.len() == before {
                return Err(Error::Chain("parent references form a cycle".into()));
            }
        }

        let mut index = HashMap::new();
        for (new, &old) in order.iter().enumerate() {
            index.insert(config.bones[old].name.clone(), new);
        }

        let mut bones = Vec::with_capacity(order.len());
        let mut first_dof = 0;
        for &old in &order {
            let def = &config.bones[old];
            let axes: Vec<Axis> = def
                .axes
                .chars()
                .map(|c| {
                    Axis::from_char(c).ok_or_else(|| {
                        Error::Chain(format!("bone `{}`: bad axis `{c}`", def.name))
                    })
                })
                .collect::<Result<_>>()?;
            if def.limits_deg.len() != axes.len() {
                return Err(Error::Chain(format!(
                    "bone `{}`: {} axes but {} limit pairs",
                    def.name,
                    axes.len(),
                    def.limits_deg.len()
                )));
            }
            let dofs = axes
                .iter()
                .zip(&def.limits_deg)
                .map(|(&axis, &[lo, hi])| {
                    if lo > hi {
                        return Err(Error::Chain(format!(
                            "bone `{}`: limit min {lo} exceeds max {hi}",
                            def.name
                        )));
                    }
                    Ok(Dof {
                        axis,
                        min: lo.to_radians(),
                        max: hi.to_radians(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let n = dofs.len();
            bones.push(Bone {
                name: def.name.clone(),
                parent: def.parent.as_ref().map(|p| index[p.as_str()]),
                offset: Vector3::from(def.offset),
                dofs,
                first_dof,
            });
            first_dof += n;
        }

        let lookup = |name: &str| -> Result<usize> {
            index
                .get(name)
                .copied()
                .ok_or_else(|| Error::Chain(format!("unknown bone `{name}` referenced")))
        };
        let effectors = config
            .effectors
            .iter()
            .map(|n| lookup(n))
            .collect::<Result<Vec<_>>>()?;
        let hand = |h: &HandConfig| -> Result<HandBones> {
            let list = |names: &[String]| names.iter().map(|n| lookup(n)).collect::<Result<Vec<_>>>();
            let palm = lookup(&h.palm)?;
            if !effectors.contains(&palm) {
                return Err(Error::Chain(format!("palm `{}` is not an effector", h.palm)));
            }
            Ok(HandBones {
                shoulder: lookup(&h.shoulder)?,
                wrist: lookup(&h.wrist)?,
                palm,
                arm: list(&h.arm)?,
                index: list(&h.index)?,
                fingers: list(&h.fingers)?,
            })
        };
        let left = hand(&config.hands.left)?;
        let right = hand(&config.hands.right)?;

        Ok(KinematicChain {
            id: config.id,
            bones,
            index,
            effectors,
            left,
            right,
            dof_count: first_dof,
        })
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: ChainConfig = toml::from_str(text).map_err(|e| Error::Config(format!("chain: {e}")))?;
        Self::from_config(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    /// The bundled upper-body chain (collar, shoulder, elbow, wrist and 15 finger bones per hand).
    pub fn default_upper_body() -> Self {
        Self::from_toml_str(DEFAULT_CHAIN).expect("bundled chain config is valid")
    }
}

pub const DEFAULT_CHAIN: &str = include_str!("default_chain.toml");

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub id: String,
    pub effectors: Vec<String>,
    pub hands: HandsConfig,
    pub bones: Vec<BoneConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HandsConfig {
    pub left: HandConfig,
    pub right: HandConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HandConfig {
    pub shoulder: String,
    pub wrist: String,
    pub palm: String,
    pub arm: Vec<String>,
    #[serde(default)]
    pub index: Vec<String>,
    #[serde(default)]
    pub fingers: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoneConfig {
    pub name: String,
    #[serde(default)]
    pub parent: Option<String>,
    pub offset: [f64; 3],
    /// Rotation axes applied in order, e.g. `"zyx"`.
    #[serde(default)]
    pub axes: String,
    /// One `[min, max]` pair per axis, degrees.
    #[serde(default)]
    pub limits_deg: Vec<[f64; 2]>,
}
