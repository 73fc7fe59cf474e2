use std::path::Path;

use serde::{Deserialize, Serialize};

use super::chain::{KinematicChain, Pose};
use crate::error::{Error, Result};

/// Frame-indexed joint-angle trajectory at a fixed frame rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionClip {
    pub fps: u32,
    pub chain_id: String,
    pub dof_count: usize,
    pub frames: Vec<Pose>,
}

impl MotionClip {
    pub fn new(fps: u32, chain_id: impl Into<String>, frames: Vec<Pose>) -> Result<Self> {
        let dof_count = frames.first().map(Pose::len).unwrap_or(0);
        let clip = MotionClip {
            fps,
            chain_id: chain_id.into(),
            dof_count,
            frames,
        };
        clip.validate()?;
        Ok(clip)
    }

    /// A clip holding `pose` for `frames` frames.
    pub fn constant(fps: u32, chain_id: impl Into<String>, pose: &Pose, frames: usize) -> Result<Self> {
        Self::new(fps, chain_id, vec![pose.clone(); frames])
    }

    pub fn validate(&self) -> Result<()> {
        if self.fps == 0 {
            return Err(Error::InvalidArgument("clip fps must be positive".into()));
        }
        if self.frames.is_empty() {
            return Err(Error::InvalidArgument("clip has no frames".into()));
        }
        if let Some((i, f)) = self.frames.iter().enumerate().find(|(_, f)| f.len() != self.dof_count) {
            return Err(Error::InvalidArgument(format!(
                "frame {i} has {} DOFs, clip declares {}",
                f.len(),
                self.dof_count
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.frames.len() as f64 / self.fps as f64
    }

    pub fn check_chain(&self, chain: &KinematicChain) -> Result<()> {
        if self.chain_id != chain.id() {
            return Err(Error::ChainIdMismatch {
                clip: self.chain_id.clone(),
                chain: chain.id().to_string(),
            });
        }
        if self.dof_count != chain.dof_count() {
            return Err(Error::DofMismatch {
                expected: chain.dof_count(),
                actual: self.dof_count,
            });
        }
        Ok(())
    }

    pub fn from_json(text: &str, name: &str) -> Result<Self> {
        let clip: MotionClip = serde_json::from_str(text).map_err(|e| Error::json(name, e))?;
        clip.validate()?;
        Ok(clip)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("clip serializes")
    }
}
