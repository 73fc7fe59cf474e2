//! Pipeline configuration, read from TOML. Every section is optional and unknown keys
//! are rejected.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::realize::{BlendParams, PlanParams, ScheduleParams, SolveParams};
use crate::scene::AnalysisParams;
use crate::semantics::{EmbeddingProvider, FileEmbedding, HashEmbedding};
use crate::skeleton::{KinematicChain, Pose, Side};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    /// Expected frame rate of the beat clip.
    pub fps: u32,
    /// Chain TOML; the bundled upper-body chain when absent. Relative to the config file.
    pub chain: Option<PathBuf>,
    /// Idle pose as bone name to per-DOF angles in degrees. Unlisted bones rest at zero.
    pub idle_pose: BTreeMap<String, Vec<f64>>,
    /// Bones whose beat motion is kept during solving. Others are zeroed while plans are
    /// solved and restored in the output. Defaults to both arms and hands.
    pub retained_bones: Option<Vec<String>>,
    /// Token vector table; hashed bag-of-words when absent. Relative to the config file.
    pub embedding: Option<PathBuf>,
    pub embedding_dim: usize,
    pub analysis: AnalysisParams,
    pub plan: PlanParams,
    pub schedule: ScheduleParams,
    pub solve: SolveParams,
    pub blend: BlendParams,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            fps: 30,
            chain: None,
            idle_pose: BTreeMap::new(),
            retained_bones: None,
            embedding: None,
            embedding_dim: 256,
            analysis: AnalysisParams::default(),
            plan: PlanParams::default(),
            schedule: ScheduleParams::default(),
            solve: SolveParams::default(),
            blend: BlendParams::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str, file: &str) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| text[..s.start.min(text.len())].lines().count().max(1)).unwrap_or(0);
            Error::Parse { file: file.to_string(), line, message: e.message().to_string() }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a config and resolves its relative paths against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text, &path.display().to_string())?;
        let dir = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.chain, &mut cfg.embedding].into_iter().flatten() {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.fps == 0 || self.fps > 1000 {
            return Err(Error::Config(format!("fps {} outside 1..=1000", self.fps)));
        }
        if self.embedding_dim == 0 {
            return Err(Error::Config("embedding_dim must be positive".into()));
        }
        let a = &self.analysis;
        if !(a.rdp_epsilon >= 0.0 && a.rdp_epsilon.is_finite()) {
            return Err(Error::Config(format!("analysis.rdp_epsilon {} must be non-negative", a.rdp_epsilon)));
        }
        if a.ccma_window < 3 || a.ccma_window.is_multiple_of(2) {
            return Err(Error::Config(format!("analysis.ccma_window {} must be odd and at least 3", a.ccma_window)));
        }
        let al = &a.alignment;
        if !(al.linear_tolerance_deg > 0.0 && al.linear_tolerance_deg < 90.0) {
            return Err(Error::Config(format!("alignment.linear_tolerance_deg {} outside (0, 90)", al.linear_tolerance_deg)));
        }
        if !(al.circular_tolerance > 0.0 && al.circular_tolerance < 1.0) {
            return Err(Error::Config(format!("alignment.circular_tolerance {} outside (0, 1)", al.circular_tolerance)));
        }
        if al.min_linear < 3 || al.min_circular < 4 {
            return Err(Error::Config("alignment needs min_linear >= 3 and min_circular >= 4".into()));
        }
        self.plan.validate()?;
        self.schedule.validate()?;
        self.solve.validate()?;
        self.blend.validate()
    }

    pub fn load_chain(&self) -> Result<KinematicChain> {
        match &self.chain {
            Some(p) => KinematicChain::load(p),
            None => Ok(KinematicChain::default_upper_body()),
        }
    }

    pub fn embedding_provider(&self) -> Result<Box<dyn EmbeddingProvider>> {
        Ok(match &self.embedding {
            Some(p) => Box::new(FileEmbedding::load(p)?),
            None => Box::new(HashEmbedding::new(self.embedding_dim)),
        })
    }

    pub fn idle(&self, chain: &KinematicChain) -> Result<Pose> {
        let mut pose = Pose::zeros(chain.dof_count());
        for (name, degs) in &self.idle_pose {
            let bone = chain.bone(chain.bone_index(name)?);
            if degs.len() != bone.dofs.len() {
                return Err(Error::Config(format!("idle_pose.{name} has {} values, bone has {} DOFs", degs.len(), bone.dofs.len())));
            }
            for (k, d) in degs.iter().enumerate() {
                pose.0[bone.first_dof + k] = d.to_radians();
            }
        }
        if !chain.within_limits(&pose, 1e-9) {
            return Err(Error::Config("idle_pose violates joint limits".into()));
        }
        Ok(pose)
    }

    /// Sorted DOF indices whose beat motion is kept while solving.
    pub fn retained_dofs(&self, chain: &KinematicChain) -> Result<Vec<usize>> {
        let bones: Vec<usize> = match &self.retained_bones {
            Some(names) => names.iter().map(|n| chain.bone_index(n)).collect::<Result<_>>()?,
            None => [Side::Left, Side::Right]
                .into_iter()
                .flat_map(|s| {
                    let h = chain.hand(s);
                    h.arm.iter().chain(&h.fingers).copied().collect::<Vec<_>>()
                })
                .collect(),
        };
        let set: BTreeSet<usize> = chain.dofs_of(&bones).into_iter().collect();
        Ok(set.into_iter().collect())
    }
}
