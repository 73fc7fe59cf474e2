//! Scene files and per-object structural analysis.
//!
//! A scene lists detected objects with labels, boxes in source-image pixels and mask
//! files (binary PGM crops of each box). [`analyze_scene`] resizes everything so the
//! longest image edge is 1024 px, runs the mask geometry on every object and groups
//! same-label objects into linear, circular or scattered arrangements.

mod alignment;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use alignment::{
    analyze_label, classify_scattered, detect_circular_group, detect_linear_groups, fit_circle_kasa, AlignmentGroup,
    AlignmentKind, AlignmentParams, GroupGeometry, Located,
};

use crate::error::{Error, Result};
use crate::maskgeo::{
    elongation_ratio, extract_contour, fit_primitives, resize_policy, simplify_contour, smooth_ccma, symmetry_sweep,
    BinaryMask, Contour, Elongation, OriginBox, PrimitiveFit, ResizePolicy, SymmetryResult,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageDims {
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectRecord {
    pub id: String,
    /// Lemmatized lowercase noun.
    pub label: String,
    /// `(x, y, w, h)` in source-image pixels.
    #[serde(rename = "box")]
    pub bbox: [f64; 4],
    /// Mask file, relative to the scene file's directory.
    pub mask: PathBuf,
    pub confidence: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derived: Option<ObjectDerived>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectDerived {
    /// Box in resized-image pixels.
    #[serde(rename = "box")]
    pub bbox: [f64; 4],
    pub center: [f64; 2],
    pub origin: OriginBox,
    /// Dimensions of the resized mask.
    pub mask_size: [usize; 2],
    pub symmetry: SymmetryResult,
    pub primitive: PrimitiveFit,
    pub elongation: Elongation,
    /// Simplified and smoothed outline in resized mask pixels.
    pub contour: Vec<[f64; 2]>,
    #[serde(default)]
    pub alignment_group: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    pub image: ImageDims,
    pub objects: Vec<ObjectRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resized: Option<ResizePolicy>,
    #[serde(default)]
    pub groups: Vec<AlignmentGroup>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisParams {
    pub rdp_epsilon: f64,
    pub ccma_window: usize,
    /// Points the simplified contour is resampled to before smoothing; 0 keeps the vertices.
    pub contour_samples: usize,
    pub alignment: AlignmentParams,
}

impl Default for AnalysisParams {
    fn default() -> Self {
        AnalysisParams { rdp_epsilon: 2.0, ccma_window: 5, contour_samples: 64, alignment: AlignmentParams::default() }
    }
}

impl Scene {
    pub fn from_json(text: &str, file: &str) -> Result<Self> {
        let scene: Scene = serde_json::from_str(text).map_err(|e| Error::json(file, e))?;
        scene.validate()?;
        Ok(scene)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scene serializes");
        s.push('\n');
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.image.width == 0 || self.image.height == 0 {
            return Err(Error::Scene("image dimensions must be positive".into()));
        }
        let mut seen = BTreeSet::new();
        let (w, h) = (self.image.width as f64, self.image.height as f64);
        for o in &self.objects {
            if !seen.insert(o.id.as_str()) {
                return Err(Error::Scene(format!("duplicate object id `{}`", o.id)));
            }
            if o.label.is_empty() || o.label.chars().any(|c| c.is_uppercase()) {
                return Err(Error::Scene(format!("object `{}`: label must be nonempty lowercase", o.id)));
            }
            let [x, y, bw, bh] = o.bbox;
            let eps = 1e-6;
            if !(bw > 0.0 && bh > 0.0 && x >= -eps && y >= -eps && x + bw <= w + eps && y + bh <= h + eps) {
                return Err(Error::Scene(format!("object `{}`: box {:?} outside {}x{} image", o.id, o.bbox, w, h)));
            }
            if !(0.0..=1.0).contains(&o.confidence) {
                return Err(Error::Scene(format!("object `{}`: confidence {} not in [0, 1]", o.id, o.confidence)));
            }
        }
        Ok(())
    }

    pub fn object(&self, id: &str) -> Option<&ObjectRecord> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn group(&self, id: &str) -> Option<&AlignmentGroup> {
        self.groups.iter().find(|g| g.id == id)
    }
}

/// Geometry of one object mask, already at resized resolution.
pub fn analyze_mask(mask: &BinaryMask, params: &AnalysisParams) -> Result<(SymmetryResult, PrimitiveFit, Elongation, Vec<[f64; 2]>)> {
    let symmetry = symmetry_sweep(mask);
    let primitive = fit_primitives(mask);
    let elongation = elongation_ratio(mask);
    let raw = extract_contour(mask)?;
    let simple = simplify_contour(&raw, params.rdp_epsilon);
    // Smoothing assumes even spacing.
    let simple = if params.contour_samples >= 3 {
        Contour::new(crate::geom::resample_closed(simple.points(), params.contour_samples))?
    } else {
        simple
    };
    // Smoothing needs more points than the window; very coarse outlines are kept as they are.
    let smooth = if simple.len() > params.ccma_window {
        smooth_ccma(&simple, params.ccma_window).unwrap_or(simple)
    } else {
        simple
    };
    let contour = smooth.points().iter().map(|p| [p.x, p.y]).collect();
    Ok((symmetry, primitive, elongation, contour))
}

fn load_mask(scene_dir: &Path, o: &ObjectRecord, policy: &ResizePolicy) -> Result<BinaryMask> {
    let path = scene_dir.join(&o.mask);
    let wrap = |reason: String| Error::Mask { id: o.id.clone(), path: path.clone(), reason };
    let mask = BinaryMask::load_pgm(&path).map_err(|e| wrap(e.to_string()))?;
    if policy.scale == 1.0 {
        Ok(mask)
    } else {
        mask.scaled(policy.scale).map_err(|e| wrap(e.to_string()))
    }
}

/// Analyzes every object and detects alignment groups. Masks are resolved relative to `scene_dir`.
pub fn analyze_scene(scene: &Scene, scene_dir: &Path, params: &AnalysisParams) -> Result<Scene> {
    scene.validate()?;
    let policy = resize_policy(scene.image.width, scene.image.height);
    let derived: Vec<ObjectDerived> = scene
        .objects
        .par_iter()
        .map(|o| -> Result<ObjectDerived> {
            let mask = load_mask(scene_dir, o, &policy)?;
            let (symmetry, primitive, elongation, contour) =
                analyze_mask(&mask, params).map_err(|e| Error::Mask {
                    id: o.id.clone(),
                    path: scene_dir.join(&o.mask),
                    reason: e.to_string(),
                })?;
            let s = policy.scale;
            let bbox = [o.bbox[0] * s, o.bbox[1] * s, o.bbox[2] * s, o.bbox[3] * s];
            let (iw, ih) = (policy.width as f64, policy.height as f64);
            Ok(ObjectDerived {
                bbox,
                center: [bbox[0] + bbox[2] / 2.0, bbox[1] + bbox[3] / 2.0],
                origin: OriginBox { x: bbox[0] / iw, y: bbox[1] / ih, w: bbox[2] / iw, h: bbox[3] / ih },
                mask_size: [mask.width(), mask.height()],
                symmetry,
                primitive,
                elongation,
                contour,
                alignment_group: None,
            })
        })
        .collect::<Result<_>>()?;

    let mut out = scene.clone();
    out.resized = Some(policy);
    for (o, d) in out.objects.iter_mut().zip(derived) {
        o.derived = Some(d);
    }

    let mut by_label: BTreeMap<&str, Vec<Located>> = BTreeMap::new();
    for o in &out.objects {
        let c = o.derived.as_ref().expect("just set").center;
        by_label.entry(o.label.as_str()).or_default().push(Located::new(o.id.clone(), c[0], c[1]));
    }
    let per_label: Vec<Vec<AlignmentGroup>> = by_label
        .par_iter()
        .map(|(label, pts)| analyze_label(label, pts, &params.alignment))
        .collect();
    let mut groups: Vec<AlignmentGroup> = per_label.into_iter().flatten().collect();
    for (i, g) in groups.iter_mut().enumerate() {
        g.id = format!("g{i}");
    }
    for g in &groups {
        for m in &g.members {
            if let Some(o) = out.objects.iter_mut().find(|o| &o.id == m) {
                o.derived.as_mut().expect("just set").alignment_group = Some(g.id.clone());
            }
        }
    }
    out.groups = groups;
    Ok(out)
}
