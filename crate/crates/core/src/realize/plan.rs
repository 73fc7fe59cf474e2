//! Gesture plans and their construction from annotated phrases.

use std::collections::BTreeMap;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Point, Vec2};
use crate::maskgeo::Contour;
use crate::scene::{GroupGeometry, Scene};
use crate::seesaw::{find_cutting_point, seesaw_split};
use crate::semantics::{PhraseAnnotation, PositionClass, SizeClass};
use crate::skeleton::{forward_state, KinematicChain, Pose, Side};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GestureCategory {
    SingleTrajectory,
    TwoTrajectory,
    AbnormalShape,
    Alignment,
    Position,
    Size,
}

impl GestureCategory {
    /// Pointing plans move to a location and hold it; they have no stroke.
    pub fn is_pointing(self) -> bool {
        matches!(self, GestureCategory::Position | GestureCategory::Size)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlanSource {
    Automatic,
    Manual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HandUse {
    Left,
    Right,
    Both,
}

impl HandUse {
    pub fn sides(self) -> Vec<Side> {
        match self {
            HandUse::Left => vec![Side::Left],
            HandUse::Right => vec![Side::Right],
            HandUse::Both => vec![Side::Left, Side::Right],
        }
    }
}

impl From<Side> for HandUse {
    fn from(s: Side) -> Self {
        match s {
            Side::Left => HandUse::Left,
            Side::Right => HandUse::Right,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HandShape {
    Flat,
    Point,
    Cup,
}

/// Half-open frame range `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameRange {
    pub start: usize,
    pub end: usize,
}

impl FrameRange {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

/// Absolute frame windows of the four phases, contiguous and in order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseWindows {
    pub preparation: FrameRange,
    pub stroke: FrameRange,
    pub hold: FrameRange,
    pub retraction: FrameRange,
}

impl PhaseWindows {
    /// Windows of the given lengths starting at `start`.
    pub fn from_lengths(start: usize, lengths: [usize; 4]) -> Self {
        let mut at = start;
        let mut next = |n: usize| {
            let r = FrameRange { start: at, end: at + n };
            at += n;
            r
        };
        PhaseWindows { preparation: next(lengths[0]), stroke: next(lengths[1]), hold: next(lengths[2]), retraction: next(lengths[3]) }
    }

    pub fn start(&self) -> usize {
        self.preparation.start
    }

    pub fn end(&self) -> usize {
        self.retraction.end
    }

    pub fn len(&self) -> usize {
        self.end() - self.start()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn lengths(&self) -> [usize; 4] {
        [self.preparation.len(), self.stroke.len(), self.hold.len(), self.retraction.len()]
    }
}

/// One hand's path, relative to the plan origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HandPath {
    pub side: Side,
    pub points: Vec<[f64; 3]>,
    /// Desired world direction of this hand's palm normal.
    pub palm: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GesturePlan {
    pub id: String,
    pub category: GestureCategory,
    pub source: PlanSource,
    pub hands: HandUse,
    pub hand_shape: HandShape,
    /// Desired world palm normal of the left hand during stroke and hold; the right hand mirrors it.
    pub palm_direction: [f64; 3],
    /// World position of the shoulder (or shoulder midpoint) the paths are relative to.
    pub origin: [f64; 3],
    pub paths: Vec<HandPath>,
    /// Index of the source phrase annotation.
    pub phrase: usize,
    pub object: Option<String>,
    pub importance: f64,
    pub focus_time: f64,
    /// Requested duration in seconds; scheduling raises it to the category minimum.
    pub duration: f64,
    pub priority: f64,
    pub phases: Option<PhaseWindows>,
}

impl GesturePlan {
    pub fn path(&self, side: Side) -> Option<&HandPath> {
        self.paths.iter().find(|p| p.side == side)
    }

    /// World-space targets of one hand.
    pub fn world_path(&self, side: Side) -> Vec<Vector3<f64>> {
        let o = Vector3::from(self.origin);
        self.path(side).map(|p| p.points.iter().map(|q| o + Vector3::from(*q)).collect()).unwrap_or_default()
    }
}

/// Shoulder-relative box that gesture paths are fitted into, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormalizationVolume {
    pub x: [f64; 2],
    pub y: [f64; 2],
    /// Constant forward distance of every path point.
    pub depth: f64,
}

impl Default for NormalizationVolume {
    fn default() -> Self {
        NormalizationVolume { x: [-0.5, 0.5], y: [-0.5, 0.3], depth: 0.32 }
    }
}

impl NormalizationVolume {
    pub fn validate(&self) -> Result<()> {
        if !(self.x[0] < self.x[1] && self.y[0] < self.y[1] && (0.30..=0.50).contains(&self.depth)) {
            return Err(Error::Config(format!("bad normalization volume {self:?}")));
        }
        Ok(())
    }

    pub fn center(&self) -> Vector3<f64> {
        Vector3::new(0.5 * (self.x[0] + self.x[1]), 0.5 * (self.y[0] + self.y[1]), self.depth)
    }
}

/// Uniform scale and translation from image pixels (y down) into a volume (y up).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathMap {
    center: Point,
    scale: f64,
    target: Vector3<f64>,
}

impl PathMap {
    /// Fits the bounding box of `points` into the volume, keeping its aspect ratio.
    pub fn fit(points: &[Point], volume: &NormalizationVolume) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("cannot normalize an empty path".into()));
        }
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in points {
            x0 = x0.min(p.x);
            x1 = x1.max(p.x);
            y0 = y0.min(p.y);
            y1 = y1.max(p.y);
        }
        let (w, h) = (x1 - x0, y1 - y0);
        let sx = if w > 0.0 { (volume.x[1] - volume.x[0]) / w } else { f64::INFINITY };
        let sy = if h > 0.0 { (volume.y[1] - volume.y[0]) / h } else { f64::INFINITY };
        let scale = sx.min(sy);
        let scale = if scale.is_finite() { scale } else { 0.0 };
        Ok(PathMap { center: Point::new(0.5 * (x0 + x1), 0.5 * (y0 + y1)), scale, target: volume.center() })
    }

    pub fn apply(&self, p: Point) -> Vector3<f64> {
        self.target + Vector3::new((p.x - self.center.x) * self.scale, -(p.y - self.center.y) * self.scale, 0.0)
    }
}

/// Maps an image-space path into the normalization volume, relative to the shoulder.
pub fn normalize_path(path: &[Point], volume: &NormalizationVolume) -> Result<Vec<Vector3<f64>>> {
    let map = PathMap::fit(path, volume)?;
    Ok(path.iter().map(|p| map.apply(*p)).collect())
}

/// Knobs for turning annotations into plans.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlanParams {
    /// Symmetry overlap needed for a two-handed trajectory.
    pub symmetry_gate: f64,
    pub elongation_threshold: f64,
    pub dominant: Side,
    pub volume: NormalizationVolume,
    /// Palm distance per size class, meters.
    pub size_separation: BTreeMap<SizeClass, f64>,
    /// Image-plane anchors per position class, x and y in `[-1, 1]` with y up.
    pub position_anchor: BTreeMap<PositionClass, [f64; 2]>,
    /// Points sampled along circles and lines.
    pub path_samples: usize,
}

impl Default for PlanParams {
    fn default() -> Self {
        PlanParams {
            symmetry_gate: 0.9,
            elongation_threshold: 3.0,
            dominant: Side::Right,
            volume: NormalizationVolume::default(),
            size_separation: SizeClass::ALL.iter().map(|s| (*s, s.default_separation())).collect(),
            position_anchor: PositionClass::ALL.iter().map(|p| { let (x, y) = p.image_anchor(); (*p, [x, y]) }).collect(),
            path_samples: 32,
        }
    }
}

impl PlanParams {
    pub fn validate(&self) -> Result<()> {
        self.volume.validate()?;
        if !(0.0..=1.0).contains(&self.symmetry_gate) {
            return Err(Error::Config(format!("symmetry_gate {} outside [0, 1]", self.symmetry_gate)));
        }
        if !(self.elongation_threshold >= 1.0) {
            return Err(Error::Config(format!("elongation_threshold {} below 1", self.elongation_threshold)));
        }
        if let Some((k, v)) = self.size_separation.iter().find(|(_, v)| !(0.0..=0.5).contains(*v)) {
            return Err(Error::Config(format!("size separation for {k:?} is {v}, outside [0, 0.5] m")));
        }
        if let Some((k, _)) = self.position_anchor.iter().find(|(_, a)| a.iter().any(|v| !(-1.0..=1.0).contains(v))) {
            return Err(Error::Config(format!("position anchor for {k} outside [-1, 1]")));
        }
        if self.path_samples < 2 {
            return Err(Error::Config("path_samples must be at least 2".into()));
        }
        Ok(())
    }

    pub fn separation(&self, size: SizeClass) -> f64 {
        self.size_separation.get(&size).copied().unwrap_or_else(|| size.default_separation())
    }

    pub fn anchor(&self, position: PositionClass) -> [f64; 2] {
        self.position_anchor.get(&position).copied().unwrap_or_else(|| {
            let (x, y) = position.image_anchor();
            [x, y]
        })
    }
}

/// Rest-pose world positions of both shoulders, left then right.
pub fn rest_shoulders(chain: &KinematicChain) -> (Vector3<f64>, Vector3<f64>) {
    let fk = forward_state(chain, &Pose::zeros(chain.dof_count())).expect("zero pose matches chain");
    (fk.position(chain.shoulder(Side::Left)), fk.position(chain.shoulder(Side::Right)))
}

/// Shoulder origin of one hand, or the shoulder midpoint for two-handed plans.
pub fn plan_origin(chain: &KinematicChain, hands: HandUse) -> Vector3<f64> {
    let (l, r) = rest_shoulders(chain);
    match hands {
        HandUse::Left => l,
        HandUse::Right => r,
        HandUse::Both => 0.5 * (l + r),
    }
}

const AUTOMATIC_PRIORITY: f64 = 1000.0;

fn to_arr(v: Vector3<f64>) -> [f64; 3] {
    [v.x, v.y, v.z]
}

fn sample_segment(a: Point, b: Point, n: usize) -> Vec<Point> {
    (0..n).map(|i| a + (b - a) * (i as f64 / (n - 1) as f64)).collect()
}

/// Assigns two image-space paths to hands: the one further toward +x goes to the left hand.
/// Palm directions are given for the left hand; the right hand mirrors them across x = 0.
fn mirrored_palm(left: [f64; 3], side: Side) -> [f64; 3] {
    match side {
        Side::Left => left,
        Side::Right => [-left[0], left[1], left[2]],
    }
}

fn by_side(a: Vec<Point>, b: Vec<Point>) -> [(Side, Vec<Point>); 2] {
    let mx = |p: &[Point]| p.iter().map(|q| q.x).sum::<f64>() / p.len() as f64;
    if mx(&a) >= mx(&b) {
        [(Side::Left, a), (Side::Right, b)]
    } else {
        [(Side::Left, b), (Side::Right, a)]
    }
}

struct PlanBuilder<'a> {
    ann: &'a PhraseAnnotation,
    phrase: usize,
    chain: &'a KinematicChain,
    params: &'a PlanParams,
}

impl PlanBuilder<'_> {
    fn plan(
        &self,
        category: GestureCategory,
        hands: HandUse,
        hand_shape: HandShape,
        palm_direction: [f64; 3],
        paths: Vec<(Side, Vec<Vector3<f64>>)>,
    ) -> GesturePlan {
        let source = if category.is_pointing() { PlanSource::Manual } else { PlanSource::Automatic };
        GesturePlan {
            id: String::new(),
            category,
            source,
            hands,
            hand_shape,
            palm_direction,
            origin: to_arr(plan_origin(self.chain, hands)),
            paths: paths
                .into_iter()
                .map(|(side, pts)| HandPath { side, points: pts.into_iter().map(to_arr).collect(), palm: mirrored_palm(palm_direction, side) })
                .collect(),
            phrase: self.phrase,
            object: if category.is_pointing() { None } else { self.ann.matched_object.clone() },
            importance: self.ann.importance,
            focus_time: self.ann.focus_time,
            duration: 0.0,
            priority: match source {
                PlanSource::Automatic => AUTOMATIC_PRIORITY + self.ann.importance,
                PlanSource::Manual => self.ann.importance,
            },
            phases: None,
        }
    }

    /// Maps several image-space paths with one shared fit.
    fn normalize_all(&self, paths: &[(Side, Vec<Point>)]) -> Result<Vec<(Side, Vec<Vector3<f64>>)>> {
        let all: Vec<Point> = paths.iter().flat_map(|(_, p)| p.iter().copied()).collect();
        let map = PathMap::fit(&all, &self.params.volume)?;
        Ok(paths.iter().map(|(s, p)| (*s, p.iter().map(|q| map.apply(*q)).collect())).collect())
    }

    fn shape_plan(&self, contour_img: &[[f64; 2]], elongation: &crate::maskgeo::Elongation, symmetry: f64) -> Result<GesturePlan> {
        let pts: Vec<Point> = contour_img.iter().map(|p| Point::new(p[0], p[1])).collect();
        if elongation.ratio > self.params.elongation_threshold {
            let c = crate::geom::mean(&pts);
            let axis = Vec2::new(elongation.axis[0], elongation.axis[1]);
            let proj: Vec<f64> = pts.iter().map(|p| (*p - c).dot(&axis)).collect();
            let lo = proj.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = proj.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let n = self.params.path_samples / 2 + 1;
            let a = sample_segment(c, c + axis * hi, n);
            let b = sample_segment(c, c + axis * lo, n);
            let paths = self.normalize_all(&by_side(a, b))?;
            return Ok(self.plan(GestureCategory::AbnormalShape, HandUse::Both, HandShape::Flat, [-1.0, 0.0, 0.0], paths));
        }
        // Seesaw and cutting point work in a y-up frame.
        let up = Contour::new(pts.iter().map(|p| Point::new(p.x, -p.y)).collect())?;
        let (cut_idx, cut) = find_cutting_point(up.points())?;
        let flip = |v: Vec<Point>| v.into_iter().map(|p| Point::new(p.x, -p.y)).collect::<Vec<_>>();
        if symmetry >= self.params.symmetry_gate {
            let pair = seesaw_split(up.points(), cut, self.params.dominant)?;
            let paths = self.normalize_all(&by_side(flip(pair.left), flip(pair.right)))?;
            return Ok(self.plan(GestureCategory::TwoTrajectory, HandUse::Both, HandShape::Flat, [-1.0, 0.0, 0.0], paths));
        }
        let mut loop_pts = up.rotated(cut_idx).into_points();
        loop_pts.push(loop_pts[0]);
        let side = self.params.dominant;
        let paths = self.normalize_all(&[(side, flip(loop_pts))])?;
        Ok(self.plan(GestureCategory::SingleTrajectory, side.into(), HandShape::Point, [0.0, -1.0, 0.0], paths))
    }

    fn alignment_plan(&self, scene: &Scene, group_id: &str) -> Result<Option<GesturePlan>> {
        let Some(group) = scene.group(group_id) else {
            return Ok(None);
        };
        let centers: Vec<Point> = group
            .members
            .iter()
            .filter_map(|id| scene.object(id).and_then(|o| o.derived.as_ref()).map(|d| Point::new(d.center[0], d.center[1])))
            .collect();
        let n = self.params.path_samples;
        let path = match &group.geometry {
            GroupGeometry::Line { point, direction } => {
                if centers.len() < 2 {
                    return Ok(None);
                }
                let p0 = Point::new(point[0], point[1]);
                let d = Vec2::new(direction[0], direction[1]);
                let t = |c: &Point| (*c - p0).dot(&d);
                let a = p0 + d * t(&centers[0]);
                let b = p0 + d * t(&centers[centers.len() - 1]);
                sample_segment(a, b, n)
            }
            GroupGeometry::Circle { center, radius } => {
                let c = Point::new(center[0], center[1]);
                let start = centers.first().map(|p| (p.y - c.y).atan2(p.x - c.x)).unwrap_or(0.0);
                (0..=n)
                    .map(|i| {
                        let a = start + std::f64::consts::TAU * i as f64 / n as f64;
                        c + Vec2::new(a.cos(), a.sin()) * *radius
                    })
                    .collect()
            }
            GroupGeometry::None => return Ok(None),
        };
        let side = self.params.dominant;
        let paths = self.normalize_all(&[(side, path)])?;
        Ok(Some(self.plan(GestureCategory::Alignment, side.into(), HandShape::Point, [0.0, -1.0, 0.0], paths)))
    }

    fn position_plan(&self, position: PositionClass) -> GesturePlan {
        let [ax, ay] = self.params.anchor(position);
        let side = if ax < 0.0 {
            Side::Right
        } else if ax > 0.0 {
            Side::Left
        } else {
            self.params.dominant
        };
        let v = &self.params.volume;
        let rel = Vector3::new(
            0.5 * (v.x[0] + v.x[1]) + ax * 0.5 * (v.x[1] - v.x[0]),
            0.5 * (v.y[0] + v.y[1]) + ay * 0.5 * (v.y[1] - v.y[0]),
            v.depth,
        );
        self.plan(GestureCategory::Position, side.into(), HandShape::Point, [0.0, -1.0, 0.0], vec![(side, vec![rel])])
    }

    fn size_plan(&self, size: SizeClass) -> GesturePlan {
        let half = 0.5 * self.params.separation(size);
        let c = self.params.volume.center();
        let paths = vec![(Side::Left, vec![c + Vector3::new(half, 0.0, 0.0)]), (Side::Right, vec![c - Vector3::new(half, 0.0, 0.0)])];
        // Palms face each other.
        self.plan(GestureCategory::Size, HandUse::Both, HandShape::Flat, [-1.0, 0.0, 0.0], paths)
    }
}

/// Plans for one phrase.
///
/// Gated-in phrases bound to an analyzed object yield one shape plan: abnormal-shape when
/// elongated, two-trajectory when symmetric enough, single-trajectory otherwise. A phrase
/// that mentions an arrangement adds an alignment plan. Position and size words yield
/// manual plans whether or not the phrase passed the gate.
pub fn plan_from_annotation(
    ann: &PhraseAnnotation,
    phrase: usize,
    scene: &Scene,
    chain: &KinematicChain,
    params: &PlanParams,
) -> Result<Vec<GesturePlan>> {
    let b = PlanBuilder { ann, phrase, chain, params };
    let mut out = Vec::new();
    if ann.gated_in {
        let derived = ann.matched_object.as_deref().and_then(|id| scene.object(id)).and_then(|o| o.derived.as_ref());
        if let Some(d) = derived {
            if d.contour.len() >= 3 {
                out.push(b.shape_plan(&d.contour, &d.elongation, d.symmetry.score)?);
            }
        }
        if let Some(g) = &ann.alignment_ref {
            out.extend(b.alignment_plan(scene, g)?);
        }
    }
    if let Some(p) = ann.position {
        out.push(b.position_plan(p));
    }
    if let Some(s) = ann.size {
        out.push(b.size_plan(s));
    }
    Ok(out)
}
