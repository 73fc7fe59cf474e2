//! Per-object structural analysis of binary masks.

mod ccma;
mod contour;
mod elongation;
mod mask;
mod primitives;
mod rdp;
mod resize;
mod symmetry;

pub use ccma::{smooth_ccma, smooth_closed, smooth_open};
pub use contour::{extract_contour, label_components, largest_component, Contour};
pub use elongation::{box_elongation, elongation_ratio, Elongation, ELONGATION_THRESHOLD};
pub use mask::{BinaryMask, OriginBox};
pub use primitives::{
    fit_primitives, min_area_rectangle, min_enclosing_circle, min_enclosing_triangle, moment_ellipse, Primitive,
    PrimitiveFit, PrimitiveKind, PrimitiveScores, PRIMITIVE_THRESHOLD, PRIMITIVE_TIE_MARGIN,
};
pub use rdp::{simplify_contour, simplify_rdp};
pub use resize::{resize_policy, ResizePolicy, LONGEST_EDGE};
pub use symmetry::{overlap_at, symmetry_sweep, SymmetryResult, MAX_ANGLE, MIN_ANGLE, SCORE_TIE_EPS};
