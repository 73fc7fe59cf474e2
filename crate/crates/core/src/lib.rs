//! Image-grounded co-speech gesture synthesis.
//!
//! Turns pre-extracted scene artifacts (object masks, labels, boxes) and a word-timed
//! transcript into an upper-body gesture animation. The crate is organized by stage:
//!
//! - [`skeleton`]: kinematic chain, forward kinematics, motion clips
//! - [`maskgeo`]: per-object mask geometry (contours, symmetry, primitives, elongation)
//! - [`scene`]: scene files and cross-object alignment analysis
//! - [`seesaw`]: two-handed trajectory extraction from a contour
//! - [`semantics`]: phrase annotation, novelty scoring and object binding
//! - [`ik`]: trajectory inverse kinematics with weighted objectives
//! - [`realize`]: gesture planning, scheduling, solving, timing and compositing
//! - [`pipeline`]: end-to-end orchestration used by the command-line driver

pub mod config;
pub mod error;
pub mod geom;
pub mod ik;
pub mod maskgeo;
pub mod pipeline;
pub mod realize;
pub mod sample;
pub mod scene;
pub mod seesaw;
pub mod semantics;
pub mod skeleton;

pub use error::{Error, Result};
