use serde::{Deserialize, Serialize};

/// Target length of the longest image edge after normalization.
pub const LONGEST_EDGE: u32 = 1024;

/// Uniform scale that brings an image's longest edge to [`LONGEST_EDGE`] pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResizePolicy {
    pub scale: f64,
    pub width: u32,
    pub height: u32,
}

pub fn resize_policy(width: u32, height: u32) -> ResizePolicy {
    assert!(width > 0 && height > 0, "image dimensions must be positive");
    let longest = width.max(height);
    let scale = LONGEST_EDGE as f64 / longest as f64;
    let fit = |d: u32| {
        if d == longest {
            LONGEST_EDGE
        } else {
            (d as f64 * scale).round() as u32
        }
    };
    ResizePolicy {
        scale,
        width: fit(width),
        height: fit(height),
    }
}
