//! Per-pixel features.
//!
//! Indices are zero-based in the API (`0` is F1, `17` is F18); text formats
//! and feature names use the one-based `F<n>` form.
//!
//! | index | name    | meaning                                   |
//! |-------|---------|-------------------------------------------|
//! | 0-2   | F1-F3   | chromaticity r, g, b                      |
//! | 3-5   | F4-F6   | ratio to background skin                  |
//! | 6-8   | F7-F9   | normalized ratio                          |
//! | 9-11  | F10-F12 | difference from background skin           |
//! | 12-14 | F13-F15 | normalized difference                     |
//! | 15-17 | F16-F18 | GLCM entropy, contrast, correlation       |

mod color;
mod median;
mod planes;
mod texture;

pub use color::{background_skin_color, color_features, is_skin_pixel, ColorFeatures, SkinColor};
pub use median::{lower_median, median25};
pub use planes::{extract_feature_planes, extract_planes, FeatureExtractor, FeaturePlanes};
pub use texture::{
    glcm, luminance, quantize, texture_features, Direction, Glcm, TextureStats,
};

use thiserror::Error;

use crate::raster::RasterError;

pub const FEATURE_COUNT: usize = 18;
pub const COLOR_FEATURE_COUNT: usize = 15;

/// Zero-based index of the first GLCM feature (F16).
pub const TEXTURE_OFFSET: usize = 15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeatureError {
    #[error("lesion mask is empty")]
    EmptyLesion,
    #[error(
        "no pixel in the sampling ring passes the skin rule ({candidates} ring pixels examined); \
         widen the ring or supply the skin color manually"
    )]
    NoSkinPixels { candidates: usize },
    #[error("window of size {size} has no pixel pairs in direction {direction:?}")]
    WindowTooSmall { size: usize, direction: Direction },
    #[error("window has {actual} values, expected {expected}")]
    WrongCount { expected: usize, actual: usize },
    #[error("gray-level count {0} must be between 2 and 256")]
    InvalidLevels(usize),
    #[error("window size {0} must be odd and at least 3")]
    InvalidWindow(usize),
    #[error("gray level {level} out of range for {levels} levels")]
    LevelOutOfRange { level: u8, levels: usize },
    #[error("feature index {0} out of range (F1..F18)")]
    InvalidFeature(usize),
    #[error("image is {0}x{1} but mask is {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error(transparent)]
    Raster(#[from] RasterError),
}

/// The 18 features of one pixel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeatureVector(pub [f64; FEATURE_COUNT]);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

pub fn feature_name(index: usize) -> String {
    format!("F{}", index + 1)
}

/// Parses `F<n>` (1..=18) into a zero-based index.
pub fn parse_feature_name(name: &str) -> Option<usize> {
    let n: usize = name.strip_prefix('F')?.parse().ok()?;
    (1..=FEATURE_COUNT).contains(&n).then(|| n - 1)
}

/// Settings for the per-pixel feature pipeline.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureConfig {
    pub ring_skip: f64,
    pub ring_take: f64,
    pub glcm_levels: usize,
    pub texture_window: usize,
    pub median_window: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            ring_skip: 0.10,
            ring_take: 0.20,
            glcm_levels: 16,
            texture_window: 5,
            median_window: 5,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<(), FeatureError> {
        if !(2..=256).contains(&self.glcm_levels) {
            return Err(FeatureError::InvalidLevels(self.glcm_levels));
        }
        for w in [self.texture_window, self.median_window] {
            if w < 3 || w % 2 == 0 {
                return Err(FeatureError::InvalidWindow(w));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feature_names_round_trip() {
        for i in 0..FEATURE_COUNT {
            assert_eq!(parse_feature_name(&feature_name(i)), Some(i));
        }
        assert_eq!(parse_feature_name("F0"), None);
        assert_eq!(parse_feature_name("F19"), None);
        assert_eq!(parse_feature_name("S1"), None);
    }
}
