use super::{FeatureConfig, FeatureError, COLOR_FEATURE_COUNT};
use crate::raster::{outer_rings, BinaryMask, RgbImage};

const THIRD: f64 = 1.0 / 3.0;
const DEGENERATE_SUM: f64 = 1e-9;

/// Empirical skin rule; strict inequalities throughout.
#[inline]
pub fn is_skin_pixel(r: u8, g: u8, b: u8) -> bool {
    r > 90 && r > b && r > g
}

/// Mean background skin color.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SkinColor {
    pub r: f64,
    pub g: f64,
    pub b: f64,
}

impl SkinColor {
    pub fn new(r: f64, g: f64, b: f64) -> Self {
        Self {
            r: r.clamp(0.0, 255.0),
            g: g.clamp(0.0, 255.0),
            b: b.clamp(0.0, 255.0),
        }
    }
}

/// Averages the sample ring (the band beyond the skipped inner ring) over
/// pixels that pass [`is_skin_pixel`].
pub fn background_skin_color(
    image: &RgbImage,
    lesion: &BinaryMask,
    config: &FeatureConfig,
) -> Result<SkinColor, FeatureError> {
    if image.width() != lesion.width() || image.height() != lesion.height() {
        return Err(FeatureError::DimensionMismatch(
            image.width(),
            image.height(),
            lesion.width(),
            lesion.height(),
        ));
    }
    if lesion.is_empty() {
        return Err(FeatureError::EmptyLesion);
    }
    let rings = outer_rings(lesion, config.ring_skip, config.ring_take)?;
    let mut sum = [0u64; 3];
    let mut n = 0u64;
    let mut candidates = 0;
    for (r, c) in rings.sample.foreground() {
        candidates += 1;
        let [pr, pg, pb] = image.get(r, c);
        if is_skin_pixel(pr, pg, pb) {
            sum[0] += pr as u64;
            sum[1] += pg as u64;
            sum[2] += pb as u64;
            n += 1;
        }
    }
    if n == 0 {
        return Err(FeatureError::NoSkinPixels { candidates });
    }
    let n = n as f64;
    Ok(SkinColor::new(
        sum[0] as f64 / n,
        sum[1] as f64 / n,
        sum[2] as f64 / n,
    ))
}

/// F1-F15 of one pixel plus flags for the denominators that vanished.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ColorFeatures {
    pub values: [f64; COLOR_FEATURE_COUNT],
    /// R+G+B was zero; F1-F3 (and F7-F9) fell back to 1/3.
    pub chromaticity_fallback: bool,
    /// F4+F5+F6 was zero; F7-F9 fell back to 1/3.
    pub ratio_fallback: bool,
    /// |F10+F11+F12| was below 1e-9; F13-F15 fell back to 1/3.
    pub difference_fallback: bool,
}

fn normalize3(a: f64, b: f64, c: f64, threshold: f64) -> ([f64; 3], bool) {
    let s = a + b + c;
    if s.abs() < threshold {
        ([THIRD; 3], true)
    } else {
        ([a / s, b / s, c / s], false)
    }
}

pub fn color_features(pixel: [u8; 3], skin: &SkinColor) -> ColorFeatures {
    let (rl, gl, bl) = (pixel[0] as f64, pixel[1] as f64, pixel[2] as f64);
    let mut v = [0.0; COLOR_FEATURE_COUNT];

    let (chroma, chroma_fb) = normalize3(rl, gl, bl, 0.5);
    v[0..3].copy_from_slice(&chroma);

    let ratio = [rl / skin.r.max(1.0), gl / skin.g.max(1.0), bl / skin.b.max(1.0)];
    v[3..6].copy_from_slice(&ratio);
    let (nratio, ratio_fb) = normalize3(ratio[0], ratio[1], ratio[2], f64::MIN_POSITIVE);
    v[6..9].copy_from_slice(&nratio);

    let diff = [rl - skin.r, gl - skin.g, bl - skin.b];
    v[9..12].copy_from_slice(&diff);
    let (ndiff, diff_fb) = normalize3(diff[0], diff[1], diff[2], DEGENERATE_SUM);
    v[12..15].copy_from_slice(&ndiff);

    ColorFeatures {
        values: v,
        chromaticity_fallback: chroma_fb,
        ratio_fallback: ratio_fb,
        difference_fallback: diff_fb,
    }
}
