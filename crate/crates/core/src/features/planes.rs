use std::cell::{Cell, OnceCell};

use super::median::{lower_median, median25_in_place};
use super::texture::{luminance, quantize, window_texture};
use super::{
    color_features, FeatureConfig, FeatureError, FeatureVector, SkinColor, FEATURE_COUNT,
    TEXTURE_OFFSET,
};
use crate::raster::{BinaryMask, RgbImage};

/// Median-smoothed feature planes, defined on lesion pixels only. Planes that
/// were not requested are absent.
#[derive(Clone, Debug, PartialEq)]
pub struct FeaturePlanes {
    width: usize,
    height: usize,
    valid: BinaryMask,
    planes: Vec<Option<Vec<f64>>>,
}

impl FeaturePlanes {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn valid(&self) -> &BinaryMask {
        &self.valid
    }

    pub fn plane(&self, index: usize) -> Option<&[f64]> {
        self.planes.get(index)?.as_deref()
    }

    pub fn available(&self) -> Vec<usize> {
        (0..FEATURE_COUNT).filter(|&i| self.planes[i].is_some()).collect()
    }

    /// Feature value at a lesion pixel, if that plane was extracted.
    pub fn get(&self, index: usize, row: usize, col: usize) -> Option<f64> {
        if !self.valid.get(row, col) {
            return None;
        }
        self.plane(index).map(|p| p[row * self.width + col])
    }

    /// Full 18-vector at a lesion pixel; `None` unless every plane is present.
    pub fn vector_at(&self, row: usize, col: usize) -> Option<FeatureVector> {
        let mut v = [0.0; FEATURE_COUNT];
        for (i, slot) in v.iter_mut().enumerate() {
            *slot = self.get(i, row, col)?;
        }
        Some(FeatureVector(v))
    }
}

/// Computes feature planes on demand for one image.
///
/// Raw texture planes are computed together on first use and cached; the
/// number of GLCM windows evaluated is tracked so callers can confirm that
/// color-only models never touch the texture path.
pub struct FeatureExtractor<'a> {
    image: &'a RgbImage,
    lesion: &'a BinaryMask,
    skin: SkinColor,
    config: FeatureConfig,
    lesion_pixels: Vec<(usize, usize)>,
    texture: OnceCell<[Vec<f64>; 3]>,
    glcm_windows: Cell<usize>,
}

impl<'a> FeatureExtractor<'a> {
    pub fn new(
        image: &'a RgbImage,
        lesion: &'a BinaryMask,
        skin: SkinColor,
        config: FeatureConfig,
    ) -> Result<Self, FeatureError> {
        config.validate()?;
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
        Ok(Self {
            image,
            lesion,
            skin,
            config,
            lesion_pixels: lesion.foreground().collect(),
            texture: OnceCell::new(),
            glcm_windows: Cell::new(0),
        })
    }

    pub fn glcm_window_count(&self) -> usize {
        self.glcm_windows.get()
    }

    pub fn skin(&self) -> SkinColor {
        self.skin
    }

    /// Unsmoothed plane; zero outside the lesion.
    pub fn raw_plane(&self, index: usize) -> Result<Vec<f64>, FeatureError> {
        if index >= FEATURE_COUNT {
            return Err(FeatureError::InvalidFeature(index + 1));
        }
        let w = self.image.width();
        if index >= TEXTURE_OFFSET {
            return Ok(self.texture_planes()[index - TEXTURE_OFFSET].clone());
        }
        let mut plane = vec![0.0; w * self.image.height()];
        for &(r, c) in &self.lesion_pixels {
            plane[r * w + c] = color_features(self.image.get(r, c), &self.skin).values[index];
        }
        Ok(plane)
    }

    fn texture_planes(&self) -> &[Vec<f64>; 3] {
        self.texture.get_or_init(|| {
            let (w, h) = (self.image.width(), self.image.height());
            let levels = self.config.glcm_levels;
            let quantized: Vec<u8> = self
                .image
                .pixels()
                .iter()
                .map(|&p| quantize(luminance(p), levels))
                .collect();
            let size = self.config.texture_window;
            let half = (size / 2) as isize;
            let mut window = vec![0u8; size * size];
            let mut scratch = Vec::with_capacity(size * size);
            let mut out = [vec![0.0; w * h], vec![0.0; w * h], vec![0.0; w * h]];
            for &(r, c) in &self.lesion_pixels {
                let mut k = 0;
                for dr in -half..=half {
                    let rr = (r as isize + dr).clamp(0, h as isize - 1) as usize;
                    for dc in -half..=half {
                        let cc = (c as isize + dc).clamp(0, w as isize - 1) as usize;
                        window[k] = quantized[rr * w + cc];
                        k += 1;
                    }
                }
                let t = window_texture(&window, size, &mut scratch);
                for (plane, v) in out.iter_mut().zip(t) {
                    plane[r * w + c] = v;
                }
            }
            self.glcm_windows
                .set(self.glcm_windows.get() + self.lesion_pixels.len());
            out
        })
    }

    /// Median of the lesion-valid raw values in the window around (row, col).
    pub fn smoothed_value(&self, raw: &[f64], row: usize, col: usize) -> f64 {
        let mut buf = Vec::with_capacity(self.config.median_window.pow(2));
        self.smoothed_with(raw, row, col, &mut buf)
    }

    fn smoothed_with(&self, raw: &[f64], row: usize, col: usize, buf: &mut Vec<f64>) -> f64 {
        let (w, h) = (self.image.width(), self.image.height());
        let half = self.config.median_window / 2;
        buf.clear();
        for r in row.saturating_sub(half)..=(row + half).min(h - 1) {
            for c in col.saturating_sub(half)..=(col + half).min(w - 1) {
                if self.lesion.get(r, c) {
                    buf.push(raw[r * w + c]);
                }
            }
        }
        if buf.len() == 25 {
            let arr: &mut [f64; 25] = buf.as_mut_slice().try_into().expect("25 values");
            median25_in_place(arr)
        } else {
            lower_median(buf)
        }
    }

    pub fn smooth(&self, raw: &[f64]) -> Vec<f64> {
        let w = self.image.width();
        let mut out = vec![0.0; raw.len()];
        let mut buf = Vec::with_capacity(self.config.median_window.pow(2));
        for &(r, c) in &self.lesion_pixels {
            out[r * w + c] = self.smoothed_with(raw, r, c, &mut buf);
        }
        out
    }

    pub fn smoothed_plane(&self, index: usize) -> Result<Vec<f64>, FeatureError> {
        Ok(self.smooth(&self.raw_plane(index)?))
    }

    /// Smoothed planes for the requested zero-based indices.
    pub fn planes(&self, indices: &[usize]) -> Result<FeaturePlanes, FeatureError> {
        let mut planes = vec![None; FEATURE_COUNT];
        for &i in indices {
            if i >= FEATURE_COUNT {
                return Err(FeatureError::InvalidFeature(i + 1));
            }
            if planes[i].is_none() {
                planes[i] = Some(self.smoothed_plane(i)?);
            }
        }
        Ok(FeaturePlanes {
            width: self.image.width(),
            height: self.image.height(),
            valid: self.lesion.clone(),
            planes,
        })
    }
}

/// All 18 median-smoothed planes.
pub fn extract_feature_planes(
    image: &RgbImage,
    lesion: &BinaryMask,
    skin: &SkinColor,
    config: &FeatureConfig,
) -> Result<FeaturePlanes, FeatureError> {
    let all: Vec<usize> = (0..FEATURE_COUNT).collect();
    extract_planes(image, lesion, skin, config, &all)
}

pub fn extract_planes(
    image: &RgbImage,
    lesion: &BinaryMask,
    skin: &SkinColor,
    config: &FeatureConfig,
    indices: &[usize],
) -> Result<FeaturePlanes, FeatureError> {
    FeatureExtractor::new(image, lesion, *skin, config.clone())?.planes(indices)
}
