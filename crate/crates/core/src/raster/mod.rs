//! Raster primitives: color images, binary masks and the geometric operations
//! used to turn a hand-drawn border into lesion and ring masks.

mod boundary;
mod distance;
mod fill;
mod majority;
mod rings;
mod spline;

pub use boundary::boundary_pixels;
pub use distance::{distance_field, squared_distance_field, DistanceField};
pub use fill::rasterize_filled;
pub use majority::majority_filter;
pub use rings::{outer_rings, Rings};
pub use spline::{auto_samples_per_segment, spline_close, ControlPolygon};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RasterError {
    #[error("invalid image dimensions {width}x{height}")]
    InvalidDimensions { width: usize, height: usize },
    #[error("buffer length {actual} does not match {width}x{height} (expected {expected})")]
    BufferLength {
        width: usize,
        height: usize,
        expected: usize,
        actual: usize,
    },
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),
    #[error("curve is not closed")]
    OpenCurve,
    #[error("curve point ({row:.2}, {col:.2}) lies outside the {width}x{height} image")]
    CurveOutOfBounds {
        row: f64,
        col: f64,
        width: usize,
        height: usize,
    },
    #[error("curve encloses no area")]
    DegenerateCurve,
    #[error("mask has no foreground pixels")]
    EmptyMask,
    #[error("invalid window size {0}: must be odd and at least 3")]
    InvalidWindow(usize),
    #[error("invalid ring fractions: skip {skip}, take {take}")]
    InvalidFractions { skip: f64, take: f64 },
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
}

/// Lesion mask from border control points: the closed quadratic B-spline
/// through the polygon, sampled at most half a pixel apart, then filled.
pub fn border_mask(
    poly: &ControlPolygon,
    width: usize,
    height: usize,
) -> Result<BinaryMask, RasterError> {
    let curve = spline_close(poly, auto_samples_per_segment(poly, 0.5))?;
    rasterize_filled(&curve, width, height)
}

fn check_dims(width: usize, height: usize) -> Result<usize, RasterError> {
    if width == 0 || height == 0 {
        return Err(RasterError::InvalidDimensions { width, height });
    }
    width
        .checked_mul(height)
        .ok_or(RasterError::InvalidDimensions { width, height })
}

/// 8-bit RGB raster stored row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<[u8; 3]>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, fill: [u8; 3]) -> Result<Self, RasterError> {
        let n = check_dims(width, height)?;
        Ok(Self {
            width,
            height,
            data: vec![fill; n],
        })
    }

    pub fn from_pixels(
        width: usize,
        height: usize,
        data: Vec<[u8; 3]>,
    ) -> Result<Self, RasterError> {
        let n = check_dims(width, height)?;
        if data.len() != n {
            return Err(RasterError::BufferLength {
                width,
                height,
                expected: n,
                actual: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> [u8; 3] {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, rgb: [u8; 3]) {
        self.data[row * self.width + col] = rgb;
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.data
    }
}

/// One boolean per pixel, row-major. Used for lesion, veil and ring regions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Result<Self, RasterError> {
        let n = check_dims(width, height)?;
        Ok(Self {
            width,
            height,
            bits: vec![false; n],
        })
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self, RasterError> {
        let n = check_dims(width, height)?;
        if bits.len() != n {
            return Err(RasterError::BufferLength {
                width,
                height,
                expected: n,
                actual: bits.len(),
            });
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    /// Builds a mask by evaluating `f(row, col)` on every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self, RasterError> {
        let n = check_dims(width, height)?;
        let mut bits = Vec::with_capacity(n);
        for r in 0..height {
            for c in 0..width {
                bits.push(f(r, c));
            }
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.bits[row * self.width + col] = value;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Foreground coordinates in row-major order.
    pub fn foreground(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i / w, i % w))
    }

    pub fn same_shape(&self, other: &BinaryMask) -> Result<(), RasterError> {
        if self.width != other.width || self.height != other.height {
            return Err(RasterError::DimensionMismatch(
                self.width,
                self.height,
                other.width,
                other.height,
            ));
        }
        Ok(())
    }

    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    pub fn intersect(&self, other: &BinaryMask) -> Result<BinaryMask, RasterError> {
        self.same_shape(other)?;
        let bits = self
            .bits
            .iter()
            .zip(&other.bits)
            .map(|(&a, &b)| a && b)
            .collect();
        Ok(BinaryMask {
            width: self.width,
            height: self.height,
            bits,
        })
    }

    pub fn intersection_count(&self, other: &BinaryMask) -> usize {
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(&a, &b)| a && b)
            .count()
    }

    /// Intersection over union; two empty masks count as a perfect match.
    pub fn iou(&self, other: &BinaryMask) -> Result<f64, RasterError> {
        self.same_shape(other)?;
        let inter = self.intersection_count(other);
        let union = self
            .bits
            .iter()
            .zip(&other.bits)
            .filter(|(&a, &b)| a || b)
            .count();
        Ok(if union == 0 {
            1.0
        } else {
            inter as f64 / union as f64
        })
    }
}
