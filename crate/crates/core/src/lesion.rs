//! Lesion-level shape features and the melanoma/benign decision.
//!
//! * S1: detected veil area over lesion area.
//! * S2: circularity, the mean boundary-to-centroid distance over its
//!   population standard deviation.
//! * S3: ellipticity from the affine moment invariant
//!   `A1 = (mu20 * mu02 - mu11^2) / mu00^4`, folded so that an ideal ellipse
//!   scores 1.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotate::Diagnosis;
use crate::dtree::{DecisionTree, Node, TreeError};
use crate::raster::{boundary_pixels, BinaryMask, RasterError};

/// Circularity reported when every boundary pixel is equidistant from the
/// centroid.
pub const CIRCULARITY_CAP: f64 = 1e6;

/// S1 values strictly below this are benign under the fixed model.
pub const PAPER_S1_THRESHOLD: f64 = 0.009;
/// S3 values strictly above this are benign under the fixed model.
pub const PAPER_S3_THRESHOLD: f64 = 0.979;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LesionError {
    #[error("lesion mask is empty")]
    EmptyLesion,
    #[error("veil mask extends outside the lesion")]
    VeilOutsideLesion,
    #[error("lesion boundary has {0} pixels, need at least 2")]
    TooFewBoundaryPixels(usize),
    #[error("lesion is degenerate (collinear pixels)")]
    Degenerate,
    #[error("classifier predicted unknown class {0}")]
    UnknownClass(usize),
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// Central moments of a binary mask, rows as the first coordinate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub m00: f64,
    pub mu11: f64,
    pub mu20: f64,
    pub mu02: f64,
    pub centroid: (f64, f64),
}

impl Moments {
    /// Central moments from exact integer power sums, so masks that differ
    /// by an integer translation get bit-identical results.
    pub fn of(mask: &BinaryMask) -> Result<Self, LesionError> {
        let s = PowerSums::of(mask)?;
        let n = s.n as f64;
        Ok(Self {
            m00: n,
            mu11: s.central(s.rc, s.r, s.c) as f64 / n,
            mu20: s.central(s.rr, s.r, s.r) as f64 / n,
            mu02: s.central(s.cc, s.c, s.c) as f64 / n,
            centroid: (s.r as f64 / n, s.c as f64 / n),
        })
    }

    /// First affine moment invariant.
    pub fn a1(&self) -> f64 {
        (self.mu20 * self.mu02 - self.mu11 * self.mu11) / self.m00.powi(4)
    }
}

struct PowerSums {
    n: i128,
    r: i128,
    c: i128,
    rr: i128,
    cc: i128,
    rc: i128,
}

impl PowerSums {
    fn of(mask: &BinaryMask) -> Result<Self, LesionError> {
        if mask.is_empty() {
            return Err(LesionError::EmptyLesion);
        }
        let mut s = PowerSums { n: 0, r: 0, c: 0, rr: 0, cc: 0, rc: 0 };
        for (r, c) in mask.foreground() {
            let (r, c) = (r as i128, c as i128);
            s.n += 1;
            s.r += r;
            s.c += c;
            s.rr += r * r;
            s.cc += c * c;
            s.rc += r * c;
        }
        Ok(s)
    }

    /// `n` times the central second moment built from `xy`, `x` and `y` sums.
    fn central(&self, xy: i128, x: i128, y: i128) -> i128 {
        self.n * xy - x * y
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LesionShapeFeatures {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl LesionShapeFeatures {
    pub fn as_array(&self) -> [f64; 3] {
        [self.s1, self.s2, self.s3]
    }
}

pub fn veil_ratio(veil: &BinaryMask, lesion: &BinaryMask) -> Result<f64, LesionError> {
    veil.same_shape(lesion)?;
    if lesion.is_empty() {
        return Err(LesionError::EmptyLesion);
    }
    if !veil.is_subset_of(lesion) {
        return Err(LesionError::VeilOutsideLesion);
    }
    Ok(veil.count() as f64 / lesion.count() as f64)
}

/// Distances are taken to the centroid of the filled mask. They are formed
/// from exact integer offsets and summed in sorted order, which makes the
/// result invariant under translations, flips and transposition.
pub fn circularity(lesion: &BinaryMask) -> Result<f64, LesionError> {
    let s = PowerSums::of(lesion)?;
    let boundary = boundary_pixels(lesion)?;
    if boundary.len() < 2 {
        return Err(LesionError::TooFewBoundaryPixels(boundary.len()));
    }
    // squared distance scaled by n^2
    let mut scaled: Vec<i128> = boundary
        .iter()
        .map(|&(r, c)| {
            let dr = s.n * r as i128 - s.r;
            let dc = s.n * c as i128 - s.c;
            dr * dr + dc * dc
        })
        .collect();
    scaled.sort_unstable();
    let n = s.n as f64;
    let d: Vec<f64> = scaled.iter().map(|&q| (q as f64).sqrt() / n).collect();
    let count = d.len() as f64;
    let mean = d.iter().sum::<f64>() / count;
    let sd = (d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / count).sqrt();
    if sd < 1e-9 {
        return Ok(CIRCULARITY_CAP);
    }
    Ok(mean / sd)
}

pub fn ellipticity(lesion: &BinaryMask) -> Result<f64, LesionError> {
    let m = Moments::of(lesion)?;
    let det = m.mu20 * m.mu02 - m.mu11 * m.mu11;
    if det.is_nan() || det <= 1e-12 * m.mu20 * m.mu02 {
        return Err(LesionError::Degenerate);
    }
    let k = 16.0 * PI * PI * m.a1();
    Ok(if k <= 1.0 { k } else { 1.0 / k })
}

pub fn lesion_features(
    veil: &BinaryMask,
    lesion: &BinaryMask,
) -> Result<LesionShapeFeatures, LesionError> {
    Ok(LesionShapeFeatures {
        s1: veil_ratio(veil, lesion)?,
        s2: circularity(lesion)?,
        s3: ellipticity(lesion)?,
    })
}

pub fn lesion_classes() -> Vec<String> {
    Diagnosis::ALL.iter().map(|d| d.as_str().to_string()).collect()
}

/// The published two-split model over (S1, S2, S3): benign when S1 < 0.009,
/// otherwise benign when S3 > 0.979, otherwise melanoma. S2 is not used.
pub fn paper_lesion_model() -> DecisionTree {
    let leaf = |d: Diagnosis| {
        Box::new(Node::Leaf {
            class: d.index(),
            counts: vec![0; Diagnosis::ALL.len()],
        })
    };
    // `<=` goes left, so the largest double below 0.009 makes the test strict
    let s1_below = f64::from_bits(PAPER_S1_THRESHOLD.to_bits() - 1);
    let root = Node::Split {
        feature: 0,
        threshold: s1_below,
        left: leaf(Diagnosis::Benign),
        right: Box::new(Node::Split {
            feature: 2,
            threshold: PAPER_S3_THRESHOLD,
            left: leaf(Diagnosis::Melanoma),
            right: leaf(Diagnosis::Benign),
        }),
    };
    DecisionTree::new(3, lesion_classes(), root).expect("fixed model is well formed")
}

pub fn classify_lesion(
    features: &LesionShapeFeatures,
    model: &DecisionTree,
) -> Result<Diagnosis, LesionError> {
    let class = model.predict(&features.as_array())?;
    Diagnosis::from_index(class).ok_or(LesionError::UnknownClass(class))
}
