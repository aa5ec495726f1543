//! Per-image veil detection: classify lesion pixels with a pixel tree over
//! the smoothed feature planes, then clean the result with a majority filter.

use thiserror::Error;

use crate::annotate::{PixelLabel, PixelSample};
use crate::dtree::DecisionTree;
use crate::features::{
    extract_feature_planes, FeatureConfig, FeatureError, FeatureExtractor, FeaturePlanes,
    SkinColor, FEATURE_COUNT,
};
use crate::metrics::{confusion, MetricsError, MetricsReport};
use crate::raster::{boundary_pixels, majority_filter, BinaryMask, RasterError, RgbImage};

#[derive(Debug, Error)]
pub enum VeilError {
    #[error("pixel tree expects {0} features, not {FEATURE_COUNT}")]
    TreeWidth(usize),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("sample ({row}, {col}) lies outside the {width}x{height} mask")]
    SampleOutOfBounds {
        row: usize,
        col: usize,
        width: usize,
        height: usize,
    },
}

/// Veil pixels straight from the classifier and after majority filtering.
/// Both are subsets of the lesion.
#[derive(Clone, Debug, PartialEq)]
pub struct VeilMask {
    pub initial: BinaryMask,
    pub final_: BinaryMask,
}

fn check_tree(tree: &DecisionTree) -> Result<(), VeilError> {
    if tree.n_features() != FEATURE_COUNT {
        return Err(VeilError::TreeWidth(tree.n_features()));
    }
    Ok(())
}

fn classify(
    planes: &FeaturePlanes,
    lesion: &BinaryMask,
    tree: &DecisionTree,
    used: &[usize],
    majority_window: usize,
) -> Result<VeilMask, VeilError> {
    let veil = PixelLabel::Veil.index();
    let mut initial = BinaryMask::new(lesion.width(), lesion.height())?;
    let mut x = [0.0; FEATURE_COUNT];
    for (r, c) in lesion.foreground() {
        for &f in used {
            x[f] = planes.get(f, r, c).unwrap_or(0.0);
        }
        if tree.predict_unchecked(&x) == veil {
            initial.set(r, c, true);
        }
    }
    let final_ = majority_filter(&initial, majority_window)?.intersect(lesion)?;
    Ok(VeilMask { initial, final_ })
}

/// Detects veil using an existing extractor, computing only the planes the
/// tree splits on.
pub fn detect_veil_with(
    extractor: &FeatureExtractor,
    lesion: &BinaryMask,
    tree: &DecisionTree,
    majority_window: usize,
) -> Result<VeilMask, VeilError> {
    check_tree(tree)?;
    let used: Vec<usize> = tree.used_features().into_iter().collect();
    let planes = extractor.planes(&used)?;
    classify(&planes, lesion, tree, &used, majority_window)
}

pub fn detect_veil(
    image: &RgbImage,
    lesion: &BinaryMask,
    skin: &SkinColor,
    tree: &DecisionTree,
    features: &FeatureConfig,
    majority_window: usize,
) -> Result<VeilMask, VeilError> {
    check_tree(tree)?;
    let extractor = FeatureExtractor::new(image, lesion, *skin, features.clone())?;
    detect_veil_with(&extractor, lesion, tree, majority_window)
}

/// Same result as [`detect_veil`], but extracts all eighteen planes first.
pub fn detect_veil_eager(
    image: &RgbImage,
    lesion: &BinaryMask,
    skin: &SkinColor,
    tree: &DecisionTree,
    features: &FeatureConfig,
    majority_window: usize,
) -> Result<VeilMask, VeilError> {
    check_tree(tree)?;
    let planes = extract_feature_planes(image, lesion, skin, features)?;
    let all: Vec<usize> = (0..FEATURE_COUNT).collect();
    classify(&planes, lesion, tree, &all, majority_window)
}

/// Scores `mask` at labelled sample coordinates, veil being positive.
pub fn sample_metrics(
    mask: &BinaryMask,
    samples: &[PixelSample],
) -> Result<MetricsReport, VeilError> {
    let mut pred = Vec::with_capacity(samples.len());
    let mut actual = Vec::with_capacity(samples.len());
    for s in samples {
        if s.row >= mask.height() || s.col >= mask.width() {
            return Err(VeilError::SampleOutOfBounds {
                row: s.row,
                col: s.col,
                width: mask.width(),
                height: mask.height(),
            });
        }
        pred.push(mask.get(s.row, s.col));
        actual.push(s.label == PixelLabel::Veil);
    }
    Ok(confusion(&pred, &actual, &true)?)
}

/// Scores a predicted veil mask against a reference over every lesion pixel.
pub fn mask_metrics(
    predicted: &BinaryMask,
    truth: &BinaryMask,
    lesion: &BinaryMask,
) -> Result<MetricsReport, VeilError> {
    predicted.same_shape(truth)?;
    predicted.same_shape(lesion)?;
    let (pred, actual): (Vec<bool>, Vec<bool>) = lesion
        .foreground()
        .map(|(r, c)| (predicted.get(r, c), truth.get(r, c)))
        .unzip();
    Ok(confusion(&pred, &actual, &true)?)
}

pub const LESION_OUTLINE: [u8; 3] = [255, 255, 255];
pub const VEIL_OUTLINE: [u8; 3] = [255, 255, 0];

/// Copy of `image` with the lesion outline drawn one pixel wide and the veil
/// outline three pixels wide.
pub fn overlay(
    image: &RgbImage,
    lesion: &BinaryMask,
    veil: &BinaryMask,
) -> Result<RgbImage, VeilError> {
    lesion.same_shape(veil)?;
    let mut out = image.clone();
    let (w, h) = (image.width(), image.height());
    if !lesion.is_empty() {
        for (r, c) in boundary_pixels(lesion)? {
            out.set(r, c, LESION_OUTLINE);
        }
    }
    if !veil.is_empty() {
        for (r, c) in boundary_pixels(veil)? {
            for rr in r.saturating_sub(1)..=(r + 1).min(h - 1) {
                for cc in c.saturating_sub(1)..=(c + 1).min(w - 1) {
                    out.set(rr, cc, VEIL_OUTLINE);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dtree::{Node, LabeledRow};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const F3: usize = 2;
    const F10: usize = 9;

    fn classes() -> Vec<String> {
        vec!["non-veil".into(), "veil".into()]
    }

    fn leaf(class: usize) -> Box<Node> {
        let mut counts = vec![0, 0];
        counts[class] = 1;
        Box::new(Node::leaf_from_counts(counts))
    }

    /// Veil when F3 > 0.4 and F10 <= -40.
    fn blue_tree() -> DecisionTree {
        let root = Node::Split {
            feature: F3,
            threshold: 0.4,
            left: leaf(0),
            right: Box::new(Node::Split {
                feature: F10,
                threshold: -40.0,
                left: leaf(1),
                right: leaf(0),
            }),
        };
        DecisionTree::new(FEATURE_COUNT, classes(), root).unwrap()
    }

    struct Scene {
        image: RgbImage,
        lesion: BinaryMask,
        disk: BinaryMask,
    }

    /// Brown lesion on skin with a bluish disk and scattered blue specks.
    fn scene(seed: u64) -> Scene {
        let (w, h) = (120, 100);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lesion = BinaryMask::from_fn(w, h, |r, c| {
            let (dr, dc) = (r as f64 - 50.0, c as f64 - 60.0);
            (dr / 35.0).powi(2) + (dc / 45.0).powi(2) <= 1.0
        })
        .unwrap();
        let disk = BinaryMask::from_fn(w, h, |r, c| {
            (r as f64 - 48.0).powi(2) + (c as f64 - 55.0).powi(2) <= 15.0f64.powi(2)
        })
        .unwrap();
        let mut image = RgbImage::new(w, h, [0, 0, 0]).unwrap();
        for r in 0..h {
            for c in 0..w {
                let jitter = |rng: &mut ChaCha8Rng, v: i32| (v + rng.gen_range(-6..=6)).clamp(0, 255) as u8;
                let base = if disk.get(r, c) {
                    [100, 120, 160]
                } else if lesion.get(r, c) {
                    if rng.gen_bool(0.02) {
                        [100, 120, 160]
                    } else {
                        [130, 90, 70]
                    }
                } else {
                    [200, 150, 130]
                };
                let px = [
                    jitter(&mut rng, base[0]),
                    jitter(&mut rng, base[1]),
                    jitter(&mut rng, base[2]),
                ];
                image.set(r, c, px);
            }
        }
        Scene { image, lesion, disk }
    }

    fn skin() -> SkinColor {
        SkinColor::new(200.0, 150.0, 130.0)
    }

    #[test]
    fn non_veil_leaf_gives_empty_masks() {
        let s = scene(1);
        let tree = DecisionTree::new(FEATURE_COUNT, classes(), *leaf(0)).unwrap();
        let m = detect_veil(&s.image, &s.lesion, &skin(), &tree, &FeatureConfig::default(), 5)
            .unwrap();
        assert!(m.initial.is_empty() && m.final_.is_empty());
    }

    #[test]
    fn planted_disk_is_recovered() {
        let s = scene(2);
        let m = detect_veil(&s.image, &s.lesion, &skin(), &blue_tree(), &FeatureConfig::default(), 5)
            .unwrap();
        assert!(m.initial.is_subset_of(&s.lesion));
        assert!(m.final_.is_subset_of(&s.lesion));
        assert!(m.final_.iou(&s.disk).unwrap() >= 0.9);
        // isolated specks outside the disk do not survive the filter
        let stray = |mask: &BinaryMask| mask.count() - mask.intersection_count(&s.disk);
        assert!(stray(&m.final_) <= stray(&m.initial));
    }

    #[test]
    fn color_tree_never_touches_texture() {
        let s = scene(3);
        let ex = FeatureExtractor::new(&s.image, &s.lesion, skin(), FeatureConfig::default())
            .unwrap();
        detect_veil_with(&ex, &s.lesion, &blue_tree(), 5).unwrap();
        assert_eq!(ex.glcm_window_count(), 0);
    }

    #[test]
    fn lazy_and_eager_agree() {
        let s = scene(4);
        let root = Node::Split {
            feature: 16,
            threshold: 1.0,
            left: Box::new(blue_tree().root().clone()),
            right: leaf(1),
        };
        let tree = DecisionTree::new(FEATURE_COUNT, classes(), root).unwrap();
        let cfg = FeatureConfig::default();
        let lazy = detect_veil(&s.image, &s.lesion, &skin(), &tree, &cfg, 5).unwrap();
        let eager = detect_veil_eager(&s.image, &s.lesion, &skin(), &tree, &cfg, 5).unwrap();
        assert_eq!(lazy, eager);
    }

    #[test]
    fn wrong_width_tree_rejected() {
        let s = scene(5);
        let tree = DecisionTree::new(3, classes(), *leaf(0)).unwrap();
        assert!(matches!(
            detect_veil(&s.image, &s.lesion, &skin(), &tree, &FeatureConfig::default(), 5),
            Err(VeilError::TreeWidth(3))
        ));
    }

    #[test]
    fn sample_metrics_match_tree_metrics() {
        let s = scene(6);
        let tree = blue_tree();
        let cfg = FeatureConfig::default();
        let m = detect_veil(&s.image, &s.lesion, &skin(), &tree, &cfg, 5).unwrap();
        let planes = extract_feature_planes(&s.image, &s.lesion, &skin(), &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pixels: Vec<(usize, usize)> = s.lesion.foreground().collect();
        let samples: Vec<PixelSample> = (0..300)
            .map(|_| {
                let (row, col) = pixels[rng.gen_range(0..pixels.len())];
                let label = if s.disk.get(row, col) { PixelLabel::Veil } else { PixelLabel::NonVeil };
                PixelSample { image_id: "a".into(), row, col, label }
            })
            .collect();
        let rows: Vec<LabeledRow> = samples
            .iter()
            .map(|p| LabeledRow::new(planes.vector_at(p.row, p.col).unwrap().0.to_vec(), p.label.index()))
            .collect();
        let pred: Vec<usize> = rows.iter().map(|r| tree.predict(&r.features).unwrap()).collect();
        let actual: Vec<usize> = rows.iter().map(|r| r.label).collect();
        let expected = confusion(&pred, &actual, &PixelLabel::Veil.index()).unwrap();
        assert_eq!(sample_metrics(&m.initial, &samples).unwrap(), expected);
    }

    #[test]
    fn overlay_marks_outlines() {
        let s = scene(7);
        let o = overlay(&s.image, &s.lesion, &s.disk).unwrap();
        assert_eq!(o.get(50, 15), LESION_OUTLINE);
        assert_eq!(o.get(48, 55 + 15), VEIL_OUTLINE);
        assert_eq!(o.get(48, 55 + 14), VEIL_OUTLINE);
        assert_eq!(o.get(48, 55), s.image.get(48, 55));
    }
}
