//! Per-image annotation documents and balanced training-pixel sampling.
//!
//! One JSON document per image:
//!
//! ```json
//! {
//!   "image_id": "case-001",
//!   "width": 768, "height": 512,
//!   "border": [[120.0, 200.0], [140.5, 380.0], [300.0, 310.0]],
//!   "regions": [{"center": [200, 260], "radius": 8, "label": "veil"}],
//!   "diagnosis": "melanoma",
//!   "has_veil_area": true, "primary_veil": false, "veil_related": false
//! }
//! ```
//!
//! `border` holds (row, col) control points of the closed lesion outline.
//! `regions` and the three flags are optional and default to empty / false.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::raster::{border_mask, BinaryMask, ControlPolygon, RasterError};

#[derive(Debug, Error)]
pub enum AnnotationError {
    #[error("{path}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("schema error at `{field}`: {msg}")]
    Schema { field: String, msg: String },
    #[error("not enough {label} pixels: requested {requested}, available {available} (short by {})", requested - available)]
    Shortfall {
        label: PixelLabel,
        requested: usize,
        available: usize,
    },
    #[error("no {0} regions annotated")]
    MissingClass(PixelLabel),
}

impl AnnotationError {
    fn schema(field: impl Into<String>, msg: impl Into<String>) -> Self {
        AnnotationError::Schema {
            field: field.into(),
            msg: msg.into(),
        }
    }
}

/// Pixel class. The discriminant is the class index used by decision trees.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PixelLabel {
    #[serde(rename = "non-veil")]
    NonVeil = 0,
    #[serde(rename = "veil")]
    Veil = 1,
}

impl PixelLabel {
    pub const ALL: [PixelLabel; 2] = [PixelLabel::NonVeil, PixelLabel::Veil];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PixelLabel::NonVeil => "non-veil",
            PixelLabel::Veil => "veil",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|l| l.as_str() == s)
    }
}

impl fmt::Display for PixelLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Diagnosis {
    Benign = 0,
    Melanoma = 1,
}

impl Diagnosis {
    pub const ALL: [Diagnosis; 2] = [Diagnosis::Benign, Diagnosis::Melanoma];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Diagnosis::Benign => "benign",
            Diagnosis::Melanoma => "melanoma",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|d| d.as_str() == s)
    }
}

impl fmt::Display for Diagnosis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circle {
    pub center_row: f64,
    pub center_col: f64,
    pub radius: f64,
    pub label: PixelLabel,
}

impl Circle {
    #[inline]
    pub fn contains(&self, row: usize, col: usize) -> bool {
        let dr = row as f64 - self.center_row;
        let dc = col as f64 - self.center_col;
        dr * dr + dc * dc <= self.radius * self.radius
    }

    /// Integer pixels inside the circle, row-major.
    pub fn pixels(&self) -> Vec<(usize, usize)> {
        let r0 = (self.center_row - self.radius).ceil().max(0.0) as usize;
        let r1 = (self.center_row + self.radius).floor() as usize;
        let c0 = (self.center_col - self.radius).ceil().max(0.0) as usize;
        let c1 = (self.center_col + self.radius).floor() as usize;
        (r0..=r1)
            .flat_map(|r| (c0..=c1).map(move |c| (r, c)))
            .filter(|&(r, c)| self.contains(r, c))
            .collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RegionAnnotation {
    pub circles: Vec<Circle>,
}

impl RegionAnnotation {
    /// Union of the interiors of all circles carrying `label`, row-major.
    pub fn pixels_for(&self, label: PixelLabel) -> Vec<(usize, usize)> {
        let set: BTreeSet<_> = self
            .circles
            .iter()
            .filter(|c| c.label == label)
            .flat_map(|c| c.pixels())
            .collect();
        set.into_iter().collect()
    }

    pub fn has_label(&self, label: PixelLabel) -> bool {
        self.circles.iter().any(|c| c.label == label)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LesionRecord {
    pub image_id: String,
    pub diagnosis: Diagnosis,
    pub has_veil_area: bool,
    pub primary_veil: bool,
    pub veil_related: bool,
}

/// A validated annotation document.
#[derive(Clone, Debug, PartialEq)]
pub struct Annotation {
    pub width: usize,
    pub height: usize,
    pub border: ControlPolygon,
    pub regions: RegionAnnotation,
    pub record: LesionRecord,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegionDoc {
    center: [f64; 2],
    radius: f64,
    label: PixelLabel,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnnotationDoc {
    image_id: String,
    width: usize,
    height: usize,
    border: Vec<[f64; 2]>,
    #[serde(default)]
    regions: Vec<RegionDoc>,
    diagnosis: Diagnosis,
    #[serde(default)]
    has_veil_area: bool,
    #[serde(default)]
    primary_veil: bool,
    #[serde(default)]
    veil_related: bool,
}

impl Annotation {
    /// Filled lesion mask traced from the border control points.
    pub fn lesion_mask(&self) -> Result<BinaryMask, RasterError> {
        border_mask(&self.border, self.width, self.height)
    }

    pub fn from_json(text: &str) -> Result<Self, AnnotationError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let doc: AnnotationDoc = serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            AnnotationError::schema(field, e.into_inner().to_string())
        })?;
        Self::from_doc(doc)
    }

    fn from_doc(doc: AnnotationDoc) -> Result<Self, AnnotationError> {
        if doc.image_id.is_empty() {
            return Err(AnnotationError::schema("image_id", "must not be empty"));
        }
        if doc.width == 0 || doc.height == 0 {
            return Err(AnnotationError::schema("width", "image dimensions must be positive"));
        }
        let (w, h) = (doc.width as f64, doc.height as f64);
        for (i, p) in doc.border.iter().enumerate() {
            if !(p[0] >= 0.0 && p[0] <= h - 1.0 && p[1] >= 0.0 && p[1] <= w - 1.0) {
                return Err(AnnotationError::schema(
                    format!("border[{i}]"),
                    format!("point ({}, {}) outside the {}x{} image", p[0], p[1], doc.width, doc.height),
                ));
            }
        }
        let border = ControlPolygon::new(doc.border.iter().map(|p| (p[0], p[1])).collect())
            .map_err(|e| match e {
                RasterError::InvalidPolygon(msg) => AnnotationError::schema("border", msg),
                other => AnnotationError::schema("border", other.to_string()),
            })?;

        let mut circles = Vec::with_capacity(doc.regions.len());
        for (i, reg) in doc.regions.iter().enumerate() {
            let [cr, cc] = reg.center;
            if !(reg.radius >= 1.0 && reg.radius.is_finite()) {
                return Err(AnnotationError::schema(
                    format!("regions[{i}].radius"),
                    format!("radius {} must be at least 1", reg.radius),
                ));
            }
            if !(cr - reg.radius >= 0.0
                && cc - reg.radius >= 0.0
                && cr + reg.radius <= h - 1.0
                && cc + reg.radius <= w - 1.0)
            {
                return Err(AnnotationError::schema(
                    format!("regions[{i}]"),
                    format!(
                        "circle at ({cr}, {cc}) with radius {} extends outside the {}x{} image",
                        reg.radius, doc.width, doc.height
                    ),
                ));
            }
            circles.push(Circle {
                center_row: cr,
                center_col: cc,
                radius: reg.radius,
                label: reg.label,
            });
        }
        let regions = RegionAnnotation { circles };
        let veil: BTreeSet<_> = regions.pixels_for(PixelLabel::Veil).into_iter().collect();
        if let Some(p) = regions
            .pixels_for(PixelLabel::NonVeil)
            .into_iter()
            .find(|p| veil.contains(p))
        {
            return Err(AnnotationError::schema(
                "regions",
                format!("veil and non-veil circles overlap at pixel ({}, {})", p.0, p.1),
            ));
        }

        if doc.primary_veil && doc.diagnosis != Diagnosis::Melanoma {
            return Err(AnnotationError::schema(
                "primary_veil",
                "primary veil is only recorded for melanomas",
            ));
        }
        Ok(Annotation {
            width: doc.width,
            height: doc.height,
            border,
            regions,
            record: LesionRecord {
                image_id: doc.image_id,
                diagnosis: doc.diagnosis,
                has_veil_area: doc.has_veil_area,
                primary_veil: doc.primary_veil,
                veil_related: doc.veil_related,
            },
        })
    }

    pub fn to_json(&self) -> String {
        let doc = AnnotationDoc {
            image_id: self.record.image_id.clone(),
            width: self.width,
            height: self.height,
            border: self.border.points().iter().map(|&(r, c)| [r, c]).collect(),
            regions: self
                .regions
                .circles
                .iter()
                .map(|c| RegionDoc {
                    center: [c.center_row, c.center_col],
                    radius: c.radius,
                    label: c.label,
                })
                .collect(),
            diagnosis: self.record.diagnosis,
            has_veil_area: self.record.has_veil_area,
            primary_veil: self.record.primary_veil,
            veil_related: self.record.veil_related,
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("annotation serializes");
        s.push('\n');
        s
    }
}

pub fn load_annotations(path: &Path) -> Result<Annotation, AnnotationError> {
    let text = std::fs::read_to_string(path).map_err(|source| AnnotationError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Annotation::from_json(&text)
}

pub fn save_annotations(path: &Path, ann: &Annotation) -> Result<(), AnnotationError> {
    crate::io::write_atomic(path, ann.to_json().as_bytes()).map_err(|e| AnnotationError::Io {
        path: path.to_path_buf(),
        source: match e {
            crate::io::IoError::Io { source, .. } => source,
            other => std::io::Error::other(other.to_string()),
        },
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PixelSample {
    pub image_id: String,
    pub row: usize,
    pub col: usize,
    pub label: PixelLabel,
}

fn draw(
    regions: &RegionAnnotation,
    image_id: &str,
    label: PixelLabel,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<PixelSample>, AnnotationError> {
    let pool = regions.pixels_for(label);
    if count > pool.len() {
        return Err(AnnotationError::Shortfall {
            label,
            requested: count,
            available: pool.len(),
        });
    }
    Ok(rand::seq::index::sample(rng, pool.len(), count)
        .into_iter()
        .map(|i| PixelSample {
            image_id: image_id.to_string(),
            row: pool[i].0,
            col: pool[i].1,
            label,
        })
        .collect())
}

/// Draws `per_class` pixels of each class uniformly without replacement from
/// the union of same-label circles. Veil samples come first.
pub fn sample_pixels(
    regions: &RegionAnnotation,
    image_id: &str,
    per_class: usize,
    seed: u64,
) -> Result<Vec<PixelSample>, AnnotationError> {
    if per_class > 0 {
        for label in [PixelLabel::Veil, PixelLabel::NonVeil] {
            if !regions.has_label(label) {
                return Err(AnnotationError::MissingClass(label));
            }
        }
    }
    sample_present_classes(regions, image_id, per_class, seed)
}

/// Like [`sample_pixels`] but only draws from the classes that are annotated,
/// for images that carry a single kind of region.
pub fn sample_present_classes(
    regions: &RegionAnnotation,
    image_id: &str,
    per_class: usize,
    seed: u64,
) -> Result<Vec<PixelSample>, AnnotationError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(2 * per_class);
    for label in [PixelLabel::Veil, PixelLabel::NonVeil] {
        if regions.has_label(label) {
            out.extend(draw(regions, image_id, label, per_class, &mut rng)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "image_id": "m1", "width": 50, "height": 40,
        "border": [[5, 5], [5, 30], [30, 20]],
        "diagnosis": "benign"
    }"#;

    fn two_circle_regions() -> RegionAnnotation {
        RegionAnnotation {
            circles: vec![
                Circle {
                    center_row: 20.0,
                    center_col: 20.0,
                    radius: 11.0,
                    label: PixelLabel::Veil,
                },
                Circle {
                    center_row: 20.0,
                    center_col: 60.0,
                    radius: 17.0,
                    label: PixelLabel::NonVeil,
                },
            ],
        }
    }

    #[test]
    fn minimal_document_is_valid() {
        let a = Annotation::from_json(MINIMAL).unwrap();
        assert_eq!(a.border.len(), 3);
        assert!(a.regions.circles.is_empty());
        assert_eq!(a.record.diagnosis, Diagnosis::Benign);
        assert!(!a.record.primary_veil);
    }

    #[test]
    fn circle_near_edge_is_out_of_bounds() {
        let doc = MINIMAL.replace(
            "\"diagnosis\"",
            r#""regions": [{"center": [20, 2], "radius": 5, "label": "veil"}], "diagnosis""#,
        );
        match Annotation::from_json(&doc) {
            Err(AnnotationError::Schema { field, .. }) => assert_eq!(field, "regions[0]"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn label_typo_names_the_field() {
        let doc = MINIMAL.replace(
            "\"diagnosis\"",
            r#""regions": [{"center": [20, 20], "radius": 5, "label": "viel"}], "diagnosis""#,
        );
        match Annotation::from_json(&doc) {
            Err(AnnotationError::Schema { field, .. }) => assert_eq!(field, "regions[0].label"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn primary_veil_requires_melanoma() {
        let doc = MINIMAL.replace("\"benign\"", "\"benign\", \"primary_veil\": true");
        assert!(matches!(
            Annotation::from_json(&doc),
            Err(AnnotationError::Schema { field, .. }) if field == "primary_veil"
        ));
    }

    #[test]
    fn overlapping_labels_rejected() {
        let doc = MINIMAL.replace(
            "\"diagnosis\"",
            r#""regions": [{"center": [20, 20], "radius": 5, "label": "veil"},
                           {"center": [20, 26], "radius": 3, "label": "non-veil"}], "diagnosis""#,
        );
        assert!(Annotation::from_json(&doc).is_err());
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut a = Annotation::from_json(MINIMAL).unwrap();
        a.regions.circles.push(Circle {
            center_row: 20.5,
            center_col: 12.0,
            radius: 4.0,
            label: PixelLabel::NonVeil,
        });
        a.record.veil_related = true;
        let p = dir.path().join("a.json");
        save_annotations(&p, &a).unwrap();
        assert_eq!(load_annotations(&p).unwrap(), a);
    }

    #[test]
    fn balanced_samples_inside_their_circles() {
        let regions = two_circle_regions();
        let s = sample_pixels(&regions, "img", 100, 5).unwrap();
        assert_eq!(s.len(), 200);
        for label in PixelLabel::ALL {
            assert_eq!(s.iter().filter(|p| p.label == label).count(), 100);
        }
        for p in &s {
            let circle = regions.circles.iter().find(|c| c.label == p.label).unwrap();
            assert!(circle.contains(p.row, p.col));
        }
        let unique: BTreeSet<_> = s.iter().map(|p| (p.row, p.col)).collect();
        assert_eq!(unique.len(), 200);
    }

    #[test]
    fn shortfall_reports_counts() {
        let regions = two_circle_regions();
        let available = regions.pixels_for(PixelLabel::Veil).len();
        match sample_pixels(&regions, "img", 500, 1) {
            Err(AnnotationError::Shortfall {
                label,
                requested,
                available: a,
            }) => {
                assert_eq!((label, requested, a), (PixelLabel::Veil, 500, available));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn seeded_sampling_is_reproducible() {
        let regions = two_circle_regions();
        let a = sample_pixels(&regions, "img", 50, 42).unwrap();
        let b = sample_pixels(&regions, "img", 50, 42).unwrap();
        let c = sample_pixels(&regions, "img", 50, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn missing_class_rejected() {
        let mut regions = two_circle_regions();
        regions.circles.pop();
        assert!(matches!(
            sample_pixels(&regions, "img", 10, 0),
            Err(AnnotationError::MissingClass(PixelLabel::NonVeil))
        ));
        assert_eq!(
            sample_present_classes(&regions, "img", 10, 0).unwrap().len(),
            10
        );
    }
}
