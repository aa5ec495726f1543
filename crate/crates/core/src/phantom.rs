//! Synthetic dermoscopy-like images with exact ground truth.
//!
//! A phantom is a skin-toned background with a brown lesion traced from
//! border control points and, optionally, a bluish veil disk planted at the
//! lesion centroid. The annotation carries the border, one veil circle
//! inside the planted disk and two non-veil circles elsewhere in the lesion.

use std::f64::consts::PI;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::annotate::{
    Annotation, AnnotationError, Circle, Diagnosis, LesionRecord, PixelLabel, RegionAnnotation,
};
use crate::lesion::{classify_lesion, lesion_features, paper_lesion_model, LesionError};
use crate::raster::{
    border_mask, distance_field, BinaryMask, ControlPolygon, RasterError, RgbImage,
};

pub const SKIN_RGB: [f64; 3] = [200.0, 150.0, 130.0];
pub const LESION_RGB: [f64; 3] = [130.0, 90.0, 70.0];
pub const VEIL_RGB: [f64; 3] = [100.0, 120.0, 160.0];
pub const GLOBULE_RGB: [f64; 3] = [75.0, 50.0, 40.0];

#[derive(Debug, Error)]
pub enum PhantomError {
    #[error("invalid phantom spec: {0}")]
    Spec(String),
    #[error("no room for a non-veil circle of radius {0}")]
    NoRoom(f64),
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error(transparent)]
    Annotation(#[from] AnnotationError),
    #[error(transparent)]
    Lesion(#[from] LesionError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    Disk,
    /// 2:1 ellipse at a random orientation.
    Ellipse,
    /// Three-lobed outline with a smaller five-fold ripple.
    Irregular,
}

impl FromStr for Shape {
    type Err = PhantomError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "disk" => Ok(Shape::Disk),
            "ellipse" => Ok(Shape::Ellipse),
            "irregular" => Ok(Shape::Irregular),
            _ => Err(PhantomError::Spec(format!(
                "unknown shape `{s}` (expected disk, ellipse or irregular)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhantomSpec {
    pub image_id: String,
    pub width: usize,
    pub height: usize,
    pub shape: Shape,
    /// Lesion radius as a fraction of the shorter image side.
    pub lesion_scale: f64,
    /// Planted veil area over lesion area; 0 for no veil.
    pub veil_fraction: f64,
    /// Standard deviation of the per-channel Gaussian noise.
    pub noise: f64,
}

impl Default for PhantomSpec {
    fn default() -> Self {
        Self {
            image_id: "phantom".into(),
            width: 256,
            height: 256,
            shape: Shape::Disk,
            lesion_scale: 0.35,
            veil_fraction: 0.1,
            noise: 10.0,
        }
    }
}

impl PhantomSpec {
    fn validate(&self) -> Result<(), PhantomError> {
        let bad = |m: String| Err(PhantomError::Spec(m));
        if self.width < 32 || self.height < 32 {
            return bad(format!("image {}x{} is smaller than 32x32", self.width, self.height));
        }
        if !(self.lesion_scale > 0.05 && self.lesion_scale <= 0.4) {
            return bad(format!("lesion_scale {} not in (0.05, 0.4]", self.lesion_scale));
        }
        if !(0.0..=0.5).contains(&self.veil_fraction) {
            return bad(format!("veil_fraction {} not in [0, 0.5]", self.veil_fraction));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return bad(format!("noise {} must be >= 0", self.noise));
        }
        if self.image_id.is_empty() {
            return bad("image_id is empty".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Phantom {
    pub image: RgbImage,
    pub annotation: Annotation,
    pub lesion: BinaryMask,
    pub veil: BinaryMask,
}

fn border_points(spec: &PhantomSpec, rng: &mut ChaCha8Rng) -> Vec<(f64, f64)> {
    let (h, w) = (spec.height as f64, spec.width as f64);
    let radius = spec.lesion_scale * h.min(w);
    let jitter = 0.03 * h.min(w);
    let center = (
        h / 2.0 + rng.gen_range(-jitter..=jitter),
        w / 2.0 + rng.gen_range(-jitter..=jitter),
    );
    let tilt = rng.gen_range(0.0..PI);
    let phase = rng.gen_range(0.0..2.0 * PI);
    let n = 32;
    (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            let (dr, dc) = match spec.shape {
                Shape::Disk => (radius * t.sin(), radius * t.cos()),
                Shape::Ellipse => {
                    let (a, b) = (radius, radius / 2.0);
                    let (x, y) = (a * t.cos(), b * t.sin());
                    (x * tilt.sin() + y * tilt.cos(), x * tilt.cos() - y * tilt.sin())
                }
                Shape::Irregular => {
                    let r = radius
                        * (1.0 + 0.3 * (3.0 * t + phase).sin() + 0.08 * (5.0 * t).sin())
                        / 1.3;
                    (r * t.sin(), r * t.cos())
                }
            };
            (center.0 + dr, center.1 + dc)
        })
        .collect()
}

fn disk_mask(w: usize, h: usize, center: (f64, f64), radius: f64) -> Result<BinaryMask, RasterError> {
    BinaryMask::from_fn(w, h, |r, c| {
        (r as f64 - center.0).powi(2) + (c as f64 - center.1).powi(2) <= radius * radius
    })
}

fn centroid(mask: &BinaryMask) -> (f64, f64) {
    let (mut sr, mut sc) = (0.0, 0.0);
    for (r, c) in mask.foreground() {
        sr += r as f64;
        sc += c as f64;
    }
    let n = mask.count() as f64;
    ((sr / n).round(), (sc / n).round())
}

/// Pixels whose disk of `radius` lies inside the lesion and clear of the
/// veil disk, in row-major order.
fn free_centers(
    lesion: &BinaryMask,
    veil: Option<((f64, f64), f64)>,
    radius: f64,
) -> Result<Vec<(usize, usize)>, RasterError> {
    let (w, h) = (lesion.width(), lesion.height());
    let outside = BinaryMask::from_fn(w, h, |r, c| !lesion.get(r, c))?;
    let depth = distance_field(&outside)?;
    Ok(lesion
        .foreground()
        .filter(|&(r, c)| depth.get(r, c) > radius + 1.0)
        .filter(|&(r, c)| match veil {
            Some((vc, vr)) => {
                ((r as f64 - vc.0).powi(2) + (c as f64 - vc.1).powi(2)).sqrt() > vr + radius + 2.0
            }
            None => true,
        })
        .collect())
}

/// Paints skin, lesion and veil. The lesion carries a smooth pigment
/// variation and a few dark globules; the veil has a per-image tint and a
/// one-pixel soft edge that stays at least half veil inside the disk.
fn render(
    spec: &PhantomSpec,
    lesion: &BinaryMask,
    planted: Option<((f64, f64), f64)>,
    rng: &mut ChaCha8Rng,
) -> Result<RgbImage, PhantomError> {
    let (w, h) = (spec.width, spec.height);
    let tint = VEIL_RGB.map(|v| v + rng.gen_range(-12.0..=12.0));
    let waves: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| (rng.gen_range(0.02..0.08), rng.gen_range(0.02..0.08), rng.gen_range(0.0..2.0 * PI)))
        .collect();
    let pigment = |r: usize, c: usize| {
        1.0 + waves
            .iter()
            .map(|&(kr, kc, ph)| 0.05 * (kr * r as f64 + kc * c as f64 + ph).sin())
            .sum::<f64>()
    };
    let inside: Vec<(usize, usize)> = lesion.foreground().collect();
    let globules: Vec<((f64, f64), f64)> = (0..rng.gen_range(4..=10))
        .map(|_| {
            let (r, c) = inside[rng.gen_range(0..inside.len())];
            ((r as f64, c as f64), rng.gen_range(1.5..3.5))
        })
        .collect();
    let noise = Normal::new(0.0, spec.noise.max(1e-12)).expect("finite sigma");
    let mut image = RgbImage::new(w, h, [0, 0, 0])?;
    for r in 0..h {
        for c in 0..w {
            let base = if lesion.get(r, c) {
                let in_globule = globules.iter().any(|&((gr, gc), gr_)| {
                    (r as f64 - gr).hypot(c as f64 - gc) <= gr_
                });
                let brown = if in_globule {
                    GLOBULE_RGB
                } else {
                    LESION_RGB.map(|v| v * pigment(r, c))
                };
                match planted {
                    Some((vc, vr)) => {
                        let d = (r as f64 - vc.0).hypot(c as f64 - vc.1);
                        let wv = (vr + 0.5 - d).clamp(0.0, 1.0);
                        [0, 1, 2].map(|k| wv * tint[k] + (1.0 - wv) * brown[k])
                    }
                    None => brown,
                }
            } else {
                SKIN_RGB
            };
            let mut px = [0u8; 3];
            for (k, v) in px.iter_mut().enumerate() {
                let n = if spec.noise > 0.0 { noise.sample(rng) } else { 0.0 };
                *v = (base[k] + n).round().clamp(0.0, 255.0) as u8;
            }
            image.set(r, c, px);
        }
    }
    Ok(image)
}

pub fn generate(spec: &PhantomSpec, seed: u64) -> Result<Phantom, PhantomError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (spec.width, spec.height);
    let border = ControlPolygon::new(border_points(spec, &mut rng))?;
    let lesion = border_mask(&border, w, h)?;
    let area = lesion.count() as f64;
    let center = centroid(&lesion);

    let planted = (spec.veil_fraction > 0.0).then(|| {
        let radius = (spec.veil_fraction * area / PI).sqrt();
        (center, radius)
    });
    let veil = match planted {
        Some((c, r)) => disk_mask(w, h, c, r)?.intersect(&lesion)?,
        None => BinaryMask::new(w, h)?,
    };

    let mut circles = Vec::new();
    if let Some((c, r)) = planted {
        circles.push(Circle {
            center_row: c.0,
            center_col: c.1,
            radius: (0.7 * r).floor().max(1.0),
            label: PixelLabel::Veil,
        });
    }
    let lesion_radius = spec.lesion_scale * h.min(w) as f64;
    let nv_radius = (0.12 * lesion_radius).clamp(3.0, 15.0).floor();
    let mut candidates = free_centers(&lesion, planted, nv_radius)?;
    for _ in 0..2 {
        if candidates.is_empty() {
            return Err(PhantomError::NoRoom(nv_radius));
        }
        let (r, c) = candidates[rng.gen_range(0..candidates.len())];
        circles.push(Circle {
            center_row: r as f64,
            center_col: c as f64,
            radius: nv_radius,
            label: PixelLabel::NonVeil,
        });
        candidates.retain(|&(rr, cc)| {
            (rr as f64 - r as f64).hypot(cc as f64 - c as f64) > 2.0 * nv_radius + 1.0
        });
    }

    let features = lesion_features(&veil, &lesion)?;
    let diagnosis = classify_lesion(&features, &paper_lesion_model())?;
    let has_veil = !veil.is_empty();
    let annotation = Annotation {
        width: w,
        height: h,
        border,
        regions: RegionAnnotation { circles },
        record: LesionRecord {
            image_id: spec.image_id.clone(),
            diagnosis,
            has_veil_area: has_veil,
            primary_veil: has_veil && diagnosis == Diagnosis::Melanoma,
            veil_related: false,
        },
    };
    // round-trip through the validating parser so phantoms obey the schema
    let annotation = Annotation::from_json(&annotation.to_json())?;

    let image = render(spec, &lesion, planted, &mut rng)?;
    Ok(Phantom {
        image,
        annotation,
        lesion,
        veil,
    })
}
