//! Blue-white veil detection in dermoscopy images.
//!
//! Lesion pixels are classified from contextual color and texture features
//! with a C4.5-style decision tree, the resulting veil mask is cleaned with a
//! majority filter, and the lesion is labelled melanoma or benign from the
//! veil area ratio and moment-based shape descriptors.

pub mod raster;
pub mod annotate;
pub mod features;
pub mod io;
pub mod metrics;
pub mod dtree;
pub mod veil;
pub mod lesion;
pub mod config;
pub mod phantom;
