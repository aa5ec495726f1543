//! Dataset manifests: a JSON list of image/annotation pairs with a split tag.
//! Relative paths are resolved against the manifest's directory.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use bwveil::annotate::{load_annotations, Annotation};
use serde::Deserialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
    All,
}

impl Split {
    /// Entries tagged `all` belong to every split; asking for `all` selects
    /// every entry.
    pub fn selects(self, entry: Split) -> bool {
        self == Split::All || entry == Split::All || self == entry
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryDoc {
    image_path: PathBuf,
    annotation_path: PathBuf,
    split: Split,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestDoc {
    entries: Vec<EntryDoc>,
}

pub struct Entry {
    pub image_path: PathBuf,
    pub annotation: Annotation,
}

impl Entry {
    pub fn image_id(&self) -> &str {
        &self.annotation.record.image_id
    }
}

pub fn load(path: &Path, split: Split) -> Result<Vec<Entry>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read manifest {}", path.display()))?;
    let doc: ManifestDoc = serde_json::from_str(&text)
        .with_context(|| format!("malformed manifest {}", path.display()))?;
    let base = path.parent().unwrap_or(Path::new(""));
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, e) in doc.entries.into_iter().enumerate() {
        let image_path = base.join(&e.image_path);
        let annotation_path = base.join(&e.annotation_path);
        if !image_path.is_file() {
            bail!("manifest entry {i}: image {} does not exist", image_path.display());
        }
        let annotation = load_annotations(&annotation_path)
            .with_context(|| format!("manifest entry {i}"))?;
        if !seen.insert(annotation.record.image_id.clone()) {
            bail!(
                "manifest entry {i}: duplicate image_id `{}`",
                annotation.record.image_id
            );
        }
        if split.selects(e.split) {
            out.push(Entry {
                image_path,
                annotation,
            });
        }
    }
    Ok(out)
}
