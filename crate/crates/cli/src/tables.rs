//! CSV tables exchanged between commands.

use std::path::Path;

use anyhow::{bail, Context, Result};
use bwveil::annotate::{Diagnosis, PixelLabel};
use bwveil::dtree::LabeledRow;
use bwveil::features::{feature_name, FEATURE_COUNT};
use bwveil::io::write_atomic;
use bwveil::lesion::LesionShapeFeatures;

pub struct PixelRow {
    pub image_id: String,
    pub row: usize,
    pub col: usize,
    pub label: PixelLabel,
    pub features: [f64; FEATURE_COUNT],
}

pub struct LesionRow {
    pub image_id: String,
    pub features: LesionShapeFeatures,
    pub label: Diagnosis,
}

pub struct Prediction {
    pub image_id: String,
    pub predicted: Diagnosis,
    pub actual: Diagnosis,
}

fn finish(path: &Path, w: csv::Writer<Vec<u8>>) -> Result<()> {
    let bytes = w.into_inner().context("flushing CSV")?;
    write_atomic(path, &bytes)?;
    Ok(())
}

fn reader(path: &Path, expected: &[String]) -> Result<csv::Reader<std::fs::File>> {
    let mut r = csv::Reader::from_path(path)
        .with_context(|| format!("cannot open {}", path.display()))?;
    let header: Vec<String> = r
        .headers()
        .with_context(|| format!("{}: unreadable header", path.display()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header != expected {
        bail!(
            "{}: header is `{}`, expected `{}`",
            path.display(),
            header.join(","),
            expected.join(",")
        );
    }
    Ok(r)
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: u64, name: &str) -> Result<T> {
    let raw = rec.get(i).unwrap_or("");
    raw.parse()
        .ok()
        .with_context(|| format!("line {line}: bad {name} `{raw}`"))
}

fn pixel_header() -> Vec<String> {
    let mut h: Vec<String> = ["image_id", "row", "col", "label"].map(String::from).to_vec();
    h.extend((0..FEATURE_COUNT).map(feature_name));
    h
}

pub fn write_pixels(path: &Path, rows: &[PixelRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(pixel_header())?;
    for r in rows {
        let mut rec = vec![
            r.image_id.clone(),
            r.row.to_string(),
            r.col.to_string(),
            r.label.as_str().to_string(),
        ];
        rec.extend(r.features.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    finish(path, w)
}

/// Pixel rows as training rows labelled with [`PixelLabel::index`].
pub fn read_pixel_rows(path: &Path) -> Result<Vec<LabeledRow>> {
    let mut r = reader(path, &pixel_header())?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.with_context(|| format!("{}: malformed record", path.display()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let label = PixelLabel::parse(rec.get(3).unwrap_or(""))
            .with_context(|| format!("{} line {line}: unknown label", path.display()))?;
        let features = (0..FEATURE_COUNT)
            .map(|i| field(&rec, 4 + i, line, &feature_name(i)))
            .collect::<Result<Vec<f64>>>()
            .with_context(|| path.display().to_string())?;
        rows.push(LabeledRow::new(features, label.index()));
    }
    Ok(rows)
}

fn lesion_header() -> Vec<String> {
    ["image_id", "S1", "S2", "S3", "label"].map(String::from).to_vec()
}

pub fn write_lesions(path: &Path, rows: &[LesionRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(lesion_header())?;
    for r in rows {
        let f = r.features;
        w.write_record([
            r.image_id.clone(),
            f.s1.to_string(),
            f.s2.to_string(),
            f.s3.to_string(),
            r.label.as_str().to_string(),
        ])?;
    }
    finish(path, w)
}

pub fn read_lesion_rows(path: &Path) -> Result<Vec<LabeledRow>> {
    let mut r = reader(path, &lesion_header())?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.with_context(|| format!("{}: malformed record", path.display()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let label = Diagnosis::parse(rec.get(4).unwrap_or(""))
            .with_context(|| format!("{} line {line}: unknown label", path.display()))?;
        let features = ["S1", "S2", "S3"]
            .iter()
            .enumerate()
            .map(|(i, name)| field(&rec, 1 + i, line, name))
            .collect::<Result<Vec<f64>>>()
            .with_context(|| path.display().to_string())?;
        rows.push(LabeledRow::new(features, label.index()));
    }
    Ok(rows)
}

fn prediction_header() -> Vec<String> {
    ["image_id", "predicted", "actual"].map(String::from).to_vec()
}

pub fn write_predictions(path: &Path, rows: &[Prediction]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(prediction_header())?;
    for r in rows {
        w.write_record([&r.image_id, r.predicted.as_str(), r.actual.as_str()])?;
    }
    finish(path, w)
}

pub fn read_predictions(path: &Path) -> Result<Vec<Prediction>> {
    let mut r = reader(path, &prediction_header())?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.with_context(|| format!("{}: malformed record", path.display()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let diag = |i: usize| {
            Diagnosis::parse(rec.get(i).unwrap_or(""))
                .with_context(|| format!("{} line {line}: unknown diagnosis", path.display()))
        };
        rows.push(Prediction {
            image_id: rec.get(0).unwrap_or("").to_string(),
            predicted: diag(1)?,
            actual: diag(2)?,
        });
    }
    Ok(rows)
}
