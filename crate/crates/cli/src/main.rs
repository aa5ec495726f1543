mod manifest;
mod tables;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use bwveil::annotate::{load_annotations, sample_pixels, Diagnosis, PixelLabel};
use bwveil::config::{PipelineConfig, Profile};
use bwveil::dtree::{cross_validate, induce, DecisionTree};
use bwveil::features::{
    background_skin_color, feature_name, FeatureExtractor, FEATURE_COUNT,
};
use bwveil::io::{read_rgb, write_atomic, write_mask, write_rgb};
use bwveil::lesion::{
    classify_lesion, lesion_classes, lesion_features, paper_lesion_model,
};
use bwveil::metrics::confusion;
use bwveil::phantom::{generate, PhantomSpec, Shape};
use bwveil::veil::{detect_veil_with, overlay};

use manifest::Split;
use tables::{LesionRow, PixelRow, Prediction};

/// Blue-white veil detection and melanoma/benign lesion classification.
#[derive(Parser)]
#[command(name = "bwveil", version)]
struct Cli {
    /// Line-oriented `key = value` settings applied on top of the profile.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every randomized step; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = ProfileArg::Default)]
    profile: ProfileArg,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Default,
    Paper,
}

#[derive(Subcommand)]
enum Command {
    /// Rasterize an annotation's border into a filled lesion mask.
    Mask {
        #[arg(long)]
        annotation: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample annotated pixels and write their eighteen features as CSV.
    Extract {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        per_class: Option<usize>,
        #[arg(long, value_enum, default_value_t = Split::Train)]
        split: Split,
    },
    /// Induce the pixel (veil / non-veil) tree from a feature CSV.
    TrainPixel {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        induction: InductionArgs,
    },
    /// Induce a lesion (melanoma / benign) tree from an S1,S2,S3 CSV.
    TrainLesion {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        induction: InductionArgs,
    },
    /// Detect the veil in one image.
    Detect {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        annotation: PathBuf,
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        out_mask: PathBuf,
        /// Image with the lesion outlined thin and the veil outlined thick.
        #[arg(long)]
        out_overlay: Option<PathBuf>,
    },
    /// Compute S1/S2/S3 for every image and classify the lesion.
    Classify {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        pixel_tree: PathBuf,
        /// `paper` for the published thresholds, otherwise a tree file.
        #[arg(long, default_value = "paper")]
        lesion_model: String,
        #[arg(long)]
        out: PathBuf,
        /// Also write the S1,S2,S3 table used by train-lesion.
        #[arg(long)]
        features_out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Split::Test)]
        split: Split,
    },
    /// Score lesion predictions, melanoma being the positive class.
    Evaluate {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long, value_enum, default_value_t = Subset::All)]
        subset: Subset,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic image with annotation and ground-truth veil mask.
    Phantom {
        #[arg(long, value_enum, default_value_t = ShapeArg::Disk)]
        shape: ShapeArg,
        #[arg(long, default_value_t = 256)]
        width: usize,
        #[arg(long, default_value_t = 256)]
        height: usize,
        #[arg(long, default_value_t = 0.35)]
        lesion_scale: f64,
        #[arg(long, default_value_t = 0.1)]
        veil_fraction: f64,
        #[arg(long, default_value_t = 10.0)]
        noise: f64,
        #[arg(long, default_value = "phantom")]
        image_id: String,
        #[arg(long)]
        out_image: PathBuf,
        #[arg(long)]
        out_annotation: PathBuf,
        #[arg(long)]
        out_truth: PathBuf,
    },
}

#[derive(Args)]
struct InductionArgs {
    /// Pruning confidence factor (1.0 disables pruning).
    #[arg(long)]
    confidence: Option<f64>,
    #[arg(long)]
    min_leaf: Option<usize>,
    #[arg(long)]
    max_depth: Option<usize>,
    /// Also run stratified k-fold cross-validation.
    #[arg(long, requires = "cv_report")]
    cv: Option<usize>,
    #[arg(long)]
    cv_report: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Subset {
    All,
    HasVeil,
    PrimaryVeil,
    VeilRelated,
}

#[derive(Clone, Copy, ValueEnum)]
enum ShapeArg {
    Disk,
    Ellipse,
    Irregular,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Mask { .. } => "mask",
            Command::Extract { .. } => "extract",
            Command::TrainPixel { .. } => "train-pixel",
            Command::TrainLesion { .. } => "train-lesion",
            Command::Detect { .. } => "detect",
            Command::Classify { .. } => "classify",
            Command::Evaluate { .. } => "evaluate",
            Command::Phantom { .. } => "phantom",
        }
    }
}

fn pipeline_config(cli: &Cli) -> Result<PipelineConfig> {
    let profile = match cli.profile {
        ProfileArg::Default => Profile::Default,
        ProfileArg::Paper => Profile::Paper,
    };
    let mut config = PipelineConfig::profile(profile);
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        config
            .apply_text(&text)
            .with_context(|| format!("config {}", path.display()))?;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
        config.induction.seed = seed;
    }
    config.validate()?;
    Ok(config)
}

/// Per-image sampling seed, stable under manifest reordering.
fn image_seed(seed: u64, image_id: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in image_id.bytes() {
        h = (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3);
    }
    h ^ seed
}

fn read_tree(path: &Path) -> Result<DecisionTree> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read tree {}", path.display()))?;
    DecisionTree::from_json(&text).with_context(|| format!("tree {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    write_atomic(path, text.as_bytes())?;
    Ok(())
}

fn cmd_mask(annotation: &Path, out: &Path) -> Result<()> {
    let ann = load_annotations(annotation)?;
    let mask = ann.lesion_mask()?;
    write_mask(out, &mask)?;
    println!("lesion pixels: {}", mask.count());
    Ok(())
}

fn cmd_extract(config: &PipelineConfig, manifest: &Path, out: &Path, split: Split) -> Result<()> {
    let entries = manifest::load(manifest, split)?;
    let mut rows = Vec::new();
    for e in &entries {
        let id = e.image_id();
        let regions = &e.annotation.regions;
        if !(regions.has_label(PixelLabel::Veil) && regions.has_label(PixelLabel::NonVeil)) {
            eprintln!("skipping {id}: needs both veil and non-veil circles");
            continue;
        }
        let image = read_rgb(&e.image_path)?;
        let lesion = e.annotation.lesion_mask().with_context(|| id.to_string())?;
        let skin = background_skin_color(&image, &lesion, &config.features)
            .with_context(|| id.to_string())?;
        let samples = sample_pixels(regions, id, config.per_class, image_seed(config.seed, id))
            .with_context(|| id.to_string())?;
        let extractor = FeatureExtractor::new(&image, &lesion, skin, config.features.clone())?;
        let all: Vec<usize> = (0..FEATURE_COUNT).collect();
        let planes = extractor.planes(&all)?;
        for s in samples {
            let v = planes
                .vector_at(s.row, s.col)
                .with_context(|| format!("{id}: sample ({}, {}) is outside the lesion", s.row, s.col))?;
            rows.push(PixelRow {
                image_id: s.image_id,
                row: s.row,
                col: s.col,
                label: s.label,
                features: v.0,
            });
        }
    }
    tables::write_pixels(out, &rows)?;
    println!("rows: {}", rows.len());
    Ok(())
}

fn train(
    config: &PipelineConfig,
    rows: &[bwveil::dtree::LabeledRow],
    args: &InductionArgs,
    class_names: Vec<String>,
    positive: usize,
    out: &Path,
) -> Result<DecisionTree> {
    let mut ic = config.induction.clone();
    if let Some(c) = args.confidence {
        ic.confidence = c;
    }
    if let Some(m) = args.min_leaf {
        ic.min_leaf = m;
    }
    if args.max_depth.is_some() {
        ic.max_depth = args.max_depth;
    }
    let tree = induce(rows, &ic)?.with_class_names(class_names)?;
    write_text(out, &tree.to_json())?;
    if let (Some(k), Some(report)) = (args.cv, &args.cv_report) {
        let cv = cross_validate(rows, k, &ic, ic.seed, positive)?;
        write_text(report, &cv.to_json())?;
    }
    Ok(tree)
}

fn cmd_train_pixel(config: &PipelineConfig, features: &Path, out: &Path, args: &InductionArgs) -> Result<()> {
    let rows = tables::read_pixel_rows(features)?;
    let names = PixelLabel::ALL.iter().map(|l| l.as_str().to_string()).collect();
    let tree = train(config, &rows, args, names, PixelLabel::Veil.index(), out)?;
    let used: Vec<String> = tree.used_features().into_iter().map(feature_name).collect();
    println!("selected features: {}", used.join(" "));
    println!("nodes: {}", tree.node_count());
    Ok(())
}

fn cmd_train_lesion(config: &PipelineConfig, features: &Path, out: &Path, args: &InductionArgs) -> Result<()> {
    let rows = tables::read_lesion_rows(features)?;
    let tree = train(config, &rows, args, lesion_classes(), Diagnosis::Melanoma.index(), out)?;
    let used: Vec<String> = tree
        .used_features()
        .into_iter()
        .map(|i| format!("S{}", i + 1))
        .collect();
    println!("selected features: {}", used.join(" "));
    println!("nodes: {}", tree.node_count());
    Ok(())
}

struct Detection {
    lesion: bwveil::raster::BinaryMask,
    veil: bwveil::raster::BinaryMask,
    image: bwveil::raster::RgbImage,
}

fn detect(config: &PipelineConfig, image_path: &Path, ann: &bwveil::annotate::Annotation, tree: &DecisionTree) -> Result<Detection> {
    let id = &ann.record.image_id;
    let image = read_rgb(image_path)?;
    let lesion = ann.lesion_mask().with_context(|| id.clone())?;
    let skin = background_skin_color(&image, &lesion, &config.features).with_context(|| id.clone())?;
    let extractor = FeatureExtractor::new(&image, &lesion, skin, config.features.clone())?;
    let veil = detect_veil_with(&extractor, &lesion, tree, config.majority_window)
        .with_context(|| id.clone())?;
    Ok(Detection {
        lesion,
        veil: veil.final_,
        image,
    })
}

fn cmd_detect(
    config: &PipelineConfig,
    image: &Path,
    annotation: &Path,
    tree: &Path,
    out_mask: &Path,
    out_overlay: Option<&Path>,
) -> Result<()> {
    let ann = load_annotations(annotation)?;
    let tree = read_tree(tree)?;
    let d = detect(config, image, &ann, &tree)?;
    write_mask(out_mask, &d.veil)?;
    if let Some(path) = out_overlay {
        write_rgb(path, &overlay(&d.image, &d.lesion, &d.veil)?)?;
    }
    println!(
        "veil pixels: {} of {} lesion pixels",
        d.veil.count(),
        d.lesion.count()
    );
    Ok(())
}

fn cmd_classify(
    config: &PipelineConfig,
    manifest: &Path,
    pixel_tree: &Path,
    lesion_model: &str,
    out: &Path,
    features_out: Option<&Path>,
    split: Split,
) -> Result<()> {
    let entries = manifest::load(manifest, split)?;
    let tree = read_tree(pixel_tree)?;
    let model = if lesion_model == "paper" {
        paper_lesion_model()
    } else {
        read_tree(Path::new(lesion_model))?
    };
    let mut predictions = Vec::new();
    let mut lesions = Vec::new();
    for e in &entries {
        let id = e.image_id().to_string();
        let d = detect(config, &e.image_path, &e.annotation, &tree)?;
        let f = lesion_features(&d.veil, &d.lesion).with_context(|| id.clone())?;
        let predicted = classify_lesion(&f, &model).with_context(|| id.clone())?;
        let actual = e.annotation.record.diagnosis;
        predictions.push(Prediction {
            image_id: id.clone(),
            predicted,
            actual,
        });
        lesions.push(LesionRow {
            image_id: id,
            features: f,
            label: actual,
        });
    }
    tables::write_predictions(out, &predictions)?;
    if let Some(path) = features_out {
        tables::write_lesions(path, &lesions)?;
    }
    println!("classified: {}", predictions.len());
    Ok(())
}

fn cmd_evaluate(manifest: &Path, predictions: &Path, subset: Subset, out: Option<&Path>) -> Result<()> {
    let entries = manifest::load(manifest, Split::All)?;
    let preds = tables::read_predictions(predictions)?;
    let (mut pred, mut actual) = (Vec::new(), Vec::new());
    for p in &preds {
        let Some(e) = entries.iter().find(|e| e.image_id() == p.image_id) else {
            bail!("prediction for unknown image `{}`", p.image_id);
        };
        let rec = &e.annotation.record;
        if rec.diagnosis != p.actual {
            bail!(
                "`{}`: predictions say {} but the annotation says {}",
                p.image_id,
                p.actual,
                rec.diagnosis
            );
        }
        let keep = match subset {
            Subset::All => true,
            Subset::HasVeil => rec.has_veil_area,
            Subset::PrimaryVeil => rec.primary_veil,
            Subset::VeilRelated => rec.veil_related,
        };
        if keep {
            pred.push(p.predicted);
            actual.push(p.actual);
        }
    }
    let report = confusion(&pred, &actual, &Diagnosis::Melanoma)?;
    let json = report.to_json();
    if let Some(path) = out {
        write_text(path, &json)?;
    }
    println!("{json}");
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_phantom(
    seed: u64,
    shape: ShapeArg,
    width: usize,
    height: usize,
    lesion_scale: f64,
    veil_fraction: f64,
    noise: f64,
    image_id: &str,
    out_image: &Path,
    out_annotation: &Path,
    out_truth: &Path,
) -> Result<()> {
    let spec = PhantomSpec {
        image_id: image_id.to_string(),
        width,
        height,
        shape: match shape {
            ShapeArg::Disk => Shape::Disk,
            ShapeArg::Ellipse => Shape::Ellipse,
            ShapeArg::Irregular => Shape::Irregular,
        },
        lesion_scale,
        veil_fraction,
        noise,
    };
    let p = generate(&spec, seed)?;
    write_rgb(out_image, &p.image)?;
    write_text(out_annotation, &p.annotation.to_json())?;
    write_mask(out_truth, &p.veil)?;
    println!(
        "lesion pixels: {}, veil pixels: {}, diagnosis: {}",
        p.lesion.count(),
        p.veil.count(),
        p.annotation.record.diagnosis
    );
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    let config = pipeline_config(cli)?;
    match &cli.command {
        Command::Mask { annotation, out } => cmd_mask(annotation, out),
        Command::Extract {
            manifest,
            out,
            per_class,
            split,
        } => {
            let mut config = config;
            if let Some(n) = per_class {
                config.per_class = *n;
            }
            config.validate()?;
            cmd_extract(&config, manifest, out, *split)
        }
        Command::TrainPixel {
            features,
            out,
            induction,
        } => cmd_train_pixel(&config, features, out, induction),
        Command::TrainLesion {
            features,
            out,
            induction,
        } => cmd_train_lesion(&config, features, out, induction),
        Command::Detect {
            image,
            annotation,
            tree,
            out_mask,
            out_overlay,
        } => cmd_detect(&config, image, annotation, tree, out_mask, out_overlay.as_deref()),
        Command::Classify {
            manifest,
            pixel_tree,
            lesion_model,
            out,
            features_out,
            split,
        } => cmd_classify(
            &config,
            manifest,
            pixel_tree,
            lesion_model,
            out,
            features_out.as_deref(),
            *split,
        ),
        Command::Evaluate {
            manifest,
            predictions,
            subset,
            out,
        } => cmd_evaluate(manifest, predictions, *subset, out.as_deref()),
        Command::Phantom {
            shape,
            width,
            height,
            lesion_scale,
            veil_fraction,
            noise,
            image_id,
            out_image,
            out_annotation,
            out_truth,
        } => cmd_phantom(
            config.seed,
            *shape,
            *width,
            *height,
            *lesion_scale,
            *veil_fraction,
            *noise,
            image_id,
            out_image,
            out_annotation,
            out_truth,
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let message = format!("{err:#}").replace('\n', " ");
            let line = serde_json::json!({
                "error": message,
                "command": cli.command.name(),
            });
            eprintln!("{line}");
            ExitCode::FAILURE
        }
    }
}
