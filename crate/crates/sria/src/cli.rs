//! Command-line entry point wiring the pipeline end to end.
//!
//! Subcommands: `segment`, `dice`, `extract`, `synth`, `stats`, `mixup`,
//! `eval`. Global flags `--seed`, `--workers`, `--config` apply everywhere;
//! the `SRIA_LOG` environment variable controls log verbosity (default
//! `warn`). Exit codes: 0 success, 1 usage error, 2 data error.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::catalog::{extract_cutout, load_catalog, ClassId};
use crate::dataset_io::{
    dataset_stats, mixup, read_coco_json, read_detector_txt, to_canonical_json, write_weighted_txt,
    DatasetWriter,
};
use crate::error::{Error, Result};
use crate::evaluator::{load_ground_truth, load_predictions, map_range, Interpolation};
use crate::mask_lab::{dice, otsu_threshold};
use crate::raster::{BinaryMask, GrayImage, RgbRaster};
use crate::scheduler::{run_all, SynthesisConfig};

#[derive(Parser, Debug)]
#[command(
    name = "sria",
    version,
    about = "Cut-paste synthesis of annotated detection datasets, plus segmentation, \
             mix-up, and detection-evaluation utilities"
)]
struct Cli {
    /// Master random seed; overrides the config file's seed when given.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for parallel generation (0 or omitted: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// JSON configuration file (see `synth`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Threshold a grayscale image into a foreground mask (prints the
    /// chosen threshold).
    Segment {
        /// Input image (loaded as 8-bit grayscale).
        image: PathBuf,
        /// Output mask PNG (255 foreground, 0 background).
        out: PathBuf,
    },

    /// Print the Dice coefficient of two binary mask PNGs.
    Dice { a: PathBuf, b: PathBuf },

    /// Cut the masked object out of an image into a tight RGBA patch.
    Extract {
        /// Source photograph.
        image: PathBuf,
        /// Binary mask PNG selecting the object.
        mask: PathBuf,
        /// Output RGBA PNG.
        out: PathBuf,
        /// Class index recorded for the cutout.
        #[arg(long, default_value_t = 0)]
        class_index: u32,
        /// Class name recorded for the cutout.
        #[arg(long, default_value = "object")]
        class_name: String,
    },

    /// Generate a synthetic detection dataset from a cutout catalog.
    Synth {
        /// Catalog root: `objects/<class>/…` plus `backgrounds/`.
        #[arg(long)]
        catalog: PathBuf,
        /// Output dataset directory.
        #[arg(long)]
        out: PathBuf,
    },

    /// Per-class statistics of a dataset directory.
    Stats {
        dataset: PathBuf,
        /// Emit JSON instead of the console table.
        #[arg(long)]
        json: bool,
    },

    /// Blend two images (and their sibling `.txt` label files) into a
    /// mix-up sample.
    Mixup {
        a: PathBuf,
        b: PathBuf,
        /// Mixing weight for the first image, in [0, 1].
        #[arg(long)]
        lambda: f64,
        /// Output directory (receives mixed.png and mixed.txt).
        #[arg(long)]
        out: PathBuf,
    },

    /// Evaluate predictions against ground truth (label trees or COCO
    /// JSON; both sides must share one coordinate convention).
    Eval {
        /// Ground truth: a directory of 5-field label files or a COCO JSON.
        #[arg(long)]
        gt: PathBuf,
        /// Predictions: a directory of 6-field label files or a COCO JSON
        /// with scores.
        #[arg(long)]
        pred: PathBuf,
        /// Emit the report as JSON instead of the console table.
        #[arg(long)]
        json: bool,
        /// Use exact all-point interpolation instead of 101-point.
        #[arg(long)]
        all_points: bool,
        /// Also write the JSON report to this file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

/// Runs the CLI and returns the process exit code.
pub fn main_entry() -> i32 {
    let env = env_logger::Env::new().filter_or("SRIA_LOG", "warn");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };

    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(workers) = cli.workers {
        builder = builder.num_threads(workers); // 0 means "all cores"
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot build worker pool: {e}")))?;
    pool.install(|| dispatch(cli))
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Segment { image, out } => cmd_segment(&image, &out),
        Command::Dice { a, b } => cmd_dice(&a, &b),
        Command::Extract { image, mask, out, class_index, class_name } => {
            cmd_extract(&image, &mask, &out, class_index, &class_name)
        }
        Command::Synth { catalog, out } => {
            cmd_synth(&catalog, &out, cli.config.as_deref(), cli.seed)
        }
        Command::Stats { dataset, json } => cmd_stats(&dataset, json),
        Command::Mixup { a, b, lambda, out } => cmd_mixup(&a, &b, lambda, &out),
        Command::Eval { gt, pred, json, all_points, report } => {
            cmd_eval(&gt, &pred, json, all_points, report.as_deref())
        }
    }
}

fn cmd_segment(image: &Path, out: &Path) -> Result<()> {
    let img = GrayImage::load_png(image)?;
    let result = otsu_threshold(&img);
    if result.degenerate {
        log::warn!("constant image: no foreground/background separation exists");
    }
    result.mask.save_png(out)?;
    println!("threshold {}", result.threshold);
    Ok(())
}

fn cmd_dice(a: &Path, b: &Path) -> Result<()> {
    let ma = BinaryMask::load_png(a)?;
    let mb = BinaryMask::load_png(b)?;
    println!("{:.4}", dice(&ma, &mb)?);
    Ok(())
}

fn cmd_extract(
    image: &Path,
    mask: &Path,
    out: &Path,
    class_index: u32,
    class_name: &str,
) -> Result<()> {
    let img = RgbRaster::load_png(image)?;
    let m = BinaryMask::load_png(mask)?;
    let cls = ClassId::new(class_index, class_name)?;
    let cutout = extract_cutout(&img, &m, &cls)?;
    cutout.save_rgba_png(out)?;
    println!(
        "{}x{} cutout, {} opaque pixels",
        cutout.width(),
        cutout.height(),
        cutout.alpha_count()
    );
    Ok(())
}

fn load_config(path: Option<&Path>, seed_override: Option<u64>) -> Result<SynthesisConfig> {
    let mut config = match path {
        None => SynthesisConfig::default(),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            serde_json::from_str(&text).map_err(|e| Error::json(p, e))?
        }
    };
    if let Some(seed) = seed_override {
        config.master_seed = seed;
    }
    config.validate()?;
    Ok(config)
}

fn cmd_synth(catalog_dir: &Path, out: &Path, config: Option<&Path>, seed: Option<u64>) -> Result<()> {
    let config = load_config(config, seed)?;
    let catalog = load_catalog(catalog_dir)?;
    let mut writer = DatasetWriter::create(out)?;
    for class in &catalog.classes {
        writer.register_class(class.id.index(), class.id.name());
    }
    let manifest = run_all(&config, &catalog, |item| writer.add(&item))?;
    writer.finish(&manifest)?;
    print!("{}", manifest.table());
    println!(
        "wrote {} images ({} instances) to {}",
        manifest.total_images,
        manifest.total_instances,
        out.display()
    );
    Ok(())
}

fn cmd_stats(dataset: &Path, json: bool) -> Result<()> {
    let report = dataset_stats(dataset)?;
    if json {
        print!("{}", to_canonical_json(&report)?);
    } else {
        print!("{}", report.table());
    }
    Ok(())
}

fn cmd_mixup(a: &Path, b: &Path, lambda: f64, out: &Path) -> Result<()> {
    if !lambda.is_finite() || !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Usage(format!("--lambda {lambda} outside [0, 1]")));
    }
    let img_a = RgbRaster::load_png(a)?;
    let img_b = RgbRaster::load_png(b)?;
    let labels_for = |img_path: &Path, img: &RgbRaster| -> Result<Vec<_>> {
        let txt = img_path.with_extension("txt");
        if txt.exists() {
            read_detector_txt(&txt, img.width(), img.height())
        } else {
            log::info!("no label file beside {}", img_path.display());
            Ok(Vec::new())
        }
    };
    let labels_a = labels_for(a, &img_a)?;
    let labels_b = labels_for(b, &img_b)?;
    let sample = mixup(&img_a, &labels_a, &img_b, &labels_b, lambda, None)?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let image_path = out.join("mixed.png");
    sample.image.save_png(&image_path)?;
    let labels_path = out.join("mixed.txt");
    fs::write(&labels_path, write_weighted_txt(&sample.labels)?)
        .map_err(|e| Error::io(&labels_path, e))?;
    println!(
        "lambda {:.4}: {} + {} -> {}",
        lambda,
        a.display(),
        b.display(),
        image_path.display()
    );
    Ok(())
}

fn cmd_eval(
    gt: &Path,
    pred: &Path,
    json: bool,
    all_points: bool,
    report_path: Option<&Path>,
) -> Result<()> {
    let ground_truths = load_ground_truth(gt)?;
    let detections = load_predictions(pred)?;
    let interpolation = if all_points { Interpolation::AllPoints } else { Interpolation::Points101 };
    let report = map_range(&detections, &ground_truths, interpolation)?;

    // Class display names, when the ground truth is a COCO file.
    let mut names: BTreeMap<u32, String> = BTreeMap::new();
    if gt.is_file() {
        for cat in read_coco_json(gt)?.categories {
            names.insert(cat.id.saturating_sub(1), cat.name);
        }
    }

    let json_text = to_canonical_json(&report)?;
    if let Some(p) = report_path {
        fs::write(p, &json_text).map_err(|e| Error::io(p, e))?;
    }
    if json {
        print!("{json_text}");
    } else {
        print!("{}", report.table(&names));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_line_shape_parses() {
        let cli = Cli::try_parse_from([
            "sria", "synth", "--catalog", "cat", "--out", "o", "--seed", "9", "--workers", "2",
        ])
        .unwrap();
        assert_eq!(cli.seed, Some(9));
        assert_eq!(cli.workers, Some(2));
        assert!(matches!(cli.command, Command::Synth { .. }));

        let cli = Cli::try_parse_from(["sria", "dice", "a.png", "b.png"]).unwrap();
        assert!(cli.seed.is_none());
        assert!(matches!(cli.command, Command::Dice { .. }));

        assert!(Cli::try_parse_from(["sria", "frobnicate"]).is_err());
        assert!(Cli::try_parse_from(["sria", "mixup", "a.png", "b.png", "--out", "o"]).is_err());
    }

    #[test]
    fn seed_override_reaches_the_config() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("cfg.json");
        fs::write(&p, "{\"master_seed\": 3, \"per_batch_cap\": 2}").unwrap();
        let cfg = load_config(Some(&p), None).unwrap();
        assert_eq!(cfg.master_seed, 3);
        assert_eq!(cfg.per_batch_cap, 2);
        let cfg = load_config(Some(&p), Some(11)).unwrap();
        assert_eq!(cfg.master_seed, 11);
        assert!(load_config(None, None).is_ok());

        fs::write(&p, "{\"per_batch_cap\": 0}").unwrap();
        assert!(load_config(Some(&p), None).is_err());
        fs::write(&p, "{nonsense").unwrap();
        assert!(load_config(Some(&p), None).is_err());
    }

    #[test]
    fn lambda_bounds_are_a_usage_error() {
        let err = cmd_mixup(Path::new("x.png"), Path::new("y.png"), 1.5, Path::new("o"))
            .unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }
}
