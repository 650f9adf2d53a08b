use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use streetsynth::annotations::{render_annotations, LabelMap};
use streetsynth::eval::{confusion, iou, AbsentPolicy, ClassSet, ConfusionMatrix};
use streetsynth::exec::{resolve_workers, with_workers, WORKERS_ENV};
use streetsynth::io;
use streetsynth::pipeline::{self, DatasetConfig, ManifestRecord};
use streetsynth::procgen::{ego_camera, realize_world, sample_world, ScenarioScope};
use streetsynth::render::{apply_psf, render, tonemap, PathTracerConfig, RenderScene, RgbImage};
use streetsynth::taxonomy::ClassId;

#[derive(Parser)]
#[command(name = "streetsynth", version, about = "Procedural street scenes with path-traced images and exact annotations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate (or resume) a dataset described by a TOML config.
    Generate {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads; defaults to the config value, then all cores.
        #[arg(long, env = WORKERS_ENV)]
        workers: Option<usize>,
    },
    /// Per-class pixel counts over a dataset's label maps.
    Stats {
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Render one low-sample image of a sampled world.
    Preview {
        /// Scenario scope TOML; the built-in default when omitted.
        #[arg(long)]
        scope: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "preview.png")]
        out: PathBuf,
        #[arg(long, default_value_t = 480)]
        width: u32,
        #[arg(long, default_value_t = 270)]
        height: u32,
        #[arg(long, default_value_t = 16)]
        spp: u32,
        #[arg(long, env = WORKERS_ENV)]
        workers: Option<usize>,
    },
    /// Confusion matrix and IoU between two directories of label maps.
    Eval {
        /// Ground-truth label PNGs.
        #[arg(long)]
        gt: PathBuf,
        /// Predicted label PNGs with the same file names.
        #[arg(long)]
        pred: PathBuf,
        /// Palette JSON (array of {code, name, color} or a dataset.json).
        #[arg(long)]
        classes: PathBuf,
        /// Count classes absent from both maps as IoU 0 in the mean.
        #[arg(long)]
        absent_as_zero: bool,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Generate { config, workers } => generate(&config, workers),
        Command::Stats { dataset } => stats(&dataset),
        Command::Preview {
            scope,
            seed,
            out,
            width,
            height,
            spp,
            workers,
        } => preview(scope.as_deref(), seed, &out, [width, height], spp, workers),
        Command::Eval {
            gt,
            pred,
            classes,
            absent_as_zero,
        } => evaluate(&gt, &pred, &classes, absent_as_zero),
    }
}

fn generate(config: &Path, workers: Option<usize>) -> anyhow::Result<ExitCode> {
    let mut cfg = DatasetConfig::load(config)?;
    if workers.is_some() {
        cfg.worker_count = workers;
    }
    let total = cfg.image_count;
    eprintln!(
        "generating {total} images at {}x{}, {} spp, {} workers into {}",
        cfg.resolution[0],
        cfg.resolution[1],
        cfg.samples_per_pixel,
        resolve_workers(cfg.worker_count),
        cfg.output_directory.display()
    );
    let start = std::time::Instant::now();
    let summary = pipeline::generate_dataset(&cfg, |r| match r {
        ManifestRecord::Ok(img) => {
            eprintln!("[{:.0}s] {:06} ok", start.elapsed().as_secs_f64(), img.index)
        }
        ManifestRecord::Error { index, error, .. } => eprintln!("{index:06} failed: {error}"),
    })?;
    eprintln!(
        "done in {:.1}s: {} generated, {} already present, {} failed",
        start.elapsed().as_secs_f64(),
        summary.generated,
        summary.skipped,
        summary.failed
    );
    Ok(if summary.failed > 0 { ExitCode::FAILURE } else { ExitCode::SUCCESS })
}

fn stats(dataset: &Path) -> anyhow::Result<ExitCode> {
    let h = pipeline::compute_stats(dataset)?;
    let csv = h.to_csv();
    let out = dataset.join(pipeline::STATS_FILE);
    std::fs::write(&out, &csv).with_context(|| out.display().to_string())?;
    println!("{} images, {} pixels", h.images, h.pixels);
    print!("{}", h.bars());
    eprintln!("wrote {}", out.display());
    Ok(ExitCode::SUCCESS)
}

fn colorize(label: &LabelMap) -> RgbImage {
    let data = label
        .data
        .iter()
        .flat_map(|&c| ClassId::from_code(c).map_or([0, 0, 0], |k| k.color()))
        .collect();
    RgbImage {
        width: label.width,
        height: label.height,
        data,
    }
}

fn preview(scope: Option<&Path>, seed: u64, out: &Path, res: [u32; 2], spp: u32, workers: Option<usize>) -> anyhow::Result<ExitCode> {
    let scope = match scope {
        Some(p) => ScenarioScope::load(p)?,
        None => ScenarioScope::default(),
    };
    let world = sample_world(&scope, seed)?;
    let camera = ego_camera(&world, res[0], res[1]);
    let scene = RenderScene::new(realize_world(&world, &camera)?);
    let cfg = PathTracerConfig {
        samples_per_pixel: spp,
        seed,
        radiance_clamp: Some(50.0),
        ..Default::default()
    };
    cfg.validate().map_err(anyhow::Error::msg)?;
    let (rgb, ann) = with_workers(resolve_workers(workers), || {
        let film = apply_psf(&render(&scene, &cfg), &camera.psf);
        (tonemap(&film, camera.exposure), render_annotations(&scene))
    });
    io::write_rgb_png(out, &rgb)?;
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("preview");
    let labels = out.with_file_name(format!("{stem}_labels.png"));
    io::write_rgb_png(&labels, &colorize(&ann.label))?;
    println!("world {} -> {} and {}", world.hash(), out.display(), labels.display());
    Ok(ExitCode::SUCCESS)
}

fn evaluate(gt: &Path, pred: &Path, classes: &Path, absent_as_zero: bool) -> anyhow::Result<ExitCode> {
    let text = std::fs::read_to_string(classes).with_context(|| classes.display().to_string())?;
    let set = ClassSet::from_json(&text)?;
    let files = pipeline::label_files(gt)?;
    if files.is_empty() {
        bail!("no *_label.png files in {}", gt.display());
    }
    let mut total = ConfusionMatrix::zeros(set.len());
    for g in &files {
        let name = g.file_name().expect("listed files have names");
        let p = pred.join(name);
        if !p.is_file() {
            bail!("prediction {} is missing", p.display());
        }
        let m = confusion(&io::read_label_png(g)?, &io::read_label_png(&p)?, &set)
            .with_context(|| name.to_string_lossy().into_owned())?;
        total.add(&m);
    }
    let report = iou(&total, &set);
    let policy = if absent_as_zero { AbsentPolicy::AsZero } else { AbsentPolicy::Exclude };
    print!("{}", report.to_csv());
    println!("mean IoU over {} image pairs: {:.4}", files.len(), report.mean(policy));
    Ok(ExitCode::SUCCESS)
}
