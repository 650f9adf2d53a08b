//! Batch generation: image `i` uses seed `base_seed + i` and runs
//! sample → realize → render → PSF → tonemap → annotate → write.
//!
//! Layout of an output directory:
//!
//! ```text
//! dataset.json            header: generator version, palette, config, scope
//! manifest.jsonl          one JSON record per image, in index order
//! 000042_rgb.png          display image (or _rgb.ppm)
//! 000042_label.png        8-bit class codes
//! 000042_instance.png     16-bit instance codes (_instance.raw32 past 65535)
//! 000042_depth.pfm        meters along the camera ray, 0 for sky
//! 000042_hdr.pfm          scene-referred radiance, when emit_hdr is set
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::mpsc;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use crate::annotations::render_annotations;
use crate::io;
use crate::procgen::{ego_camera, realize_world_with, sample_world_with, AssetLibrary, ScenarioScope, WorldSpec};
use crate::render::{apply_psf, render, tonemap, Camera, PathTracerConfig, RenderScene};
use crate::taxonomy::{default_palette, ClassId, PaletteEntry};

pub const HEADER_FILE: &str = "dataset.json";
pub const MANIFEST_FILE: &str = "manifest.jsonl";
pub const STATS_FILE: &str = "class_histogram.csv";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RgbFormat {
    #[default]
    Png,
    Ppm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    pub image_count: u32,
    /// `[width, height]` in pixels.
    pub resolution: [u32; 2],
    pub samples_per_pixel: u32,
    pub max_depth: u32,
    pub russian_roulette_start_depth: u32,
    /// Per-sample radiance cap; 50 for production, absent disables it.
    pub radiance_clamp: Option<f64>,
    pub base_seed: u64,
    /// Relative paths resolve against the config file's directory.
    pub output_directory: PathBuf,
    /// Scenario scope; the built-in default scope when absent.
    pub scope_file: Option<PathBuf>,
    /// Overridden by `STREETSYNTH_WORKERS`; all cores when absent.
    pub worker_count: Option<usize>,
    pub emit_hdr: bool,
    pub rgb_format: RgbFormat,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            image_count: 100,
            resolution: [960, 540],
            samples_per_pixel: 256,
            max_depth: 6,
            russian_roulette_start_depth: 4,
            radiance_clamp: Some(50.0),
            base_seed: 0,
            output_directory: PathBuf::from("dataset"),
            scope_file: None,
            worker_count: None,
            emit_hdr: false,
            rgb_format: RgbFormat::Png,
        }
    }
}

impl DatasetConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<DatasetConfig> {
        let cfg: DatasetConfig = toml::from_str(text).context("invalid dataset config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<DatasetConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg = DatasetConfig::from_toml(&text).with_context(|| path.display().to_string())?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.output_directory = base.join(&cfg.output_directory);
        cfg.scope_file = cfg.scope_file.map(|s| base.join(s));
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.image_count == 0 {
            bail!("image_count must be at least 1");
        }
        if self.resolution[0] == 0 || self.resolution[1] == 0 {
            bail!("resolution must be positive, got {:?}", self.resolution);
        }
        self.render_config(0).validate().map_err(anyhow::Error::msg)
    }

    pub fn render_config(&self, seed: u64) -> PathTracerConfig {
        PathTracerConfig {
            samples_per_pixel: self.samples_per_pixel,
            max_depth: self.max_depth,
            russian_roulette_start_depth: self.russian_roulette_start_depth,
            radiance_clamp: self.radiance_clamp,
            seed,
            next_event: true,
        }
    }

    pub fn scope(&self) -> anyhow::Result<ScenarioScope> {
        match &self.scope_file {
            Some(p) => Ok(ScenarioScope::load(p)?),
            None => Ok(ScenarioScope::default()),
        }
    }
}

/// Train/validation assignment by index: every tenth image (index ≡ 9 mod 10)
/// is validation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Val,
}

pub fn split_of(index: u32) -> Split {
    if index % 10 == 9 {
        Split::Val
    } else {
        Split::Train
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageFiles {
    pub rgb: String,
    pub label: String,
    pub instance: String,
    pub depth: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hdr: Option<String>,
}

impl ImageFiles {
    pub fn all(&self) -> Vec<&str> {
        let mut v = vec![self.rgb.as_str(), self.label.as_str(), self.instance.as_str(), self.depth.as_str()];
        v.extend(self.hdr.as_deref());
        v
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub index: u32,
    pub seed: u64,
    pub split: Split,
    pub world_hash: String,
    pub world: WorldSpec,
    pub camera: Camera,
    pub render: PathTracerConfig,
    pub files: ImageFiles,
    /// Label pixels per class, indexed by class code.
    pub class_pixels: [u64; ClassId::COUNT],
    pub rejected_samples: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ManifestRecord {
    Ok(Box<ImageRecord>),
    Error { index: u32, seed: u64, error: String },
}

impl ManifestRecord {
    pub fn index(&self) -> u32 {
        match self {
            ManifestRecord::Ok(r) => r.index,
            ManifestRecord::Error { index, .. } => *index,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub generator: String,
    pub version: String,
    pub palette: Vec<PaletteEntry>,
    pub config: DatasetConfig,
    pub scope: ScenarioScope,
}

pub fn file_stem(index: u32) -> String {
    format!("{index:06}")
}

/// Renders image `index` and writes its files into `dir`.
pub fn generate_image(
    dir: &Path,
    index: u32,
    cfg: &DatasetConfig,
    scope: &ScenarioScope,
    lib: &AssetLibrary,
) -> anyhow::Result<ImageRecord> {
    let seed = cfg.base_seed + index as u64;
    let world = sample_world_with(scope, seed, lib)?;
    let camera = ego_camera(&world, cfg.resolution[0], cfg.resolution[1]);
    let scene = RenderScene::new(realize_world_with(&world, &camera, lib)?);
    let rcfg = cfg.render_config(seed);
    let hdr = apply_psf(&render(&scene, &rcfg), &camera.psf);
    let rgb = tonemap(&hdr, camera.exposure);
    let ann = render_annotations(&scene);

    let stem = file_stem(index);
    let files = ImageFiles {
        rgb: format!(
            "{stem}_rgb.{}",
            match cfg.rgb_format {
                RgbFormat::Png => "png",
                RgbFormat::Ppm => "ppm",
            }
        ),
        label: format!("{stem}_label.png"),
        instance: format!("{stem}_instance.{}", io::instance_extension(&ann.instance)),
        depth: format!("{stem}_depth.pfm"),
        hdr: cfg.emit_hdr.then(|| format!("{stem}_hdr.pfm")),
    };
    match cfg.rgb_format {
        RgbFormat::Png => io::write_rgb_png(&dir.join(&files.rgb), &rgb)?,
        RgbFormat::Ppm => io::write_ppm(&dir.join(&files.rgb), &rgb)?,
    }
    io::write_label_png(&dir.join(&files.label), &ann.label)?;
    io::write_instance(&dir.join(&files.instance), &ann.instance)?;
    io::write_depth_pfm(&dir.join(&files.depth), &ann.depth)?;
    if let Some(h) = &files.hdr {
        io::write_hdr_pfm(&dir.join(h), hdr.width, hdr.height, &hdr.pixels())?;
    }
    Ok(ImageRecord {
        index,
        seed,
        split: split_of(index),
        world_hash: world.hash(),
        world,
        camera,
        render: rcfg,
        files,
        class_pixels: ann.label.histogram(),
        rejected_samples: hdr.rejected,
    })
}

pub fn read_manifest(dir: &Path) -> anyhow::Result<Vec<ManifestRecord>> {
    let path = dir.join(MANIFEST_FILE);
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e).with_context(|| path.display().to_string()),
    };
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(line) {
            Ok(r) => out.push(r),
            // A torn final line from an interrupted append.
            Err(_) if n + 1 == text.lines().count() => break,
            Err(e) => bail!("{}:{}: {e}", path.display(), n + 1),
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunSummary {
    pub generated: u32,
    pub skipped: u32,
    pub failed: u32,
}

/// Generates every image of the dataset that is not already complete.
///
/// An image counts as complete when the manifest holds a successful
/// record for it and all of that record's files exist; everything else is
/// (re)generated. The manifest is compacted to those complete records
/// before new ones are appended, so it never lists an index twice.
pub fn generate_dataset(cfg: &DatasetConfig, mut progress: impl FnMut(&ManifestRecord)) -> anyhow::Result<RunSummary> {
    cfg.validate()?;
    let scope = cfg.scope()?;
    let dir = &cfg.output_directory;
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let lib = AssetLibrary::builtin();

    let header = DatasetHeader {
        generator: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        palette: default_palette(),
        config: cfg.clone(),
        scope: scope.clone(),
    };
    let header_json = serde_json::to_string_pretty(&header)? + "\n";
    io::write_atomic(&dir.join(HEADER_FILE), |w| w.write_all(header_json.as_bytes()))?;

    let mut done: BTreeMap<u32, ManifestRecord> = BTreeMap::new();
    for r in read_manifest(dir)? {
        if let ManifestRecord::Ok(img) = &r {
            if img.index < cfg.image_count && img.files.all().iter().all(|f| dir.join(f).is_file()) {
                done.insert(img.index, r);
            }
        }
    }
    let mut compact = String::new();
    for r in done.values() {
        compact.push_str(&serde_json::to_string(r)?);
        compact.push('\n');
    }
    io::write_atomic(&dir.join(MANIFEST_FILE), |w| w.write_all(compact.as_bytes()))?;

    let pending: Vec<u32> = (0..cfg.image_count).filter(|i| !done.contains_key(i)).collect();
    let mut summary = RunSummary {
        skipped: done.len() as u32,
        ..Default::default()
    };
    let workers = crate::exec::resolve_workers(cfg.worker_count);
    let (tx, rx) = mpsc::channel::<ManifestRecord>();

    let mut manifest = OpenOptions::new()
        .append(true)
        .open(dir.join(MANIFEST_FILE))
        .with_context(|| format!("opening {}", dir.join(MANIFEST_FILE).display()))?;

    std::thread::scope(|s| -> anyhow::Result<()> {
        let scope = &scope;
        let pending = &pending;
        let producer = s.spawn(move || {
            crate::exec::with_workers(workers, || {
                crate::exec::map_indexed(pending.len(), |k| {
                    let index = pending[k];
                    let record = match generate_image(dir, index, cfg, scope, lib) {
                        Ok(r) => ManifestRecord::Ok(Box::new(r)),
                        Err(e) => ManifestRecord::Error {
                            index,
                            seed: cfg.base_seed + index as u64,
                            error: format!("{e:#}"),
                        },
                    };
                    let _ = tx.send(record);
                })
            });
        });
        // The single writer: records are appended in index order.
        let mut waiting: HashMap<u32, ManifestRecord> = HashMap::new();
        let mut next = 0usize;
        for record in rx {
            waiting.insert(record.index(), record);
            while let Some(r) = pending.get(next).and_then(|i| waiting.remove(i)) {
                writeln!(manifest, "{}", serde_json::to_string(&r)?)?;
                manifest.flush()?;
                match &r {
                    ManifestRecord::Ok(_) => summary.generated += 1,
                    ManifestRecord::Error { .. } => summary.failed += 1,
                }
                progress(&r);
                next += 1;
            }
        }
        producer.join().map_err(|_| anyhow::anyhow!("a render worker panicked"))?;
        Ok(())
    })?;
    Ok(summary)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassHistogram {
    pub images: u64,
    pub pixels: u64,
    pub counts: [u64; ClassId::COUNT],
}

impl ClassHistogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("code,name,pixels,fraction\n");
        for c in ClassId::ALL {
            let n = self.counts[c.code() as usize];
            out.push_str(&format!("{},{},{},{:.6}\n", c.code(), c.name(), n, n as f64 / self.pixels.max(1) as f64));
        }
        out
    }

    /// One bar per class on a log scale, widest 50 characters.
    pub fn bars(&self) -> String {
        let max = self.counts.iter().copied().max().unwrap_or(0).max(1) as f64;
        let mut out = String::new();
        for c in ClassId::ALL {
            let n = self.counts[c.code() as usize];
            let len = if n == 0 { 0 } else { ((n as f64).log10().max(0.0) / max.log10().max(1e-9) * 50.0).round() as usize };
            out.push_str(&format!("{:<14}{:>14} {}\n", c.name(), n, "#".repeat(len.max(usize::from(n > 0)))));
        }
        out
    }
}

/// Label maps (`*_label.png`) in `dir`, sorted by name.
pub fn label_files(dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with("_label.png")))
        .collect();
    v.sort();
    Ok(v)
}

/// Exact per-class pixel counts over every label map in `dir`.
pub fn compute_stats(dir: &Path) -> anyhow::Result<ClassHistogram> {
    let files = label_files(dir)?;
    if files.is_empty() {
        bail!("no *_label.png files in {}", dir.display());
    }
    let maps = crate::exec::map_indexed(files.len(), |i| io::read_label_png(&files[i]));
    let mut h = ClassHistogram {
        images: 0,
        pixels: 0,
        counts: [0; ClassId::COUNT],
    };
    for (path, m) in files.iter().zip(maps) {
        let m = m?;
        let counts = m.histogram();
        let valid: u64 = counts.iter().sum();
        if valid != m.data.len() as u64 {
            bail!("{}: {} pixels carry codes outside 0–15", path.display(), m.data.len() as u64 - valid);
        }
        h.images += 1;
        h.pixels += m.data.len() as u64;
        h.counts.iter_mut().zip(counts).for_each(|(a, b)| *a += b);
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_validation() {
        let c = DatasetConfig::from_toml("image_count = 3\nresolution = [64, 32]\n").unwrap();
        assert_eq!(c.samples_per_pixel, 256);
        assert_eq!(c.radiance_clamp, Some(50.0));
        assert!(DatasetConfig::from_toml("image_count = 0").is_err());
        assert!(DatasetConfig::from_toml("resolution = [0, 4]").is_err());
        assert!(DatasetConfig::from_toml("max_depth = 2").is_err());
        assert!(DatasetConfig::from_toml("bogus = 1").is_err());
    }

    #[test]
    fn split_by_index() {
        let val: Vec<u32> = (0..30).filter(|&i| split_of(i) == Split::Val).collect();
        assert_eq!(val, vec![9, 19, 29]);
    }

    #[test]
    fn all_sky_stats() {
        let dir = tempfile::tempdir().unwrap();
        let m = crate::annotations::LabelMap {
            width: 4,
            height: 4,
            data: vec![8; 16],
        };
        io::write_label_png(&dir.path().join("000000_label.png"), &m).unwrap();
        let h = compute_stats(dir.path()).unwrap();
        assert_eq!(h.counts[8], 16);
        assert_eq!(h.total(), 16);
        assert!(h.to_csv().contains("8,sky,16,1.000000"));
    }
}
