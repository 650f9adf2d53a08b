use std::collections::HashSet;
use std::path::Path;

use streetsynth::io;
use streetsynth::pipeline::{self, DatasetConfig, ManifestRecord, MANIFEST_FILE};

fn config(dir: &Path, count: u32) -> DatasetConfig {
    DatasetConfig {
        image_count: count,
        resolution: [64, 36],
        samples_per_pixel: 2,
        max_depth: 4,
        base_seed: 77,
        output_directory: dir.to_path_buf(),
        worker_count: Some(2),
        ..Default::default()
    }
}

fn ok_records(dir: &Path) -> Vec<streetsynth::pipeline::ImageRecord> {
    pipeline::read_manifest(dir)
        .unwrap()
        .into_iter()
        .map(|r| match r {
            ManifestRecord::Ok(img) => *img,
            ManifestRecord::Error { error, .. } => panic!("image failed: {error}"),
        })
        .collect()
}

#[test]
fn manifest_lists_every_image_once_with_its_files() {
    let tmp = tempfile::tempdir().unwrap();
    let summary = pipeline::generate_dataset(&config(tmp.path(), 5), |_| ()).unwrap();
    assert_eq!((summary.generated, summary.skipped, summary.failed), (5, 0, 0));
    let records = ok_records(tmp.path());
    assert_eq!(records.iter().map(|r| r.index).collect::<Vec<_>>(), vec![0, 1, 2, 3, 4]);
    for r in &records {
        assert_eq!(r.seed, 77 + r.index as u64);
        for f in r.files.all() {
            assert!(tmp.path().join(f).is_file(), "{f} missing");
        }
    }
    let hashes: HashSet<_> = records.iter().map(|r| r.world_hash.clone()).collect();
    assert_eq!(hashes.len(), 5);
    assert!(tmp.path().join(pipeline::HEADER_FILE).is_file());
}

#[test]
fn interrupted_run_resumes_without_duplicates() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    pipeline::generate_dataset(&config(dir, 4), |_| ()).unwrap();
    let before = std::fs::read(dir.join("000002_rgb.png")).unwrap();

    // Lose one image's file and tear the last manifest line.
    std::fs::remove_file(dir.join("000002_rgb.png")).unwrap();
    let manifest = dir.join(MANIFEST_FILE);
    let mut text = std::fs::read_to_string(&manifest).unwrap();
    text.truncate(text.len() - 20);
    std::fs::write(&manifest, text).unwrap();

    let summary = pipeline::generate_dataset(&config(dir, 4), |_| ()).unwrap();
    assert_eq!((summary.generated, summary.skipped), (2, 2));
    let indices: Vec<u32> = ok_records(dir).iter().map(|r| r.index).collect();
    assert_eq!(indices, vec![0, 1, 2, 3]);
    assert_eq!(std::fs::read(dir.join("000002_rgb.png")).unwrap(), before);

    let again = pipeline::generate_dataset(&config(dir, 4), |_| ()).unwrap();
    assert_eq!((again.generated, again.skipped), (0, 4));
}

#[test]
fn stats_recount_the_label_files() {
    let tmp = tempfile::tempdir().unwrap();
    pipeline::generate_dataset(&config(tmp.path(), 10), |_| ()).unwrap();
    let stats = pipeline::compute_stats(tmp.path()).unwrap();
    let mut counts = [0u64; 16];
    for r in ok_records(tmp.path()) {
        let label = io::read_label_png(&tmp.path().join(&r.files.label)).unwrap();
        for &c in &label.data {
            counts[c as usize] += 1;
        }
        assert_eq!(label.histogram(), r.class_pixels);
    }
    assert_eq!(stats.images, 10);
    assert_eq!(stats.pixels, 10 * 64 * 36);
    assert_eq!(stats.counts, counts);
    assert!(stats.to_csv().lines().count() > 16);
}
