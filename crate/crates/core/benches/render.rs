//! Tile-parallel rendering against a plain per-pixel loop on one small
//! street scene. Build with `--no-default-features` to time the sequential
//! fallback of `exec` as well.

use criterion::{criterion_group, criterion_main, Criterion};

use streetsynth::exec::{resolve_workers, with_workers};
use streetsynth::procgen::{ego_camera, realize_world, sample_world, ScenarioScope};
use streetsynth::render::{render, render_pixel, HdrFilm, PathTracerConfig, RenderScene};

fn street(width: u32, height: u32) -> RenderScene {
    let world = sample_world(&ScenarioScope::default(), 3).expect("default scope samples");
    let camera = ego_camera(&world, width, height);
    RenderScene::new(realize_world(&world, &camera).expect("world realizes"))
}

fn bench_render(c: &mut Criterion) {
    let scene = street(96, 54);
    let cfg = PathTracerConfig {
        samples_per_pixel: 4,
        ..Default::default()
    };
    let mut group = c.benchmark_group("render_96x54_4spp");
    group.sample_size(10);
    group.bench_function("sequential", |b| {
        b.iter(|| {
            let mut film = HdrFilm::new(96, 54);
            for y in 0..54 {
                for x in 0..96 {
                    film.set_pixel(x, y, &render_pixel(&scene, x, y, &cfg));
                }
            }
            film
        })
    });
    let workers = resolve_workers(None);
    group.bench_function(format!("parallel_{workers}_workers"), |b| {
        b.iter(|| with_workers(workers, || render(&scene, &cfg)))
    });
    group.finish();
}

criterion_group!(benches, bench_render);
criterion_main!(benches);
