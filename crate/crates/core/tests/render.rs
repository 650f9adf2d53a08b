use streetsynth::exec::with_workers;
use streetsynth::lighting::{Environment, Material, Spectrum};
use streetsynth::math::Vec3;
use streetsynth::procgen::{MeshBuilder, SceneGraph};
use streetsynth::render::{render, Camera, PathTracerConfig, RenderScene};
use streetsynth::taxonomy::ClassId;

fn uniform(l: f64) -> Environment {
    Environment::Uniform {
        radiance: Spectrum::gray(l),
    }
}

fn scene(env: Environment, cam: Camera, parts: Vec<(ClassId, Material, MeshBuilder)>) -> RenderScene {
    let mut g = SceneGraph::new(env, cam);
    for (class, m, b) in parts {
        g.add_instance(class, "part", vec![(m, b)]).unwrap();
    }
    RenderScene::new(g)
}

fn ground(albedo: f64) -> (ClassId, Material, MeshBuilder) {
    let mut b = MeshBuilder::new();
    b.face(Vec3::ZERO, Vec3::Y, Vec3::X, 1e4, 1e4);
    (ClassId::Road, Material::lambertian(Spectrum::gray(albedo)), b)
}

#[test]
fn lambertian_plane_under_uniform_sky() {
    let cam = Camera::look_at(Vec3::new(0.0, 2.0, 0.0), Vec3::new(0.0, 0.0, 4.0), 40.0, 8, 8);
    let s = scene(uniform(1.0), cam, vec![ground(0.5)]);
    let cfg = PathTracerConfig {
        samples_per_pixel: 64,
        ..Default::default()
    };
    let film = render(&s, &cfg);
    for y in 0..8 {
        for x in 0..8 {
            let p = film.pixel(x, y);
            // Pixels above the horizon see the sky itself.
            assert!((p.g - 0.5).abs() < 1e-9 || (p.g - 1.0).abs() < 1e-9, "{p:?}");
        }
    }
    assert!((film.pixel(4, 7).g - 0.5).abs() < 1e-9);
}

#[test]
fn white_sphere_disappears_in_a_furnace() {
    let cam = Camera::look_at(Vec3::new(0.0, 0.0, -3.0), Vec3::ZERO, 45.0, 16, 16);
    let mut b = MeshBuilder::new();
    b.ellipsoid(Vec3::ZERO, Vec3::splat(1.0), 24, 48);
    let s = scene(
        uniform(1.0),
        cam,
        vec![(ClassId::Person, Material::lambertian(Spectrum::WHITE), b)],
    );
    let cfg = PathTracerConfig {
        samples_per_pixel: 64,
        ..Default::default()
    };
    let film = render(&s, &cfg);
    let mean_rel: f64 = film.pixels().iter().map(|p| (p.g - 1.0).abs()).sum::<f64>() / 256.0;
    assert!(mean_rel < 0.01, "{mean_rel}");
}

fn lamp_scene(next_event: bool, spp: u32) -> (f64, f64) {
    let cam = Camera::look_at(Vec3::new(0.0, 3.0, -3.0), Vec3::ZERO, 2.0, 4, 4);
    let mut lamp = MeshBuilder::new();
    lamp.face(Vec3::new(0.0, 2.0, 0.0), -Vec3::Y, Vec3::X, 0.5, 0.5);
    let s = scene(
        uniform(0.0),
        cam,
        vec![
            ground(0.8),
            (ClassId::Pole, Material::emissive(Spectrum::gray(10.0)), lamp),
        ],
    );
    let cfg = PathTracerConfig {
        samples_per_pixel: spp,
        next_event,
        ..Default::default()
    };
    let film = render(&s, &cfg);
    let (mut m, mut v) = (0.0, 0.0);
    for y in 0..4 {
        for x in 0..4 {
            m += film.pixel(x, y).g / 16.0;
            v += film.mean_variance(x, y).g / 256.0;
        }
    }
    (m, v.sqrt())
}

#[test]
fn light_sampling_and_brdf_sampling_agree() {
    let (a, sa) = lamp_scene(true, 256);
    let (b, sb) = lamp_scene(false, 4096);
    // Oracle: irradiance at the plane origin from a 1×1 square at height 2,
    // E = L ∫∫ h² / (x² + y² + h²)² dx dy, integrated by the midpoint rule.
    // The camera sees ground within 0.1 m of the origin, where E varies
    // by well under 1%.
    let n = 400;
    let mut e = 0.0;
    for i in 0..n {
        for j in 0..n {
            let x = -0.5 + (i as f64 + 0.5) / n as f64;
            let y = -0.5 + (j as f64 + 0.5) / n as f64;
            e += 4.0 / (x * x + y * y + 4.0).powi(2) / (n * n) as f64;
        }
    }
    let center = 0.8 / std::f64::consts::PI * 10.0 * e;
    assert!((a - b).abs() < 4.0 * (sa * sa + sb * sb).sqrt(), "{a} {b}");
    assert!((a - center).abs() / center < 0.02, "{a} {center}");
    assert!(sa < sb, "light sampling should reduce variance");
}

#[test]
fn render_is_independent_of_worker_count() {
    let cam = Camera::look_at(Vec3::new(0.0, 1.5, -2.0), Vec3::new(0.0, 0.5, 3.0), 50.0, 37, 21);
    let mut bx = MeshBuilder::new();
    bx.cuboid(Vec3::new(-0.5, 0.0, 2.0), Vec3::new(0.5, 1.0, 3.0));
    let s = scene(
        Environment::SunSky(Default::default()),
        cam,
        vec![
            ground(0.3),
            (ClassId::Car, Material::rough_specular(Spectrum::new(0.7, 0.1, 0.1), 0.3), bx),
        ],
    );
    let cfg = PathTracerConfig {
        samples_per_pixel: 4,
        ..Default::default()
    };
    let one = with_workers(1, || render(&s, &cfg));
    let many = with_workers(4, || render(&s, &cfg));
    assert_eq!(one, many);
}

#[test]
fn moving_box_smears_along_motion() {
    let still = Camera::look_at(Vec3::new(0.0, 0.5, -4.0), Vec3::new(0.0, 0.5, 0.0), 40.0, 32, 8);
    let mut end = still.pose;
    end.translation.x += 1.5;
    let cam = still.with_motion(end);
    let mk = |cam: Camera| {
        let mut b = MeshBuilder::new();
        b.face(Vec3::new(0.0, 0.5, 0.0), -Vec3::Z, Vec3::X, 0.2, 2.0);
        scene(
            uniform(0.0),
            cam,
            vec![(ClassId::Pole, Material::emissive(Spectrum::WHITE), b)],
        )
    };
    let cfg = PathTracerConfig {
        samples_per_pixel: 1024,
        ..Default::default()
    };
    let lit = |f: &streetsynth::render::HdrFilm| (0..32).filter(|&x| f.pixel(x, 4).g > 0.01).count();
    let a = render(&mk(still), &cfg);
    let b = render(&mk(cam), &cfg);
    assert!(lit(&b) >= lit(&a) + 3, "{} {}", lit(&a), lit(&b));
    // Radiance is spread, not created.
    let sum = |f: &streetsynth::render::HdrFilm| (0..32).map(|x| f.pixel(x, 4).g).sum::<f64>();
    let row = |f: &streetsynth::render::HdrFilm| (0..32).map(|x| format!("{:.2}", f.pixel(x, 4).g)).collect::<Vec<_>>().join(" ");
    assert!((sum(&a) - sum(&b)).abs() / sum(&a) < 0.05, "{}\n{}", row(&a), row(&b));
}
