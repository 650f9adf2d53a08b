//! Unidirectional path tracer with next-event estimation toward the sun and
//! emissive triangles, combined with BRDF sampling by the balance heuristic.
//!
//! Emitters are one-sided (they radiate on the side their winding faces).
//! Reflective surfaces are two-sided: normals are flipped toward the
//! outgoing direction and directions below the geometric surface are
//! rejected, so shading normals never leak light through a surface.

use serde::{Deserialize, Serialize};

use super::camera::Camera;
use super::film::{HdrFilm, PixelAccumulator};
use crate::geometry::{Bvh, Ray, SurfaceInteraction};
use crate::lighting::{Environment, Material, Spectrum};
use crate::math::Vec3;
use crate::procgen::{InstanceInfo, SceneGraph};
use crate::rng::{Domain, RngStream};
use crate::sampling::{balance_heuristic, uniform_triangle};

pub const TILE_SIZE: u32 = 16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathTracerConfig {
    pub samples_per_pixel: u32,
    /// Maximum number of scattering events along a path.
    pub max_depth: u32,
    pub russian_roulette_start_depth: u32,
    /// Per-sample cap on the largest channel; `None` keeps the estimator unbiased.
    pub radiance_clamp: Option<f64>,
    pub seed: u64,
    /// Disables light sampling when false (BRDF sampling only).
    pub next_event: bool,
}

impl Default for PathTracerConfig {
    fn default() -> Self {
        PathTracerConfig {
            samples_per_pixel: 16,
            max_depth: 6,
            russian_roulette_start_depth: 4,
            radiance_clamp: None,
            seed: 0,
            next_event: true,
        }
    }
}

impl PathTracerConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.samples_per_pixel == 0 {
            return Err("samples_per_pixel must be at least 1".into());
        }
        if self.max_depth == 0 {
            return Err("max_depth must be at least 1".into());
        }
        if self.russian_roulette_start_depth > self.max_depth {
            return Err(format!(
                "russian_roulette_start_depth {} exceeds max_depth {}",
                self.russian_roulette_start_depth, self.max_depth
            ));
        }
        if matches!(self.radiance_clamp, Some(c) if c.is_nan() || c <= 0.0) {
            return Err("radiance_clamp must be positive".into());
        }
        Ok(())
    }
}

/// Emissive triangles sampled proportionally to area times luminance.
#[derive(Clone, Debug, Default)]
struct Emitters {
    prims: Vec<u32>,
    cdf: Vec<f64>,
    /// Per primitive: luminance / Σ(area·luminance), the area density of
    /// light sampling; zero for non-emitters.
    area_pdf: Vec<f64>,
}

/// Scene prepared for ray queries.
pub struct RenderScene {
    pub bvh: Bvh,
    pub materials: Vec<Material>,
    pub environment: Environment,
    pub camera: Camera,
    pub instances: Vec<InstanceInfo>,
    emitters: Emitters,
}

impl RenderScene {
    pub fn new(scene: SceneGraph) -> RenderScene {
        let SceneGraph {
            meshes,
            materials,
            instances,
            environment,
            camera,
            ..
        } = scene;
        let bvh = Bvh::build(meshes);
        let mut emitters = Emitters {
            area_pdf: vec![0.0; bvh.primitive_count()],
            ..Emitters::default()
        };
        let mut total = 0.0;
        let mut prim = 0u32;
        for mesh in bvh.meshes() {
            let lum = materials[mesh.material.0 as usize].emission().luminance();
            for t in 0..mesh.triangle_count() {
                if lum > 0.0 {
                    let [a, b, c] = mesh.triangle(t);
                    let area = 0.5 * (b - a).cross(c - a).length();
                    if area > 0.0 {
                        total += area * lum;
                        emitters.prims.push(prim);
                        emitters.cdf.push(total);
                        emitters.area_pdf[prim as usize] = lum;
                    }
                }
                prim += 1;
            }
        }
        if total > 0.0 {
            emitters.cdf.iter_mut().for_each(|c| *c /= total);
            emitters.area_pdf.iter_mut().for_each(|p| *p /= total);
        }
        RenderScene {
            bvh,
            materials,
            environment,
            camera,
            instances,
            emitters,
        }
    }

    pub fn emitter_count(&self) -> usize {
        self.emitters.prims.len()
    }

    pub fn intersect(&self, ray: &Ray) -> Option<SurfaceInteraction> {
        self.bvh.intersect(ray)
    }

    /// Picks an emissive triangle and a point on it: `(point, normal, area pdf)`.
    fn sample_emitter(&self, u: f64, uv: [f64; 2]) -> Option<(Vec3, Vec3, u32)> {
        let e = &self.emitters;
        if e.prims.is_empty() {
            return None;
        }
        let i = e.cdf.partition_point(|&c| c <= u).min(e.prims.len() - 1);
        let prim = e.prims[i];
        let [a, b, c] = self.bvh.triangle(prim);
        let [b0, b1, b2] = uniform_triangle(uv);
        let n = (b - a).cross(c - a).normalized();
        Some((a * b0 + b * b1 + c * b2, n, prim))
    }

    /// Solid-angle density of emitter sampling toward a point at distance
    /// `dist` on primitive `prim`, seen at cosine `cos_light`.
    fn emitter_pdf(&self, prim: u32, dist: f64, cos_light: f64) -> f64 {
        let a = self.emitters.area_pdf.get(prim as usize).copied().unwrap_or(0.0);
        if a == 0.0 || cos_light <= 0.0 {
            return 0.0;
        }
        a * dist * dist / cos_light
    }
}

/// Radiance estimate along `ray`.
pub fn trace_path(scene: &RenderScene, ray: Ray, rng: &mut RngStream, cfg: &PathTracerConfig) -> Spectrum {
    let mut radiance = Spectrum::BLACK;
    let mut beta = Spectrum::WHITE;
    let mut ray = ray;
    // Density of the BRDF sample that produced `ray`; `None` for camera rays.
    let mut brdf_pdf: Option<f64> = None;
    let mut origin = ray.origin;
    let mut depth = 0u32;
    let env = &scene.environment;

    loop {
        let Some(hit) = scene.bvh.intersect(&ray) else {
            let le = env.radiance(ray.direction);
            let w = match brdf_pdf {
                Some(pb) if cfg.next_event => balance_heuristic(pb, env.pdf(ray.direction)),
                _ => 1.0,
            };
            radiance += beta * le * w;
            break;
        };
        let material = scene.materials[hit.material.0 as usize].at(hit.point);
        let wo = -ray.direction;
        let front = hit.geometric_normal.dot(wo) > 0.0;

        if material.is_emissive() && front {
            let le = material.emission();
            let w = match brdf_pdf {
                Some(pb) if cfg.next_event => {
                    let dist = (hit.point - origin).length();
                    let pl = scene.emitter_pdf(hit.primitive, dist, hit.geometric_normal.dot(wo));
                    balance_heuristic(pb, pl)
                }
                _ => 1.0,
            };
            radiance += beta * le * w;
        }
        if !material.reflects() || depth >= cfg.max_depth {
            break;
        }
        depth += 1;

        let ng = if front { hit.geometric_normal } else { -hit.geometric_normal };
        let mut n = if hit.normal.dot(ng) < 0.0 { -hit.normal } else { hit.normal };
        if n.dot(wo) <= 0.0 {
            n = ng;
        }

        if cfg.next_event {
            radiance += beta * direct_light(scene, &material, &hit, wo, n, ng, rng);
        }

        let Some(s) = material.sample(wo, n, rng.uniform2()) else {
            break;
        };
        if s.wi.dot(ng) <= 0.0 || s.pdf <= 0.0 {
            break;
        }
        beta = beta * s.value * (s.wi.dot(n).abs() / s.pdf);
        if beta.is_black() {
            break;
        }
        if depth >= cfg.russian_roulette_start_depth {
            let q = beta.max_component().clamp(0.05, 0.95);
            if rng.uniform() >= q {
                break;
            }
            beta = beta / q;
        }
        brdf_pdf = Some(s.pdf);
        origin = hit.point;
        ray = hit.spawn_ray(s.wi, ray.time);
    }
    radiance
}

/// Light-sampled contribution at one vertex: one sun sample and one
/// emitter sample, each weighted against BRDF sampling.
fn direct_light(
    scene: &RenderScene,
    material: &Material,
    hit: &SurfaceInteraction,
    wo: Vec3,
    n: Vec3,
    ng: Vec3,
    rng: &mut RngStream,
) -> Spectrum {
    let mut out = Spectrum::BLACK;
    let u_env = rng.uniform2();
    if let Some(ls) = scene.environment.sample(u_env) {
        let wi = ls.direction;
        if wi.dot(ng) > 0.0 && ls.pdf > 0.0 && !ls.radiance.is_black() {
            let f = material.eval(wi, wo, n);
            if !f.is_black() && !scene.bvh.occluded(&hit.spawn_ray(wi, 0.0)) {
                let w = balance_heuristic(ls.pdf, material.pdf(wo, wi, n));
                out += f * ls.radiance * (wi.dot(n).abs() * w / ls.pdf);
            }
        }
    }
    let u_pick = rng.uniform();
    let u_point = rng.uniform2();
    if let Some((p, nl, prim)) = scene.sample_emitter(u_pick, u_point) {
        let d = p - hit.point;
        let dist = d.length();
        if dist > 0.0 {
            let wi = d / dist;
            let cos_l = nl.dot(-wi);
            let pl = scene.emitter_pdf(prim, dist, cos_l);
            if wi.dot(ng) > 0.0 && pl > 0.0 {
                let le = scene.materials[scene.bvh.meshes()[scene.bvh.locate(prim).0].material.0 as usize].emission();
                let f = material.eval(wi, wo, n);
                if !f.is_black() && !scene.bvh.occluded(&hit.spawn_ray_to(p, 0.0)) {
                    let w = balance_heuristic(pl, material.pdf(wo, wi, n));
                    out += f * le * (wi.dot(n).abs() * w / pl);
                }
            }
        }
    }
    out
}

/// Sub-pixel offset of sample `s` out of `n`: the first `k²` samples
/// (`k = ⌊√n⌋`) are jittered in a `k × k` grid, the rest uniform.
fn pixel_offset(s: u32, n: u32, u: [f64; 2]) -> (f64, f64) {
    let k = (n as f64).sqrt().floor() as u32;
    if s < k * k {
        let (i, j) = (s % k, s / k);
        ((i as f64 + u[0]) / k as f64, (j as f64 + u[1]) / k as f64)
    } else {
        (u[0], u[1])
    }
}

/// Estimates pixel `(x, y)` with its own per-sample streams.
pub fn render_pixel(scene: &RenderScene, x: u32, y: u32, cfg: &PathTracerConfig) -> PixelAccumulator {
    let cam = &scene.camera;
    let pixel = y * cam.width + x;
    let mut acc = PixelAccumulator::default();
    for s in 0..cfg.samples_per_pixel {
        let mut rng = RngStream::new(cfg.seed, Domain::PixelSample, pixel, s);
        let (dx, dy) = pixel_offset(s, cfg.samples_per_pixel, rng.uniform2());
        let time = cam.shutter_time(rng.uniform());
        let ray = cam.generate_ray(x as f64 + dx, y as f64 + dy, time);
        let mut l = trace_path(scene, ray, &mut rng, cfg);
        if let Some(c) = cfg.radiance_clamp {
            let m = l.max_component();
            if m > c {
                l *= c / m;
            }
        }
        acc.add(l);
    }
    acc
}

/// Renders the scene's camera view tile by tile.
pub fn render(scene: &RenderScene, cfg: &PathTracerConfig) -> HdrFilm {
    let cam = &scene.camera;
    let (w, h) = (cam.width, cam.height);
    let tiles_x = w.div_ceil(TILE_SIZE);
    let tiles_y = h.div_ceil(TILE_SIZE);
    let tiles = crate::exec::map_indexed((tiles_x * tiles_y) as usize, |t| {
        let (tx, ty) = (t as u32 % tiles_x, t as u32 / tiles_x);
        let (x0, y0) = (tx * TILE_SIZE, ty * TILE_SIZE);
        let mut out = Vec::new();
        for y in y0..(y0 + TILE_SIZE).min(h) {
            for x in x0..(x0 + TILE_SIZE).min(w) {
                out.push((x, y, render_pixel(scene, x, y, cfg)));
            }
        }
        out
    });
    let mut film = HdrFilm::new(w, h);
    for (x, y, acc) in tiles.into_iter().flatten() {
        film.set_pixel(x, y, &acc);
    }
    film
}
