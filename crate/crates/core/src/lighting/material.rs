//! Surface reflectance models and procedural albedo patterns.
//!
//! Three kinds exist: a Lambertian diffuser, a GGX microfacet reflector with
//! Smith masking ("rough specular") and a pure emitter. Every BRDF here is
//! symmetric in its two directions and reflects at most its albedo.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::Spectrum;
use crate::math::Vec3;
use crate::noise::{fbm, value_noise};
use crate::sampling::{cosine_hemisphere, to_world};

/// Spatial albedo modulation. Factors lie in `[0, 1]`, so patterns can only
/// darken the base albedo and energy conservation is kept.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "pattern", rename_all = "snake_case")]
pub enum SurfacePattern {
    #[default]
    Uniform,
    /// Road surface: mottled asphalt with darker repair patches and thin cracks.
    Asphalt {
        crack_density: f64,
        repair_density: f64,
        seed: u64,
    },
    /// Paving slabs on a 0.6 m grid with blotchy dirt.
    Pavement { dirt: f64, seed: u64 },
}

impl SurfacePattern {
    /// Albedo multiplier at world point `p` (patterns are projected on `xz`).
    pub fn factor(&self, p: Vec3) -> f64 {
        match *self {
            SurfacePattern::Uniform => 1.0,
            SurfacePattern::Asphalt {
                crack_density,
                repair_density,
                seed,
            } => {
                let mut f = 0.85 + 0.15 * fbm(seed, p.x * 2.0, p.z * 2.0, 3);
                let patch = value_noise(seed ^ 0x5EA1, p.x / 3.0, p.z / 3.0);
                if patch > 1.0 - 0.5 * repair_density {
                    f *= 0.65;
                }
                let crack = (value_noise(seed ^ 0xC4AC, p.x * 1.3, p.z * 1.3) - 0.5).abs();
                if crack < 0.02 * crack_density {
                    f *= 0.35;
                }
                f
            }
            SurfacePattern::Pavement { dirt, seed } => {
                const TILE: f64 = 0.6;
                let gx = (p.x / TILE).fract().abs();
                let gz = (p.z / TILE).fract().abs();
                let joint = !(0.02..=0.98).contains(&gx) || !(0.02..=0.98).contains(&gz);
                let mut f = if joint { 0.75 } else { 1.0 };
                let d = fbm(seed, p.x * 0.8, p.z * 0.8, 3);
                f *= 1.0 - 0.6 * dirt.clamp(0.0, 1.0) * d * d;
                f
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Material {
    Lambertian {
        albedo: Spectrum,
        #[serde(default)]
        pattern: SurfacePattern,
    },
    RoughSpecular {
        albedo: Spectrum,
        /// Perceptual roughness in `(0, 1]`; the GGX width is its square.
        roughness: f64,
    },
    Emissive { emission: Spectrum },
}

/// Output of [`Material::sample`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BrdfSample {
    pub wi: Vec3,
    /// Solid-angle density of `wi`.
    pub pdf: f64,
    /// BRDF value for `(wi, wo)`.
    pub value: Spectrum,
}

const MIN_ALPHA: f64 = 1e-4;

#[inline]
fn ggx_d(cos_h: f64, a2: f64) -> f64 {
    let c2 = cos_h * cos_h;
    let denom = c2 * (a2 - 1.0) + 1.0;
    a2 / (PI * denom * denom)
}

#[inline]
fn smith_g1(cos_v: f64, a2: f64) -> f64 {
    2.0 * cos_v / (cos_v + (a2 + (1.0 - a2) * cos_v * cos_v).sqrt())
}

impl Material {
    pub fn lambertian(albedo: Spectrum) -> Material {
        Material::Lambertian {
            albedo,
            pattern: SurfacePattern::Uniform,
        }
    }

    pub fn rough_specular(albedo: Spectrum, roughness: f64) -> Material {
        Material::RoughSpecular { albedo, roughness }
    }

    pub fn emissive(emission: Spectrum) -> Material {
        Material::Emissive { emission }
    }

    pub fn emission(&self) -> Spectrum {
        match self {
            Material::Emissive { emission } => *emission,
            _ => Spectrum::BLACK,
        }
    }

    pub fn is_emissive(&self) -> bool {
        matches!(self, Material::Emissive { .. })
    }

    /// Whether the surface scatters light at all.
    pub fn reflects(&self) -> bool {
        !self.is_emissive()
    }

    /// Material with its pattern evaluated at `p`.
    pub fn at(&self, p: Vec3) -> Material {
        match *self {
            Material::Lambertian { albedo, pattern } if pattern != SurfacePattern::Uniform => {
                Material::lambertian(albedo * pattern.factor(p))
            }
            m => m,
        }
    }

    #[inline]
    fn alpha2(roughness: f64) -> f64 {
        let a = (roughness * roughness).max(MIN_ALPHA);
        a * a
    }

    /// BRDF value; zero if either direction is below the surface.
    pub fn eval(&self, wi: Vec3, wo: Vec3, n: Vec3) -> Spectrum {
        let ci = wi.dot(n);
        let co = wo.dot(n);
        if ci <= 0.0 || co <= 0.0 {
            return Spectrum::BLACK;
        }
        match *self {
            Material::Lambertian { albedo, .. } => albedo * (1.0 / PI),
            Material::RoughSpecular { albedo, roughness } => {
                let a2 = Material::alpha2(roughness);
                let h = (wi + wo).normalized();
                let d = ggx_d(h.dot(n), a2);
                let g = smith_g1(ci, a2) * smith_g1(co, a2);
                albedo * (d * g / (4.0 * ci * co))
            }
            Material::Emissive { .. } => Spectrum::BLACK,
        }
    }

    /// Solid-angle density with which [`Material::sample`] produces `wi`.
    pub fn pdf(&self, wo: Vec3, wi: Vec3, n: Vec3) -> f64 {
        let ci = wi.dot(n);
        let co = wo.dot(n);
        if ci <= 0.0 || co <= 0.0 {
            return 0.0;
        }
        match *self {
            Material::Lambertian { .. } => ci / PI,
            Material::RoughSpecular { roughness, .. } => {
                let a2 = Material::alpha2(roughness);
                let h = (wi + wo).normalized();
                let ch = h.dot(n);
                let oh = wo.dot(h);
                if oh <= 0.0 {
                    return 0.0;
                }
                ggx_d(ch, a2) * ch / (4.0 * oh)
            }
            Material::Emissive { .. } => 0.0,
        }
    }

    /// Importance-samples an incident direction: cosine-weighted for
    /// Lambertian, `D(h)·cos θ_h` half-vectors for rough specular.
    /// Returns `None` when the sampled direction falls below the surface.
    pub fn sample(&self, wo: Vec3, n: Vec3, u: [f64; 2]) -> Option<BrdfSample> {
        if wo.dot(n) <= 0.0 {
            return None;
        }
        let wi = match *self {
            Material::Lambertian { .. } => to_world(cosine_hemisphere(u), n),
            Material::RoughSpecular { roughness, .. } => {
                let a2 = Material::alpha2(roughness);
                let tan2 = a2 * u[0] / (1.0 - u[0]).max(1e-300);
                let cos_h = 1.0 / (1.0 + tan2).sqrt();
                let sin_h = (1.0 - cos_h * cos_h).max(0.0).sqrt();
                let phi = 2.0 * PI * u[1];
                let h = to_world(Vec3::new(sin_h * phi.cos(), sin_h * phi.sin(), cos_h), n);
                wo.reflect(h)
            }
            Material::Emissive { .. } => return None,
        };
        let pdf = self.pdf(wo, wi, n);
        if pdf <= 0.0 || !pdf.is_finite() {
            return None;
        }
        Some(BrdfSample {
            wi,
            pdf,
            value: self.eval(wi, wo, n),
        })
    }
}
