//! Analytic sun and sky.
//!
//! The sky is a two-color gradient in elevation, blended toward a gray cloud
//! layer by a value-noise coverage mask. The sun is a uniform disk whose
//! radiance is attenuated by `1 - cloud_cover`; the attenuated part is
//! replaced by whatever the sky shows behind the disk, so at full cover the
//! disk vanishes into the clouds.
//!
//! Gradient (no clouds): with elevation `e = asin(d.y)`,
//! `t = clamp(e / (π/2), 0, 1)` and `G(d) = zenith·t + horizon·(1 - t)`.
//! Directions below the horizon see the horizon color.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use super::Spectrum;
use crate::math::{smoothstep, Vec3};
use crate::noise::fbm;
use crate::sampling::{to_world, uniform_cone, uniform_cone_pdf};

/// Softness of the cloud-mask threshold.
const CLOUD_EDGE: f64 = 0.1;
/// Height of the cloud plane used to project directions onto noise space.
const CLOUD_PLANE_SCALE: f64 = 1.6;
const CLOUD_OCTAVES: u32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SunSky {
    /// Azimuth of the sun in degrees, measured from `+z` toward `+x`.
    pub sun_longitude: f64,
    /// Elevation of the sun above the horizon in degrees.
    pub sun_latitude: f64,
    pub sun_angular_radius: f64,
    pub sun_radiance: Spectrum,
    pub cloud_cover: f64,
    pub sky_zenith_radiance: Spectrum,
    pub sky_horizon_radiance: Spectrum,
    pub cloud_noise_seed: u64,
}

/// Direction toward a light with its radiance and solid-angle density.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LightSample {
    pub direction: Vec3,
    pub radiance: Spectrum,
    pub pdf: f64,
}

impl Default for SunSky {
    fn default() -> Self {
        SunSky {
            sun_longitude: 30.0,
            sun_latitude: 40.0,
            sun_angular_radius: 0.265,
            sun_radiance: Spectrum::new(1.6e5, 1.5e5, 1.4e5),
            cloud_cover: 0.2,
            sky_zenith_radiance: Spectrum::new(0.25, 0.45, 1.0),
            sky_horizon_radiance: Spectrum::new(0.9, 1.0, 1.1),
            cloud_noise_seed: 0,
        }
    }
}

impl SunSky {
    /// Unit vector toward the sun center.
    pub fn sun_direction(&self) -> Vec3 {
        let lon = self.sun_longitude.to_radians();
        let lat = self.sun_latitude.to_radians();
        Vec3::new(lat.cos() * lon.sin(), lat.sin(), lat.cos() * lon.cos())
    }

    #[inline]
    pub fn sun_cos_radius(&self) -> f64 {
        self.sun_angular_radius.to_radians().cos()
    }

    /// Solid angle of the sun cone in steradians.
    pub fn sun_solid_angle(&self) -> f64 {
        2.0 * PI * (1.0 - self.sun_cos_radius())
    }

    pub fn in_sun_cone(&self, d: Vec3) -> bool {
        d.dot(self.sun_direction()) >= self.sun_cos_radius()
    }

    /// Cloud-free gradient.
    pub fn gradient(&self, d: Vec3) -> Spectrum {
        let t = (d.y.clamp(-1.0, 1.0).asin() / FRAC_PI_2).clamp(0.0, 1.0);
        self.sky_zenith_radiance * t + self.sky_horizon_radiance * (1.0 - t)
    }

    /// Radiance of a fully clouded patch of sky.
    pub fn cloud_radiance(&self) -> Spectrum {
        let g = 0.5 * (self.sky_zenith_radiance.luminance() + self.sky_horizon_radiance.luminance());
        let scattered = self.sun_radiance.luminance() * self.sun_solid_angle() / PI * 0.7;
        Spectrum::gray(g * (1.4 - 0.8 * self.cloud_cover) + self.cloud_cover * scattered)
    }

    /// Cloud coverage mask in `[0, 1]`: 0 everywhere at cover 0, 1 everywhere
    /// above the horizon band at cover 1.
    pub fn cloud_mask(&self, d: Vec3) -> f64 {
        if d.y <= 0.0 || self.cloud_cover <= 0.0 {
            return 0.0;
        }
        let h = d.y.max(0.02);
        let n = fbm(
            self.cloud_noise_seed,
            CLOUD_PLANE_SCALE * d.x / h,
            CLOUD_PLANE_SCALE * d.z / h,
            CLOUD_OCTAVES,
        );
        let q = CLOUD_EDGE + (1.0 - 2.0 * CLOUD_EDGE) * n;
        let m = smoothstep(q - CLOUD_EDGE, q + CLOUD_EDGE, self.cloud_cover);
        m * smoothstep(0.0, 0.05, d.y)
    }

    /// Sky seen in direction `d`, ignoring the sun disk.
    pub fn background(&self, d: Vec3) -> Spectrum {
        let m = self.cloud_mask(d);
        self.gradient(d) * (1.0 - m) + self.cloud_radiance() * m
    }

    /// Radiance arriving from direction `d` (unit).
    pub fn radiance(&self, d: Vec3) -> Spectrum {
        let bg = self.background(d);
        if self.in_sun_cone(d) {
            let cc = self.cloud_cover;
            self.sun_radiance * (1.0 - cc) + bg * cc
        } else {
            bg
        }
    }

    /// Uniformly samples the sun cone.
    pub fn sample_sun(&self, u: [f64; 2]) -> LightSample {
        let cos_max = self.sun_cos_radius();
        let direction = to_world(uniform_cone(u, cos_max), self.sun_direction()).normalized();
        LightSample {
            direction,
            radiance: self.radiance(direction),
            pdf: uniform_cone_pdf(cos_max),
        }
    }

    /// Density of [`SunSky::sample_sun`] for direction `d`.
    pub fn sun_pdf(&self, d: Vec3) -> f64 {
        if self.in_sun_cone(d) {
            uniform_cone_pdf(self.sun_cos_radius())
        } else {
            0.0
        }
    }
}

/// Distant illumination surrounding the scene.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Environment {
    Uniform { radiance: Spectrum },
    SunSky(SunSky),
}

impl Environment {
    pub fn radiance(&self, d: Vec3) -> Spectrum {
        match self {
            Environment::Uniform { radiance } => *radiance,
            Environment::SunSky(s) => s.radiance(d),
        }
    }

    /// Samples the part of the environment used for next-event estimation.
    /// Uniform environments have none and are reached by BRDF sampling only.
    pub fn sample(&self, u: [f64; 2]) -> Option<LightSample> {
        match self {
            Environment::Uniform { .. } => None,
            Environment::SunSky(s) => Some(s.sample_sun(u)),
        }
    }

    pub fn pdf(&self, d: Vec3) -> f64 {
        match self {
            Environment::Uniform { .. } => 0.0,
            Environment::SunSky(s) => s.sun_pdf(d),
        }
    }

    pub fn sun(&self) -> Option<&SunSky> {
        match self {
            Environment::SunSky(s) => Some(s),
            Environment::Uniform { .. } => None,
        }
    }
}
