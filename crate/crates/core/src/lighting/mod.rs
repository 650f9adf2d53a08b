//! Reflectance, emission and distant illumination in linear RGB.

mod material;
mod sky;
mod spectrum;

pub use material::{BrdfSample, Material, SurfacePattern};
pub use sky::{Environment, LightSample, SunSky};
pub use spectrum::Spectrum;
