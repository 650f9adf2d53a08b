//! Path tracer, film, PSF and display encoding.
mod camera;
mod film;
mod integrator;
mod psf;
mod tonemap;

pub use camera::{Camera, Plane, Psf};
pub use film::{HdrFilm, PixelAccumulator};
pub use integrator::{render, render_pixel, trace_path, PathTracerConfig, RenderScene, TILE_SIZE};
pub use psf::{apply_psf, Kernel};
pub use tonemap::{encode, encode_spectrum, tonemap, RgbImage, DISPLAY_GAMMA};
