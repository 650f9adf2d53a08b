//! Display encoding: exposure, clamp, then a pure 1/2.4 power curve
//! quantized to 8 bits with rounding.

use super::film::HdrFilm;
use crate::lighting::Spectrum;

pub const DISPLAY_GAMMA: f64 = 2.4;

/// 8-bit interleaved RGB image, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RgbImage {
    pub width: u32,
    pub height: u32,
    pub data: Vec<u8>,
}

impl RgbImage {
    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = 3 * (y as usize * self.width as usize + x as usize);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }
}

/// `round(255 · clamp(v, 0, 1)^(1/2.4))`.
#[inline]
pub fn encode(v: f64) -> u8 {
    let v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
    (255.0 * v.powf(1.0 / DISPLAY_GAMMA)).round() as u8
}

pub fn encode_spectrum(s: Spectrum, exposure: f64) -> [u8; 3] {
    (s * exposure).to_array().map(encode)
}

pub fn tonemap(film: &HdrFilm, exposure: f64) -> RgbImage {
    let data = film
        .pixels()
        .into_iter()
        .flat_map(|p| encode_spectrum(p, exposure))
        .collect();
    RgbImage {
        width: film.width,
        height: film.height,
        data,
    }
}
