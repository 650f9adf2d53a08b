//! Seeded 2D value noise for procedural textures and the cloud layer.

use crate::rng::mix64;

#[inline]
fn lattice(seed: u64, x: i64, y: i64) -> f64 {
    let h = mix64(seed ^ mix64((x as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (y as u64)));
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Smoothly interpolated lattice noise in `[0, 1]`.
pub fn value_noise(seed: u64, x: f64, y: f64) -> f64 {
    let xf = x.floor();
    let yf = y.floor();
    let (ix, iy) = (xf as i64, yf as i64);
    let fx = x - xf;
    let fy = y - yf;
    let sx = fx * fx * (3.0 - 2.0 * fx);
    let sy = fy * fy * (3.0 - 2.0 * fy);
    let a = lattice(seed, ix, iy);
    let b = lattice(seed, ix + 1, iy);
    let c = lattice(seed, ix, iy + 1);
    let d = lattice(seed, ix + 1, iy + 1);
    let top = a + (b - a) * sx;
    let bottom = c + (d - c) * sx;
    top + (bottom - top) * sy
}

/// Fractal sum of `octaves` noise layers, renormalized to `[0, 1]`.
pub fn fbm(seed: u64, x: f64, y: f64, octaves: u32) -> f64 {
    let mut sum = 0.0;
    let mut norm = 0.0;
    let mut amp = 1.0;
    let mut freq = 1.0;
    for o in 0..octaves {
        sum += amp * value_noise(seed.wrapping_add(o as u64 * 0x51), x * freq, y * freq);
        norm += amp;
        amp *= 0.5;
        freq *= 2.0;
    }
    if norm > 0.0 {
        sum / norm
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_is_bounded_and_deterministic() {
        for i in 0..1000 {
            let x = i as f64 * 0.37 - 50.0;
            let y = i as f64 * 0.11 + 3.0;
            let v = fbm(7, x, y, 4);
            assert!((0.0..=1.0).contains(&v));
            assert_eq!(v, fbm(7, x, y, 4));
        }
    }

    #[test]
    fn noise_is_continuous() {
        let a = value_noise(1, 2.999_999, 4.5);
        let b = value_noise(1, 3.000_001, 4.5);
        assert!((a - b).abs() < 1e-4);
    }
}
