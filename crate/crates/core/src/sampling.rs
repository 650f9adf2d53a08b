//! Warping functions from the unit square to directions and points.

use std::f64::consts::PI;

use crate::math::{orthonormal_basis, Vec3};

/// Concentric (Shirley–Chiu) map from the unit square to the unit disk.
pub fn concentric_disk(u: [f64; 2]) -> (f64, f64) {
    let ox = 2.0 * u[0] - 1.0;
    let oy = 2.0 * u[1] - 1.0;
    if ox == 0.0 && oy == 0.0 {
        return (0.0, 0.0);
    }
    let (r, theta) = if ox.abs() > oy.abs() {
        (ox, PI / 4.0 * (oy / ox))
    } else {
        (oy, PI / 2.0 - PI / 4.0 * (ox / oy))
    };
    (r * theta.cos(), r * theta.sin())
}

/// Cosine-weighted direction in the hemisphere around `+z` (local frame).
pub fn cosine_hemisphere(u: [f64; 2]) -> Vec3 {
    let (x, y) = concentric_disk(u);
    let z = (1.0 - x * x - y * y).max(0.0).sqrt();
    Vec3::new(x, y, z)
}

#[inline]
pub fn cosine_hemisphere_pdf(cos_theta: f64) -> f64 {
    if cos_theta > 0.0 {
        cos_theta / PI
    } else {
        0.0
    }
}

/// Uniform direction inside the cone of half-angle `acos(cos_max)` around `+z`.
pub fn uniform_cone(u: [f64; 2], cos_max: f64) -> Vec3 {
    let cos_theta = 1.0 - u[0] * (1.0 - cos_max);
    let sin_theta = (1.0 - cos_theta * cos_theta).max(0.0).sqrt();
    let phi = 2.0 * PI * u[1];
    Vec3::new(sin_theta * phi.cos(), sin_theta * phi.sin(), cos_theta)
}

#[inline]
pub fn uniform_cone_pdf(cos_max: f64) -> f64 {
    1.0 / (2.0 * PI * (1.0 - cos_max))
}

/// Barycentric coordinates of a uniformly distributed point on a triangle.
pub fn uniform_triangle(u: [f64; 2]) -> [f64; 3] {
    let su = u[0].sqrt();
    let b0 = 1.0 - su;
    let b1 = u[1] * su;
    [b0, b1, 1.0 - b0 - b1]
}

/// Maps a local-frame direction (around `+z`) into the frame of `n`.
#[inline]
pub fn to_world(local: Vec3, n: Vec3) -> Vec3 {
    let (t, b) = orthonormal_basis(n);
    t * local.x + b * local.y + n * local.z
}

/// Balance-heuristic weight of strategy `f` against strategy `g`.
#[inline]
pub fn balance_heuristic(pdf_f: f64, pdf_g: f64) -> f64 {
    if pdf_f + pdf_g > 0.0 {
        pdf_f / (pdf_f + pdf_g)
    } else {
        0.0
    }
}
