//! Point-spread function applied as an image-space convolution.
//!
//! Kernels are sampled on the pixel grid and normalized to unit sum. At the
//! image border only the taps that fall inside the image are used and the
//! kernel is renormalized over them, so a constant image stays constant.

use super::camera::Psf;
use super::film::HdrFilm;
use crate::lighting::Spectrum;

/// Square kernel of side `2r + 1`, row-major, summing to 1.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    pub radius: usize,
    pub weights: Vec<f64>,
}

impl Kernel {
    pub fn at(&self, dx: isize, dy: isize) -> f64 {
        let s = 2 * self.radius + 1;
        let r = self.radius as isize;
        self.weights[(dy + r) as usize * s + (dx + r) as usize]
    }

    fn from_fn(radius: usize, f: impl Fn(f64, f64) -> f64) -> Kernel {
        let r = radius as isize;
        let mut weights = Vec::with_capacity((2 * radius + 1).pow(2));
        for dy in -r..=r {
            for dx in -r..=r {
                weights.push(f(dx as f64, dy as f64));
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Kernel { radius, weights }
    }

    /// Sampled Gaussian truncated at `ceil(4σ)`.
    pub fn gaussian(sigma: f64) -> Kernel {
        let radius = (4.0 * sigma).ceil().max(1.0) as usize;
        Kernel::from_fn(radius, |x, y| (-(x * x + y * y) / (2.0 * sigma * sigma)).exp())
    }

    /// `(1 − weight)` Gaussian core plus `weight` spread evenly over a disk.
    pub fn halo(sigma: f64, weight: f64, radius: f64) -> Kernel {
        let core = Kernel::gaussian(sigma);
        let r = core.radius.max(radius.ceil() as usize);
        let disk = Kernel::from_fn(r, |x, y| if x * x + y * y <= radius * radius { 1.0 } else { 0.0 });
        let cr = core.radius as isize;
        Kernel::from_fn(r, |x, y| {
            let (ix, iy) = (x as isize, y as isize);
            let c = if ix.abs() <= cr && iy.abs() <= cr { core.at(ix, iy) } else { 0.0 };
            (1.0 - weight) * c + weight * disk.at(ix, iy)
        })
    }

    pub fn for_psf(psf: &Psf) -> Option<Kernel> {
        match *psf {
            Psf::None => None,
            Psf::Gaussian { sigma } if sigma > 0.0 => Some(Kernel::gaussian(sigma)),
            Psf::Gaussian { .. } => None,
            Psf::Halo { sigma, weight, radius } => Some(Kernel::halo(sigma.max(1e-3), weight, radius)),
        }
    }
}

/// Convolves the film's pixel means with the PSF kernel.
pub fn apply_psf(film: &HdrFilm, psf: &Psf) -> HdrFilm {
    let Some(k) = Kernel::for_psf(psf) else {
        return film.clone();
    };
    let (w, h) = (film.width as isize, film.height as isize);
    let src = film.pixels();
    let r = k.radius as isize;
    let rows = crate::exec::map_indexed(h as usize, |y| {
        let y = y as isize;
        (0..w)
            .map(|x| {
                let mut acc = Spectrum::BLACK;
                let mut norm = 0.0;
                for dy in (-r).max(-y)..=r.min(h - 1 - y) {
                    let row = ((y + dy) * w) as usize;
                    for dx in (-r).max(-x)..=r.min(w - 1 - x) {
                        let kw = k.at(dx, dy);
                        acc += src[row + (x + dx) as usize] * kw;
                        norm += kw;
                    }
                }
                acc / norm
            })
            .collect::<Vec<_>>()
    });
    let mut out = HdrFilm::from_pixels(film.width, film.height, rows.into_iter().flatten().collect());
    out.rejected = film.rejected;
    out
}
