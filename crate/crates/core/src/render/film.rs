//! HDR film: per-pixel radiance sums and sample counts.

use crate::lighting::Spectrum;

#[derive(Clone, Debug, PartialEq)]
pub struct HdrFilm {
    pub width: u32,
    pub height: u32,
    sum: Vec<Spectrum>,
    sum_sq: Vec<Spectrum>,
    count: Vec<u32>,
    /// Samples refused at splat time for being non-finite or negative.
    pub rejected: u64,
}

impl HdrFilm {
    pub fn new(width: u32, height: u32) -> HdrFilm {
        let n = width as usize * height as usize;
        HdrFilm {
            width,
            height,
            sum: vec![Spectrum::BLACK; n],
            sum_sq: vec![Spectrum::BLACK; n],
            count: vec![0; n],
            rejected: 0,
        }
    }

    /// Film holding `pixels` as single-sample values, row-major.
    pub fn from_pixels(width: u32, height: u32, pixels: Vec<Spectrum>) -> HdrFilm {
        assert_eq!(pixels.len(), width as usize * height as usize);
        let sum_sq = pixels.iter().map(|&p| p * p).collect();
        HdrFilm {
            width,
            height,
            count: vec![1; pixels.len()],
            sum: pixels,
            sum_sq,
            rejected: 0,
        }
    }

    #[inline]
    fn index(&self, x: u32, y: u32) -> usize {
        y as usize * self.width as usize + x as usize
    }

    /// Adds one sample; non-finite or negative values are counted and dropped.
    pub fn splat(&mut self, x: u32, y: u32, value: Spectrum) -> bool {
        if !value.is_finite() || !value.is_non_negative() {
            self.rejected += 1;
            return false;
        }
        let i = self.index(x, y);
        self.sum[i] += value;
        self.sum_sq[i] += value * value;
        self.count[i] += 1;
        true
    }

    /// Merges a pixel accumulated elsewhere.
    pub fn set_pixel(&mut self, x: u32, y: u32, acc: &PixelAccumulator) {
        let i = self.index(x, y);
        self.sum[i] = acc.sum;
        self.sum_sq[i] = acc.sum_sq;
        self.count[i] = acc.count;
        self.rejected += acc.rejected;
    }

    pub fn count(&self, x: u32, y: u32) -> u32 {
        self.count[self.index(x, y)]
    }

    /// Mean radiance of a pixel; black before any sample.
    pub fn pixel(&self, x: u32, y: u32) -> Spectrum {
        let i = self.index(x, y);
        if self.count[i] == 0 {
            Spectrum::BLACK
        } else {
            self.sum[i] / self.count[i] as f64
        }
    }

    /// Unbiased variance of the pixel mean, per channel.
    pub fn mean_variance(&self, x: u32, y: u32) -> Spectrum {
        let i = self.index(x, y);
        let n = self.count[i] as f64;
        if n < 2.0 {
            return Spectrum::BLACK;
        }
        let (s, s2) = (self.sum[i].to_array(), self.sum_sq[i].to_array());
        let v = |c: usize| {
            let m = s[c] / n;
            ((s2[c] / n - m * m) * n / (n - 1.0)).max(0.0) / n
        };
        Spectrum::new(v(0), v(1), v(2))
    }

    /// Row-major mean radiance of every pixel.
    pub fn pixels(&self) -> Vec<Spectrum> {
        (0..self.height)
            .flat_map(|y| (0..self.width).map(move |x| (x, y)))
            .map(|(x, y)| self.pixel(x, y))
            .collect()
    }

    /// Sum of pixel means per channel.
    pub fn total(&self) -> Spectrum {
        self.pixels().into_iter().fold(Spectrum::BLACK, |a, b| a + b)
    }
}

/// Running sums for one pixel, filled by a render worker.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PixelAccumulator {
    pub sum: Spectrum,
    pub sum_sq: Spectrum,
    pub count: u32,
    pub rejected: u64,
}

impl PixelAccumulator {
    pub fn add(&mut self, value: Spectrum) {
        if !value.is_finite() || !value.is_non_negative() {
            self.rejected += 1;
            return;
        }
        self.sum += value;
        self.sum_sq += value * value;
        self.count += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splat_rejects_bad_samples() {
        let mut f = HdrFilm::new(2, 1);
        assert!(f.splat(0, 0, Spectrum::gray(1.0)));
        assert!(!f.splat(0, 0, Spectrum::new(f64::NAN, 0.0, 0.0)));
        assert!(!f.splat(0, 0, Spectrum::new(f64::INFINITY, 0.0, 0.0)));
        assert!(!f.splat(0, 0, Spectrum::new(-1.0, 0.0, 0.0)));
        assert!(f.splat(0, 0, Spectrum::gray(3.0)));
        assert_eq!(f.rejected, 3);
        assert_eq!(f.pixel(0, 0), Spectrum::gray(2.0));
        assert_eq!(f.pixel(1, 0), Spectrum::BLACK);
        // Sample variance 2, mean variance 1.
        assert!((f.mean_variance(0, 0).r - 1.0).abs() < 1e-12);
    }
}
