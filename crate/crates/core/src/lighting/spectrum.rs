use std::ops::{Add, AddAssign, Div, Mul, MulAssign};

use serde::{Deserialize, Serialize};

/// Linear, scene-referred RGB triple (radiance or reflectance).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub r: f64,
    pub g: f64,
    pub b: f64,
}

impl Spectrum {
    pub const BLACK: Spectrum = Spectrum::new(0.0, 0.0, 0.0);
    pub const WHITE: Spectrum = Spectrum::new(1.0, 1.0, 1.0);

    pub const fn new(r: f64, g: f64, b: f64) -> Spectrum {
        Spectrum { r, g, b }
    }

    pub const fn gray(v: f64) -> Spectrum {
        Spectrum { r: v, g: v, b: v }
    }

    pub fn from_array(a: [f64; 3]) -> Spectrum {
        Spectrum::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.r, self.g, self.b]
    }

    /// Rec. 709 luminance.
    #[inline]
    pub fn luminance(self) -> f64 {
        0.2126 * self.r + 0.7152 * self.g + 0.0722 * self.b
    }

    #[inline]
    pub fn max_component(self) -> f64 {
        self.r.max(self.g).max(self.b)
    }

    #[inline]
    pub fn is_black(self) -> bool {
        self.r == 0.0 && self.g == 0.0 && self.b == 0.0
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.r.is_finite() && self.g.is_finite() && self.b.is_finite()
    }

    pub fn is_non_negative(self) -> bool {
        self.r >= 0.0 && self.g >= 0.0 && self.b >= 0.0
    }

    pub fn clamp_max(self, m: f64) -> Spectrum {
        Spectrum::new(self.r.min(m), self.g.min(m), self.b.min(m))
    }

    pub fn lerp(self, o: Spectrum, t: f64) -> Spectrum {
        self * (1.0 - t) + o * t
    }
}

impl Add for Spectrum {
    type Output = Spectrum;
    #[inline]
    fn add(self, o: Spectrum) -> Spectrum {
        Spectrum::new(self.r + o.r, self.g + o.g, self.b + o.b)
    }
}

impl AddAssign for Spectrum {
    #[inline]
    fn add_assign(&mut self, o: Spectrum) {
        *self = *self + o;
    }
}

impl Mul for Spectrum {
    type Output = Spectrum;
    #[inline]
    fn mul(self, o: Spectrum) -> Spectrum {
        Spectrum::new(self.r * o.r, self.g * o.g, self.b * o.b)
    }
}

impl MulAssign for Spectrum {
    #[inline]
    fn mul_assign(&mut self, o: Spectrum) {
        *self = *self * o;
    }
}

impl Mul<f64> for Spectrum {
    type Output = Spectrum;
    #[inline]
    fn mul(self, s: f64) -> Spectrum {
        Spectrum::new(self.r * s, self.g * s, self.b * s)
    }
}

impl MulAssign<f64> for Spectrum {
    #[inline]
    fn mul_assign(&mut self, s: f64) {
        *self = *self * s;
    }
}

impl Div<f64> for Spectrum {
    type Output = Spectrum;
    #[inline]
    fn div(self, s: f64) -> Spectrum {
        self * (1.0 / s)
    }
}
