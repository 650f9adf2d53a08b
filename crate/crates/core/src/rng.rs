//! Counter-based random streams (Philox4x32-10).
//!
//! A stream is addressed by `(seed, domain, a, b)`. The 128-bit Philox
//! counter holds `[block, domain, a, b]` and the 64-bit key is the seed, so
//! every stream is a pure function of its address: rendering workers never
//! share state, and adding a new procedural parameter never perturbs the
//! draws of existing ones.

const PHILOX_M0: u32 = 0xD251_1F53;
const PHILOX_M1: u32 = 0xCD9E_8D57;
const PHILOX_W0: u32 = 0x9E37_79B9;
const PHILOX_W1: u32 = 0xBB67_AE85;

#[inline]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = a as u64 * b as u64;
    ((p >> 32) as u32, p as u32)
}

/// The raw Philox4x32 block function with 10 rounds.
pub fn philox4x32_10(counter: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let mut c = counter;
    let mut k = key;
    for round in 0..10 {
        if round > 0 {
            k[0] = k[0].wrapping_add(PHILOX_W0);
            k[1] = k[1].wrapping_add(PHILOX_W1);
        }
        let (hi0, lo0) = mulhilo(PHILOX_M0, c[0]);
        let (hi1, lo1) = mulhilo(PHILOX_M1, c[2]);
        c = [hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0];
    }
    c
}

/// Stream domains. Distinct domains never overlap for the same seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u32)]
pub enum Domain {
    /// Camera path samples: `a` = pixel index, `b` = sample index.
    PixelSample = 1,
    /// Scalar world parameters: `a` = parameter index, `b` = element index.
    WorldParameter = 2,
    /// Rejection-sampled placements: `a` = placement group, `b` = instance.
    Placement = 3,
    /// Procedural texture and cloud seeds.
    Texture = 4,
    /// Free for tests and tools.
    Auxiliary = 15,
}

#[derive(Clone, Debug)]
pub struct RngStream {
    key: [u32; 2],
    counter: [u32; 4],
    block: [u32; 4],
    used: usize,
}

impl RngStream {
    pub fn new(seed: u64, domain: Domain, a: u32, b: u32) -> Self {
        RngStream {
            key: [seed as u32, (seed >> 32) as u32],
            counter: [0, domain as u32, a, b],
            block: [0; 4],
            used: 4,
        }
    }

    #[inline]
    pub fn next_u32(&mut self) -> u32 {
        if self.used == 4 {
            self.block = philox4x32_10(self.counter, self.key);
            self.counter[0] = self.counter[0].wrapping_add(1);
            self.used = 0;
        }
        let v = self.block[self.used];
        self.used += 1;
        v
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let hi = self.next_u32() as u64;
        let lo = self.next_u32() as u64;
        (hi << 32) | lo
    }

    /// Uniform in `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn uniform2(&mut self) -> [f64; 2] {
        [self.uniform(), self.uniform()]
    }

    /// Uniform in `[lo, hi]`; returns `lo` exactly for a degenerate range.
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return lo;
        }
        (lo + (hi - lo) * self.uniform()).min(hi)
    }

    /// Uniform integer in the inclusive range `[lo, hi]`.
    pub fn range_inclusive(&mut self, lo: u32, hi: u32) -> u32 {
        if hi <= lo {
            return lo;
        }
        let span = (hi - lo) as u64 + 1;
        lo + ((self.uniform() * span as f64) as u64).min(span - 1) as u32
    }

    /// Uniform index into a collection of `len > 0` elements.
    pub fn index(&mut self, len: usize) -> usize {
        assert!(len > 0, "cannot pick from an empty set");
        ((self.uniform() * len as f64) as usize).min(len - 1)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }
}

/// 64-bit mixer used for lattice noise and seed derivation.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Known-answer vectors from the Random123 distribution (kat_vectors).
    #[test]
    fn philox_known_answers() {
        assert_eq!(
            philox4x32_10([0, 0, 0, 0], [0, 0]),
            [0x6627_e8d5, 0xe169_c58d, 0xbc57_ac4c, 0x9b00_dbd8]
        );
        assert_eq!(
            philox4x32_10([u32::MAX; 4], [u32::MAX; 2]),
            [0x408f_276d, 0x41c8_3b0e, 0xa20b_c7c6, 0x6d54_51fd]
        );
        assert_eq!(
            philox4x32_10(
                [0x243f_6a88, 0x85a3_08d3, 0x1319_8a2e, 0x0370_7344],
                [0xa409_3822, 0x299f_31d0]
            ),
            [0xd16c_fe09, 0x94fd_cceb, 0x5001_e420, 0x2412_6ea1]
        );
    }

    #[test]
    fn streams_are_pure_functions_of_their_address() {
        let mut a = RngStream::new(42, Domain::PixelSample, 7, 3);
        let mut b = RngStream::new(42, Domain::PixelSample, 7, 3);
        for _ in 0..100 {
            assert_eq!(a.next_u32(), b.next_u32());
        }
        let mut c = RngStream::new(42, Domain::PixelSample, 7, 4);
        let mut d = RngStream::new(42, Domain::WorldParameter, 7, 3);
        let first = RngStream::new(42, Domain::PixelSample, 7, 3).next_u64();
        assert_ne!(first, c.next_u64());
        assert_ne!(first, d.next_u64());
    }

    #[test]
    fn uniform_mean_and_bounds() {
        let mut s = RngStream::new(1, Domain::Auxiliary, 0, 0);
        let n = 200_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let u = s.uniform();
            assert!((0.0..1.0).contains(&u));
            sum += u;
        }
        let mean = sum / n as f64;
        // standard error of the mean is 1/sqrt(12 n) ≈ 6.5e-4
        assert!((mean - 0.5).abs() < 4e-3, "mean {mean}");
    }

    #[test]
    fn integer_ranges_hit_every_value() {
        let mut s = RngStream::new(9, Domain::Auxiliary, 1, 0);
        let mut seen = [0u32; 4];
        for _ in 0..4000 {
            let v = s.range_inclusive(2, 5);
            seen[(v - 2) as usize] += 1;
        }
        assert!(seen.iter().all(|&c| c > 800), "{seen:?}");
        assert_eq!(s.range_inclusive(3, 3), 3);
        assert_eq!(s.range(1.5, 1.5), 1.5);
    }
}
