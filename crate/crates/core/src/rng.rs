//! Reproducible random streams.
//!
//! The generator is PCG64 (`pcg_xsl_rr_128_64`, the `rand_pcg::Pcg64`
//! reference implementation). Streams are derived from a master seed with
//! SplitMix64, so any language with those two algorithms regenerates the
//! same instances bit for bit:
//!
//! ```text
//! h = master
//! for v in [fnv1a64(family), n, m, index]: h = splitmix64(h ^ v)
//! (s0, s1, s2, s3) = next four outputs of the SplitMix64 sequence seeded at h
//! state  = s0·2⁶⁴ + s1,   increment stream = s2·2⁶⁴ + s3
//! ```
//!
//! Variates:
//! - uniform `U = (next_u64 >> 11) · 2⁻⁵³ ∈ [0, 1)`;
//! - normal by Box–Muller, cosine branch only: `u₁ = 1 − U`, `u₂ = U`,
//!   `√(−2 ln u₁) · cos(2π u₂)` (two uniforms per normal);
//! - uniform in the unit `n`-ball: `n` normals for the direction, normalized,
//!   then one uniform `U` for the radius `U^{1/n}`.

use rand_core::Rng as _;
use rand_pcg::Pcg64;

/// SplitMix64 output for state `x`: add the golden gamma, then mix.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 64-bit FNV-1a of a family tag.
pub fn fnv1a64(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

/// The per-instance seed stored in instance files.
pub fn stream_seed(master: u64, family: &str, n: usize, m: usize, index: u64) -> u64 {
    [fnv1a64(family), n as u64, m as u64, index].into_iter().fold(master, |h, v| splitmix64(h ^ v))
}

pub struct Rng {
    inner: Pcg64,
}

impl Rng {
    pub fn from_seed(seed: u64) -> Self {
        let mut x = seed;
        let mut next = || {
            let out = splitmix64(x);
            x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
            out
        };
        let (s0, s1, s2, s3) = (next(), next(), next(), next());
        let state = ((s0 as u128) << 64) | s1 as u128;
        let stream = ((s2 as u128) << 64) | s3 as u128;
        Rng { inner: Pcg64::new(state, stream) }
    }

    pub fn for_instance(master: u64, family: &str, n: usize, m: usize, index: u64) -> Self {
        Self::from_seed(stream_seed(master, family, n, m, index))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn normals(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.normal()).collect()
    }

    /// Uniform on the unit sphere; redraws the (measure-zero) zero vector.
    pub fn on_sphere(&mut self, n: usize) -> Vec<f64> {
        loop {
            let v = self.normals(n);
            let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if r > 0.0 {
                return v.into_iter().map(|x| x / r).collect();
            }
        }
    }

    pub fn in_ball(&mut self, n: usize) -> Vec<f64> {
        let dir = self.on_sphere(n);
        let r = self.uniform().powf(1.0 / n as f64);
        dir.into_iter().map(|x| r * x).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_values() {
        // first outputs of the SplitMix64 sequence seeded at 0
        let mut rng_state = 0u64;
        let mut out = Vec::new();
        for _ in 0..3 {
            out.push(splitmix64(rng_state));
            rng_state = rng_state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        }
        assert_eq!(out, vec![0xE220_A839_7B1D_CDAF, 0x6E78_9E6A_A1B9_65F4, 0x06C4_5D18_8009_454F]);
    }

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a64(""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(fnv1a64("a"), 0xaf63_dc4c_8601_ec8c);
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map({ let mut r = Rng::for_instance(42, "linear", 2, 2, 0); move |_| r.next_u64() }).collect();
        let b: Vec<u64> = (0..4).map({ let mut r = Rng::for_instance(42, "linear", 2, 2, 0); move |_| r.next_u64() }).collect();
        let c: Vec<u64> = (0..4).map({ let mut r = Rng::for_instance(42, "linear", 2, 2, 1); move |_| r.next_u64() }).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn variates_have_expected_moments() {
        let mut r = Rng::from_seed(1);
        let n = 200_000;
        let u: Vec<f64> = (0..n).map(|_| r.uniform()).collect();
        assert!(u.iter().all(|&x| (0.0..1.0).contains(&x)));
        assert!((u.iter().sum::<f64>() / n as f64 - 0.5).abs() < 0.01);
        let z = r.normals(n);
        let mean = z.iter().sum::<f64>() / n as f64;
        let var = z.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.01 && (var - 1.0).abs() < 0.02, "{mean} {var}");
        for _ in 0..1000 {
            let x = r.in_ball(3);
            assert!(x.iter().map(|v| v * v).sum::<f64>() <= 1.0);
        }
    }
}
