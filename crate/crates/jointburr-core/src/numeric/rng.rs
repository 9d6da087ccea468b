//! Draws from the uniform, normal, and gamma distributions over any
//! `RngCore` source. Everything is deterministic given the stream.

use rand_core::RngCore;

use super::math::{exp, ln};
use super::special::normal_quantile;

/// Uniform draw on the open interval `(0, 1)`.
#[inline]
pub fn uniform_open01<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    // 53 random bits centered in the cell: never exactly 0 or 1
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
}

/// Standard normal draw by inversion.
#[inline]
pub fn standard_normal<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    normal_quantile(uniform_open01(rng))
}

/// Gamma draw with `shape > 0` and `rate > 0` (mean `shape/rate`),
/// Marsaglia-Tsang squeeze with the boost step for `shape < 1`.
pub fn gamma_draw<R: RngCore + ?Sized>(rng: &mut R, shape: f64, rate: f64) -> f64 {
    debug_assert!(shape > 0.0 && rate > 0.0);
    if shape < 1.0 {
        let x = gamma_draw(rng, shape + 1.0, 1.0);
        let u = uniform_open01(rng);
        return x * exp(ln(u) / shape) / rate;
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (3.0 * libm::sqrt(d));
    loop {
        let z = standard_normal(rng);
        let t = 1.0 + c * z;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u = uniform_open01(rng);
        if ln(u) < 0.5 * z * z + d - d * v + d * ln(v) {
            return d * v / rate;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::special::gamma_p;
    use rand_core::SeedableRng;

    #[test]
    fn uniform_stays_strictly_inside_unit_interval() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let u = uniform_open01(&mut rng);
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn normal_moments() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        let n = 200_000;
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let z = standard_normal(&mut rng);
            s1 += z;
            s2 += z * z;
        }
        let mean = s1 / n as f64;
        let var = s2 / n as f64 - mean * mean;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }

    #[test]
    fn gamma_matches_cdf_by_ks() {
        // both shape regimes; K-S distance against the incomplete-gamma CDF
        for &(shape, rate) in &[(3.0, 2.0), (0.6, 1.5)] {
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(23);
            let n = 50_000usize;
            let mut xs: alloc::vec::Vec<f64> =
                (0..n).map(|_| gamma_draw(&mut rng, shape, rate)).collect();
            xs.sort_by(f64::total_cmp);
            let mut dmax = 0.0f64;
            for (i, &x) in xs.iter().enumerate() {
                let fx = gamma_p(shape, x * rate);
                let hi = ((i + 1) as f64 / n as f64 - fx).abs();
                let lo = (fx - i as f64 / n as f64).abs();
                dmax = dmax.max(hi).max(lo);
            }
            assert!(dmax < 0.01, "shape {shape}: K-S distance {dmax}");
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let mut a = rand_chacha::ChaCha12Rng::seed_from_u64(99);
        let mut b = rand_chacha::ChaCha12Rng::seed_from_u64(99);
        for _ in 0..100 {
            assert_eq!(
                gamma_draw(&mut a, 2.5, 1.0).to_bits(),
                gamma_draw(&mut b, 2.5, 1.0).to_bits()
            );
        }
    }
}
