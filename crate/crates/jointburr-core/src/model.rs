//! Burr-XII distribution primitives: density, survival/CDF, quantile,
//! inversion sampling, and a Kolmogorov-Smirnov goodness-of-fit check.
//!
//! The distribution has survival function `(1 + x^beta)^(-alpha)` with
//! two positive shape parameters. Powers are formed in log space so
//! large `x^beta` never overflows.

use alloc::vec::Vec;

use rand_core::RngCore;

use crate::error::{Error, Result};
use crate::numeric::math::{exp, exp_m1, ln, ln1p_pow, ln_1p, pow, sqrt};
use crate::numeric::rng::uniform_open01;
use crate::numeric::special::kolmogorov_sf;

/// Shape parameters of a single Burr-XII population.
///
/// `alpha` is the outer shape (tail index driver), `beta` the inner
/// shape acting on `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurrParams {
    pub alpha: f64,
    pub beta: f64,
}

impl BurrParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter("alpha must be finite and > 0"));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParameter("beta must be finite and > 0"));
        }
        Ok(Self { alpha, beta })
    }

    /// Log density at `x >= 0`.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        debug_assert!(x >= 0.0);
        ln(self.alpha) + ln(self.beta) + (self.beta - 1.0) * ln(x)
            - (self.alpha + 1.0) * ln1p_pow(x, self.beta)
    }

    /// Density `alpha beta x^(beta-1) (1 + x^beta)^-(alpha+1)`.
    ///
    /// At `x = 0` this is 0 for `beta > 1`, `alpha` for `beta = 1`, and
    /// diverges for `beta < 1`.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::Domain("pdf requires x >= 0"));
        }
        if x == 0.0 {
            return Ok(if self.beta > 1.0 {
                0.0
            } else if self.beta == 1.0 {
                self.alpha
            } else {
                f64::INFINITY
            });
        }
        Ok(exp(self.ln_pdf(x)))
    }

    /// Log survival `-alpha ln(1 + x^beta)`.
    #[inline]
    pub fn ln_sf(&self, x: f64) -> f64 {
        -self.alpha * ln1p_pow(x, self.beta)
    }

    /// Survival function `(1 + x^beta)^-alpha`.
    pub fn sf(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::Domain("sf requires x >= 0"));
        }
        Ok(exp(self.ln_sf(x)))
    }

    /// CDF, defined as `1 - sf` so the pair always sums to one exactly.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        Ok(1.0 - self.sf(x)?)
    }

    /// Quantile `((1-u)^(-1/alpha) - 1)^(1/beta)` for `u` in `(0,1)`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain("quantile requires 0 < u < 1"));
        }
        // (1-u)^(-1/alpha) - 1 via expm1/ln1p keeps small quantiles sharp
        let inner = exp_m1(-ln_1p(-u) / self.alpha);
        Ok(pow(inner, 1.0 / self.beta))
    }

    /// `count` i.i.d. draws by inversion of the closed-form quantile.
    pub fn sample<R: RngCore + ?Sized>(&self, count: usize, rng: &mut R) -> Result<Vec<f64>> {
        if count == 0 {
            return Err(Error::Domain("sample requires count >= 1"));
        }
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let u = uniform_open01(rng);
            // u is strictly inside (0,1), so quantile cannot fail
            out.push(self.quantile(u)?);
        }
        Ok(out)
    }
}

/// Result of the one-sample Kolmogorov-Smirnov test against a fixed
/// Burr-XII law.
#[derive(Debug, Clone, Copy)]
pub struct KsResult {
    /// `sup |F_n - F|` over the sample.
    pub distance: f64,
    /// Asymptotic p-value (Stephens-adjusted Kolmogorov series);
    /// `None` for samples smaller than 8 where the asymptotic form is
    /// not trustworthy.
    pub p_value: Option<f64>,
}

/// One-sample K-S test of `data` against `p`.
///
/// The p-value uses the Kolmogorov limit distribution evaluated at
/// `(sqrt(n) + 0.12 + 0.11/sqrt(n)) * D` (Stephens' small-sample
/// adjustment).
pub fn ks_test(data: &[f64], p: BurrParams) -> Result<KsResult> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    let mut xs = data.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let fx = p.cdf(x)?;
        d = d.max((i + 1) as f64 / n - fx).max(fx - i as f64 / n);
    }
    let p_value = if xs.len() >= 8 {
        let lambda = (sqrt(n) + 0.12 + 0.11 / sqrt(n)) * d;
        Some(kolmogorov_sf(lambda))
    } else {
        None
    };
    Ok(KsResult {
        distance: d,
        p_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_core::SeedableRng;

    fn burr(a: f64, b: f64) -> BurrParams {
        BurrParams::new(a, b).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(BurrParams::new(0.0, 1.0).is_err());
        assert!(BurrParams::new(1.0, -2.0).is_err());
        assert!(BurrParams::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn pdf_closed_form_points() {
        assert!((burr(1.5, 1.0).pdf(0.0).unwrap() - 1.5).abs() < 1e-15);
        assert!((burr(1.0, 1.0).pdf(1.0).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn sf_closed_form_points() {
        assert_eq!(burr(1.5, 1.0).sf(0.0).unwrap(), 1.0);
        assert!((burr(1.5, 1.0).sf(1.0).unwrap() - 2f64.powf(-1.5)).abs() < 1e-15);
        assert!((burr(2.0, 0.5).sf(4.0).unwrap() - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn pdf_integrates_to_one() {
        use crate::numeric::quad::AdaptiveQuad;
        let p = burr(1.5, 1.0);
        let q = AdaptiveQuad::new(1e-10);
        // u = 1/(1+x) maps [0, inf) to (0, 1]
        let mass = q
            .integrate(0.0, 1.0, |u| {
                let x = 1.0 / u - 1.0;
                p.pdf(x).unwrap() / (u * u)
            })
            .unwrap();
        assert!((mass - 1.0).abs() < 1e-6, "mass = {mass}");
    }

    #[test]
    fn quantile_closed_form_points() {
        assert!((burr(1.0, 1.0).quantile(0.5).unwrap() - 1.0).abs() < 1e-15);
        let u = 1.0 - 2f64.powf(-1.5);
        assert!((burr(1.5, 1.0).quantile(u).unwrap() - 1.0).abs() < 1e-12);
        assert!(burr(1.0, 1.0).quantile(0.0).is_err());
        assert!(burr(1.0, 1.0).quantile(1.0).is_err());
    }

    #[test]
    fn quantile_round_trip_grid() {
        for &(a, b) in &[(1.5, 1.0), (0.6, 3.0), (2.0, 0.5), (4.0, 2.5)] {
            let p = burr(a, b);
            let mut worst = 0.0f64;
            for i in 1..1000 {
                let u = i as f64 / 1000.0;
                let x = p.quantile(u).unwrap();
                worst = worst.max((p.cdf(x).unwrap() - u).abs());
            }
            assert!(worst < 1e-10, "({a},{b}) worst = {worst}");
        }
    }

    #[test]
    fn sf_plus_cdf_is_exactly_one() {
        let p = burr(0.7, 2.3);
        for i in 0..500 {
            let x = i as f64 * 0.05;
            assert_eq!(p.sf(x).unwrap() + p.cdf(x).unwrap(), 1.0);
        }
    }

    #[test]
    fn pdf_matches_cdf_derivative() {
        let p = burr(1.7, 0.9);
        let h = 1e-6;
        for i in 1..200 {
            let x = i as f64 * 0.05;
            let num = (p.cdf(x + h).unwrap() - p.cdf(x - h).unwrap()) / (2.0 * h);
            assert!(
                (num - p.pdf(x).unwrap()).abs() < 1e-6,
                "x = {x}: {num} vs {}",
                p.pdf(x).unwrap()
            );
        }
    }

    #[test]
    fn beta_one_reduces_to_lomax() {
        let p = burr(2.5, 1.0);
        for &x in &[0.1f64, 0.9, 3.0, 12.0] {
            let lomax_sf = (1.0 + x).powf(-2.5);
            assert!((p.sf(x).unwrap() - lomax_sf).abs() < 1e-14);
        }
    }

    #[test]
    fn sampling_tracks_the_cdf() {
        let p = burr(1.5, 1.0);
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(42);
        let xs = p.sample(100_000, &mut rng).unwrap();
        let ks = ks_test(&xs, p).unwrap();
        assert!(ks.distance < 0.01, "distance = {}", ks.distance);
    }

    #[test]
    fn sampling_is_deterministic_and_singleton_works() {
        let p = burr(1.2, 2.0);
        let mut a = rand_chacha::ChaCha12Rng::seed_from_u64(5);
        let mut b = rand_chacha::ChaCha12Rng::seed_from_u64(5);
        let xa = p.sample(50, &mut a).unwrap();
        let xb = p.sample(50, &mut b).unwrap();
        assert_eq!(xa, xb);
        assert_eq!(p.sample(1, &mut a).unwrap().len(), 1);
    }

    #[test]
    fn ks_distance_on_exact_quantile_grid() {
        let p = burr(1.5, 1.0);
        let n = 25usize;
        let xs: Vec<f64> = (0..n)
            .map(|i| p.quantile((i as f64 + 0.5) / n as f64).unwrap())
            .collect();
        let ks = ks_test(&xs, p).unwrap();
        assert!((ks.distance - 0.5 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn ks_rejects_empty_and_flags_small_n() {
        assert!(matches!(
            ks_test(&[], burr(1.0, 1.0)),
            Err(Error::EmptyData)
        ));
        let small = [0.5, 1.0, 2.0];
        assert!(ks_test(&small, burr(1.0, 1.0)).unwrap().p_value.is_none());
    }
}
