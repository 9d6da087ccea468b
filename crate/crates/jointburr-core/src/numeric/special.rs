//! Special functions: log-gamma, regularized incomplete gamma and its
//! inverse, the standard normal CDF/quantile, the asymptotic Kolmogorov
//! survival function, and chi-square quantiles.

use super::math::{erf, exp, ln, pow, sqrt};

/// Natural log of the gamma function for `x > 0` (Lanczos, ~1e-13 relative).
pub fn ln_gamma(x: f64) -> f64 {
    const COF: [f64; 6] = [
        76.180_091_729_471_46,
        -86.505_320_329_416_77,
        24.014_098_240_830_91,
        -1.231_739_572_450_155,
        0.120_865_097_386_617_9e-2,
        -0.539_523_938_495_3e-5,
    ];
    debug_assert!(x > 0.0);
    let tmp = x + 5.5;
    let tmp = tmp - (x + 0.5) * ln(tmp);
    let mut ser = 1.000_000_000_190_015;
    let mut y = x;
    for c in COF {
        y += 1.0;
        ser += c / y;
    }
    -tmp + ln(2.506_628_274_631_000_5 * ser / x)
}

/// Regularized lower incomplete gamma `P(a, x)` for `a > 0`, `x >= 0`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        // series representation
        let mut ap = a;
        let mut sum = 1.0 / a;
        let mut term = sum;
        for _ in 0..500 {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * 1e-16 {
                break;
            }
        }
        sum * exp(-x + a * ln(x) - ln_gamma(a))
    } else {
        // continued fraction for Q, modified Lentz
        const TINY: f64 = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        1.0 - h * exp(-x + a * ln(x) - ln_gamma(a))
    }
}

/// Inverse of `P(a, .)`: the `x` with `gamma_p(a, x) = p`.
///
/// Safeguarded Newton from a Wilson-Hilferty start.
pub fn gamma_p_inv(a: f64, p: f64) -> f64 {
    debug_assert!(a > 0.0 && (0.0..1.0).contains(&p));
    if p == 0.0 {
        return 0.0;
    }
    // initial guess
    let mut x = if a > 1.0 {
        let z = normal_quantile(p);
        let t = 1.0 - 1.0 / (9.0 * a) + z * sqrt(1.0 / (9.0 * a));
        (a * t * t * t).max(1e-300)
    } else {
        // small-shape start from P(a,x) ~ x^a / (a Gamma(a))
        let t = exp((ln(p) + ln_gamma(a + 1.0)) / a);
        t.max(1e-300)
    };
    // bracket
    let (mut lo, mut hi) = (0.0f64, x.max(1.0));
    while gamma_p(a, hi) < p {
        hi *= 2.0;
        if hi > 1e300 {
            return f64::INFINITY;
        }
    }
    if x >= hi {
        x = 0.5 * hi;
    }
    let lg = ln_gamma(a);
    for _ in 0..100 {
        let f = gamma_p(a, x) - p;
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let dpdx = exp((a - 1.0) * ln(x) - x - lg);
        let mut next = x - f / dpdx;
        if !(next > lo && next < hi) || dpdx == 0.0 {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-14 * x.abs() + 1e-300 {
            return next;
        }
        x = next;
    }
    x
}

/// Standard normal CDF.
#[inline]
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf(x * core::f64::consts::FRAC_1_SQRT_2))
}

/// Standard normal density.
#[inline]
pub fn normal_pdf(x: f64) -> f64 {
    const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
    INV_SQRT_2PI * exp(-0.5 * x * x)
}

/// Standard normal quantile by Newton iteration on `normal_cdf`.
pub fn normal_quantile(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    if p == 0.5 {
        return 0.0;
    }
    // crude logit start, then Newton (monotone, quadratic convergence)
    let mut x = ln(p / (1.0 - p)) / 1.702;
    for _ in 0..60 {
        let err = normal_cdf(x) - p;
        let step = err / normal_pdf(x);
        // cap steps so the far tails cannot catapult the iterate
        let step = step.clamp(-1.0, 1.0);
        x -= step;
        if step.abs() < 1e-15 * (1.0 + x.abs()) {
            break;
        }
    }
    x
}

/// Survival function of the Kolmogorov distribution,
/// `Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2)`.
///
/// The theta-dual series is used for small `lambda` where the primary
/// series converges slowly.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        let y = exp(-core::f64::consts::PI * core::f64::consts::PI / (8.0 * lambda * lambda));
        let p = sqrt(2.0 * core::f64::consts::PI) / lambda
            * (y + pow(y, 9.0) + pow(y, 25.0) + pow(y, 49.0));
        (1.0 - p).clamp(0.0, 1.0)
    } else {
        let mut sum = 0.0;
        let mut sign = 1.0;
        for k in 1..=100 {
            let kf = k as f64;
            let term = exp(-2.0 * kf * kf * lambda * lambda);
            sum += sign * term;
            sign = -sign;
            if term < 1e-18 {
                break;
            }
        }
        (2.0 * sum).clamp(0.0, 1.0)
    }
}

/// Upper-`alpha` critical value of the chi-square distribution with `df`
/// degrees of freedom, via the inverse regularized incomplete gamma.
pub fn chi2_quantile(p: f64, df: f64) -> f64 {
    2.0 * gamma_p_inv(0.5 * df, p)
}

/// `k!` as an exact product (exact in f64 through `k = 22`, and
/// correctly rounded far beyond any factorial this crate forms).
pub fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, v| acc * v as f64)
}

/// Falling factorial `a (a-1) ... (a-c+1)` with `c` terms, i.e.
/// `a! / (a-c)!` without forming either factorial.
pub fn falling_factorial(a: usize, c: usize) -> f64 {
    debug_assert!(c <= a);
    (0..c).fold(1.0, |acc, i| acc * (a - i) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_factorials() {
        // Gamma(n) = (n-1)!
        let mut fact = 1.0f64;
        for n in 1..15 {
            assert!(
                (ln_gamma(n as f64) - fact.ln()).abs() < 1e-11 * (1.0 + fact.ln().abs()),
                "n = {n}"
            );
            fact *= n as f64;
        }
        // Gamma(1/2) = sqrt(pi)
        assert!((ln_gamma(0.5) - core::f64::consts::PI.sqrt().ln()).abs() < 1e-12);
    }

    #[test]
    fn gamma_p_known_values() {
        // P(1, x) = 1 - e^-x
        for &x in &[0.1, 1.0, 3.0, 10.0] {
            assert!((gamma_p(1.0, x) - (1.0 - (-x as f64).exp())).abs() < 1e-13);
        }
        // chi-square(1) at 3.841458820694124 is 0.95
        assert!((gamma_p(0.5, 3.841_458_820_694_124 / 2.0) - 0.95).abs() < 1e-10);
    }

    #[test]
    fn gamma_p_inv_round_trip() {
        for &a in &[0.3, 0.5, 1.0, 2.7, 9.0, 40.0] {
            for &p in &[1e-6, 0.01, 0.3, 0.5, 0.9, 0.999] {
                let x = gamma_p_inv(a, p);
                assert!(
                    (gamma_p(a, x) - p).abs() < 1e-10,
                    "a = {a}, p = {p}, x = {x}"
                );
            }
        }
    }

    #[test]
    fn normal_quantile_round_trip_and_z975() {
        assert!((normal_quantile(0.975) - 1.959_963_984_540_054).abs() < 1e-9);
        assert!((normal_quantile(0.5)).abs() < 1e-15);
        for &p in &[1e-8, 1e-4, 0.2, 0.5, 0.8, 0.9999, 1.0 - 1e-8] {
            let x = normal_quantile(p);
            assert!((normal_cdf(x) - p).abs() < 1e-12, "p = {p}");
        }
    }

    #[test]
    fn chi2_one_df_matches_squared_normal_quantile() {
        // independent route: if Z ~ N(0,1) then Z^2 ~ chi2_1
        for &alpha in &[0.01, 0.05, 0.1, 0.5] {
            let z = normal_quantile(1.0 - alpha / 2.0);
            let c = chi2_quantile(1.0 - alpha, 1.0);
            assert!((c - z * z).abs() < 1e-8, "alpha = {alpha}");
        }
    }

    #[test]
    fn kolmogorov_sf_endpoints_and_continuity() {
        assert_eq!(kolmogorov_sf(0.0), 1.0);
        assert!(kolmogorov_sf(0.2) > 0.999);
        assert!(kolmogorov_sf(3.0) < 1e-7);
        // continuity across the series switch at 1.18
        let below = kolmogorov_sf(1.18 - 1e-9);
        let above = kolmogorov_sf(1.18 + 1e-9);
        assert!((below - above).abs() < 1e-8);
    }
}
