//! Thin float shims so the crate builds without `std`, plus a few
//! log-space helpers shared across modules.

#[cfg(feature = "std")]
mod imp {
    #[inline(always)]
    pub fn pow(x: f64, y: f64) -> f64 {
        x.powf(y)
    }
    #[inline(always)]
    pub fn exp(x: f64) -> f64 {
        x.exp()
    }
    #[inline(always)]
    pub fn ln(x: f64) -> f64 {
        x.ln()
    }
    #[inline(always)]
    pub fn ln_1p(x: f64) -> f64 {
        x.ln_1p()
    }
    #[inline(always)]
    pub fn exp_m1(x: f64) -> f64 {
        x.exp_m1()
    }
    #[inline(always)]
    pub fn sqrt(x: f64) -> f64 {
        x.sqrt()
    }
    #[inline(always)]
    pub fn cos(x: f64) -> f64 {
        x.cos()
    }
    #[inline(always)]
    pub fn erf(x: f64) -> f64 {
        libm::erf(x)
    }
}

#[cfg(not(feature = "std"))]
mod imp {
    #[inline(always)]
    pub fn pow(x: f64, y: f64) -> f64 {
        libm::pow(x, y)
    }
    #[inline(always)]
    pub fn exp(x: f64) -> f64 {
        libm::exp(x)
    }
    #[inline(always)]
    pub fn ln(x: f64) -> f64 {
        libm::log(x)
    }
    #[inline(always)]
    pub fn ln_1p(x: f64) -> f64 {
        libm::log1p(x)
    }
    #[inline(always)]
    pub fn exp_m1(x: f64) -> f64 {
        libm::expm1(x)
    }
    #[inline(always)]
    pub fn sqrt(x: f64) -> f64 {
        libm::sqrt(x)
    }
    #[inline(always)]
    pub fn cos(x: f64) -> f64 {
        libm::cos(x)
    }
    #[inline(always)]
    pub fn erf(x: f64) -> f64 {
        libm::erf(x)
    }
}

pub use imp::{cos, erf, exp, exp_m1, ln, ln_1p, pow, sqrt};

/// `ln(1 + x^b)` for `x >= 0`, `b > 0`, computed without forming `x^b`.
///
/// `x^b` overflows for e.g. `x = 10`, `b = 400`; working on `t = b ln x`
/// keeps every intermediate bounded.
#[inline]
pub fn ln1p_pow(x: f64, b: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let t = b * ln(x);
    if t > 36.0 {
        // ln(1 + e^t) = t + ln(1 + e^-t)
        t + ln_1p(exp(-t))
    } else {
        ln_1p(exp(t))
    }
}

/// `ln(sum(exp(v)))` guarded against overflow. Returns `-inf` for an
/// empty slice or all `-inf` entries.
pub fn log_sum_exp(v: &[f64]) -> f64 {
    let mut hi = f64::NEG_INFINITY;
    for &x in v {
        if x > hi {
            hi = x;
        }
    }
    if !hi.is_finite() {
        return hi;
    }
    let mut acc = 0.0;
    for &x in v {
        acc += exp(x - hi);
    }
    hi + ln(acc)
}

/// Neumaier compensated accumulator for alternating sums.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}
