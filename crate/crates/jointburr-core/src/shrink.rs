//! Linear-shrinkage (LS) and shrinkage-pretest (SP) estimators wrapping
//! any base estimate of the four shape parameters.
//!
//! LS pulls the base estimate toward a predetermined guess,
//! `w theta0 + (1 - w) theta_hat`. SP applies that pull only where a
//! chi-square(1) pretest of `theta_i = theta0_i` fails to reject.

use crate::data::ThetaVector;
use crate::error::{Error, Result};
use crate::numeric::special::chi2_quantile;

/// Shrinkage configuration: intensity, guess, and pretest size.
#[derive(Debug, Clone, Copy)]
pub struct ShrinkConfig {
    /// Shrinkage intensity in `[0, 1]`.
    pub w: f64,
    /// Predetermined guess for each parameter.
    pub theta0: ThetaVector,
    /// Pretest size (type-I error).
    pub alpha: f64,
    /// Upper-`alpha` chi-square(1) critical value, derived from `alpha`.
    pub chi2_crit: f64,
}

impl ShrinkConfig {
    pub fn new(w: f64, theta0: ThetaVector, alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::Domain("shrinkage intensity w must be in [0,1]"));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain("pretest size must be in (0,1)"));
        }
        Ok(Self {
            w,
            theta0,
            alpha,
            chi2_crit: chi2_quantile(1.0 - alpha, 1.0),
        })
    }
}

/// Coordinate-wise convex combination `w theta0 + (1 - w) theta_hat`.
pub fn linear_shrink(theta_hat: &ThetaVector, cfg: &ShrinkConfig) -> ThetaVector {
    let th = theta_hat.as_array();
    let t0 = cfg.theta0.as_array();
    let mut out = [0.0; 4];
    for i in 0..4 {
        out[i] = cfg.w * t0[i] + (1.0 - cfg.w) * th[i];
    }
    // convex combination of positive vectors stays positive
    ThetaVector::from_array(out).expect("positive by construction")
}

/// Pretest statistic `r (theta_hat_i - theta0_i)^2 / var_i` for the
/// null `theta_i = theta0_i`.
pub fn pretest_statistic(theta_hat_i: f64, theta0_i: f64, var_i: f64, r: usize) -> Result<f64> {
    if !(var_i > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let d = theta_hat_i - theta0_i;
    Ok(r as f64 * d * d / var_i)
}

/// Shrinkage-pretest estimator: per coordinate,
/// `theta_hat_i - w (theta_hat_i - theta0_i) 1[l_i < chi2_crit]`.
///
/// Equivalently, the LS value where the pretest accepts and the base
/// estimate where it rejects. The accept branch evaluates the same
/// expression as [`linear_shrink`], so each output coordinate is
/// bit-identical to one of the two.
pub fn shrink_pretest(
    theta_hat: &ThetaVector,
    vars: &[f64; 4],
    r: usize,
    cfg: &ShrinkConfig,
) -> Result<ThetaVector> {
    let th = theta_hat.as_array();
    let t0 = cfg.theta0.as_array();
    let mut out = [0.0; 4];
    for i in 0..4 {
        let l = pretest_statistic(th[i], t0[i], vars[i], r)?;
        out[i] = if l < cfg.chi2_crit {
            cfg.w * t0[i] + (1.0 - cfg.w) * th[i]
        } else {
            th[i]
        };
    }
    ThetaVector::from_array(out)
}
