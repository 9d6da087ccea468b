//! Maximum-likelihood fitting of the joint censored model and Wald-type
//! approximate confidence intervals.
//!
//! The likelihood is maximized directly by BFGS ascent in log-parameter
//! space (`theta = exp(phi)` keeps every shape positive), with the
//! analytic score from [`crate::data::log_likelihood_grad`]. The X and Y
//! parameter pairs separate in the likelihood, so a pair with no
//! observed failures is left at its initial value and flagged as
//! unidentified.

use alloc::vec::Vec;

use crate::data::{log_likelihood, log_likelihood_grad, JointSample, ThetaVector};
use crate::error::{Error, Result};
use crate::model::BurrParams;
use crate::numeric::linalg::invert;
use crate::numeric::math::{exp, ln, ln1p_pow};
use crate::numeric::optim::{maximize, MaximizeResult};
use crate::numeric::special::normal_quantile;

/// Default gradient tolerance in log-parameter space.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Default iteration budget.
pub const DEFAULT_MAX_ITER: usize = 500;

/// A fitted joint model.
#[derive(Debug, Clone)]
pub struct MleFit {
    /// Maximizer of the joint log-likelihood.
    pub theta_hat: ThetaVector,
    /// Log-likelihood at the optimum (combinatorial constant omitted).
    pub loglik: f64,
    /// Observed information (negative Hessian), row-major 4x4.
    pub info: [[f64; 4]; 4],
    pub converged: bool,
    pub iterations: usize,
    /// False when the sample contains no X (resp. Y) failures; the
    /// corresponding pair is left at its starting value.
    pub x_identified: bool,
    pub y_identified: bool,
}

/// Profile MLE of `alpha` given `beta` for one population's censored
/// contribution; used for the default starting point at `beta = 1`.
fn profile_alpha(sample: &JointSample, x_side: bool, beta: f64) -> f64 {
    let mut count = 0.0;
    let mut denom = 0.0;
    for (&wi, &si) in sample.w().iter().zip(sample.s()) {
        if si == x_side {
            count += 1.0;
            denom += ln1p_pow(wi, beta);
        }
    }
    let cens = if x_side {
        (sample.m() - sample.m_r()) as f64
    } else {
        (sample.n() - sample.n_r()) as f64
    };
    denom += cens * ln1p_pow(sample.w_last(), beta);
    if denom > 0.0 && count > 0.0 {
        count / denom
    } else {
        1.0
    }
}

fn default_init(sample: &JointSample) -> ThetaVector {
    ThetaVector {
        theta1: profile_alpha(sample, true, 1.0),
        theta2: 1.0,
        theta3: profile_alpha(sample, false, 1.0),
        theta4: 1.0,
    }
}

/// Fit the four shape parameters to a joint censored sample.
///
/// `init` overrides the profile-based default start; `tol` is the
/// gradient infinity-norm threshold in log-parameter space.
pub fn fit_mle(
    sample: &JointSample,
    init: Option<ThetaVector>,
    tol: f64,
    max_iter: usize,
) -> Result<MleFit> {
    let x_identified = sample.m_r() > 0;
    let y_identified = sample.n_r() > 0;
    let start = init.unwrap_or_else(|| default_init(sample));
    let start = start.as_array();

    // active coordinate mask: frozen pairs keep their start value
    let active: [bool; 4] = [x_identified, x_identified, y_identified, y_identified];
    let free: Vec<usize> = (0..4).filter(|&i| active[i]).collect();

    let assemble = |phi_free: &[f64]| -> [f64; 4] {
        let mut th = start;
        for (k, &i) in free.iter().enumerate() {
            th[i] = exp(phi_free[k]);
        }
        th
    };

    let objective = |phi_free: &[f64]| -> (f64, Vec<f64>) {
        let arr = assemble(phi_free);
        let Ok(th) = ThetaVector::from_array(arr) else {
            return (f64::NEG_INFINITY, alloc::vec![0.0; phi_free.len()]);
        };
        let val = log_likelihood(&th, sample);
        let g = log_likelihood_grad(&th, sample);
        // chain rule: d/d phi = theta d/d theta
        let gf: Vec<f64> = free.iter().map(|&i| g[i] * arr[i]).collect();
        (val, gf)
    };

    let phi0: Vec<f64> = free.iter().map(|&i| ln(start[i])).collect();
    let MaximizeResult {
        x: phi_opt,
        fval,
        iterations,
        converged,
        ..
    } = maximize(objective, &phi0, tol, max_iter);

    let theta_hat = ThetaVector::from_array(assemble(&phi_opt))?;
    let info = observed_information(&theta_hat, sample)?;
    Ok(MleFit {
        theta_hat,
        loglik: fval,
        info,
        converged,
        iterations,
        x_identified,
        y_identified,
    })
}

/// Observed information: negative Hessian of the joint log-likelihood
/// by central finite differences with relative step `1e-5` (absolute
/// floor `1e-8`), symmetrized.
pub fn observed_information(theta: &ThetaVector, sample: &JointSample) -> Result<[[f64; 4]; 4]> {
    let th = theta.as_array();
    if th.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidParameter("theta components must be > 0"));
    }
    let step = |i: usize| (1e-5 * th[i].abs()).max(1e-8);
    let ll = |arr: [f64; 4]| -> f64 {
        match ThetaVector::from_array(arr) {
            Ok(t) => log_likelihood(&t, sample),
            Err(_) => f64::NAN,
        }
    };
    let f0 = ll(th);
    let mut h = [[0.0f64; 4]; 4];
    for i in 0..4 {
        let hi = step(i);
        for j in i..4 {
            let v = if i == j {
                let mut up = th;
                up[i] += hi;
                let mut dn = th;
                dn[i] -= hi;
                (ll(up) - 2.0 * f0 + ll(dn)) / (hi * hi)
            } else {
                let hj = step(j);
                let mut pp = th;
                pp[i] += hi;
                pp[j] += hj;
                let mut pm = th;
                pm[i] += hi;
                pm[j] -= hj;
                let mut mp = th;
                mp[i] -= hi;
                mp[j] += hj;
                let mut mm = th;
                mm[i] -= hi;
                mm[j] -= hj;
                (ll(pp) - ll(pm) - ll(mp) + ll(mm)) / (4.0 * hi * hj)
            };
            h[i][j] = -v;
            h[j][i] = -v;
        }
    }
    Ok(h)
}

/// Per-parameter `(lower, upper)` Wald intervals at the given level,
/// with the lower limit truncated at zero.
pub fn aci(fit: &MleFit, level: f64) -> Result<[(f64, f64); 4]> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain("level must be in (0,1)"));
    }
    let vars = information_variances(&fit.info)?;
    let z = normal_quantile(0.5 + level / 2.0);
    let th = fit.theta_hat.as_array();
    let mut out = [(0.0, 0.0); 4];
    for i in 0..4 {
        let half = z * crate::numeric::math::sqrt(vars[i]);
        out[i] = ((th[i] - half).max(0.0), th[i] + half);
    }
    Ok(out)
}

/// Diagonal of the inverse observed information (asymptotic variances).
pub fn information_variances(info: &[[f64; 4]; 4]) -> Result<[f64; 4]> {
    if (0..4).any(|i| info[i][i] <= 0.0) {
        return Err(Error::SingularInformation);
    }
    let flat: Vec<f64> = info.iter().flatten().copied().collect();
    let inv = invert(&flat, 4).ok_or(Error::SingularInformation)?;
    let mut vars = [0.0; 4];
    for i in 0..4 {
        vars[i] = inv[i * 4 + i];
        if !(vars[i] > 0.0) {
            return Err(Error::SingularInformation);
        }
    }
    Ok(vars)
}

/// Fitted parameters of a single, fully observed Burr-XII sample.
#[derive(Debug, Clone)]
pub struct BurrFit {
    pub params: BurrParams,
    pub loglik: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// MLE for one uncensored Burr-XII sample (the marginal fit used by the
/// goodness-of-fit workflow).
pub fn fit_burr(data: &[f64], tol: f64, max_iter: usize) -> Result<BurrFit> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    if !data.iter().all(|&x| x > 0.0 && x.is_finite()) {
        return Err(Error::Domain("observations must be positive and finite"));
    }
    let n = data.len() as f64;
    let alpha0 = {
        let denom: f64 = data.iter().map(|&x| ln1p_pow(x, 1.0)).sum();
        if denom > 0.0 {
            n / denom
        } else {
            1.0
        }
    };
    let objective = |phi: &[f64]| -> (f64, Vec<f64>) {
        let (alpha, beta) = (exp(phi[0]), exp(phi[1]));
        if !alpha.is_finite() || !beta.is_finite() {
            return (f64::NEG_INFINITY, alloc::vec![0.0, 0.0]);
        }
        let mut ll = n * (ln(alpha) + ln(beta));
        let mut g_alpha = n / alpha;
        let mut g_beta = n / beta;
        for &x in data {
            let lx = ln(x);
            let t = ln1p_pow(x, beta);
            ll += (beta - 1.0) * lx - (alpha + 1.0) * t;
            g_alpha -= t;
            g_beta += lx - (alpha + 1.0) * lx * (1.0 - exp(-t));
        }
        (ll, alloc::vec![g_alpha * alpha, g_beta * beta])
    };
    let r = maximize(objective, &[ln(alpha0), 0.0], tol, max_iter);
    Ok(BurrFit {
        params: BurrParams::new(exp(r.x[0]), exp(r.x[1]))?,
        loglik: r.fval,
        converged: r.converged,
        iterations: r.iterations,
    })
}
