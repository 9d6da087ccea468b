//! Importance-sampling Bayesian inference for the joint censored model.
//!
//! Under independent gamma priors the posterior factorizes into gamma
//! proposals for the inner shapes and conditional gamma proposals for
//! the outer shapes, times a correction weight; draws from the
//! proposals with those weights give every posterior expectation. The
//! quasi-density prior `pi(theta) ~ theta^-gamma` is the zero-rate,
//! shape-offset `1 - gamma` special case (Jeffreys at `gamma = 1`).
//!
//! Weights are kept in log space throughout; point estimators under the
//! squared-error, LINEX, and generalized-entropy losses all reduce to
//! weighted log-sum-exp forms.

use alloc::vec::Vec;

use rand_core::RngCore;

use crate::data::{JointSample, ThetaVector};
use crate::error::{Error, Result};
use crate::numeric::math::{exp, ln, ln1p_pow, log_sum_exp};
use crate::numeric::rng::gamma_draw;

/// Gamma prior hyperparameters: `(a1, b1)` for `theta1`, `(c1, d1)` for
/// `theta2`, `(a2, b2)` for `theta3`, `(c2, d2)` for `theta4`.
///
/// Shapes may carry the quasi-prior offset `1 - gamma` (negative for
/// `gamma > 1`); propriety of the resulting proposals is checked where
/// draws are made.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaPriors {
    pub a1: f64,
    pub b1: f64,
    pub c1: f64,
    pub d1: f64,
    pub a2: f64,
    pub b2: f64,
    pub c2: f64,
    pub d2: f64,
}

impl GammaPriors {
    /// Informative prior: all eight hyperparameters strictly positive.
    #[allow(clippy::too_many_arguments)]
    pub fn informative(
        a1: f64,
        b1: f64,
        c1: f64,
        d1: f64,
        a2: f64,
        b2: f64,
        c2: f64,
        d2: f64,
    ) -> Result<Self> {
        let all = [a1, b1, c1, d1, a2, b2, c2, d2];
        if !all.iter().all(|&v| v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter(
                "informative priors need all hyperparameters > 0",
            ));
        }
        Ok(Self {
            a1,
            b1,
            c1,
            d1,
            a2,
            b2,
            c2,
            d2,
        })
    }

    /// Non-informative quasi-density prior `pi(theta) ~ theta^-gamma`:
    /// zero rates and shape offset `1 - gamma` on every component.
    pub fn quasi(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidParameter("quasi prior needs gamma > 0"));
        }
        let shape = 1.0 - gamma;
        Ok(Self {
            a1: shape,
            b1: 0.0,
            c1: shape,
            d1: 0.0,
            a2: shape,
            b2: 0.0,
            c2: shape,
            d2: 0.0,
        })
    }

    /// Jeffreys prior (`gamma = 1`).
    pub fn jeffreys() -> Self {
        Self::quasi(1.0).expect("gamma = 1 is valid")
    }
}

/// Loss function for Bayesian point estimation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossSpec {
    /// Symmetric squared error; the estimator is the posterior mean.
    SquaredError,
    /// `e^(v d) - v d - 1` with `d` the estimation error; `v != 0`.
    Linex { v: f64 },
    /// `(est/true)^k - k ln(est/true) - 1`; `k != 0`.
    GenEntropy { k: f64 },
}

impl LossSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            LossSpec::SquaredError => Ok(()),
            LossSpec::Linex { v } if v != 0.0 && v.is_finite() => Ok(()),
            LossSpec::GenEntropy { k } if k != 0.0 && k.is_finite() => Ok(()),
            _ => Err(Error::InvalidParameter("loss shape must be nonzero")),
        }
    }
}

/// Posterior parameter draws with log importance weights.
#[derive(Debug, Clone)]
pub struct WeightedDraws {
    draws: Vec<[f64; 4]>,
    /// Log weights, shifted so the maximum is zero.
    log_weights: Vec<f64>,
    /// Normalized weights (sum to one).
    weights: Vec<f64>,
    ess: f64,
}

impl WeightedDraws {
    /// Assemble from raw draws and (unnormalized) log weights.
    pub fn new(draws: Vec<[f64; 4]>, mut log_weights: Vec<f64>) -> Result<Self> {
        if draws.is_empty() || draws.len() != log_weights.len() {
            return Err(Error::InvalidSample("draws/log_weights length mismatch"));
        }
        let hi = log_weights
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        if !hi.is_finite() {
            return Err(Error::DegenerateWeights { ess: 0.0 });
        }
        for lw in &mut log_weights {
            *lw -= hi;
        }
        let lse = log_sum_exp(&log_weights);
        let weights: Vec<f64> = log_weights.iter().map(|&lw| exp(lw - lse)).collect();
        let sum_sq: f64 = weights.iter().map(|w| w * w).sum();
        let ess = 1.0 / sum_sq;
        Ok(Self {
            draws,
            log_weights,
            weights,
            ess,
        })
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn draws(&self) -> &[[f64; 4]] {
        &self.draws
    }

    /// Max-shifted log weights.
    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    /// Normalized weights summing to one.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Effective sample size `1 / sum(w~^2)`, in `[1, D]`.
    pub fn ess(&self) -> f64 {
        self.ess
    }

    /// True when the weights have collapsed below 1% efficiency.
    pub fn is_degenerate(&self) -> bool {
        self.ess < 0.01 * self.len() as f64
    }

    /// Values of one coordinate across draws.
    pub fn coord(&self, i: usize) -> impl Iterator<Item = f64> + '_ {
        self.draws.iter().map(move |d| d[i])
    }
}

/// The conjugate-update rates: `L1 = d1 - sum_x ln w_i`,
/// `R1 = b1 + (m - m_r) ln(1 + w_r^t2) + sum_x ln(1 + w_i^t2)`, and the
/// Y-side mirrors `L2`, `R2`.
///
/// `L1`/`L2` do not depend on `theta2`/`theta4`; they are returned
/// together for convenience. Values may be non-positive; consumers must
/// check before using them as gamma rates.
pub fn derived_rates(
    sample: &JointSample,
    priors: &GammaPriors,
    theta2: f64,
    theta4: f64,
) -> (f64, f64, f64, f64) {
    let wr = sample.w_last();
    let mut l1 = priors.d1;
    let mut l2 = priors.d2;
    let mut r1 = priors.b1 + (sample.m() - sample.m_r()) as f64 * ln1p_pow(wr, theta2);
    let mut r2 = priors.b2 + (sample.n() - sample.n_r()) as f64 * ln1p_pow(wr, theta4);
    for (&wi, &si) in sample.w().iter().zip(sample.s()) {
        if si {
            l1 -= ln(wi);
            r1 += ln1p_pow(wi, theta2);
        } else {
            l2 -= ln(wi);
            r2 += ln1p_pow(wi, theta4);
        }
    }
    (l1, r1, l2, r2)
}

/// Draw `d` posterior samples by importance sampling.
///
/// Fails with [`Error::ImproperProposal`] when `L1 <= 0` or `L2 <= 0`
/// (possible once `sum s_i ln w_i > d1`), and with an invalid-parameter
/// error when any proposal shape `m_r + c1`, `m_r + a1`, `n_r + c2`,
/// `n_r + a2` is non-positive.
pub fn importance_sample<R: RngCore + ?Sized>(
    sample: &JointSample,
    priors: &GammaPriors,
    d: usize,
    rng: &mut R,
) -> Result<WeightedDraws> {
    if d == 0 {
        return Err(Error::Domain("need at least one draw"));
    }
    let m_r = sample.m_r() as f64;
    let n_r = sample.n_r() as f64;
    let (l1, _, l2, _) = derived_rates(sample, priors, 1.0, 1.0);
    if l1 <= 0.0 || l2 <= 0.0 {
        return Err(Error::ImproperProposal { l1, l2 });
    }
    let shape_t2 = m_r + priors.c1;
    let shape_t1 = m_r + priors.a1;
    let shape_t4 = n_r + priors.c2;
    let shape_t3 = n_r + priors.a2;
    if [shape_t2, shape_t1, shape_t4, shape_t3]
        .iter()
        .any(|&s| !(s > 0.0))
    {
        return Err(Error::InvalidParameter(
            "proposal shapes must be positive; too few failures for this prior",
        ));
    }

    let mut draws = Vec::with_capacity(d);
    let mut log_weights = Vec::with_capacity(d);
    for _ in 0..d {
        let t2 = gamma_draw(rng, shape_t2, l1);
        let (_, r1, _, _) = derived_rates(sample, priors, t2, 1.0);
        let t1 = gamma_draw(rng, shape_t1, r1);
        let t4 = gamma_draw(rng, shape_t4, l2);
        let (_, _, _, r2) = derived_rates(sample, priors, 1.0, t4);
        let t3 = gamma_draw(rng, shape_t3, r2);

        let mut lw = -shape_t1 * ln(r1) - shape_t3 * ln(r2);
        for (&wi, &si) in sample.w().iter().zip(sample.s()) {
            lw -= if si {
                ln1p_pow(wi, t2)
            } else {
                ln1p_pow(wi, t4)
            };
        }
        draws.push([t1, t2, t3, t4]);
        log_weights.push(lw);
    }
    WeightedDraws::new(draws, log_weights)
}

/// Bayesian point estimate of the four parameters under `loss`.
///
/// Squared error gives the weighted posterior mean; LINEX gives
/// `-(1/v) ln E[e^(-v theta)]`; generalized entropy gives
/// `E[theta^-k]^(-1/k)`. All expectations run over the weighted draws in
/// log-sum-exp form.
pub fn estimate(draws: &WeightedDraws, loss: LossSpec) -> Result<ThetaVector> {
    loss.validate()?;
    if draws.ess() < 2.0 {
        return Err(Error::DegenerateWeights { ess: draws.ess() });
    }
    let mut out = [0.0; 4];
    let lse_w = log_sum_exp(draws.log_weights());
    for i in 0..4 {
        out[i] = match loss {
            LossSpec::SquaredError => draws
                .weights()
                .iter()
                .zip(draws.coord(i))
                .map(|(w, t)| w * t)
                .sum(),
            LossSpec::Linex { v } => {
                // -(1/v) ln sum w~_j e^{-v t_j}
                let terms: Vec<f64> = draws
                    .log_weights()
                    .iter()
                    .zip(draws.coord(i))
                    .map(|(lw, t)| lw - v * t)
                    .collect();
                -(log_sum_exp(&terms) - lse_w) / v
            }
            LossSpec::GenEntropy { k } => {
                let terms: Vec<f64> = draws
                    .log_weights()
                    .iter()
                    .zip(draws.coord(i))
                    .map(|(lw, t)| lw - k * ln(t))
                    .collect();
                exp(-(log_sum_exp(&terms) - lse_w) / k)
            }
        };
    }
    ThetaVector::from_array(out)
}

/// Weighted posterior variance of each coordinate.
pub fn posterior_variances(draws: &WeightedDraws) -> [f64; 4] {
    let mut out = [0.0; 4];
    for i in 0..4 {
        let mean: f64 = draws
            .weights()
            .iter()
            .zip(draws.coord(i))
            .map(|(w, t)| w * t)
            .sum();
        out[i] = draws
            .weights()
            .iter()
            .zip(draws.coord(i))
            .map(|(w, t)| w * (t - mean) * (t - mean))
            .sum();
    }
    out
}

/// Weighted `p`-quantile of one coordinate: the smallest draw whose
/// cumulative normalized weight reaches `p`.
fn weighted_quantile(sorted: &[(f64, f64)], p: f64) -> f64 {
    let mut cum = 0.0;
    for &(x, w) in sorted {
        cum += w;
        if cum >= p {
            return x;
        }
    }
    sorted.last().expect("non-empty").0
}

fn sorted_coord(draws: &WeightedDraws, coord: usize) -> Vec<(f64, f64)> {
    let mut v: Vec<(f64, f64)> = draws
        .coord(coord)
        .zip(draws.weights().iter().copied())
        .collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    v
}

/// Equal-tail credible interval for one coordinate from the weighted
/// draws.
pub fn credible_interval(draws: &WeightedDraws, coord: usize, level: f64) -> Result<(f64, f64)> {
    check_interval_inputs(draws, coord, level)?;
    let sorted = sorted_coord(draws, coord);
    let alpha = 1.0 - level;
    Ok((
        weighted_quantile(&sorted, alpha / 2.0),
        weighted_quantile(&sorted, 1.0 - alpha / 2.0),
    ))
}

/// Highest-posterior-density interval: the shortest window of sorted
/// draws holding at least `level` of the normalized weight.
pub fn hpd_interval(draws: &WeightedDraws, coord: usize, level: f64) -> Result<(f64, f64)> {
    check_interval_inputs(draws, coord, level)?;
    let sorted = sorted_coord(draws, coord);
    let n = sorted.len();
    let mut best = (sorted[0].0, sorted[n - 1].0);
    let mut best_width = best.1 - best.0;
    let mut j = 0usize;
    let mut mass = 0.0;
    for i in 0..n {
        if j < i {
            j = i;
            mass = sorted[i].1;
        }
        while mass < level && j + 1 < n {
            j += 1;
            mass += sorted[j].1;
        }
        if mass < level {
            break;
        }
        let width = sorted[j].0 - sorted[i].0;
        if width < best_width {
            best_width = width;
            best = (sorted[i].0, sorted[j].0);
        }
        mass -= sorted[i].1;
    }
    Ok(best)
}

fn check_interval_inputs(draws: &WeightedDraws, coord: usize, level: f64) -> Result<()> {
    if coord >= 4 {
        return Err(Error::Domain("coordinate index out of range"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain("level must be in (0,1)"));
    }
    if draws.ess() < 10.0 {
        return Err(Error::DegenerateWeights { ess: draws.ess() });
    }
    Ok(())
}
