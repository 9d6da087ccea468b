//! Point and interval prediction of the future failure `W_t = W_{r+j}`
//! given a joint type-II censored sample.
//!
//! Three regimes apply after the `r`-th failure: only X units remain,
//! only Y units remain, or both populations still have survivors. In
//! the one-sided regimes the conditional law of `W_t` is the `j`-th
//! order statistic of the survivors truncated at `w_r`, with a closed
//! binomial-expansion survival function and a Beta-integral form for
//! conditional expectations. In the two-sided regime the density is a
//! sum over the feasible label paths of the intermediate failures,
//! integrated numerically over `(w_r, inf)` after the change of
//! variable `u = 1/(1 + w)`.
//!
//! Bayesian predictors average the same per-parameter integrals over
//! importance-weighted posterior draws. [`ClassicalPredictive`] and
//! [`BayesPredictive`] cache the refined quadrature panels so repeated
//! survival evaluations (root finding for interval endpoints, HPD width
//! minimization) stay cheap; the free functions wrap them.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::data::{classify_case, CensorCase, JointSample, ThetaVector};
use crate::error::{Error, Result};
use crate::fit_bayes::{LossSpec, WeightedDraws};
use crate::model::BurrParams;
use crate::numeric::math::{exp, exp_m1, ln, ln1p_pow, ln_1p, CompensatedSum};
use crate::numeric::quad::{AdaptiveQuad, GaussLegendre, Panel};
use crate::numeric::special::{factorial, falling_factorial};

/// Which future order statistic to predict: `W_t` with `t = r + j`.
#[derive(Debug, Clone, Copy)]
pub struct PredictionTarget {
    /// Steps ahead (`j >= 1`).
    pub j: usize,
    /// Cap on the label-path exponent `t - r - 1` for the two-sided
    /// regime (`2^cap` paths at most).
    pub path_cap: usize,
}

impl PredictionTarget {
    pub fn new(j: usize) -> Self {
        Self { j, path_cap: 12 }
    }

    pub fn with_path_cap(mut self, cap: usize) -> Self {
        self.path_cap = cap;
        self
    }
}

/// How an interval was constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntervalKind {
    ClassicalEqualTail,
    CredibleEqualTail,
    Hpd,
}

/// A prediction interval for `W_t`.
#[derive(Debug, Clone, Copy)]
pub struct PredictiveInterval {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub kind: IntervalKind,
    /// Set when an HPD request fell back to equal tails because the
    /// predictive density was not unimodal beyond `w_r`.
    pub fallback_equal_tail: bool,
}

/// Residual target for interval endpoints: survival at the returned
/// endpoint is within this of its defining value.
const ROOT_FTOL: f64 = 1e-9;
/// Absolute tolerance for the adaptive predictive quadratures.
const QUAD_TOL: f64 = 1e-9;
/// Expectation integrals stop at the quantile holding all but this
/// much predictive mass (the LINEX integrand with `v < 0` has no finite
/// integral against a polynomial tail; truncation matches how the
/// reference values were produced and is far below test tolerances for
/// the other losses).
const TAIL_MASS: f64 = 1e-12;

// ---------------------------------------------------------------------
// one-sided regime (cases 1 and 2)
// ---------------------------------------------------------------------

/// Order-statistic predictive law when a single population remains:
/// `d` more failures out of `a` survivors beyond `w_r`.
#[derive(Debug, Clone, Copy)]
struct OneSided {
    alpha: f64,
    beta: f64,
    a: usize,
    d: usize,
    w_r: f64,
    /// `ln(1 + w_r^beta)`
    sp_r: f64,
}

impl OneSided {
    fn new(pop: BurrParams, a: usize, d: usize, w_r: f64) -> Self {
        Self {
            alpha: pop.alpha,
            beta: pop.beta,
            a,
            d,
            w_r,
            sp_r: ln1p_pow(w_r, pop.beta),
        }
    }

    /// Conditional density of `W_t` at `w > w_r`.
    fn ln_density(&self, w: f64) -> f64 {
        let sp = ln1p_pow(w, self.beta);
        let ln_sf = -self.alpha * sp;
        let ln_sf_r = -self.alpha * self.sp_r;
        let ln_pdf =
            ln(self.alpha) + ln(self.beta) + (self.beta - 1.0) * ln(w) - (self.alpha + 1.0) * sp;
        let ln_coef = ln(falling_factorial(self.a, self.d)) - ln(factorial(self.d - 1));
        let diff = if self.d > 1 {
            (self.d - 1) as f64 * (ln_sf_r + ln(-exp_m1(ln_sf - ln_sf_r)))
        } else {
            0.0
        };
        ln_coef + diff + (self.a - self.d) as f64 * ln_sf + ln_pdf - self.a as f64 * ln_sf_r
    }

    fn density(&self, w: f64) -> f64 {
        if w <= self.w_r {
            return 0.0;
        }
        exp(self.ln_density(w))
    }

    /// `P(W_t > xi)` by the binomial-expansion sum in compensated
    /// arithmetic; `None` when the expansion is abandoned
    /// (`d - 1 > 30`) and the caller must integrate the density.
    fn survival_sum(&self, xi: f64) -> Option<f64> {
        if xi <= self.w_r {
            return Some(1.0);
        }
        if self.d - 1 > 30 {
            return None;
        }
        // q = S(xi)/S(w_r) in (0, 1]
        let ln_q = -self.alpha * (ln1p_pow(xi, self.beta) - self.sp_r);
        let big_a = self.a - self.d + 1;
        let lead = falling_factorial(self.a, self.d);
        let mut sum = CompensatedSum::new();
        let mut sign = 1.0;
        for jj in 0..self.d {
            let denom = factorial(jj) * factorial(self.d - 1 - jj) * (big_a + jj) as f64;
            sum.add(sign * exp((big_a + jj) as f64 * ln_q) / denom);
            sign = -sign;
        }
        Some((lead * sum.value()).clamp(0.0, 1.0))
    }

    /// The Beta-integral conditional expectations
    /// `(1/B(a-d+1, d)) int_0^1 h(w(u)) u^(a-d) (1-u)^(d-1) du`
    /// for each loss transform `h`, shared over one pass of `gl`.
    fn beta_integrals(&self, losses: &[PredLoss], gl: &GaussLegendre) -> Vec<f64> {
        let big_a = (self.a - self.d) as f64; // exponent on u
        let dm1 = (self.d - 1) as f64;
        // 1/B(a-d+1, d) = falling(a, d) / (d-1)!
        let inv_beta = falling_factorial(self.a, self.d) / factorial(self.d - 1);
        let vals = gl.integrate_vec(0.0, 1.0, losses.len(), |u, out| {
            // w(u) = (u^{-1/alpha} (1 + w_r^beta) - 1)^{1/beta}
            let z = -ln(u) / self.alpha + self.sp_r;
            let ln_em1 = if z > 0.7 {
                z + ln_1p(-exp(-z))
            } else {
                ln(exp_m1(z))
            };
            let ln_w = ln_em1 / self.beta;
            let w = exp(ln_w);
            let base = exp(big_a * ln(u)) * exp(dm1 * ln_1p(-u));
            for (o, loss) in out.iter_mut().zip(losses) {
                *o = base * loss.h(w, ln_w);
            }
        });
        vals.into_iter().map(|v| v * inv_beta).collect()
    }
}

/// Loss transform applied to the future value inside the expectation
/// integrals.
#[derive(Debug, Clone, Copy)]
enum PredLoss {
    Mean,
    Linex { v: f64 },
    GenEntropy { k: f64 },
}

impl PredLoss {
    #[inline]
    fn h(&self, w: f64, ln_w: f64) -> f64 {
        match *self {
            PredLoss::Mean => w,
            PredLoss::Linex { v } => exp(-v * w),
            PredLoss::GenEntropy { k } => exp(-k * ln_w),
        }
    }

    fn from_spec(spec: LossSpec) -> Result<Self> {
        spec.validate()?;
        Ok(match spec {
            LossSpec::SquaredError => PredLoss::Mean,
            LossSpec::Linex { v } => PredLoss::Linex { v },
            LossSpec::GenEntropy { k } => PredLoss::GenEntropy { k },
        })
    }

    /// Map the accumulated expectation `E[I]` to the point prediction.
    fn finish(&self, e: f64) -> f64 {
        match *self {
            PredLoss::Mean => e,
            PredLoss::Linex { v } => -ln(e) / v,
            PredLoss::GenEntropy { k } => exp(-ln(e) / k),
        }
    }
}

// ---------------------------------------------------------------------
// two-sided regime (case 3)
// ---------------------------------------------------------------------

/// One merged label-path term of the case-3 conditional density.
#[derive(Debug, Clone, Copy)]
struct PathTerm {
    ln_coef: f64,
    /// exponent on `S1(w_r) - S1(w)`
    e1: usize,
    /// exponent on `S1(w)`
    p1: usize,
    /// exponent on `S2(w_r) - S2(w)`
    e2: usize,
    /// exponent on `S2(w)`
    p2: usize,
    /// event population of the `t`-th failure
    x_event: bool,
}

/// Enumerate the feasible label-path classes for the intermediate
/// failures `r+1 .. t-1` and sum out the final label.
///
/// A class is the set of paths sharing the intermediate X count `k`;
/// the term with denominator `k! (d-1-k)!` is already the total over
/// the whole class (it comes from integrating the intermediate failure
/// times over the ordered simplex), so classes are enumerated once,
/// not once per ordering. Reading the path sum as ranging over the
/// `2^(d-1)` orderings would multiply each class by `C(d-1, k)` and the
/// density would no longer integrate to one.
fn build_paths(
    m: usize,
    n: usize,
    m_r: usize,
    n_r: usize,
    d: usize,
    cap: usize,
) -> Result<Vec<PathTerm>> {
    let inter = d - 1;
    if inter > cap {
        return Err(Error::PathExplosion {
            exponent: inter,
            cap,
        });
    }
    let mut out = Vec::new();
    for k in 0..=inter {
        let m_tm1 = m_r + k;
        let n_tm1 = n_r + (inter - k);
        if m_tm1 > m || n_tm1 > n {
            continue;
        }
        for x_event in [true, false] {
            let m_t = m_tm1 + usize::from(x_event);
            let n_t = n_tm1 + usize::from(!x_event);
            if m_t > m || n_t > n {
                continue;
            }
            let coef = falling_factorial(m - m_r, m_t - m_r)
                * falling_factorial(n - n_r, n_t - n_r)
                / (factorial(k) * factorial(inter - k));
            out.push(PathTerm {
                ln_coef: ln(coef),
                e1: k,
                p1: m - m_t,
                e2: inter - k,
                p2: n - n_t,
                x_event,
            });
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidSample(
            "no feasible continuation for the requested target",
        ));
    }
    Ok(out)
}

/// Per-parameter-draw constants of the case-3 density.
#[derive(Debug, Clone, Copy)]
struct Comp {
    weight: f64,
    t1: f64,
    t2: f64,
    t3: f64,
    t4: f64,
    ln_t12: f64,
    ln_t34: f64,
    ln_sf_r1: f64,
    ln_sf_r2: f64,
    /// `-(m - m_r) ln S1(w_r) - (n - n_r) ln S2(w_r)`
    ln_norm: f64,
}

/// Weighted mixture of case-3 conditional densities across parameter
/// draws (a single draw with unit weight in the classical case).
#[derive(Debug, Clone)]
struct Case3Mixture {
    paths: Vec<PathTerm>,
    comps: Vec<Comp>,
    w_r: f64,
}

impl Case3Mixture {
    fn new(
        sample: &JointSample,
        params: impl Iterator<Item = (f64, [f64; 4])>,
        d: usize,
        cap: usize,
    ) -> Result<Self> {
        let paths = build_paths(sample.m(), sample.n(), sample.m_r(), sample.n_r(), d, cap)?;
        let w_r = sample.w_last();
        let cens_x = (sample.m() - sample.m_r()) as f64;
        let cens_y = (sample.n() - sample.n_r()) as f64;
        let comps: Vec<Comp> = params
            .map(|(weight, th)| {
                let [t1, t2, t3, t4] = th;
                let ln_sf_r1 = -t1 * ln1p_pow(w_r, t2);
                let ln_sf_r2 = -t3 * ln1p_pow(w_r, t4);
                Comp {
                    weight,
                    t1,
                    t2,
                    t3,
                    t4,
                    ln_t12: ln(t1) + ln(t2),
                    ln_t34: ln(t3) + ln(t4),
                    ln_sf_r1,
                    ln_sf_r2,
                    ln_norm: -cens_x * ln_sf_r1 - cens_y * ln_sf_r2,
                }
            })
            .collect();
        Ok(Self { paths, comps, w_r })
    }

    /// Mixture density at `w > w_r`.
    fn density(&self, w: f64) -> f64 {
        if w <= self.w_r {
            return 0.0;
        }
        let ln_w = ln(w);
        let mut total = 0.0;
        for c in &self.comps {
            let sp1 = ln1p_pow(w, c.t2);
            let sp2 = ln1p_pow(w, c.t4);
            let ln_sf1 = -c.t1 * sp1;
            let ln_sf2 = -c.t3 * sp2;
            // ln(S(w_r) - S(w)) stays accurate for w near w_r
            let ln_diff1 = c.ln_sf_r1 + ln(-exp_m1(ln_sf1 - c.ln_sf_r1));
            let ln_diff2 = c.ln_sf_r2 + ln(-exp_m1(ln_sf2 - c.ln_sf_r2));
            let ln_pdf1 = c.ln_t12 + (c.t2 - 1.0) * ln_w - (c.t1 + 1.0) * sp1;
            let ln_pdf2 = c.ln_t34 + (c.t4 - 1.0) * ln_w - (c.t3 + 1.0) * sp2;
            let mut acc = 0.0;
            for p in &self.paths {
                let mut t = p.ln_coef + c.ln_norm;
                if p.e1 > 0 {
                    t += p.e1 as f64 * ln_diff1;
                }
                if p.e2 > 0 {
                    t += p.e2 as f64 * ln_diff2;
                }
                t += p.p1 as f64 * ln_sf1 + p.p2 as f64 * ln_sf2;
                t += if p.x_event { ln_pdf1 } else { ln_pdf2 };
                acc += exp(t);
            }
            total += c.weight * acc;
        }
        total
    }
}

/// Cumulative panels of the mixture density in `u = 1/(1+w)` space,
/// for cheap repeated survival evaluations.
#[derive(Debug, Clone)]
struct SurvivalCache {
    u_r: f64,
    /// Ascending panels partitioning `(0, u_r)`.
    panels: Vec<Panel>,
    /// Prefix sums: `cum[i]` integrates panels `0..=i`.
    cum: Vec<f64>,
    rule: GaussLegendre,
}

#[inline]
fn u_of_w(w: f64) -> f64 {
    1.0 / (1.0 + w)
}

#[inline]
fn w_of_u(u: f64) -> f64 {
    1.0 / u - 1.0
}

impl SurvivalCache {
    fn build(mix: &Case3Mixture) -> Result<Self> {
        let u_r = u_of_w(mix.w_r);
        let quad = AdaptiveQuad::new(QUAD_TOL * 0.1);
        let g = |u: f64| mix.density(w_of_u(u)) / (u * u);
        let refined = quad.panels(0.0, u_r, g)?;
        let rule = GaussLegendre::new(31);
        // halve each refined panel and re-integrate with the same rule
        // used for partial evaluations, so the reconstructed survival
        // function is continuous across panel boundaries
        let mut panels = Vec::with_capacity(refined.len() * 2);
        for p in &refined {
            let mid = 0.5 * (p.a + p.b);
            for (a, b) in [(p.a, mid), (mid, p.b)] {
                if b > a {
                    panels.push(Panel {
                        a,
                        b,
                        integral: rule.integrate(a, b, g),
                    });
                }
            }
        }
        let mut cum = Vec::with_capacity(panels.len());
        let mut acc = 0.0;
        for p in &panels {
            acc += p.integral;
            cum.push(acc);
        }
        Ok(Self {
            u_r,
            panels,
            cum,
            rule,
        })
    }

    /// `P(W_t > xi)` = integral of the mixture over `(0, u_xi)`.
    fn survival(&self, mix: &Case3Mixture, xi: f64) -> f64 {
        if xi <= mix.w_r {
            return 1.0;
        }
        let u = u_of_w(xi);
        if u >= self.u_r {
            return 1.0;
        }
        let g = |u: f64| mix.density(w_of_u(u)) / (u * u);
        // panel containing u
        let idx = self
            .panels
            .partition_point(|p| p.b <= u)
            .min(self.panels.len() - 1);
        let below = if idx == 0 { 0.0 } else { self.cum[idx - 1] };
        let partial = self.rule.integrate(self.panels[idx].a, u, g);
        (below + partial).clamp(0.0, 1.0)
    }

    fn total(&self) -> f64 {
        *self.cum.last().expect("at least one panel")
    }
}

// ---------------------------------------------------------------------
// predictive evaluators
// ---------------------------------------------------------------------

enum Inner {
    /// Weighted one-sided components (single entry in the classical
    /// case).
    OneSided { comps: Vec<(f64, OneSided)> },
    TwoSided {
        mix: Case3Mixture,
        cache: SurvivalCache,
    },
}

/// Validated target geometry shared by every operation.
struct Geometry {
    case: CensorCase,
    d: usize,
    w_r: f64,
}

fn validate_target(sample: &JointSample, target: &PredictionTarget) -> Result<Geometry> {
    if target.j == 0 {
        return Err(Error::Domain("prediction step j must be >= 1"));
    }
    let t = sample.r() + target.j;
    if t > sample.m() + sample.n() {
        return Err(Error::Domain("prediction step exceeds remaining units"));
    }
    let case = classify_case(sample)?;
    Ok(Geometry {
        case,
        d: target.j,
        w_r: sample.w_last(),
    })
}

fn one_sided_components(
    geo: &Geometry,
    sample: &JointSample,
    params: impl Iterator<Item = (f64, [f64; 4])>,
) -> Vec<(f64, OneSided)> {
    let is_x = geo.case == CensorCase::Case1;
    let a = if is_x {
        sample.m() - sample.m_r()
    } else {
        sample.n() - sample.n_r()
    };
    params
        .map(|(w, th)| {
            let pop = if is_x {
                BurrParams {
                    alpha: th[0],
                    beta: th[1],
                }
            } else {
                BurrParams {
                    alpha: th[2],
                    beta: th[3],
                }
            };
            (w, OneSided::new(pop, a, geo.d, geo.w_r))
        })
        .collect()
}

/// Predictive distribution of `W_{r+j}` with the parameters fixed
/// (plug-in, classical route).
pub struct ClassicalPredictive {
    inner: Inner,
    w_r: f64,
}

impl ClassicalPredictive {
    pub fn new(
        theta: &ThetaVector,
        sample: &JointSample,
        target: &PredictionTarget,
    ) -> Result<Self> {
        let geo = validate_target(sample, target)?;
        let single = core::iter::once((1.0, theta.as_array()));
        let inner = match geo.case {
            CensorCase::Case3 => {
                let mix = Case3Mixture::new(sample, single, geo.d, target.path_cap)?;
                let cache = SurvivalCache::build(&mix)?;
                Inner::TwoSided { mix, cache }
            }
            _ => Inner::OneSided {
                comps: one_sided_components(&geo, sample, single),
            },
        };
        Ok(Self {
            inner,
            w_r: geo.w_r,
        })
    }

    /// Conditional density of `W_t` at `w_t` (final label summed out).
    pub fn density(&self, w_t: f64) -> Result<f64> {
        if !(w_t > self.w_r) {
            return Err(Error::Domain("need w_t > w_r"));
        }
        Ok(match &self.inner {
            Inner::OneSided { comps } => comps.iter().map(|(w, o)| w * o.density(w_t)).sum(),
            Inner::TwoSided { mix, .. } => mix.density(w_t),
        })
    }

    /// Prediction survival `P(W_t > xi)` for `xi >= w_r`.
    pub fn survival(&self, xi: f64) -> Result<f64> {
        if !(xi >= self.w_r) {
            return Err(Error::Domain("need xi >= w_r"));
        }
        inner_survival(&self.inner, self.w_r, xi)
    }

    /// Best unbiased predictor `E[W_t | data]` at the plugged
    /// parameters.
    pub fn expectation(&self) -> Result<f64> {
        let gl = GaussLegendre::new(128);
        let vals = inner_expectations(&self.inner, self.w_r, &[PredLoss::Mean], &gl)?;
        Ok(vals[0])
    }

    /// Equal-tail interval from the survival roots.
    pub fn equal_tail(&self, level: f64) -> Result<PredictiveInterval> {
        let (lower, upper) = equal_tail_roots(&self.inner, self.w_r, level)?;
        Ok(PredictiveInterval {
            lower,
            upper,
            level,
            kind: IntervalKind::ClassicalEqualTail,
            fallback_equal_tail: false,
        })
    }
}

/// Posterior predictive distribution of `W_{r+j}` over weighted draws.
pub struct BayesPredictive {
    inner: Inner,
    w_r: f64,
}

impl BayesPredictive {
    pub fn new(
        draws: &WeightedDraws,
        sample: &JointSample,
        target: &PredictionTarget,
    ) -> Result<Self> {
        if draws.ess() < 2.0 {
            return Err(Error::DegenerateWeights { ess: draws.ess() });
        }
        let geo = validate_target(sample, target)?;
        let weighted = draws
            .weights()
            .iter()
            .copied()
            .zip(draws.draws().iter().copied());
        let inner = match geo.case {
            CensorCase::Case3 => {
                let mix = Case3Mixture::new(sample, weighted, geo.d, target.path_cap)?;
                let cache = SurvivalCache::build(&mix)?;
                Inner::TwoSided { mix, cache }
            }
            _ => Inner::OneSided {
                comps: one_sided_components(&geo, sample, weighted),
            },
        };
        Ok(Self {
            inner,
            w_r: geo.w_r,
        })
    }

    /// Posterior predictive density at `w_t`.
    pub fn density(&self, w_t: f64) -> Result<f64> {
        if !(w_t > self.w_r) {
            return Err(Error::Domain("need w_t > w_r"));
        }
        Ok(match &self.inner {
            Inner::OneSided { comps } => comps.iter().map(|(w, o)| w * o.density(w_t)).sum(),
            Inner::TwoSided { mix, .. } => mix.density(w_t),
        })
    }

    /// Posterior predictive survival `P(W_t > xi)`.
    pub fn survival(&self, xi: f64) -> Result<f64> {
        if !(xi >= self.w_r) {
            return Err(Error::Domain("need xi >= w_r"));
        }
        inner_survival(&self.inner, self.w_r, xi)
    }

    /// Point predictions for each requested loss, sharing one pass of
    /// quadrature.
    pub fn predict(&self, losses: &[LossSpec]) -> Result<Vec<f64>> {
        let pl: Vec<PredLoss> = losses
            .iter()
            .map(|&l| PredLoss::from_spec(l))
            .collect::<Result<_>>()?;
        let gl = GaussLegendre::new(128);
        let es = inner_expectations(&self.inner, self.w_r, &pl, &gl)?;
        let out: Vec<f64> = pl.iter().zip(&es).map(|(l, &e)| l.finish(e)).collect();
        if !out.iter().all(|v| v.is_finite()) {
            return Err(Error::QuadratureNonConvergence);
        }
        Ok(out)
    }

    /// Equal-tail credible interval for `W_t`.
    pub fn equal_tail(&self, level: f64) -> Result<PredictiveInterval> {
        let (lower, upper) = equal_tail_roots(&self.inner, self.w_r, level)?;
        Ok(PredictiveInterval {
            lower,
            upper,
            level,
            kind: IntervalKind::CredibleEqualTail,
            fallback_equal_tail: false,
        })
    }

    /// Highest-density interval: minimize `U - L` subject to
    /// `S(L) - S(U) = level`, falling back to equal tails when the
    /// predictive density is not unimodal beyond `w_r`.
    pub fn hpd(&self, level: f64) -> Result<PredictiveInterval> {
        check_level(level)?;
        let et = self.equal_tail(level)?;
        let alpha = 1.0 - level;
        // unimodality scan out to deep in the upper tail
        let far = survival_root(&self.inner, self.w_r, alpha / 50.0, et.upper)?;
        if !density_unimodal(&self.inner, self.w_r, far) {
            return Ok(PredictiveInterval {
                kind: IntervalKind::CredibleEqualTail,
                fallback_equal_tail: true,
                ..et
            });
        }
        // width(L) = U(L) - L with S(U(L)) = S(L) - level
        let width_at = |l: f64| -> Result<(f64, f64)> {
            let sl = inner_survival(&self.inner, self.w_r, l)?;
            let u = survival_root(&self.inner, self.w_r, sl - level, far.max(et.upper))?;
            Ok((u - l, u))
        };
        // golden-section over L in [w_r, equal-tail lower]
        let (mut lo, mut hi) = (self.w_r, et.lower);
        if hi - lo < 1e-12 * (1.0 + self.w_r) {
            return Ok(PredictiveInterval {
                kind: IntervalKind::Hpd,
                fallback_equal_tail: false,
                ..et
            });
        }
        const INV_PHI: f64 = 0.618_033_988_749_894_8;
        let mut x1 = hi - INV_PHI * (hi - lo);
        let mut x2 = lo + INV_PHI * (hi - lo);
        let (mut w1, _) = width_at(x1)?;
        let (mut w2, _) = width_at(x2)?;
        for _ in 0..70 {
            if hi - lo < 1e-10 * (1.0 + hi.abs()) {
                break;
            }
            if w1 <= w2 {
                hi = x2;
                x2 = x1;
                w2 = w1;
                x1 = hi - INV_PHI * (hi - lo);
                let (w, _) = width_at(x1)?;
                w1 = w;
            } else {
                lo = x1;
                x1 = x2;
                w1 = w2;
                x2 = lo + INV_PHI * (hi - lo);
                let (w, _) = width_at(x2)?;
                w2 = w;
            }
        }
        let l_star = 0.5 * (lo + hi);
        let (_, u_star) = width_at(l_star)?;
        Ok(PredictiveInterval {
            lower: l_star.max(self.w_r),
            upper: u_star,
            level,
            kind: IntervalKind::Hpd,
            fallback_equal_tail: false,
        })
    }
}

// ---------------------------------------------------------------------
// shared evaluation paths
// ---------------------------------------------------------------------

fn inner_survival(inner: &Inner, w_r: f64, xi: f64) -> Result<f64> {
    if xi <= w_r {
        return Ok(1.0);
    }
    match inner {
        Inner::OneSided { comps } => {
            let mut acc = 0.0;
            for (w, o) in comps {
                let s = match o.survival_sum(xi) {
                    Some(s) => s,
                    None => {
                        // expansion abandoned; integrate the density
                        let quad = AdaptiveQuad::new(QUAD_TOL);
                        let u_hi = u_of_w(xi);
                        quad.integrate(0.0, u_hi, |u| {
                            let w_t = w_of_u(u);
                            o.density(w_t) / (u * u)
                        })?
                    }
                };
                acc += w * s;
            }
            Ok(acc)
        }
        Inner::TwoSided { mix, cache } => Ok(cache.survival(mix, xi)),
    }
}

fn inner_expectations(
    inner: &Inner,
    w_r: f64,
    losses: &[PredLoss],
    gl: &GaussLegendre,
) -> Result<Vec<f64>> {
    match inner {
        Inner::OneSided { comps } => {
            let fold = |acc: Vec<f64>, item: &(f64, OneSided)| {
                let (wt, o) = item;
                let vals = o.beta_integrals(losses, gl);
                acc.iter().zip(&vals).map(|(a, v)| a + wt * v).collect()
            };
            #[cfg(feature = "parallel")]
            let sums = comps
                .par_iter()
                .fold(|| vec![0.0; losses.len()], |acc, it| fold(acc, it))
                .reduce(
                    || vec![0.0; losses.len()],
                    |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect(),
                );
            #[cfg(not(feature = "parallel"))]
            let sums = comps.iter().fold(vec![0.0; losses.len()], fold);
            Ok(sums)
        }
        Inner::TwoSided { mix, cache } => {
            // stop at the deep-tail quantile; see TAIL_MASS
            let total = cache.total();
            let w_cap = survival_root_cached(mix, cache, (TAIL_MASS * total).min(total), w_r)?;
            let u_r = u_of_w(w_r);
            let quad = AdaptiveQuad::new(QUAD_TOL);
            let mut out = vec![0.0; losses.len()];
            // losses with their own domain cap are integrated separately;
            // the rest share one pass
            let mut shared: Vec<usize> = Vec::new();
            for (i, l) in losses.iter().enumerate() {
                if let PredLoss::Linex { v } = *l {
                    if v < 0.0 {
                        // e^{|v| w} g(w) eventually turns upward against a
                        // polynomial tail (the full integral diverges);
                        // integrate the bulk up to the integrand's minimum
                        let cap = linex_bulk_cap(mix, -v, w_r, w_cap);
                        out[i] = quad.integrate(u_of_w(cap), u_r, |u| {
                            let w = w_of_u(u);
                            mix.density(w) / (u * u) * exp(-v * w)
                        })?;
                        continue;
                    }
                }
                shared.push(i);
            }
            if !shared.is_empty() {
                let sub: Vec<PredLoss> = shared.iter().map(|&i| losses[i]).collect();
                let vals = quad.integrate_vec(u_of_w(w_cap), u_r, sub.len(), |u, buf| {
                    let w = w_of_u(u);
                    let g = mix.density(w) / (u * u);
                    let ln_w = ln(w);
                    for (o, l) in buf.iter_mut().zip(&sub) {
                        *o = g * l.h(w, ln_w);
                    }
                })?;
                for (&i, v) in shared.iter().zip(&vals) {
                    out[i] = *v;
                }
            }
            Ok(out)
        }
    }
}

/// Cap the `e^{|v| w} g(w)` integrand at its first local minimum past
/// the bulk (log-spaced scan); returns `w_cap` when the integrand only
/// decreases over the scanned range.
fn linex_bulk_cap(mix: &Case3Mixture, v_abs: f64, w_r: f64, w_cap: f64) -> f64 {
    let lo = w_r + 1e-6 * (1.0 + w_r);
    if !(w_cap > lo) {
        return w_cap;
    }
    let n = 200;
    let log_ratio = ln(w_cap / lo);
    let mut prev = f64::INFINITY;
    let mut prev_w = lo;
    let mut fell = false;
    for i in 0..=n {
        let w = lo * exp(log_ratio * i as f64 / n as f64);
        let g = mix.density(w);
        let lnval = if g > 0.0 {
            v_abs * w + ln(g)
        } else {
            f64::NEG_INFINITY
        };
        if fell && lnval > prev + 1e-9 {
            return prev_w;
        }
        if lnval < prev - 1e-9 {
            fell = true;
        }
        prev = lnval;
        prev_w = w;
    }
    w_cap
}

fn check_level(level: f64) -> Result<()> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain("level must be in (0,1)"));
    }
    Ok(())
}

fn equal_tail_roots(inner: &Inner, w_r: f64, level: f64) -> Result<(f64, f64)> {
    check_level(level)?;
    let alpha = 1.0 - level;
    let lower = survival_root(inner, w_r, 1.0 - alpha / 2.0, w_r + 1.0)?;
    let upper = survival_root(inner, w_r, alpha / 2.0, lower.max(w_r + 1.0))?;
    Ok((lower.max(w_r), upper))
}

/// Solve `survival(x) = target` for `x > w_r` by geometric bracket
/// expansion and bisection/secant refinement to `ROOT_FTOL` residual.
fn survival_root(inner: &Inner, w_r: f64, target: f64, hint: f64) -> Result<f64> {
    survival_root_impl(&|xi| inner_survival(inner, w_r, xi), w_r, target, hint)
}

fn survival_root_cached(
    mix: &Case3Mixture,
    cache: &SurvivalCache,
    target: f64,
    w_r: f64,
) -> Result<f64> {
    survival_root_impl(&|xi| Ok(cache.survival(mix, xi)), w_r, target, w_r + 1.0)
}

fn survival_root_impl(
    f: &dyn Fn(f64) -> Result<f64>,
    w_r: f64,
    target: f64,
    hint: f64,
) -> Result<f64> {
    // survival decreases from 1 at w_r toward 0
    let mut lo = w_r;
    let mut flo = 1.0 - target;
    if flo <= 0.0 {
        return Ok(w_r);
    }
    let mut hi = hint.max(w_r + 1e-6 * (1.0 + w_r));
    let mut fhi = f(hi)? - target;
    let mut grow = (hi - w_r).max(1e-6);
    let mut tries = 0;
    while fhi > 0.0 {
        lo = hi;
        flo = fhi;
        grow *= 2.0;
        hi = w_r + grow;
        if !hi.is_finite() || tries > 300 {
            return Err(Error::BracketFailure);
        }
        fhi = f(hi)? - target;
        tries += 1;
    }
    // alternate secant and bisection steps: the secant accelerates,
    // the bisection guarantees the bracket shrinks (plain regula falsi
    // stalls one-sided on these steep convex curves)
    for it in 0..260 {
        let mid = if it % 2 == 0 && (flo - fhi).abs() > 1e-300 {
            let sec = lo + flo * (hi - lo) / (flo - fhi);
            if sec > lo && sec < hi {
                sec
            } else {
                0.5 * (lo + hi)
            }
        } else {
            0.5 * (lo + hi)
        };
        let fm = f(mid)? - target;
        if fm.abs() < ROOT_FTOL || (hi - lo) < 1e-14 * (1.0 + mid.abs()) {
            return Ok(mid);
        }
        if fm > 0.0 {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    Err(Error::BracketFailure)
}

/// Crude unimodality check of the predictive density over
/// `(w_r, far)`: at most one rise-then-fall direction change on a
/// 257-point grid, with noise-scaled comparisons.
fn density_unimodal(inner: &Inner, w_r: f64, far: f64) -> bool {
    let density = |w: f64| -> f64 {
        match inner {
            Inner::OneSided { comps } => comps.iter().map(|(wt, o)| wt * o.density(w)).sum(),
            Inner::TwoSided { mix, .. } => mix.density(w),
        }
    };
    let n = 257;
    let mut prev = density(w_r + (far - w_r) * 1e-6);
    let mut peak = prev;
    let mut falling = false;
    for i in 1..=n {
        let w = w_r + (far - w_r) * i as f64 / n as f64;
        let cur = density(w);
        peak = peak.max(cur);
        if falling {
            if cur > prev + 1e-9 * peak {
                return false;
            }
        } else if cur < prev - 1e-9 * peak {
            falling = true;
        }
        prev = cur;
    }
    true
}

// ---------------------------------------------------------------------
// spec-level free functions
// ---------------------------------------------------------------------

/// Conditional density of `(W_t, S_t)` given the observed sample, with
/// the final label summed out.
pub fn cond_density(
    theta: &ThetaVector,
    sample: &JointSample,
    target: &PredictionTarget,
    w_t: f64,
) -> Result<f64> {
    ClassicalPredictive::new(theta, sample, target)?.density(w_t)
}

/// Best unbiased predictor of `W_t` with `theta` plugged in.
pub fn bup(theta: &ThetaVector, sample: &JointSample, target: &PredictionTarget) -> Result<f64> {
    ClassicalPredictive::new(theta, sample, target)?.expectation()
}

/// Bayesian point prediction of `W_t` under one loss.
pub fn bayes_predict(
    draws: &WeightedDraws,
    sample: &JointSample,
    target: &PredictionTarget,
    loss: LossSpec,
) -> Result<f64> {
    Ok(BayesPredictive::new(draws, sample, target)?.predict(&[loss])?[0])
}

/// Prediction survival function `P(W_t > xi)` at plugged parameters.
pub fn pred_survival(
    theta: &ThetaVector,
    sample: &JointSample,
    target: &PredictionTarget,
    xi: f64,
) -> Result<f64> {
    ClassicalPredictive::new(theta, sample, target)?.survival(xi)
}

/// Equal-tail classical prediction interval.
pub fn classical_pi(
    theta: &ThetaVector,
    sample: &JointSample,
    target: &PredictionTarget,
    level: f64,
) -> Result<PredictiveInterval> {
    ClassicalPredictive::new(theta, sample, target)?.equal_tail(level)
}

/// Posterior predictive survival function.
pub fn bayes_pred_survival(
    draws: &WeightedDraws,
    sample: &JointSample,
    target: &PredictionTarget,
    xi: f64,
) -> Result<f64> {
    BayesPredictive::new(draws, sample, target)?.survival(xi)
}

/// Equal-tail credible prediction interval.
pub fn bayes_pi(
    draws: &WeightedDraws,
    sample: &JointSample,
    target: &PredictionTarget,
    level: f64,
) -> Result<PredictiveInterval> {
    BayesPredictive::new(draws, sample, target)?.equal_tail(level)
}

/// HPD prediction interval (equal-tail fallback flagged when the
/// density is multimodal).
pub fn bayes_hpd_pi(
    draws: &WeightedDraws,
    sample: &JointSample,
    target: &PredictionTarget,
    level: f64,
) -> Result<PredictiveInterval> {
    BayesPredictive::new(draws, sample, target)?.hpd(level)
}
