//! Joint type-II censored samples from two Burr-XII populations:
//! representation, generation, censoring-case classification, and the
//! joint log-likelihood.

use alloc::vec::Vec;

use rand_core::RngCore;

use crate::error::{Error, Result};
use crate::model::BurrParams;
use crate::numeric::math::ln;
use crate::numeric::special::ln_gamma;

/// The four positive shape parameters: `(theta1, theta2)` for the X
/// population and `(theta3, theta4)` for Y.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaVector {
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
    pub theta4: f64,
}

impl ThetaVector {
    pub fn new(theta1: f64, theta2: f64, theta3: f64, theta4: f64) -> Result<Self> {
        for (v, name) in [
            (theta1, "theta1"),
            (theta2, "theta2"),
            (theta3, "theta3"),
            (theta4, "theta4"),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                let _ = name;
                return Err(Error::InvalidParameter("theta components must be > 0"));
            }
        }
        Ok(Self {
            theta1,
            theta2,
            theta3,
            theta4,
        })
    }

    /// Parameters of the X population.
    pub fn x_params(&self) -> BurrParams {
        BurrParams {
            alpha: self.theta1,
            beta: self.theta2,
        }
    }

    /// Parameters of the Y population.
    pub fn y_params(&self) -> BurrParams {
        BurrParams {
            alpha: self.theta3,
            beta: self.theta4,
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.theta1, self.theta2, self.theta3, self.theta4]
    }

    pub fn from_array(a: [f64; 4]) -> Result<Self> {
        Self::new(a[0], a[1], a[2], a[3])
    }
}

/// Which population can produce the next failure after `w_r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CensorCase {
    /// All Y units have failed (`n_r = n`); future failures are X.
    Case1,
    /// All X units have failed (`m_r = m`); future failures are Y.
    Case2,
    /// Both populations still have survivors.
    Case3,
}

/// Observed joint type-II censored data: the first `r` order statistics
/// `w` of the merged experiment with population labels `s` (`true` for
/// an X failure), plus the two sample sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSample {
    w: Vec<f64>,
    s: Vec<bool>,
    m: usize,
    n: usize,
}

impl JointSample {
    pub fn new(w: Vec<f64>, s: Vec<bool>, m: usize, n: usize) -> Result<Self> {
        if w.len() != s.len() {
            return Err(Error::InvalidSample("w and s must have equal length"));
        }
        let r = w.len();
        if r == 0 || r > m + n {
            return Err(Error::InvalidSample("need 1 <= r <= m + n"));
        }
        if !w.iter().all(|&x| x > 0.0 && x.is_finite()) {
            return Err(Error::InvalidSample("w must be positive and finite"));
        }
        // ties are admitted: recorded failure times are rounded, and the
        // reference datasets contain repeated values
        if !w.windows(2).all(|p| p[0] <= p[1]) {
            return Err(Error::InvalidSample("w must be non-decreasing"));
        }
        let m_r = s.iter().filter(|&&b| b).count();
        if m_r > m {
            return Err(Error::InvalidSample("more X failures than X units"));
        }
        if r - m_r > n {
            return Err(Error::InvalidSample("more Y failures than Y units"));
        }
        Ok(Self { w, s, m, n })
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn s(&self) -> &[bool] {
        &self.s
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of observed failures `r`.
    pub fn r(&self) -> usize {
        self.w.len()
    }

    /// Number of observed X failures.
    pub fn m_r(&self) -> usize {
        self.s.iter().filter(|&&b| b).count()
    }

    /// Number of observed Y failures.
    pub fn n_r(&self) -> usize {
        self.r() - self.m_r()
    }

    /// Largest observed failure time `w_r`.
    pub fn w_last(&self) -> f64 {
        *self.w.last().expect("r >= 1")
    }

    /// Truncate to the first `r` failures (a nested, shorter experiment).
    pub fn truncated(&self, r: usize) -> Result<Self> {
        if r == 0 || r > self.r() {
            return Err(Error::InvalidSample("truncation point out of range"));
        }
        Self::new(self.w[..r].to_vec(), self.s[..r].to_vec(), self.m, self.n)
    }
}

/// Classify which populations remain on test after the `r`-th failure.
///
/// Errors with [`Error::FullyObserved`] when `r = m + n`.
pub fn classify_case(sample: &JointSample) -> Result<CensorCase> {
    if sample.r() == sample.m() + sample.n() {
        return Err(Error::FullyObserved);
    }
    let x_open = sample.m_r() < sample.m();
    let y_open = sample.n_r() < sample.n();
    Ok(match (x_open, y_open) {
        (true, false) => CensorCase::Case1,
        (false, true) => CensorCase::Case2,
        (true, true) => CensorCase::Case3,
        (false, false) => unreachable!("r < m + n leaves a survivor"),
    })
}

/// Simulate a joint type-II censored experiment: draw `m` X variates and
/// `n` Y variates, merge, sort, and keep the first `r` with labels.
///
/// Floating-point ties (probability zero) are broken X first.
pub fn generate_joint_sample<R: RngCore + ?Sized>(
    theta: &ThetaVector,
    m: usize,
    n: usize,
    r: usize,
    rng: &mut R,
) -> Result<JointSample> {
    if r == 0 || r > m + n {
        return Err(Error::InvalidSample("need 1 <= r <= m + n"));
    }
    let xs = theta.x_params().sample(m.max(1), rng)?;
    let ys = theta.y_params().sample(n.max(1), rng)?;
    let mut merged: Vec<(f64, bool)> = Vec::with_capacity(m + n);
    if m > 0 {
        merged.extend(xs.into_iter().map(|v| (v, true)));
    }
    if n > 0 {
        merged.extend(ys.into_iter().map(|v| (v, false)));
    }
    // X-first tie break: sort by value, then label descending (true first)
    merged.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
    merged.truncate(r);
    let (w, s): (Vec<f64>, Vec<bool>) = merged.into_iter().unzip();
    JointSample::new(w, s, m, n)
}

/// Joint log-likelihood of the censored sample, without the
/// combinatorial constant `m! n! / ((m - m_r)! (n - n_r)!)` (constant in
/// `theta`):
///
/// `sum_i s_i ln f1(w_i) + (1 - s_i) ln f2(w_i)
///  + (m - m_r) ln S1(w_r) + (n - n_r) ln S2(w_r)`.
pub fn log_likelihood(theta: &ThetaVector, sample: &JointSample) -> f64 {
    let p1 = theta.x_params();
    let p2 = theta.y_params();
    let mut ll = 0.0;
    for (&wi, &si) in sample.w().iter().zip(sample.s()) {
        ll += if si { p1.ln_pdf(wi) } else { p2.ln_pdf(wi) };
    }
    let wr = sample.w_last();
    let cens_x = (sample.m() - sample.m_r()) as f64;
    let cens_y = (sample.n() - sample.n_r()) as f64;
    if cens_x > 0.0 {
        ll += cens_x * p1.ln_sf(wr);
    }
    if cens_y > 0.0 {
        ll += cens_y * p2.ln_sf(wr);
    }
    ll
}

/// Log-likelihood including the multinomial constant, for exact joint
/// density evaluation.
pub fn log_likelihood_with_constant(theta: &ThetaVector, sample: &JointSample) -> f64 {
    log_likelihood(theta, sample) + ln_orderings_constant(sample)
}

/// `ln( m! n! / ((m - m_r)! (n - n_r)!) )` via log-gamma.
pub fn ln_orderings_constant(sample: &JointSample) -> f64 {
    let (m, n) = (sample.m() as f64, sample.n() as f64);
    let (mm, nn) = (
        (sample.m() - sample.m_r()) as f64,
        (sample.n() - sample.n_r()) as f64,
    );
    ln_gamma(m + 1.0) + ln_gamma(n + 1.0) - ln_gamma(mm + 1.0) - ln_gamma(nn + 1.0)
}

/// Gradient of [`log_likelihood`] with respect to
/// `(theta1, theta2, theta3, theta4)`.
///
/// Used by the fitter; exposed for tests. The X and Y blocks are
/// separable, each the censored Burr score:
///
/// `d/d alpha = m_r/alpha - sum_i ln(1+w_i^beta) - (m-m_r) ln(1+w_r^beta)`
/// `d/d beta  = m_r/beta + sum_i ln w_i
///              - (alpha+1) sum_i w_i^beta ln w_i / (1+w_i^beta)
///              - (m-m_r) alpha w_r^beta ln w_r / (1+w_r^beta)`
pub fn log_likelihood_grad(theta: &ThetaVector, sample: &JointSample) -> [f64; 4] {
    let wr = sample.w_last();
    let grad_pair = |alpha: f64, beta: f64, x_side: bool, cens: f64| -> (f64, f64) {
        let mut count = 0.0;
        let mut sum_ln1p = 0.0;
        let mut sum_ln_w = 0.0;
        let mut sum_ratio = 0.0;
        for (&wi, &si) in sample.w().iter().zip(sample.s()) {
            if si != x_side {
                continue;
            }
            count += 1.0;
            let lw = ln(wi);
            let t = crate::numeric::math::ln1p_pow(wi, beta);
            sum_ln1p += t;
            sum_ln_w += lw;
            // w^b/(1+w^b) = 1 - e^{-ln(1+w^b)}
            sum_ratio += lw * (1.0 - crate::numeric::math::exp(-t));
        }
        let t_r = crate::numeric::math::ln1p_pow(wr, beta);
        let ratio_r = ln(wr) * (1.0 - crate::numeric::math::exp(-t_r));
        let g_alpha = count / alpha - sum_ln1p - cens * t_r;
        let g_beta = count / beta + sum_ln_w - (alpha + 1.0) * sum_ratio - cens * alpha * ratio_r;
        (g_alpha, g_beta)
    };
    let (g1, g2) = grad_pair(
        theta.theta1,
        theta.theta2,
        true,
        (sample.m() - sample.m_r()) as f64,
    );
    let (g3, g4) = grad_pair(
        theta.theta3,
        theta.theta4,
        false,
        (sample.n() - sample.n_r()) as f64,
    );
    [g1, g2, g3, g4]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_core::SeedableRng;

    fn theta(a: f64, b: f64, c: f64, d: f64) -> ThetaVector {
        ThetaVector::new(a, b, c, d).unwrap()
    }

    /// Observed joint sample used throughout the real-data workflow
    /// (insulating fluid breakdown times, r = 10 variant).
    fn fluid_r10() -> JointSample {
        JointSample::new(
            alloc::vec![0.20, 0.49, 0.64, 0.78, 0.80, 0.82, 0.93, 1.08, 1.08, 1.13],
            alloc::vec![false, true, true, false, false, true, true, true, true, false],
            10,
            10,
        )
        .unwrap()
    }

    #[test]
    fn invariants_are_enforced() {
        assert!(JointSample::new(alloc::vec![1.0, 0.5], alloc::vec![true, false], 2, 2).is_err());
        // equal adjacent times are fine
        assert!(JointSample::new(alloc::vec![1.0, 1.0], alloc::vec![true, false], 2, 2).is_ok());
        assert!(JointSample::new(alloc::vec![1.0], alloc::vec![true], 0, 2).is_err());
        assert!(JointSample::new(alloc::vec![1.0, 2.0], alloc::vec![true, true], 1, 5).is_err());
        assert!(JointSample::new(alloc::vec![], alloc::vec![], 2, 2).is_err());
        assert!(JointSample::new(alloc::vec![-1.0], alloc::vec![true], 2, 2).is_err());
    }

    #[test]
    fn classify_matches_definition() {
        // r = 5 real-data variant: m_r = 2, n_r = 3, both populations open
        let s5 = JointSample::new(
            alloc::vec![0.20, 0.49, 0.64, 0.78, 0.80],
            alloc::vec![false, true, true, false, false],
            10,
            10,
        )
        .unwrap();
        assert_eq!(s5.m_r(), 2);
        assert_eq!(s5.n_r(), 3);
        assert_eq!(classify_case(&s5).unwrap(), CensorCase::Case3);

        let all_x = JointSample::new(alloc::vec![0.1, 0.2], alloc::vec![true, true], 2, 3).unwrap();
        assert_eq!(classify_case(&all_x).unwrap(), CensorCase::Case2);

        let all_y =
            JointSample::new(alloc::vec![0.1, 0.2], alloc::vec![false, false], 3, 2).unwrap();
        assert_eq!(classify_case(&all_y).unwrap(), CensorCase::Case1);

        let full = JointSample::new(alloc::vec![0.1, 0.2], alloc::vec![true, false], 1, 1).unwrap();
        assert!(matches!(classify_case(&full), Err(Error::FullyObserved)));
    }

    #[test]
    fn generation_respects_sizes_and_label_symmetry() {
        let th = theta(1.5, 1.0, 1.5, 1.0);
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(31);
        let mut x_first = 0usize;
        let reps = 10_000;
        for _ in 0..reps {
            let s = generate_joint_sample(&th, 1, 1, 1, &mut rng).unwrap();
            if s.s()[0] {
                x_first += 1;
            }
        }
        let frac = x_first as f64 / reps as f64;
        assert!((frac - 0.5).abs() < 0.02, "P(s1=1) = {frac}");
    }

    #[test]
    fn full_observation_has_no_censoring() {
        let th = theta(1.5, 1.0, 2.0, 0.5);
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(3);
        for _ in 0..50 {
            let s = generate_joint_sample(&th, 4, 3, 7, &mut rng).unwrap();
            assert_eq!(s.m_r(), 4);
            assert_eq!(s.n_r(), 3);
        }
    }

    #[test]
    fn expected_x_failures_match_independent_merge_oracle() {
        // independent re-implementation: simulate both full samples with
        // a separate generator and count labels among the first r
        let th = theta(1.5, 1.0, 2.0, 0.5);
        let (m, n, r) = (20usize, 20usize, 20usize);
        let reps = 4000;

        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(77);
        let mut mean_impl = 0.0;
        for _ in 0..reps {
            let s = generate_joint_sample(&th, m, n, r, &mut rng).unwrap();
            mean_impl += s.m_r() as f64;
        }
        mean_impl /= reps as f64;

        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(1234);
        let mut mean_oracle = 0.0;
        for _ in 0..reps {
            let mut pool: alloc::vec::Vec<(f64, bool)> = alloc::vec::Vec::new();
            for _ in 0..m {
                pool.push((
                    th.x_params()
                        .quantile(crate::numeric::rng::uniform_open01(&mut rng))
                        .unwrap(),
                    true,
                ));
            }
            for _ in 0..n {
                pool.push((
                    th.y_params()
                        .quantile(crate::numeric::rng::uniform_open01(&mut rng))
                        .unwrap(),
                    false,
                ));
            }
            pool.sort_by(|a, b| a.0.total_cmp(&b.0));
            mean_oracle += pool[..r].iter().filter(|p| p.1).count() as f64;
        }
        mean_oracle /= reps as f64;

        assert!(
            (mean_impl - mean_oracle).abs() < 0.15,
            "impl {mean_impl} vs oracle {mean_oracle}"
        );
    }

    #[test]
    fn loglik_uncensored_equals_sum_of_densities() {
        let th = theta(1.5, 1.0, 2.0, 0.5);
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(8);
        let s = generate_joint_sample(&th, 5, 5, 10, &mut rng).unwrap();
        let mut expect = 0.0;
        for (&wi, &si) in s.w().iter().zip(s.s()) {
            let p = if si { th.x_params() } else { th.y_params() };
            expect += p.pdf(wi).unwrap().ln();
        }
        assert!((log_likelihood(&th, &s) - expect).abs() < 1e-10);
    }

    #[test]
    fn loglik_single_point_hand_computation() {
        // one X failure among m=2, n=1, all censoring at w_1
        let s = JointSample::new(alloc::vec![0.7], alloc::vec![true], 2, 1).unwrap();
        let th = theta(1.3, 2.1, 0.9, 1.7);
        // by hand: ln f1(0.7) + 1 * ln S1(0.7) + 1 * ln S2(0.7)
        let f1 = 1.3 * 2.1 * 0.7f64.powf(1.1) * (1.0 + 0.7f64.powf(2.1)).powf(-2.3);
        let s1 = (1.0 + 0.7f64.powf(2.1)).powf(-1.3);
        let s2 = (1.0 + 0.7f64.powf(1.7)).powf(-0.9);
        let expect = f1.ln() + s1.ln() + s2.ln();
        assert!((log_likelihood(&th, &s) - expect).abs() < 1e-12);
    }

    #[test]
    fn loglik_label_swap_symmetry() {
        let th = theta(1.5, 1.0, 2.0, 0.5);
        let swapped = theta(2.0, 0.5, 1.5, 1.0);
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(15);
        let s = generate_joint_sample(&th, 8, 6, 9, &mut rng).unwrap();
        let flipped = JointSample::new(
            s.w().to_vec(),
            s.s().iter().map(|&b| !b).collect(),
            s.n(),
            s.m(),
        )
        .unwrap();
        let a = log_likelihood(&th, &s);
        let b = log_likelihood(&swapped, &flipped);
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn loglik_decreases_as_censor_time_grows() {
        let th = theta(1.5, 1.0, 2.0, 0.5);
        let base = JointSample::new(
            alloc::vec![0.3, 0.6, 0.9],
            alloc::vec![true, false, true],
            5,
            5,
        )
        .unwrap();
        let later = JointSample::new(
            alloc::vec![0.3, 0.6, 1.4],
            alloc::vec![true, false, true],
            5,
            5,
        )
        .unwrap();
        // moving w_r outward adds survival mass the tail terms must pay for
        let delta_tail = log_likelihood(&th, &later) - log_likelihood(&th, &base);
        let delta_obs = th.x_params().ln_pdf(1.4) - th.x_params().ln_pdf(0.9);
        assert!(delta_tail - delta_obs < 0.0);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let th = theta(0.8, 2.2, 1.4, 0.6);
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(21);
        let s = generate_joint_sample(&th, 10, 8, 12, &mut rng).unwrap();
        let g = log_likelihood_grad(&th, &s);
        let mut arr = th.as_array();
        for i in 0..4 {
            let h = 1e-6 * arr[i];
            let save = arr[i];
            arr[i] = save + h;
            let up = log_likelihood(&ThetaVector::from_array(arr).unwrap(), &s);
            arr[i] = save - h;
            let dn = log_likelihood(&ThetaVector::from_array(arr).unwrap(), &s);
            arr[i] = save;
            let fd = (up - dn) / (2.0 * h);
            assert!((g[i] - fd).abs() < 1e-5 * (1.0 + fd.abs()), "coord {i}");
        }
    }

    #[test]
    fn constant_term_uses_exact_factorials() {
        let s = fluid_r10();
        // m = n = 10, m_r = 6, n_r = 4: ln(10! 10! / (4! 6!))
        let fact = |k: usize| (1..=k).map(|v| v as f64).product::<f64>();
        let expect = (fact(10) * fact(10) / (fact(4) * fact(6))).ln();
        assert!((ln_orderings_constant(&s) - expect).abs() < 1e-9);
        assert!(
            (log_likelihood_with_constant(&theta(1.0, 1.0, 1.0, 1.0), &s)
                - log_likelihood(&theta(1.0, 1.0, 1.0, 1.0), &s)
                - expect)
                .abs()
                < 1e-9
        );
    }
}
