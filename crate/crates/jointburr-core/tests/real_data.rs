//! Reproduction checks against the published reference analysis of the
//! insulating-fluid breakdown data (two groups of ten units, jointly
//! censored at r = 5 and r = 10).

use jointburr_core::data::{log_likelihood, log_likelihood_grad, JointSample, ThetaVector};
use jointburr_core::fit_bayes::{
    self, credible_interval, hpd_interval, importance_sample, GammaPriors, LossSpec,
};
use jointburr_core::fit_mle::{
    aci, fit_burr, fit_mle, information_variances, observed_information, MleFit, DEFAULT_MAX_ITER,
    DEFAULT_TOL,
};
use jointburr_core::model::ks_test;
use jointburr_core::predict::{bup, PredictionTarget};
use jointburr_core::shrink::{linear_shrink, shrink_pretest, ShrinkConfig};
use rand_core::SeedableRng;

mod reference {
    //! Values from the reference analysis, used as test fixtures.

    /// Breakdown times, population X.
    pub const X: [f64; 10] = [1.99, 0.64, 2.15, 1.08, 2.57, 0.93, 4.75, 0.82, 2.06, 0.49];
    /// Breakdown times, population Y.
    pub const Y: [f64; 10] = [8.11, 3.17, 5.55, 0.80, 0.20, 1.13, 6.63, 1.08, 2.44, 0.78];

    /// Joint experiment stopped at the 5th failure.
    pub const W5: [f64; 5] = [0.20, 0.49, 0.64, 0.78, 0.80];
    pub const S5: [bool; 5] = [false, true, true, false, false];

    /// Joint experiment stopped at the 10th failure (as published,
    /// including the tie at 1.08).
    pub const W10: [f64; 10] = [0.20, 0.49, 0.64, 0.78, 0.80, 0.82, 0.93, 1.08, 1.08, 1.13];
    pub const S10: [bool; 10] = [
        false, true, true, false, false, true, true, true, true, false,
    ];

    /// Marginal MLEs of the full samples.
    pub const X_MLE: (f64, f64) = (0.6032, 2.9909);
    pub const Y_MLE: (f64, f64) = (0.5790, 1.8414);

    /// Reference parameter estimates for the censored experiments
    /// (their EM fitter's output, consumed downstream as-is).
    pub const EM5: [f64; 4] = [0.2502, 1.8416, 1.2143, 3.2679];
    pub const EM10: [f64; 4] = [0.6542, 3.7840, 0.8250, 2.4788];

    /// Informative hyperparameters used for the Bayesian reanalysis.
    pub const IN_PRIORS: [f64; 8] = [3.0, 4.9735, 3.0, 1.003, 3.0, 5.1813, 2.0, 1.0861];

    /// 95% Wald intervals reported at r = 5 and r = 10.
    pub const ACI5: [(f64, f64); 4] = [(0.0, 0.6043), (0.0, 4.1180), (0.0, 3.1141), (0.0, 7.2777)];
    pub const ACI10: [(f64, f64); 4] = [
        (0.1296, 1.1788),
        (1.1173, 6.4507),
        (0.0090, 1.6410),
        (0.2765, 4.6812),
    ];

    /// Linear-shrinkage values for the r = 5 base estimates at w = 0.5.
    pub const LS5: [f64; 4] = [0.4251, 2.4208, 0.8922, 2.5839];
    /// Pretest-shrinkage values (reject on 1 and 2, accept on 3 and 4).
    pub const SP5: [f64; 4] = [0.2502, 1.8416, 0.8922, 2.5839];

    /// Point predictions of the next failures at r = 10.
    pub const BUP10: [f64; 2] = [1.2155, 1.3110];
}

fn sample_r5() -> JointSample {
    JointSample::new(reference::W5.to_vec(), reference::S5.to_vec(), 10, 10).unwrap()
}

fn sample_r10() -> JointSample {
    JointSample::new(reference::W10.to_vec(), reference::S10.to_vec(), 10, 10).unwrap()
}

fn in_priors() -> GammaPriors {
    let p = reference::IN_PRIORS;
    GammaPriors::informative(p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7]).unwrap()
}

#[test]
fn marginal_fits_match_reference() {
    let fx = fit_burr(&reference::X, 1e-9, DEFAULT_MAX_ITER).unwrap();
    assert!(fx.converged);
    assert!((fx.params.alpha - reference::X_MLE.0).abs() < 0.01);
    assert!((fx.params.beta - reference::X_MLE.1).abs() < 0.01);

    let fy = fit_burr(&reference::Y, 1e-9, DEFAULT_MAX_ITER).unwrap();
    assert!(fy.converged);
    assert!((fy.params.alpha - reference::Y_MLE.0).abs() < 0.01);
    assert!((fy.params.beta - reference::Y_MLE.1).abs() < 0.01);
}

#[test]
fn ks_fit_check_matches_reference() {
    let fx = fit_burr(&reference::X, 1e-9, DEFAULT_MAX_ITER).unwrap();
    let kx = ks_test(&reference::X, fx.params).unwrap();
    assert!(
        (kx.distance - 0.2312).abs() < 2e-3,
        "X distance {}",
        kx.distance
    );
    let px = kx.p_value.unwrap();
    assert!((px - 0.5819).abs() < 0.05, "X p-value {px}");

    let fy = fit_burr(&reference::Y, 1e-9, DEFAULT_MAX_ITER).unwrap();
    let ky = ks_test(&reference::Y, fy.params).unwrap();
    assert!(
        (ky.distance - 0.1512).abs() < 2e-3,
        "Y distance {}",
        ky.distance
    );
    let py = ky.p_value.unwrap();
    assert!((py - 0.9508).abs() < 0.05, "Y p-value {py}");
}

#[test]
fn case_classification_of_reference_data() {
    use jointburr_core::data::{classify_case, CensorCase};
    let s5 = sample_r5();
    assert_eq!(s5.m_r(), 2);
    assert_eq!(s5.n_r(), 3);
    assert_eq!(classify_case(&s5).unwrap(), CensorCase::Case3);
}

/// The joint fit is a genuine stationary point that dominates both the
/// reference estimates and random perturbations of itself.
#[test]
fn joint_fit_dominates_reference_point() {
    for s in [sample_r5(), sample_r10()] {
        let fit = fit_mle(&s, None, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert!(fit.converged);
        let ours = log_likelihood(&fit.theta_hat, &s);
        let reference_point = ThetaVector::from_array(if s.r() == 5 {
            reference::EM5
        } else {
            reference::EM10
        })
        .unwrap();
        let theirs = log_likelihood(&reference_point, &s);
        assert!(
            ours > theirs,
            "our optimum {ours} should dominate the reference point {theirs}"
        );
        // and the reference point has a visibly non-zero score, so the
        // discrepancy is in the reference fitter, not in this one
        let g = log_likelihood_grad(&reference_point, &s);
        assert!(
            g.iter().any(|v| v.abs() > 0.1),
            "reference score unexpectedly small: {g:?}"
        );
    }
}

/// Wald intervals computed at the reference parameter values reproduce
/// all sixteen published interval endpoints.
#[test]
fn wald_intervals_at_reference_point_match() {
    for (s, point, expect) in [
        (sample_r5(), reference::EM5, reference::ACI5),
        (sample_r10(), reference::EM10, reference::ACI10),
    ] {
        let theta = ThetaVector::from_array(point).unwrap();
        let info = observed_information(&theta, &s).unwrap();
        let fit = MleFit {
            theta_hat: theta,
            loglik: log_likelihood(&theta, &s),
            info,
            converged: true,
            iterations: 0,
            x_identified: true,
            y_identified: true,
        };
        let iv = aci(&fit, 0.95).unwrap();
        for i in 0..4 {
            assert!(
                (iv[i].0 - expect[i].0).abs() < 5e-4,
                "r={} lower {i}: {} vs {}",
                s.r(),
                iv[i].0,
                expect[i].0
            );
            assert!(
                (iv[i].1 - expect[i].1).abs() < 5e-4,
                "r={} upper {i}: {} vs {}",
                s.r(),
                iv[i].1,
                expect[i].1
            );
        }
    }
}

/// The rate constants of the conjugate updates, by hand arithmetic.
#[test]
fn derived_rates_match_hand_computation() {
    let s = sample_r5();
    let (l1, _, _, _) = fit_bayes::derived_rates(&s, &in_priors(), 1.0, 1.0);
    assert!((l1 - 2.1625).abs() < 5e-4, "L1 = {l1}");
}

/// Shrinkage tables: the guess vector back-solves consistently from the
/// published pairs (verified by inversion), and LS/SP reproduce.
#[test]
fn shrinkage_tables_reproduce() {
    let w = 0.5;
    // invert theta0 from the published (base, LS) pairs at r = 5 ...
    let mut theta0 = [0.0; 4];
    for i in 0..4 {
        theta0[i] = (reference::LS5[i] - (1.0 - w) * reference::EM5[i]) / w;
    }
    // ... and confirm the r = 10 pairs invert to the same guess
    let ls10 = [0.6271, 3.3920, 0.6975, 2.1894];
    for i in 0..4 {
        let other = (ls10[i] - (1.0 - w) * reference::EM10[i]) / w;
        assert!(
            (theta0[i] - other).abs() < 2e-3,
            "guess inversion disagrees on coordinate {i}: {} vs {other}",
            theta0[i]
        );
    }

    let cfg = ShrinkConfig::new(w, ThetaVector::from_array(theta0).unwrap(), 0.05).unwrap();
    let base = ThetaVector::from_array(reference::EM5).unwrap();
    let ls = linear_shrink(&base, &cfg);
    for i in 0..4 {
        assert!(
            (ls.as_array()[i] - reference::LS5[i]).abs() < 1e-4,
            "LS {i}"
        );
    }

    // SP uses the inverse-information variances at the same point
    let s = sample_r5();
    let info = observed_information(&base, &s).unwrap();
    let vars = information_variances(&info).unwrap();
    let sp = shrink_pretest(&base, &vars, s.r(), &cfg).unwrap();
    for i in 0..4 {
        assert!(
            (sp.as_array()[i] - reference::SP5[i]).abs() < 1e-4,
            "SP coordinate {i}: {} vs {}",
            sp.as_array()[i],
            reference::SP5[i]
        );
    }
    // rejection pattern: pulled back on 3 and 4 only
    assert_eq!(sp.as_array()[0], base.as_array()[0]);
    assert_eq!(sp.as_array()[1], base.as_array()[1]);
    assert_eq!(sp.as_array()[2], ls.as_array()[2]);
    assert_eq!(sp.as_array()[3], ls.as_array()[3]);
}

/// Conditional-expectation predictions evaluated at the reference
/// parameter values reproduce the published next-failure predictions.
#[test]
fn bup_at_reference_point_matches() {
    let s = sample_r10();
    let theta = ThetaVector::from_array(reference::EM10).unwrap();
    for (j, expect) in [(1usize, reference::BUP10[0]), (2, reference::BUP10[1])] {
        let got = bup(&theta, &s, &PredictionTarget::new(j)).unwrap();
        assert!((got - expect).abs() < 1e-3, "j = {j}: {got} vs {expect}");
    }
}

/// Bayesian interval machinery on the r = 10 data: posterior draws give
/// finite, ordered intervals with HPD no wider than equal tails, and
/// the informative posterior concentrates between prior and likelihood.
#[test]
fn bayesian_reanalysis_is_coherent() {
    let s = sample_r10();
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(99);
    let draws = importance_sample(&s, &in_priors(), 20_000, &mut rng).unwrap();
    assert!(draws.ess() > 10_000.0, "ess = {}", draws.ess());
    let se = fit_bayes::estimate(&draws, LossSpec::SquaredError).unwrap();

    // prior means equal the marginal MLEs by construction; the joint
    // posterior mean must land between prior and joint likelihood peaks
    let fit = fit_mle(&s, None, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
    let prior_means = [
        reference::IN_PRIORS[0] / reference::IN_PRIORS[1],
        reference::IN_PRIORS[2] / reference::IN_PRIORS[3],
        reference::IN_PRIORS[4] / reference::IN_PRIORS[5],
        reference::IN_PRIORS[6] / reference::IN_PRIORS[7],
    ];
    for i in 0..4 {
        let lo = prior_means[i].min(fit.theta_hat.as_array()[i]) * 0.85;
        let hi = prior_means[i].max(fit.theta_hat.as_array()[i]) * 1.15;
        assert!(
            se.as_array()[i] > lo && se.as_array()[i] < hi,
            "posterior mean {i} = {} outside [{lo}, {hi}]",
            se.as_array()[i]
        );
    }

    for coord in 0..4 {
        let (cl, cu) = credible_interval(&draws, coord, 0.95).unwrap();
        let (hl, hu) = hpd_interval(&draws, coord, 0.95).unwrap();
        assert!(cl < se.as_array()[coord] && se.as_array()[coord] < cu);
        assert!(hu - hl <= cu - cl + 1e-12);
    }
}

/// The diffuse-prior predictive interval is wider than the informative
/// one on the r = 5 experiment, and both satisfy their defining
/// survival equations.
#[test]
fn nin_prediction_interval_wider_than_in() {
    use jointburr_core::predict::BayesPredictive;

    let s = sample_r5();
    let target = PredictionTarget::new(1);
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(17);
    let in_draws = importance_sample(&s, &in_priors(), 4000, &mut rng).unwrap();
    let nin_draws =
        importance_sample(&s, &GammaPriors::quasi(1.0).unwrap(), 4000, &mut rng).unwrap();

    let bp_in = BayesPredictive::new(&in_draws, &s, &target).unwrap();
    let bp_nin = BayesPredictive::new(&nin_draws, &s, &target).unwrap();
    let iv_in = bp_in.equal_tail(0.95).unwrap();
    let iv_nin = bp_nin.equal_tail(0.95).unwrap();
    assert!(
        iv_nin.upper - iv_nin.lower > iv_in.upper - iv_in.lower,
        "NIN ({:.4},{:.4}) should be wider than IN ({:.4},{:.4})",
        iv_nin.lower,
        iv_nin.upper,
        iv_in.lower,
        iv_in.upper
    );
    for (bp, iv) in [(&bp_in, &iv_in), (&bp_nin, &iv_nin)] {
        assert!((bp.survival(iv.lower).unwrap() - 0.975).abs() < 1e-8);
        assert!((bp.survival(iv.upper).unwrap() - 0.025).abs() < 1e-8);
    }
}

/// LINEX orderings around the squared-error estimate on real data.
#[test]
fn loss_family_orderings_on_real_data() {
    let s = sample_r10();
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(4242);
    let draws = importance_sample(&s, &in_priors(), 5000, &mut rng).unwrap();
    let se = fit_bayes::estimate(&draws, LossSpec::SquaredError).unwrap();
    let neg = fit_bayes::estimate(&draws, LossSpec::Linex { v: -0.25 }).unwrap();
    let pos = fit_bayes::estimate(&draws, LossSpec::Linex { v: 0.5 }).unwrap();
    for i in 0..4 {
        assert!(neg.as_array()[i] >= se.as_array()[i]);
        assert!(pos.as_array()[i] <= se.as_array()[i]);
    }
}
