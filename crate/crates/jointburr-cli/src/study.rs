//! Monte Carlo study harness: replicated joint-censoring experiments
//! over `(m, n, r)` designs, producing bias, loss-matched MSE, relative
//! efficiency, interval length, and coverage tables.
//!
//! Each replication owns an independent, counter-derived random stream,
//! so results are reproducible under any thread count. Failed
//! replications (non-convergence, improper proposals, degenerate
//! weights) are excluded from the aggregates and counted, never
//! retried.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use jointburr_core::data::{generate_joint_sample, JointSample, ThetaVector};
use jointburr_core::fit_bayes::{
    self, credible_interval, hpd_interval, importance_sample, posterior_variances, GammaPriors,
    LossSpec, WeightedDraws,
};
use jointburr_core::fit_mle::{aci, fit_mle, information_variances, DEFAULT_MAX_ITER, DEFAULT_TOL};
use jointburr_core::predict::{bup, BayesPredictive, PredictionTarget};
use jointburr_core::shrink::{linear_shrink, shrink_pretest, ShrinkConfig};
use rand_core::SeedableRng;

/// One `(m, n, r)` experimental design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Design {
    pub m: usize,
    pub n: usize,
    pub r: usize,
}

impl Design {
    pub fn label(&self) -> String {
        format!("({},{},{})", self.m, self.n, self.r)
    }
}

/// Full study configuration. The defaults are the desk-scale settings;
/// a full-scale run is a config change (`n_s`, `draws_per_rep`, designs).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub theta_true: [f64; 4],
    pub designs: Vec<Design>,
    /// Replications per design.
    pub n_s: usize,
    /// Importance-sampling draws per replication.
    pub draws_per_rep: usize,
    /// Informative gamma hyperparameters `(a1,b1,c1,d1,a2,b2,c2,d2)`.
    pub informative: [f64; 8],
    /// Quasi-density exponent for the non-informative prior.
    pub quasi_gamma: f64,
    pub linex_v: Vec<f64>,
    pub ge_k: Vec<f64>,
    pub shrink_w: f64,
    pub theta0: [f64; 4],
    pub pretest_alpha: f64,
    /// Confidence/credibility level for every interval.
    pub level: f64,
    /// Future-failure steps to predict; empty disables prediction.
    pub predict_steps: Vec<usize>,
    /// Also compute prediction intervals (classical, CrI, HPD); costly.
    pub predict_intervals: bool,
    pub seed: u64,
    /// Worker threads; 0 uses the global default.
    pub parallelism: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            theta_true: [1.5, 1.0, 2.0, 0.5],
            designs: vec![
                Design {
                    m: 20,
                    n: 20,
                    r: 20,
                },
                Design {
                    m: 20,
                    n: 20,
                    r: 25,
                },
                Design {
                    m: 20,
                    n: 20,
                    r: 30,
                },
            ],
            n_s: 500,
            draws_per_rep: 2000,
            informative: [3.0, 2.0, 3.0, 3.0, 2.0, 1.0, 3.0, 6.0],
            quasi_gamma: 1.0,
            linex_v: vec![-0.25, 0.5],
            ge_k: vec![-0.25, 0.5],
            shrink_w: 0.5,
            theta0: [1.45, 0.99, 1.95, 0.45],
            pretest_alpha: 0.05,
            level: 0.95,
            predict_steps: vec![1, 2],
            predict_intervals: false,
            seed: 20240501,
            parallelism: 0,
        }
    }
}

/// Squared-error, LINEX, or generalized-entropy loss averaged over a
/// batch of estimates against one true value.
pub fn mse(loss: LossSpec, estimates: &[f64], truth: f64) -> f64 {
    if estimates.is_empty() {
        return f64::NAN;
    }
    let n = estimates.len() as f64;
    let total: f64 = estimates
        .iter()
        .map(|&e| match loss {
            LossSpec::SquaredError => (e - truth) * (e - truth),
            LossSpec::Linex { v } => {
                let d = e - truth;
                (v * d).exp() - v * d - 1.0
            }
            LossSpec::GenEntropy { k } => {
                let ratio = e / truth;
                ratio.powf(k) - k * ratio.ln() - 1.0
            }
        })
        .sum();
    total / n
}

/// `RMSE(base) / RMSE(shrunk)`; values above one favor the shrinkage
/// estimator.
pub fn relative_efficiency(rmse_base: f64, rmse_shrink: f64) -> Result<f64, jointburr_core::Error> {
    if !(rmse_shrink > 0.0) {
        return Err(jointburr_core::Error::ZeroVariance);
    }
    Ok(rmse_base / rmse_shrink)
}

/// Point-estimate aggregate for one estimator at one design.
#[derive(Debug, Clone, Serialize)]
pub struct EstimateRow {
    pub design: Design,
    pub estimator: String,
    pub bias: [f64; 4],
    pub mse: [f64; 4],
    pub rmse: [f64; 4],
    /// RMSE(base)/RMSE(this); present on LS/SP rows.
    pub re: Option<[f64; 4]>,
}

/// Interval aggregate (mean endpoints, mean length, empirical coverage).
#[derive(Debug, Clone, Serialize)]
pub struct IntervalRow {
    pub design: Design,
    pub label: String,
    pub lower: [f64; 4],
    pub upper: [f64; 4],
    pub length: [f64; 4],
    pub coverage: [f64; 4],
}

/// Point-prediction aggregate for one method and step `j`.
#[derive(Debug, Clone, Serialize)]
pub struct PredictionRow {
    pub design: Design,
    pub label: String,
    pub j: usize,
    pub mean_prediction: f64,
    pub mean_true: f64,
    pub bias: f64,
    pub mse: f64,
    pub interval: Option<IntervalSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct IntervalSummary {
    pub lower: f64,
    pub upper: f64,
    pub length: f64,
    pub coverage: f64,
}

#[derive(Debug, Clone, Serialize)]
pub enum MetricsRow {
    Estimate(EstimateRow),
    Interval(IntervalRow),
    Prediction(PredictionRow),
}

/// Per-design failure bookkeeping.
#[derive(Debug, Clone, Serialize)]
pub struct DesignOutcome {
    pub design: Design,
    pub replications: usize,
    /// Replications excluded entirely (generation or MLE stage failed).
    pub failed: usize,
    /// Replications whose informative-prior (resp. quasi-prior) Bayes
    /// stage failed (improper proposal, collapsed weights); excluded
    /// from that mode's aggregates only.
    pub bayes_failed: [usize; 2],
    pub failure_reasons: Vec<String>,
    pub degenerate_weight_reps: usize,
    pub elapsed_seconds: f64,
    /// Per-replication audit that every SP coordinate equaled either
    /// its base or the LS value exactly.
    pub sp_membership_violations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct StudyResult {
    pub config: ExperimentConfig,
    pub rows: Vec<MetricsRow>,
    pub outcomes: Vec<DesignOutcome>,
}

struct LossSet {
    labels: Vec<String>,
    specs: Vec<LossSpec>,
}

fn loss_set(cfg: &ExperimentConfig) -> LossSet {
    let mut labels = vec!["SE".to_string()];
    let mut specs = vec![LossSpec::SquaredError];
    for &v in &cfg.linex_v {
        labels.push(format!("LINEX(v={v})"));
        specs.push(LossSpec::Linex { v });
    }
    for &k in &cfg.ge_k {
        labels.push(format!("GE(k={k})"));
        specs.push(LossSpec::GenEntropy { k });
    }
    LossSet { labels, specs }
}

const PRIOR_MODES: [&str; 2] = ["IN", "NIN"];

struct RepBayes {
    estimates: Vec<[f64; 4]>, // per loss
    cri: [(f64, f64); 4],
    hpd: [(f64, f64); 4],
    degenerate: bool,
    predictions: Vec<Vec<f64>>, // per j, per loss
    pred_intervals: Vec<Option<((f64, f64), (f64, f64))>>, // per j: (CrI, HPD)
    // LS/SP per loss, using the weighted posterior variances
    ls: Vec<[f64; 4]>,
    sp: Vec<[f64; 4]>,
}

struct RepRecord {
    mle: [f64; 4],
    aci: [(f64, f64); 4],
    /// One entry per prior mode; a mode that failed (improper proposal,
    /// collapsed weights) is excluded from that mode's aggregates only.
    bayes: [Result<RepBayes, String>; 2],
    true_future: Vec<f64>,
    bup: Vec<f64>,
    classical_pi: Vec<Option<(f64, f64)>>,
    sp_violations: usize,
    ls_em: [f64; 4],
    sp_em: [f64; 4],
}

fn run_replication(
    cfg: &ExperimentConfig,
    losses: &LossSet,
    design: Design,
    rep: usize,
    design_idx: usize,
) -> Result<RepRecord, String> {
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(cfg.seed);
    // counter-based stream split: reproducible under any parallelism
    rand_chacha::ChaCha12Rng::set_stream(&mut rng, ((design_idx as u64) << 32) | rep as u64);
    let theta_true = ThetaVector::from_array(cfg.theta_true).map_err(|e| e.to_string())?;
    let max_j = cfg.predict_steps.iter().copied().max().unwrap_or(0);
    if design.r + max_j > design.m + design.n {
        return Err("prediction step exceeds total units".into());
    }
    // generate enough of the experiment to know the held-out truths
    let full = generate_joint_sample(&theta_true, design.m, design.n, design.r + max_j, &mut rng)
        .map_err(|e| e.to_string())?;
    let sample = full.truncated(design.r).map_err(|e| e.to_string())?;
    let true_future: Vec<f64> = cfg
        .predict_steps
        .iter()
        .map(|&j| full.w()[design.r + j - 1])
        .collect();

    let fit = fit_mle(&sample, None, DEFAULT_TOL, DEFAULT_MAX_ITER).map_err(|e| e.to_string())?;
    if !fit.converged {
        return Err("MLE did not converge".into());
    }
    if !(fit.x_identified && fit.y_identified) {
        return Err("a parameter pair was unidentified".into());
    }
    let mle_vars = information_variances(&fit.info).map_err(|e| e.to_string())?;
    let aci_iv = aci(&fit, cfg.level).map_err(|e| e.to_string())?;

    let shrink_cfg = ShrinkConfig::new(
        cfg.shrink_w,
        ThetaVector::from_array(cfg.theta0).map_err(|e| e.to_string())?,
        cfg.pretest_alpha,
    )
    .map_err(|e| e.to_string())?;

    let in_priors = GammaPriors::informative(
        cfg.informative[0],
        cfg.informative[1],
        cfg.informative[2],
        cfg.informative[3],
        cfg.informative[4],
        cfg.informative[5],
        cfg.informative[6],
        cfg.informative[7],
    )
    .map_err(|e| e.to_string())?;
    let nin_priors = GammaPriors::quasi(cfg.quasi_gamma).map_err(|e| e.to_string())?;

    let mut sp_violations = 0usize;
    let mut shrink_pair =
        |est: [f64; 4], vars: &[f64; 4]| -> Result<([f64; 4], [f64; 4]), String> {
            let tv = ThetaVector::from_array(est).map_err(|e| e.to_string())?;
            let ls_v = linear_shrink(&tv, &shrink_cfg).as_array();
            let sp_v = shrink_pretest(&tv, vars, design.r, &shrink_cfg)
                .map_err(|e| e.to_string())?
                .as_array();
            for i in 0..4 {
                if sp_v[i] != est[i] && sp_v[i] != ls_v[i] {
                    sp_violations += 1;
                }
            }
            Ok((ls_v, sp_v))
        };

    // each prior mode stands or falls on its own; the random stream is
    // consumed unconditionally so later stages stay aligned
    let run_mode = |priors: &GammaPriors,
                    rng: &mut rand_chacha::ChaCha12Rng,
                    shrink_pair: &mut dyn FnMut(
        [f64; 4],
        &[f64; 4],
    ) -> Result<([f64; 4], [f64; 4]), String>|
     -> Result<RepBayes, String> {
        let draws = importance_sample(&sample, priors, cfg.draws_per_rep, rng)
            .map_err(|e| e.to_string())?;
        let mut estimates = Vec::with_capacity(losses.specs.len());
        for &spec in &losses.specs {
            estimates.push(
                fit_bayes::estimate(&draws, spec)
                    .map_err(|e| e.to_string())?
                    .as_array(),
            );
        }
        let mut cri = [(0.0, 0.0); 4];
        let mut hpd = [(0.0, 0.0); 4];
        for coord in 0..4 {
            cri[coord] = credible_interval(&draws, coord, cfg.level).map_err(|e| e.to_string())?;
            hpd[coord] = hpd_interval(&draws, coord, cfg.level).map_err(|e| e.to_string())?;
        }
        let (predictions, pred_intervals) =
            bayes_predictions(cfg, losses, &sample, &draws).map_err(|e| e.to_string())?;
        let post_vars = posterior_variances(&draws);
        let mut ls = Vec::with_capacity(estimates.len());
        let mut sp = Vec::with_capacity(estimates.len());
        for est in &estimates {
            let (l, s) = shrink_pair(*est, &post_vars)?;
            ls.push(l);
            sp.push(s);
        }
        Ok(RepBayes {
            estimates,
            cri,
            hpd,
            degenerate: draws.is_degenerate(),
            predictions,
            pred_intervals,
            ls,
            sp,
        })
    };

    let bayes = [
        run_mode(&in_priors, &mut rng, &mut shrink_pair),
        run_mode(&nin_priors, &mut rng, &mut shrink_pair),
    ];

    // classical predictions
    let mut bup_vals = Vec::new();
    let mut classical_iv = Vec::new();
    for &j in &cfg.predict_steps {
        let target = PredictionTarget::new(j);
        bup_vals.push(bup(&fit.theta_hat, &sample, &target).map_err(|e| e.to_string())?);
        if cfg.predict_intervals {
            let pi =
                jointburr_core::predict::classical_pi(&fit.theta_hat, &sample, &target, cfg.level)
                    .map_err(|e| e.to_string())?;
            classical_iv.push(Some((pi.lower, pi.upper)));
        } else {
            classical_iv.push(None);
        }
    }

    let (ls_em, sp_em) = shrink_pair(fit.theta_hat.as_array(), &mle_vars)?;

    Ok(RepRecord {
        mle: fit.theta_hat.as_array(),
        aci: aci_iv,
        bayes,
        true_future,
        bup: bup_vals,
        classical_pi: classical_iv,
        sp_violations,
        ls_em,
        sp_em,
    })
}

#[allow(clippy::type_complexity)]
fn bayes_predictions(
    cfg: &ExperimentConfig,
    losses: &LossSet,
    sample: &JointSample,
    draws: &WeightedDraws,
) -> jointburr_core::Result<(Vec<Vec<f64>>, Vec<Option<((f64, f64), (f64, f64))>>)> {
    let mut per_j = Vec::new();
    let mut ivs = Vec::new();
    for &j in &cfg.predict_steps {
        let target = PredictionTarget::new(j);
        let bp = BayesPredictive::new(draws, sample, &target)?;
        per_j.push(bp.predict(&losses.specs)?);
        if cfg.predict_intervals {
            let et = bp.equal_tail(cfg.level)?;
            let hp = bp.hpd(cfg.level)?;
            ivs.push(Some(((et.lower, et.upper), (hp.lower, hp.upper))));
        } else {
            ivs.push(None);
        }
    }
    Ok((per_j, ivs))
}

/// Run the full study: every design, every replication, aggregated
/// rows. Deterministic given `config.seed`, independent of thread
/// count.
pub fn run_study(config: &ExperimentConfig) -> Result<StudyResult, String> {
    let losses = loss_set(config);
    let mut rows = Vec::new();
    let mut outcomes = Vec::new();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.parallelism)
        .build()
        .map_err(|e| e.to_string())?;

    for (design_idx, &design) in config.designs.iter().enumerate() {
        let begun = std::time::Instant::now();
        let reps: Vec<Result<RepRecord, String>> = pool.install(|| {
            (0..config.n_s)
                .into_par_iter()
                .map(|rep| run_replication(config, &losses, design, rep, design_idx))
                .collect()
        });
        let mut ok: Vec<&RepRecord> = Vec::new();
        let mut failure_reasons = Vec::new();
        for r in &reps {
            match r {
                Ok(rec) => ok.push(rec),
                Err(why) => failure_reasons.push(why.clone()),
            }
        }
        if ok.is_empty() {
            return Err(format!(
                "design {} produced no successful replications (first reason: {})",
                design.label(),
                failure_reasons.first().cloned().unwrap_or_default()
            ));
        }
        let mut bayes_failed = [0usize; 2];
        for r in &ok {
            for (mode, res) in r.bayes.iter().enumerate() {
                if let Err(why) = res {
                    bayes_failed[mode] += 1;
                    failure_reasons.push(format!("{}: {why}", PRIOR_MODES[mode]));
                }
            }
        }
        aggregate_design(config, &losses, design, &ok, &mut rows);
        outcomes.push(DesignOutcome {
            design,
            replications: config.n_s,
            failed: failure_reasons
                .iter()
                .filter(|m| !m.starts_with("IN:") && !m.starts_with("NIN:"))
                .count(),
            bayes_failed,
            failure_reasons,
            degenerate_weight_reps: ok
                .iter()
                .filter(|r| {
                    r.bayes
                        .iter()
                        .any(|b| b.as_ref().map(|x| x.degenerate).unwrap_or(false))
                })
                .count(),
            elapsed_seconds: begun.elapsed().as_secs_f64(),
            sp_membership_violations: ok.iter().map(|r| r.sp_violations).sum(),
        });
    }

    Ok(StudyResult {
        config: config.clone(),
        rows,
        outcomes,
    })
}

fn aggregate_design(
    cfg: &ExperimentConfig,
    losses: &LossSet,
    design: Design,
    ok: &[&RepRecord],
    rows: &mut Vec<MetricsRow>,
) {
    let truth = cfg.theta_true;
    let n_loss = losses.specs.len();

    // estimate / LS / SP rows: per base, over the replications where
    // that base is available
    struct BaseSeries {
        label: String,
        spec: LossSpec,
        est: [Vec<f64>; 4],
        ls: [Vec<f64>; 4],
        sp: [Vec<f64>; 4],
    }
    let mut bases: Vec<BaseSeries> = Vec::new();
    bases.push(BaseSeries {
        label: "MLE".into(),
        spec: LossSpec::SquaredError,
        est: Default::default(),
        ls: Default::default(),
        sp: Default::default(),
    });
    for mode in PRIOR_MODES {
        for (li, l) in losses.labels.iter().enumerate() {
            bases.push(BaseSeries {
                label: format!("{mode}-{l}"),
                spec: losses.specs[li],
                est: Default::default(),
                ls: Default::default(),
                sp: Default::default(),
            });
        }
    }
    for r in ok {
        for i in 0..4 {
            bases[0].est[i].push(r.mle[i]);
            bases[0].ls[i].push(r.ls_em[i]);
            bases[0].sp[i].push(r.sp_em[i]);
        }
        for (mode_idx, res) in r.bayes.iter().enumerate() {
            let Ok(block) = res else { continue };
            for li in 0..n_loss {
                let b = 1 + mode_idx * n_loss + li;
                for i in 0..4 {
                    bases[b].est[i].push(block.estimates[li][i]);
                    bases[b].ls[i].push(block.ls[li][i]);
                    bases[b].sp[i].push(block.sp[li][i]);
                }
            }
        }
    }
    let mut shrink_rows = Vec::new();
    for base in &bases {
        let mut bias = [0.0; 4];
        let mut msev = [0.0; 4];
        let mut rmse = [0.0; 4];
        for i in 0..4 {
            bias[i] = mean(&base.est[i]) - truth[i];
            msev[i] = mse(base.spec, &base.est[i], truth[i]);
            rmse[i] = msev[i].sqrt();
        }
        for (kind, series) in [("LS", &base.ls), ("SP", &base.sp)] {
            let mut sb = [0.0; 4];
            let mut sm = [0.0; 4];
            let mut sr = [0.0; 4];
            let mut re = [0.0; 4];
            for i in 0..4 {
                sb[i] = mean(&series[i]) - truth[i];
                sm[i] = mse(base.spec, &series[i], truth[i]);
                sr[i] = sm[i].sqrt();
                re[i] = relative_efficiency(rmse[i], sr[i]).unwrap_or(f64::NAN);
            }
            shrink_rows.push(MetricsRow::Estimate(EstimateRow {
                design,
                estimator: format!("{kind}[{}]", base.label),
                bias: sb,
                mse: sm,
                rmse: sr,
                re: Some(re),
            }));
        }
        rows.push(MetricsRow::Estimate(EstimateRow {
            design,
            estimator: base.label.clone(),
            bias,
            mse: msev,
            rmse,
            re: None,
        }));
    }
    rows.append(&mut shrink_rows);

    // intervals
    rows.push(interval_row(design, truth, ok, "ACI".into(), &|r| {
        Some(r.aci)
    }));
    for (mode_idx, mode) in PRIOR_MODES.iter().enumerate() {
        rows.push(interval_row(
            design,
            truth,
            ok,
            format!("{mode}-CrI"),
            &|r| r.bayes[mode_idx].as_ref().ok().map(|b| b.cri),
        ));
        rows.push(interval_row(
            design,
            truth,
            ok,
            format!("{mode}-HPD"),
            &|r| r.bayes[mode_idx].as_ref().ok().map(|b| b.hpd),
        ));
    }

    // predictions: each row pairs its own available predictions with
    // the matching held-out truths
    for (jj, &j) in cfg.predict_steps.iter().enumerate() {
        let pred_row = |label: String,
                        pairs: Vec<(f64, f64)>,
                        iv: Option<IntervalSummary>|
         -> Option<MetricsRow> {
            if pairs.is_empty() {
                return None;
            }
            let preds: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let trues: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            let mean_true = mean(&trues);
            let errs: Vec<f64> = pairs.iter().map(|(p, t)| p - t).collect();
            Some(MetricsRow::Prediction(PredictionRow {
                design,
                label,
                j,
                mean_prediction: mean(&preds),
                mean_true,
                bias: mean(&preds) - mean_true,
                mse: mse(LossSpec::SquaredError, &errs, 0.0),
                interval: iv,
            }))
        };
        let bup_pairs: Vec<(f64, f64)> =
            ok.iter().map(|r| (r.bup[jj], r.true_future[jj])).collect();
        let classical_iv = summarize_interval(ok, jj, &|r| r.classical_pi[jj]);
        rows.extend(pred_row("BUP".into(), bup_pairs, classical_iv));
        for (mode_idx, mode) in PRIOR_MODES.iter().enumerate() {
            for (li, loss_label) in losses.labels.iter().enumerate() {
                let pairs: Vec<(f64, f64)> = ok
                    .iter()
                    .filter_map(|r| {
                        r.bayes[mode_idx]
                            .as_ref()
                            .ok()
                            .map(|b| (b.predictions[jj][li], r.true_future[jj]))
                    })
                    .collect();
                let iv = if li == 0 {
                    summarize_interval(ok, jj, &|r| {
                        r.bayes[mode_idx]
                            .as_ref()
                            .ok()
                            .and_then(|b| b.pred_intervals[jj].map(|p| p.0))
                    })
                } else {
                    None
                };
                rows.extend(pred_row(format!("{mode}-{loss_label}"), pairs, iv));
            }
            let hpd_iv = summarize_interval(ok, jj, &|r| {
                r.bayes[mode_idx]
                    .as_ref()
                    .ok()
                    .and_then(|b| b.pred_intervals[jj].map(|p| p.1))
            });
            if let Some(iv) = hpd_iv {
                rows.push(MetricsRow::Prediction(PredictionRow {
                    design,
                    label: format!("{mode}-HPD"),
                    j,
                    mean_prediction: f64::NAN,
                    mean_true: f64::NAN,
                    bias: f64::NAN,
                    mse: f64::NAN,
                    interval: Some(iv),
                }));
            }
        }
    }
}

fn interval_row(
    design: Design,
    truth: [f64; 4],
    ok: &[&RepRecord],
    label: String,
    get: &dyn Fn(&RepRecord) -> Option<[(f64, f64); 4]>,
) -> MetricsRow {
    let mut lower = [0.0; 4];
    let mut upper = [0.0; 4];
    let mut length = [0.0; 4];
    let mut coverage = [0.0; 4];
    let mut count = 0usize;
    for r in ok {
        let Some(iv) = get(r) else { continue };
        count += 1;
        for i in 0..4 {
            lower[i] += iv[i].0;
            upper[i] += iv[i].1;
            length[i] += iv[i].1 - iv[i].0;
            if iv[i].0 <= truth[i] && truth[i] <= iv[i].1 {
                coverage[i] += 1.0;
            }
        }
    }
    let nf = (count as f64).max(1.0);
    for i in 0..4 {
        lower[i] /= nf;
        upper[i] /= nf;
        length[i] /= nf;
        coverage[i] /= nf;
    }
    MetricsRow::Interval(IntervalRow {
        design,
        label,
        lower,
        upper,
        length,
        coverage,
    })
}

fn summarize_interval(
    ok: &[&RepRecord],
    jj: usize,
    get: &dyn Fn(&RepRecord) -> Option<(f64, f64)>,
) -> Option<IntervalSummary> {
    let mut lower = 0.0;
    let mut upper = 0.0;
    let mut length = 0.0;
    let mut coverage = 0.0;
    let mut count = 0usize;
    for r in ok {
        let Some((l, u)) = get(r) else { continue };
        let t = r.true_future[jj];
        lower += l;
        upper += u;
        length += u - l;
        if l <= t && t <= u {
            coverage += 1.0;
        }
        count += 1;
    }
    if count == 0 {
        return None;
    }
    let nf = count as f64;
    Some(IntervalSummary {
        lower: lower / nf,
        upper: upper / nf,
        length: length / nf,
        coverage: coverage / nf,
    })
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.iter().sum::<f64>() / v.len() as f64
}

impl StudyResult {
    /// Find an estimate row.
    pub fn estimate(&self, design: Design, estimator: &str) -> Option<&EstimateRow> {
        self.rows.iter().find_map(|r| match r {
            MetricsRow::Estimate(e) if e.design == design && e.estimator == estimator => Some(e),
            _ => None,
        })
    }

    /// Find an interval row.
    pub fn interval(&self, design: Design, label: &str) -> Option<&IntervalRow> {
        self.rows.iter().find_map(|r| match r {
            MetricsRow::Interval(e) if e.design == design && e.label == label => Some(e),
            _ => None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mse_reference_values() {
        let se = LossSpec::SquaredError;
        assert_eq!(mse(se, &[2.0, 2.0, 2.0], 2.0), 0.0);
        assert_eq!(mse(LossSpec::Linex { v: 0.7 }, &[3.0; 5], 3.0), 0.0);
        assert_eq!(mse(LossSpec::GenEntropy { k: -0.25 }, &[3.0; 5], 3.0), 0.0);
        assert!((mse(se, &[1.0, 3.0], 2.0) - 1.0).abs() < 1e-15);
        let lin = mse(LossSpec::Linex { v: 0.5 }, &[3.0], 2.0);
        assert!((lin - (0.5f64.exp() - 1.5)).abs() < 1e-12);
        assert!((lin - 0.148_721_270_700_128_15).abs() < 1e-12);
    }

    #[test]
    fn re_reference_values() {
        assert_eq!(relative_efficiency(1.0, 1.0).unwrap(), 1.0);
        assert_eq!(relative_efficiency(2.0, 1.0).unwrap(), 2.0);
        assert!(relative_efficiency(1.0, 0.0).is_err());
    }

    #[test]
    fn tiny_study_is_deterministic() {
        let cfg = ExperimentConfig {
            designs: vec![Design {
                m: 12,
                n: 12,
                r: 16,
            }],
            n_s: 4,
            draws_per_rep: 400,
            predict_steps: vec![1],
            parallelism: 2,
            ..Default::default()
        };
        let a = run_study(&cfg).unwrap();
        let b = run_study(&ExperimentConfig {
            parallelism: 1,
            ..cfg.clone()
        })
        .unwrap();
        let ja = serde_json::to_string(&a.rows).unwrap();
        let jb = serde_json::to_string(&b.rows).unwrap();
        assert_eq!(ja, jb, "aggregation depends on parallelism");
    }

    #[test]
    fn failed_replications_are_counted_not_hidden() {
        // prediction step beyond the total sample size fails every rep
        let cfg = ExperimentConfig {
            designs: vec![Design { m: 3, n: 3, r: 6 }],
            n_s: 2,
            draws_per_rep: 100,
            predict_steps: vec![1],
            ..Default::default()
        };
        assert!(run_study(&cfg).is_err());
    }

    /// Growing the replication count by 10x shrinks the batch-to-batch
    /// standard error of the reported bias by roughly sqrt(10).
    #[test]
    fn bias_standard_error_scales_with_replications() {
        let design = Design {
            m: 10,
            n: 10,
            r: 14,
        };
        let batch_sd = |n_s: usize, batches: u64| -> f64 {
            let vals: Vec<f64> = (0..batches)
                .map(|b| {
                    let cfg = ExperimentConfig {
                        designs: vec![design],
                        n_s,
                        draws_per_rep: 200,
                        predict_steps: vec![],
                        seed: 5000 + b,
                        ..Default::default()
                    };
                    let res = run_study(&cfg).unwrap();
                    // the MLE bias of theta4 is the most stable metric
                    res.estimate(design, "MLE").unwrap().bias[3]
                })
                .collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            (vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                / (vals.len() - 1) as f64)
                .sqrt()
        };
        let sd_small = batch_sd(100, 8);
        let sd_large = batch_sd(1000, 8);
        let ratio = sd_small / sd_large;
        // sqrt(10) ~ 3.16, with generous slack for 8-batch noise
        assert!(
            (1.5..=7.0).contains(&ratio),
            "sd ratio {ratio} (sd100 {sd_small}, sd1000 {sd_large})"
        );
    }
}
