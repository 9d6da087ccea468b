//! Command-line surface: `fit`, `predict`, `study`, and `simulate`.
//!
//! Exit codes: 0 success, 2 input error, 3 numerical failure,
//! 4 study finished with some replications failed.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand_core::SeedableRng;
use serde::Serialize;

use jointburr_core::data::{generate_joint_sample, JointSample, ThetaVector};
use jointburr_core::fit_bayes::{
    credible_interval, hpd_interval, importance_sample, posterior_variances, GammaPriors, LossSpec,
    WeightedDraws,
};
use jointburr_core::fit_mle::{
    aci, fit_burr, fit_mle, information_variances, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use jointburr_core::model::ks_test;
use jointburr_core::predict::{BayesPredictive, ClassicalPredictive, PredictionTarget};
use jointburr_core::shrink::{linear_shrink, shrink_pretest, ShrinkConfig};

use crate::io::{self, CsvTable};
use crate::report;
use crate::study::{run_study, ExperimentConfig};

#[derive(Parser, Debug)]
#[command(
    name = "jointburr",
    about = "Inference for two Burr-XII populations under joint type-II censoring",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Fit a joint censored sample: MLE + ACI, Bayesian estimates,
    /// credible/HPD intervals, and shrinkage estimators.
    Fit(FitArgs),
    /// Predict future failure times from a joint censored sample.
    Predict(PredictArgs),
    /// Run a Monte Carlo study from a JSON configuration.
    Study(StudyArgs),
    /// Simulate a joint type-II censored sample to CSV.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug)]
pub struct CommonBayes {
    /// Informative gamma hyperparameters a1,b1,c1,d1,a2,b2,c2,d2.
    #[arg(long, value_parser = parse_f64_list::<8>)]
    pub priors: Option<[f64; 8]>,
    /// Quasi-density prior exponent (Jeffreys at 1).
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Extra losses beyond squared error, e.g. `linex:v=0.5`, `ge:k=-0.25`.
    #[arg(long = "loss", value_parser = parse_loss)]
    pub losses: Vec<LossSpec>,
    /// Importance-sampling draw count.
    #[arg(long = "D", alias = "draws", default_value_t = 10_000)]
    pub draws: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Sample CSV with header `w,s`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    /// Use only the first r failures of the file.
    #[arg(long)]
    pub r: Option<usize>,
    #[command(flatten)]
    pub bayes: CommonBayes,
    /// Interval level.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Shrinkage intensity.
    #[arg(long)]
    pub w: Option<f64>,
    /// Shrinkage guess theta0 as t1,t2,t3,t4.
    #[arg(long, value_parser = parse_f64_list::<4>)]
    pub theta0: Option<[f64; 4]>,
    /// Pretest size.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Marginal (uncensored) sample to fit and K-S test, population X.
    #[arg(long)]
    pub marginal_x: Option<PathBuf>,
    /// Marginal (uncensored) sample to fit and K-S test, population Y.
    #[arg(long)]
    pub marginal_y: Option<PathBuf>,
    /// Also export the posterior draws per prior mode.
    #[arg(long, default_value_t = false)]
    pub export_draws: bool,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
    pub format: String,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub r: Option<usize>,
    /// Steps ahead, e.g. `--j 1,2`.
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2])]
    pub j: Vec<usize>,
    #[command(flatten)]
    pub bayes: CommonBayes,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Compute classical/credible/HPD prediction intervals.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub intervals: bool,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
    pub format: String,
}

#[derive(Args, Debug)]
pub struct StudyArgs {
    /// JSON configuration file (defaults apply to missing fields).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override replication count.
    #[arg(long)]
    pub ns: Option<usize>,
    /// Override importance-sample size per replication.
    #[arg(long = "D", alias = "draws")]
    pub draws: Option<usize>,
    #[arg(long, default_value = "study-out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// True parameters t1,t2,t3,t4.
    #[arg(long, value_parser = parse_f64_list::<4>, default_value = "1.5,1,2,0.5")]
    pub theta: [f64; 4],
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub r: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV path (a `.meta.json` sidecar is written next to it).
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_f64_list<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(format!("expected {N} comma-separated numbers"));
    }
    let mut out = [0.0; N];
    for (i, p) in parts.iter().enumerate() {
        out[i] = p.parse().map_err(|_| format!("'{p}' is not a number"))?;
    }
    Ok(out)
}

/// Parse `se`, `linex:v=0.5`, or `ge:k=-0.25`.
pub fn parse_loss(s: &str) -> Result<LossSpec, String> {
    let lower = s.to_ascii_lowercase();
    if lower == "se" {
        return Ok(LossSpec::SquaredError);
    }
    if let Some(rest) = lower.strip_prefix("linex:v=") {
        let v: f64 = rest
            .parse()
            .map_err(|_| format!("bad LINEX shape '{rest}'"))?;
        return Ok(LossSpec::Linex { v });
    }
    if let Some(rest) = lower.strip_prefix("ge:k=") {
        let k: f64 = rest.parse().map_err(|_| format!("bad GE shape '{rest}'"))?;
        return Ok(LossSpec::GenEntropy { k });
    }
    Err(format!(
        "unrecognized loss '{s}' (expected se, linex:v=<v>, or ge:k=<k>)"
    ))
}

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_PARTIAL: i32 = 4;

#[derive(Debug)]
pub enum CmdError {
    Input(String),
    Numeric(String),
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Input(_) => EXIT_INPUT,
            CmdError::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

impl std::fmt::Display for CmdError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CmdError::Input(m) => write!(f, "input error: {m}"),
            CmdError::Numeric(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

fn input_err<E: std::fmt::Display>(e: E) -> CmdError {
    CmdError::Input(e.to_string())
}

fn numeric_err<E: std::fmt::Display>(e: E) -> CmdError {
    CmdError::Numeric(e.to_string())
}

/// Dispatch a parsed command; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let outcome = match cli.command {
        Command::Fit(args) => cmd_fit(&args),
        Command::Predict(args) => cmd_predict(&args),
        Command::Study(args) => cmd_study(&args),
        Command::Simulate(args) => cmd_simulate(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

struct LossMenu {
    labels: Vec<String>,
    specs: Vec<LossSpec>,
}

fn loss_menu(extra: &[LossSpec]) -> LossMenu {
    let mut labels = vec!["SE".to_string()];
    let mut specs = vec![LossSpec::SquaredError];
    for &l in extra {
        match l {
            LossSpec::SquaredError => {}
            LossSpec::Linex { v } => {
                labels.push(format!("LINEX(v={v})"));
                specs.push(l);
            }
            LossSpec::GenEntropy { k } => {
                labels.push(format!("GE(k={k})"));
                specs.push(l);
            }
        }
    }
    LossMenu { labels, specs }
}

/// Prior modes selected by the flags: NIN always, IN when `--priors`
/// was supplied.
fn prior_menu(bayes: &CommonBayes) -> Result<Vec<(String, GammaPriors)>, CmdError> {
    let mut menu = Vec::new();
    if let Some(p) = bayes.priors {
        menu.push((
            "IN".to_string(),
            GammaPriors::informative(p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7])
                .map_err(input_err)?,
        ));
    }
    menu.push((
        "NIN".to_string(),
        GammaPriors::quasi(bayes.gamma).map_err(input_err)?,
    ));
    Ok(menu)
}

fn load_sample(
    input: &Path,
    m: usize,
    n: usize,
    r: Option<usize>,
) -> Result<JointSample, CmdError> {
    let s = io::read_sample(input, m, n).map_err(input_err)?;
    match r {
        Some(r) => s.truncated(r).map_err(input_err),
        None => Ok(s),
    }
}

fn audit_lines(args_desc: &str, seed: u64) -> Vec<String> {
    vec![format!("seed: {seed}"), format!("invocation: {args_desc}")]
}

#[derive(Serialize)]
struct FitReport {
    seed: u64,
    level: f64,
    mle: MleBlock,
    marginals: Vec<MarginalBlock>,
    bayes: Vec<BayesBlock>,
    shrinkage: Vec<ShrinkBlock>,
}

#[derive(Serialize)]
struct MleBlock {
    theta: [f64; 4],
    loglik: f64,
    converged: bool,
    aci: [(f64, f64); 4],
}

#[derive(Serialize)]
struct MarginalBlock {
    population: String,
    alpha: f64,
    beta: f64,
    ks_distance: f64,
    ks_p_value: Option<f64>,
}

#[derive(Serialize)]
struct BayesBlock {
    prior: String,
    ess: f64,
    degenerate_weights: bool,
    estimates: Vec<(String, [f64; 4])>,
    cri: [(f64, f64); 4],
    hpd: [(f64, f64); 4],
}

#[derive(Serialize)]
struct ShrinkBlock {
    base: String,
    ls: [f64; 4],
    sp: [f64; 4],
}

fn cmd_fit(args: &FitArgs) -> Result<i32, CmdError> {
    let sample = load_sample(&args.input, args.m, args.n, args.r)?;
    let losses = loss_menu(&args.bayes.losses);
    let fit = fit_mle(&sample, None, DEFAULT_TOL, DEFAULT_MAX_ITER).map_err(numeric_err)?;
    let aci_iv = aci(&fit, args.level).map_err(numeric_err)?;
    let mle_vars = information_variances(&fit.info).map_err(numeric_err)?;

    let mut marginals = Vec::new();
    for (pop, path) in [("X", &args.marginal_x), ("Y", &args.marginal_y)] {
        if let Some(path) = path {
            let text = std::fs::read_to_string(path).map_err(input_err)?;
            let data: Vec<f64> = text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#') && *l != "x")
                .map(|l| l.parse::<f64>().map_err(|_| format!("bad value '{l}'")))
                .collect::<Result<_, _>>()
                .map_err(input_err)?;
            let bf = fit_burr(&data, 1e-9, DEFAULT_MAX_ITER).map_err(numeric_err)?;
            let ks = ks_test(&data, bf.params).map_err(numeric_err)?;
            marginals.push(MarginalBlock {
                population: pop.to_string(),
                alpha: bf.params.alpha,
                beta: bf.params.beta,
                ks_distance: ks.distance,
                ks_p_value: ks.p_value,
            });
        }
    }

    let audit = audit_lines(
        &format!(
            "fit --input {} --m {} --n {}{}",
            args.input.display(),
            args.m,
            args.n,
            args.r.map(|r| format!(" --r {r}")).unwrap_or_default()
        ),
        args.bayes.seed,
    );

    let mut bayes_blocks = Vec::new();
    let mut draws_by_mode: Vec<(String, WeightedDraws)> = Vec::new();
    for (mode, priors) in prior_menu(&args.bayes)? {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(args.bayes.seed);
        let draws =
            importance_sample(&sample, &priors, args.bayes.draws, &mut rng).map_err(numeric_err)?;
        let mut estimates = Vec::new();
        for (label, &spec) in losses.labels.iter().zip(&losses.specs) {
            estimates.push((
                label.clone(),
                jointburr_core::fit_bayes::estimate(&draws, spec)
                    .map_err(numeric_err)?
                    .as_array(),
            ));
        }
        let mut cri = [(0.0, 0.0); 4];
        let mut hpd = [(0.0, 0.0); 4];
        for coord in 0..4 {
            cri[coord] = credible_interval(&draws, coord, args.level).map_err(numeric_err)?;
            hpd[coord] = hpd_interval(&draws, coord, args.level).map_err(numeric_err)?;
        }
        bayes_blocks.push(BayesBlock {
            prior: mode.clone(),
            ess: draws.ess(),
            degenerate_weights: draws.is_degenerate(),
            estimates,
            cri,
            hpd,
        });
        draws_by_mode.push((mode, draws));
    }

    // shrinkage wrappers for every base estimator
    let mut shrink_blocks = Vec::new();
    if let (Some(w), Some(theta0)) = (args.w, args.theta0) {
        let cfg = ShrinkConfig::new(
            w,
            ThetaVector::from_array(theta0).map_err(input_err)?,
            args.alpha,
        )
        .map_err(input_err)?;
        let mut push = |base: String, est: [f64; 4], vars: &[f64; 4]| -> Result<(), CmdError> {
            let tv = ThetaVector::from_array(est).map_err(numeric_err)?;
            shrink_blocks.push(ShrinkBlock {
                base,
                ls: linear_shrink(&tv, &cfg).as_array(),
                sp: shrink_pretest(&tv, vars, sample.r(), &cfg)
                    .map_err(numeric_err)?
                    .as_array(),
            });
            Ok(())
        };
        push("MLE".into(), fit.theta_hat.as_array(), &mle_vars)?;
        for (block, (mode, draws)) in bayes_blocks.iter().zip(&draws_by_mode) {
            let post_vars = posterior_variances(draws);
            for (label, est) in &block.estimates {
                push(format!("{mode}-{label}"), *est, &post_vars)?;
            }
        }
    }

    let report = FitReport {
        seed: args.bayes.seed,
        level: args.level,
        mle: MleBlock {
            theta: fit.theta_hat.as_array(),
            loglik: fit.loglik,
            converged: fit.converged,
            aci: aci_iv,
        },
        marginals,
        bayes: bayes_blocks,
        shrinkage: shrink_blocks,
    };

    std::fs::create_dir_all(&args.out).map_err(input_err)?;
    if args.format == "json" {
        std::fs::write(
            args.out.join("fit.json"),
            serde_json::to_string_pretty(&report).expect("report serializes"),
        )
        .map_err(input_err)?;
    } else {
        write_fit_csv(&args.out, &report, &audit).map_err(input_err)?;
    }
    if args.export_draws {
        for (mode, draws) in &draws_by_mode {
            std::fs::write(
                args.out.join(format!("draws_{}.csv", mode.to_lowercase())),
                io::draws_to_csv(draws, &audit),
            )
            .map_err(input_err)?;
        }
    }
    Ok(EXIT_OK)
}

fn write_fit_csv(dir: &Path, report: &FitReport, audit: &[String]) -> std::io::Result<()> {
    let mut est = CsvTable::new(audit, "estimator,theta1,theta2,theta3,theta4");
    let row4 = |label: &str, v: &[f64; 4]| {
        let mut cells = vec![label.to_string()];
        cells.extend(v.iter().map(|x| report::fmt(*x)));
        cells
    };
    est.row(&row4("MLE", &report.mle.theta));
    for b in &report.bayes {
        for (label, v) in &b.estimates {
            est.row(&row4(&format!("{}-{}", b.prior, label), v));
        }
    }
    std::fs::write(dir.join("estimates.csv"), est.finish())?;

    let mut iv = CsvTable::new(audit, "method,param,lower,upper,length");
    let mut push_iv = |label: &str, vals: &[(f64, f64); 4]| {
        for (i, (l, u)) in vals.iter().enumerate() {
            iv.row(&[
                label.to_string(),
                format!("theta{}", i + 1),
                report::fmt(*l),
                report::fmt(*u),
                report::fmt(u - l),
            ]);
        }
    };
    push_iv("ACI", &report.mle.aci);
    for b in &report.bayes {
        push_iv(&format!("{}-CrI", b.prior), &b.cri);
        push_iv(&format!("{}-HPD", b.prior), &b.hpd);
    }
    std::fs::write(dir.join("intervals.csv"), iv.finish())?;

    if !report.shrinkage.is_empty() {
        let mut sh = CsvTable::new(audit, "base,kind,theta1,theta2,theta3,theta4");
        for s in &report.shrinkage {
            let mut ls_cells = vec![s.base.clone(), "LS".to_string()];
            ls_cells.extend(s.ls.iter().map(|x| report::fmt(*x)));
            sh.row(&ls_cells);
            let mut sp_cells = vec![s.base.clone(), "SP".to_string()];
            sp_cells.extend(s.sp.iter().map(|x| report::fmt(*x)));
            sh.row(&sp_cells);
        }
        std::fs::write(dir.join("shrinkage.csv"), sh.finish())?;
    }

    if !report.marginals.is_empty() {
        let mut mg = CsvTable::new(audit, "population,alpha,beta,ks_distance,ks_p_value");
        for m in &report.marginals {
            mg.row(&[
                m.population.clone(),
                report::fmt(m.alpha),
                report::fmt(m.beta),
                report::fmt(m.ks_distance),
                m.ks_p_value.map(report::fmt).unwrap_or_default(),
            ]);
        }
        std::fs::write(dir.join("marginals.csv"), mg.finish())?;
    }
    Ok(())
}

#[derive(Serialize)]
struct PredictReport {
    seed: u64,
    level: f64,
    theta_mle: [f64; 4],
    rows: Vec<PredRow>,
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct PredRow {
    j: usize,
    method: String,
    value: f64,
    interval: Option<(f64, f64)>,
}

fn cmd_predict(args: &PredictArgs) -> Result<i32, CmdError> {
    let sample = load_sample(&args.input, args.m, args.n, args.r)?;
    let losses = loss_menu(&args.bayes.losses);
    for &j in &args.j {
        if sample.r() + j > args.m + args.n {
            return Err(CmdError::Input(format!(
                "step j={j} exceeds the remaining units (r={} of N={})",
                sample.r(),
                args.m + args.n
            )));
        }
    }
    let fit = fit_mle(&sample, None, DEFAULT_TOL, DEFAULT_MAX_ITER).map_err(numeric_err)?;

    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for &j in &args.j {
        let target = PredictionTarget::new(j);
        let cp = ClassicalPredictive::new(&fit.theta_hat, &sample, &target).map_err(numeric_err)?;
        let bup = cp.expectation().map_err(numeric_err)?;
        let interval = if args.intervals {
            let pi = cp.equal_tail(args.level).map_err(numeric_err)?;
            if bup < pi.lower || bup > pi.upper {
                warnings.push(format!("j={j}: BUP outside the classical interval"));
            }
            Some((pi.lower, pi.upper))
        } else {
            None
        };
        rows.push(PredRow {
            j,
            method: "BUP".into(),
            value: bup,
            interval,
        });
    }

    for (mode, priors) in prior_menu(&args.bayes)? {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(args.bayes.seed);
        let draws =
            importance_sample(&sample, &priors, args.bayes.draws, &mut rng).map_err(numeric_err)?;
        for &j in &args.j {
            let target = PredictionTarget::new(j);
            let bp = BayesPredictive::new(&draws, &sample, &target).map_err(numeric_err)?;
            let preds = bp.predict(&losses.specs).map_err(numeric_err)?;
            let (cri, hpd) = if args.intervals {
                let et = bp.equal_tail(args.level).map_err(numeric_err)?;
                let hp = bp.hpd(args.level).map_err(numeric_err)?;
                if preds[0] < et.lower || preds[0] > et.upper {
                    warnings.push(format!("j={j} {mode}: SE prediction outside the CrI"));
                }
                if hp.fallback_equal_tail {
                    warnings.push(format!("j={j} {mode}: HPD fell back to equal tails"));
                }
                (Some((et.lower, et.upper)), Some((hp.lower, hp.upper)))
            } else {
                (None, None)
            };
            for (label, &value) in losses.labels.iter().zip(&preds) {
                rows.push(PredRow {
                    j,
                    method: format!("{mode}-{label}"),
                    value,
                    interval: if label == "SE" { cri } else { None },
                });
            }
            if let Some(h) = hpd {
                rows.push(PredRow {
                    j,
                    method: format!("{mode}-HPD"),
                    value: f64::NAN,
                    interval: Some(h),
                });
            }
        }
    }

    let report = PredictReport {
        seed: args.bayes.seed,
        level: args.level,
        theta_mle: fit.theta_hat.as_array(),
        rows,
        warnings,
    };
    std::fs::create_dir_all(&args.out).map_err(input_err)?;
    let audit = audit_lines(
        &format!(
            "predict --input {} --m {} --n {} --j {:?}",
            args.input.display(),
            args.m,
            args.n,
            args.j
        ),
        args.bayes.seed,
    );
    if args.format == "json" {
        std::fs::write(
            args.out.join("predict.json"),
            serde_json::to_string_pretty(&report).expect("report serializes"),
        )
        .map_err(input_err)?;
    } else {
        let mut t = CsvTable::new(&audit, "j,method,value,int_lower,int_upper");
        for r in &report.rows {
            let (l, u) = r
                .interval
                .map(|(l, u)| (report::fmt(l), report::fmt(u)))
                .unwrap_or_default();
            t.row(&[
                r.j.to_string(),
                r.method.clone(),
                report::fmt(r.value),
                l,
                u,
            ]);
        }
        std::fs::write(args.out.join("predictions.csv"), t.finish()).map_err(input_err)?;
        if !report.warnings.is_empty() {
            let mut w = String::new();
            for line in &report.warnings {
                let _ = writeln!(w, "{line}");
            }
            std::fs::write(args.out.join("warnings.txt"), w).map_err(input_err)?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_study(args: &StudyArgs) -> Result<i32, CmdError> {
    let mut config: ExperimentConfig = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(input_err)?;
            serde_json::from_str(&text).map_err(input_err)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(ns) = args.ns {
        config.n_s = ns;
    }
    if let Some(d) = args.draws {
        config.draws_per_rep = d;
    }
    let result = run_study(&config).map_err(|e| CmdError::Numeric(e))?;
    report::write_study_reports(&result, &args.out).map_err(input_err)?;
    let failed: usize = result.outcomes.iter().map(|o| o.failed).sum();
    println!(
        "study complete: {} designs, {} replications each, {} failed replications; reports in {}",
        result.config.designs.len(),
        result.config.n_s,
        failed,
        args.out.display()
    );
    Ok(if failed > 0 { EXIT_PARTIAL } else { EXIT_OK })
}

fn cmd_simulate(args: &SimulateArgs) -> Result<i32, CmdError> {
    let theta = ThetaVector::from_array(args.theta).map_err(input_err)?;
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(args.seed);
    let sample =
        generate_joint_sample(&theta, args.m, args.n, args.r, &mut rng).map_err(input_err)?;
    let audit = vec![
        format!("seed: {}", args.seed),
        format!(
            "theta: {},{},{},{}",
            args.theta[0], args.theta[1], args.theta[2], args.theta[3]
        ),
        format!("m: {} n: {} r: {}", args.m, args.n, args.r),
    ];
    io::write_sample(&args.out, &sample, &audit).map_err(input_err)?;
    #[derive(Serialize)]
    struct Meta {
        m: usize,
        n: usize,
        r: usize,
        seed: u64,
        theta: [f64; 4],
    }
    let meta_path = args.out.with_extension("meta.json");
    std::fs::write(
        meta_path,
        serde_json::to_string_pretty(&Meta {
            m: args.m,
            n: args.n,
            r: args.r,
            seed: args.seed,
            theta: args.theta,
        })
        .expect("meta serializes"),
    )
    .map_err(input_err)?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loss_parser_accepts_spec_grammar() {
        assert_eq!(parse_loss("se").unwrap(), LossSpec::SquaredError);
        assert_eq!(
            parse_loss("linex:v=0.5").unwrap(),
            LossSpec::Linex { v: 0.5 }
        );
        assert_eq!(
            parse_loss("ge:k=-0.25").unwrap(),
            LossSpec::GenEntropy { k: -0.25 }
        );
        assert!(parse_loss("huber:d=1").is_err());
    }

    #[test]
    fn f64_list_parser_checks_arity() {
        assert_eq!(parse_f64_list::<2>("1.5, 2").unwrap(), [1.5, 2.0]);
        assert!(parse_f64_list::<3>("1,2").is_err());
        assert!(parse_f64_list::<1>("abc").is_err());
    }
}
