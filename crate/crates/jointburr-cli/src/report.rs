//! Report emission: CSV tables (one per table family, mirroring the
//! estimate / interval / shrinkage / prediction groupings) and a JSON
//! summary carrying the resolved configuration, seed, and failure
//! counts. Every file starts with `#` audit comments embedding the
//! configuration, so outputs are self-describing.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::io::CsvTable;
use crate::study::{MetricsRow, StudyResult};

pub fn fmt(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v:.6}")
    }
}

/// Write the study's four report files into `dir`.
pub fn write_study_reports(result: &StudyResult, dir: &Path) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let audit = vec![
        format!("seed: {}", result.config.seed),
        format!(
            "config: {}",
            serde_json::to_string(&result.config).expect("config serializes")
        ),
    ];

    let mut estimates = CsvTable::new(&audit, "design,estimator,param,bias,mse,rmse,re");
    let mut intervals = CsvTable::new(&audit, "design,method,param,lower,upper,length,coverage");
    let mut predictions = CsvTable::new(
        &audit,
        "design,method,j,mean_prediction,mean_true,bias,mse,int_lower,int_upper,int_length,int_coverage",
    );
    for row in &result.rows {
        match row {
            MetricsRow::Estimate(e) => {
                for i in 0..4 {
                    estimates.row(&[
                        e.design.label(),
                        e.estimator.clone(),
                        format!("theta{}", i + 1),
                        fmt(e.bias[i]),
                        fmt(e.mse[i]),
                        fmt(e.rmse[i]),
                        e.re.map(|r| fmt(r[i])).unwrap_or_default(),
                    ]);
                }
            }
            MetricsRow::Interval(iv) => {
                for i in 0..4 {
                    intervals.row(&[
                        iv.design.label(),
                        iv.label.clone(),
                        format!("theta{}", i + 1),
                        fmt(iv.lower[i]),
                        fmt(iv.upper[i]),
                        fmt(iv.length[i]),
                        fmt(iv.coverage[i]),
                    ]);
                }
            }
            MetricsRow::Prediction(p) => {
                let (il, iu, ile, ic) = p
                    .interval
                    .as_ref()
                    .map(|s| (fmt(s.lower), fmt(s.upper), fmt(s.length), fmt(s.coverage)))
                    .unwrap_or_default();
                predictions.row(&[
                    p.design.label(),
                    p.label.clone(),
                    p.j.to_string(),
                    fmt(p.mean_prediction),
                    fmt(p.mean_true),
                    fmt(p.bias),
                    fmt(p.mse),
                    il,
                    iu,
                    ile,
                    ic,
                ]);
            }
        }
    }
    fs::write(dir.join("estimates.csv"), estimates.finish())?;
    fs::write(dir.join("intervals.csv"), intervals.finish())?;
    fs::write(dir.join("predictions.csv"), predictions.finish())?;

    #[derive(Serialize)]
    struct Summary<'a> {
        config: &'a crate::study::ExperimentConfig,
        outcomes: &'a [crate::study::DesignOutcome],
    }
    let summary = Summary {
        config: &result.config,
        outcomes: &result.outcomes,
    };
    fs::write(
        dir.join("summary.json"),
        serde_json::to_string_pretty(&summary).expect("summary serializes"),
    )?;
    Ok(())
}
