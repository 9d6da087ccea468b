//! File formats: the `w,s` sample CSV, draw exports, and report tables.
//!
//! Sample CSV: header `w,s`, one row per observed failure, `s` is 1 for
//! an X failure. Lines starting with `#` are metadata comments and are
//! skipped by the readers, so audit headers never break round-trips.
//! Floats are written with Rust's shortest-round-trip formatting, which
//! makes read-back bit-exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use jointburr_core::fit_bayes::WeightedDraws;
use jointburr_core::JointSample;

/// Errors raised while reading input files.
#[derive(Debug)]
pub enum IoError {
    Io(std::io::Error),
    /// Malformed content: message carries the 1-based row number.
    Parse(String),
    Sample(jointburr_core::Error),
}

impl std::fmt::Display for IoError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            IoError::Io(e) => write!(f, "{e}"),
            IoError::Parse(m) => write!(f, "{m}"),
            IoError::Sample(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for IoError {}

impl From<std::io::Error> for IoError {
    fn from(e: std::io::Error) -> Self {
        IoError::Io(e)
    }
}

/// Parse a sample CSV body into `(w, s)` vectors.
pub fn parse_sample_csv(text: &str) -> Result<(Vec<f64>, Vec<bool>), IoError> {
    let mut w = Vec::new();
    let mut s = Vec::new();
    let mut saw_header = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let row = idx + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols != ["w", "s"] {
                return Err(IoError::Parse(format!(
                    "row {row}: expected header 'w,s', found '{line}'"
                )));
            }
            saw_header = true;
            continue;
        }
        let mut parts = line.split(',').map(str::trim);
        let (Some(wf), Some(sf)) = (parts.next(), parts.next()) else {
            return Err(IoError::Parse(format!("row {row}: expected two columns")));
        };
        if parts.next().is_some() {
            return Err(IoError::Parse(format!("row {row}: too many columns")));
        }
        let wv: f64 = wf
            .parse()
            .map_err(|_| IoError::Parse(format!("row {row}: bad value in column 'w': '{wf}'")))?;
        let sv = match sf {
            "1" => true,
            "0" => false,
            "" => {
                return Err(IoError::Parse(format!(
                    "row {row}: empty value in column 's'"
                )))
            }
            other => {
                return Err(IoError::Parse(format!(
                    "row {row}: column 's' must be 0 or 1, found '{other}'"
                )))
            }
        };
        w.push(wv);
        s.push(sv);
    }
    if !saw_header {
        return Err(IoError::Parse("missing 'w,s' header".into()));
    }
    Ok((w, s))
}

/// Read a joint sample from a CSV file; `m` and `n` come from flags or
/// sidecar metadata.
pub fn read_sample(path: &Path, m: usize, n: usize) -> Result<JointSample, IoError> {
    let text = fs::read_to_string(path)?;
    let (w, s) = parse_sample_csv(&text)?;
    JointSample::new(w, s, m, n).map_err(IoError::Sample)
}

/// Render a sample as CSV; `audit` lines are embedded as `#` comments.
pub fn sample_to_csv(sample: &JointSample, audit: &[String]) -> String {
    let mut out = String::new();
    for line in audit {
        let _ = writeln!(out, "# {line}");
    }
    out.push_str("w,s\n");
    for (&wi, &si) in sample.w().iter().zip(sample.s()) {
        let _ = writeln!(out, "{},{}", wi, u8::from(si));
    }
    out
}

pub fn write_sample(path: &Path, sample: &JointSample, audit: &[String]) -> Result<(), IoError> {
    fs::write(path, sample_to_csv(sample, audit))?;
    Ok(())
}

/// Export posterior draws as `theta1..theta4,log_weight` CSV.
pub fn draws_to_csv(draws: &WeightedDraws, audit: &[String]) -> String {
    let mut out = String::new();
    for line in audit {
        let _ = writeln!(out, "# {line}");
    }
    out.push_str("theta1,theta2,theta3,theta4,log_weight\n");
    for (d, lw) in draws.draws().iter().zip(draws.log_weights()) {
        let _ = writeln!(out, "{},{},{},{},{}", d[0], d[1], d[2], d[3], lw);
    }
    out
}

/// A generic audit-header CSV writer for report tables.
pub struct CsvTable {
    buf: String,
}

impl CsvTable {
    pub fn new(audit: &[String], header: &str) -> Self {
        let mut buf = String::new();
        for line in audit {
            let _ = writeln!(buf, "# {line}");
        }
        let _ = writeln!(buf, "{header}");
        Self { buf }
    }

    pub fn row(&mut self, cells: &[String]) {
        let _ = writeln!(self.buf, "{}", cells.join(","));
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> JointSample {
        JointSample::new(
            vec![0.2, 0.49, 0.64, 0.78, 0.8],
            vec![false, true, true, false, false],
            10,
            10,
        )
        .unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let s = sample();
        let text = sample_to_csv(&s, &["seed: 42".into()]);
        let (w, sv) = parse_sample_csv(&text).unwrap();
        assert_eq!(w.len(), 5);
        for (a, b) in w.iter().zip(s.w()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(&sv, s.s());
    }

    #[test]
    fn round_trip_survives_awkward_floats() {
        let awkward = vec![
            0.1,
            0.30000000000000004,
            1.0 / 3.0,
            2.2250738585072014e-308f64.max(0.5),
        ];
        let mut w = awkward.clone();
        w.sort_by(f64::total_cmp);
        let s = JointSample::new(w.clone(), vec![true, false, true, false], 4, 4).unwrap();
        let text = sample_to_csv(&s, &[]);
        let (w2, _) = parse_sample_csv(&text).unwrap();
        for (a, b) in w2.iter().zip(&w) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn errors_carry_row_numbers_and_column_names() {
        let bad = "w,s\n0.5,1\n0.7,\n";
        let err = parse_sample_csv(bad).unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("row 3"), "{msg}");
        assert!(msg.contains("'s'"), "{msg}");

        let bad2 = "w,s\nxyz,0\n";
        let msg2 = format!("{}", parse_sample_csv(bad2).unwrap_err());
        assert!(msg2.contains("row 2") && msg2.contains("'w'"), "{msg2}");

        assert!(parse_sample_csv("a,b\n1,0\n").is_err());
    }

    #[test]
    fn comments_are_transparent() {
        let body = "# config: {}\n# seed: 7\nw,s\n0.5,1\n";
        let (w, s) = parse_sample_csv(body).unwrap();
        assert_eq!(w, vec![0.5]);
        assert_eq!(s, vec![true]);
    }
}
