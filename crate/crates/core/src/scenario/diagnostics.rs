//! Per-sample diagnostics and their CSV form.
//!
//! Column order is fixed:
//! `t,l2,h1,h2,mean_u,m_l1,m_min,sigma_hat,fit_quality,km_sigma_bound,dt_used`.
//! Values are written with 17 significant digits so they re-parse to the same
//! doubles. Two whitespace-separated companion files (`<stem>.sigma_hat.dat`
//! and `<stem>.km_sigma_bound.dat`) hold `t` against each radius curve.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub const COLUMNS: [&str; 11] = [
    "t",
    "l2",
    "h1",
    "h2",
    "mean_u",
    "m_l1",
    "m_min",
    "sigma_hat",
    "fit_quality",
    "km_sigma_bound",
    "dt_used",
];

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub l2: f64,
    pub h1: f64,
    pub h2: f64,
    pub mean_u: f64,
    pub m_l1: f64,
    pub m_min: f64,
    pub sigma_hat: f64,
    pub fit_quality: f64,
    /// Kato-Masuda `sigma(t)`; the certified strip width is `exp` of this.
    pub km_sigma_bound: f64,
    pub dt_used: f64,
}

impl DiagnosticsRow {
    pub fn values(&self) -> [f64; 11] {
        [
            self.t,
            self.l2,
            self.h1,
            self.h2,
            self.mean_u,
            self.m_l1,
            self.m_min,
            self.sigma_hat,
            self.fit_quality,
            self.km_sigma_bound,
            self.dt_used,
        ]
    }

    pub fn from_values(v: [f64; 11]) -> Self {
        Self {
            t: v[0],
            l2: v[1],
            h1: v[2],
            h2: v[3],
            mean_u: v[4],
            m_l1: v[5],
            m_min: v[6],
            sigma_hat: v[7],
            fit_quality: v[8],
            km_sigma_bound: v[9],
            dt_used: v[10],
        }
    }
}

fn number(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn diagnostics_csv(rows: &[DiagnosticsRow]) -> String {
    let mut out = COLUMNS.join(",");
    out.push('\n');
    for row in rows {
        let line: Vec<String> = row.values().iter().map(|v| number(*v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_diagnostics_csv(text: &str) -> Result<Vec<DiagnosticsRow>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Format("empty diagnostics file".into()))?;
    if header != COLUMNS.join(",") {
        return Err(Error::Format(format!("unexpected diagnostics header {header:?}")));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let parsed: std::result::Result<Vec<f64>, _> = line.split(',').map(str::parse::<f64>).collect();
            let parsed = parsed.map_err(|e| Error::Format(format!("row {}: {e}", i + 1)))?;
            let values: [f64; 11] = parsed
                .try_into()
                .map_err(|_| Error::Format(format!("row {} does not have 11 columns", i + 1)))?;
            Ok(DiagnosticsRow::from_values(values))
        })
        .collect()
}

fn companion(path: &Path, column: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("diagnostics");
    path.with_file_name(format!("{stem}.{column}.dat"))
}

/// Writes the CSV and the two plot companions; returns the companion paths.
pub fn emit_diagnostics(rows: &[DiagnosticsRow], path: &Path) -> Result<[PathBuf; 2]> {
    std::fs::write(path, diagnostics_csv(rows))?;
    let sigma_path = companion(path, "sigma_hat");
    let bound_path = companion(path, "km_sigma_bound");
    let mut sigma = String::from("# t sigma_hat\n");
    let mut bound = String::from("# t km_sigma_bound\n");
    for row in rows {
        let _ = writeln!(sigma, "{} {}", number(row.t), number(row.sigma_hat));
        let _ = writeln!(bound, "{} {}", number(row.t), number(row.km_sigma_bound));
    }
    std::fs::write(&sigma_path, sigma)?;
    std::fs::write(&bound_path, bound)?;
    Ok([sigma_path, bound_path])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_only_and_single_row() {
        assert_eq!(diagnostics_csv(&[]).lines().count(), 1);
        let row = DiagnosticsRow {
            t: 0.5,
            ..Default::default()
        };
        let text = diagnostics_csv(&[row]);
        assert_eq!(text.lines().count(), 2);
        assert!(text.starts_with("t,l2,h1,h2,mean_u,m_l1,m_min,sigma_hat,fit_quality,km_sigma_bound,dt_used\n"));
    }

    #[test]
    fn companions_written() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("diagnostics.csv");
        let rows = [DiagnosticsRow { t: 1.0, sigma_hat: 1.5, km_sigma_bound: -3.0, ..Default::default() }];
        let [a, b] = emit_diagnostics(&rows, &path).unwrap();
        assert!(a.ends_with("diagnostics.sigma_hat.dat"));
        let text = std::fs::read_to_string(b).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "1.0000000000000000e0 -3.0000000000000000e0");
    }

    proptest! {
        #[test]
        fn values_reparse_bit_identical(v in proptest::array::uniform11(any::<f64>().prop_filter("finite", |x| x.is_finite()))) {
            let row = DiagnosticsRow::from_values(v);
            let back = parse_diagnostics_csv(&diagnostics_csv(&[row])).unwrap();
            for (a, b) in back[0].values().iter().zip(v.iter()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
