use std::io::Write;

use chrono::NaiveDate;

use super::{bucket_label, AccuracyReport, ForecastRecord, RobustnessReport, TOTAL_BUCKET};
use crate::artifact::{csv_writer, fmt_f64, Metadata};
use crate::data_io::{DataError, DATE_FORMAT};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Mape,
    Mspe,
}

/// Methods across, buckets down: 1M, 3M, 12M, Total, then any other maturity.
///
/// MAPE cells are percentages with two decimals; MSPE cells use scientific notation.
pub fn render_accuracy_table(reports: &[AccuracyReport], metric: Metric) -> String {
    let mut methods: Vec<&str> = Vec::new();
    for r in reports {
        if !methods.contains(&r.method.as_str()) {
            methods.push(&r.method);
        }
    }
    let mut buckets: Vec<String> = [1, 3, 12].map(bucket_label).to_vec();
    buckets.push(TOTAL_BUCKET.into());
    for r in reports {
        if !buckets.contains(&r.bucket) {
            buckets.push(r.bucket.clone());
        }
    }
    let mut out = String::new();
    for m in &methods {
        out.push('\t');
        out.push_str(m);
    }
    out.push('\n');
    for b in &buckets {
        out.push_str(b);
        for m in &methods {
            out.push('\t');
            if let Some(r) = reports.iter().find(|r| r.method == *m && r.bucket == *b) {
                match metric {
                    Metric::Mape => out.push_str(&format!("{:.2}%", 100.0 * r.mape)),
                    Metric::Mspe => out.push_str(&format!("{:.3e}", r.mspe)),
                }
            }
        }
        out.push('\n');
    }
    out
}

pub fn write_accuracy<W: Write>(
    writer: W,
    reports: &[AccuracyReport],
    meta: &Metadata,
) -> Result<(), DataError> {
    let mut w = csv_writer(writer, meta).map_err(DataError::write)?;
    w.write_record(["method", "bucket", "mape", "mspe", "n_days"])?;
    for r in reports {
        w.write_record([
            r.method.clone(),
            r.bucket.clone(),
            fmt_f64(r.mape),
            fmt_f64(r.mspe),
            r.n_days.to_string(),
        ])?;
    }
    w.flush().map_err(DataError::write)
}

/// `method, date, variable, predicted, realized`.
pub fn write_forecasts<W: Write>(
    writer: W,
    runs: &[(&str, &[ForecastRecord])],
    meta: &Metadata,
) -> Result<(), DataError> {
    let mut w = csv_writer(writer, meta).map_err(DataError::write)?;
    w.write_record(["method", "date", "variable", "predicted", "realized"])?;
    for (method, records) in runs {
        for r in *records {
            w.write_record([
                method.to_string(),
                r.date.format(DATE_FORMAT).to_string(),
                r.variable.clone(),
                fmt_f64(r.predicted),
                fmt_f64(r.realized),
            ])?;
        }
    }
    w.flush().map_err(DataError::write)
}

fn window_label(i: usize, (a, b): (NaiveDate, NaiveDate)) -> String {
    format!(
        "w{}:{}..{}",
        i + 1,
        a.format(DATE_FORMAT),
        b.format(DATE_FORMAT)
    )
}

/// One row per coefficient with `coef_w`, `se_w`, `stars_w` for every window.
pub fn write_robustness<W: Write>(
    writer: W,
    report: &RobustnessReport,
    meta: &Metadata,
) -> Result<(), DataError> {
    let mut meta = meta.clone();
    for (i, w) in report.windows.iter().enumerate() {
        meta.insert(format!("window_{}", i + 1), window_label(i, *w));
        meta.insert(format!("n_obs_{}", i + 1), report.n_obs[i].to_string());
    }
    meta.insert("p", report.p.to_string());
    let mut w = csv_writer(writer, &meta).map_err(DataError::write)?;
    let mut header = vec!["equation".to_string(), "regressor".to_string()];
    for i in 1..=report.windows.len() {
        header.extend([format!("coef_{i}"), format!("se_{i}"), format!("stars_{i}")]);
    }
    header.extend(["max_delta", "sign_flip", "significance_change"].map(String::from));
    w.write_record(&header)?;
    for r in &report.rows {
        let mut rec = vec![r.equation.clone(), r.regressor.clone()];
        for k in 0..r.coefs.len() {
            rec.extend([
                fmt_f64(r.coefs[k]),
                fmt_f64(r.ses[k]),
                r.stars[k].to_string(),
            ]);
        }
        rec.extend([
            fmt_f64(r.max_delta),
            r.sign_flip.to_string(),
            r.significance_change.to_string(),
        ]);
        w.write_record(&rec)?;
    }
    w.flush().map_err(DataError::write)
}
