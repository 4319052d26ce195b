//! Rolling next-day forecasts, accuracy scoring and sub-window refits.

mod report;
mod robustness;
mod rolling;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::varfit::VarError;

pub use report::{
    render_accuracy_table, write_accuracy, write_forecasts, write_robustness, Metric,
};
pub use robustness::{subperiod_robustness, RobustnessReport, RobustnessRow};
pub use rolling::{
    compare_methods, random_walk_forecast, rolling_forecast, surface_targets, Comparison,
    ForecastRun, LagPolicy, RollingConfig, Variant, WindowScheme, DEFAULT_WINDOW,
    MIN_INITIAL_WINDOW, RANDOM_WALK,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("initial window of {got} observations is below the minimum {needed}")]
    WindowTooShort { needed: usize, got: usize },
    #[error("panel yields {got} forecasts, need at least {needed}")]
    TooFewForecasts { needed: usize, got: usize },
    #[error("realized value is zero for {variable} on {date}")]
    ZeroRealized { date: NaiveDate, variable: String },
    #[error("no forecast records")]
    Empty,
    #[error("forecast dates differ between methods: {0}")]
    DateMismatch(String),
    #[error(transparent)]
    Var(#[from] VarError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastRecord {
    pub date: NaiveDate,
    pub variable: String,
    pub predicted: f64,
    pub realized: f64,
}

/// Mean of `|pred - real| / |real|`.
pub fn mape(records: &[ForecastRecord]) -> Result<f64, EvalError> {
    if records.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut sum = 0.0;
    for r in records {
        if r.realized == 0.0 {
            return Err(EvalError::ZeroRealized {
                date: r.date,
                variable: r.variable.clone(),
            });
        }
        sum += ((r.predicted - r.realized) / r.realized).abs();
    }
    Ok(sum / records.len() as f64)
}

/// Mean of `(pred - real)^2`.
pub fn mspe(records: &[ForecastRecord]) -> Result<f64, EvalError> {
    if records.is_empty() {
        return Err(EvalError::Empty);
    }
    let sum: f64 = records
        .iter()
        .map(|r| (r.predicted - r.realized).powi(2))
        .sum();
    Ok(sum / records.len() as f64)
}

/// Maturity in months encoded in a surface variable name (`iv_3m_0975`, `skew_12m`).
pub fn maturity_of(variable: &str) -> Option<u32> {
    let mut parts = variable.split('_');
    parts.next()?;
    parts.next()?.strip_suffix('m')?.parse().ok()
}

pub const TOTAL_BUCKET: &str = "Total";

pub fn bucket_label(months: u32) -> String {
    format!("{months}M")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccuracyReport {
    pub method: String,
    /// `1M`, `3M`, ... or `Total`.
    pub bucket: String,
    pub mape: f64,
    pub mspe: f64,
    pub n_days: usize,
    pub n_records: usize,
}

/// One report per maturity present (ascending) and a `Total` over every record.
pub fn accuracy(
    method: &str,
    records: &[ForecastRecord],
) -> Result<Vec<AccuracyReport>, EvalError> {
    let mut months: Vec<u32> = records
        .iter()
        .filter_map(|r| maturity_of(&r.variable))
        .collect();
    months.sort_unstable();
    months.dedup();
    let mut out = Vec::with_capacity(months.len() + 1);
    let score = |bucket: String, rs: Vec<ForecastRecord>| -> Result<AccuracyReport, EvalError> {
        let mut days: Vec<NaiveDate> = rs.iter().map(|r| r.date).collect();
        days.dedup();
        Ok(AccuracyReport {
            method: method.to_string(),
            bucket,
            mape: mape(&rs)?,
            mspe: mspe(&rs)?,
            n_days: days.len(),
            n_records: rs.len(),
        })
    };
    for m in months {
        let rs = records
            .iter()
            .filter(|r| maturity_of(&r.variable) == Some(m))
            .cloned()
            .collect();
        out.push(score(bucket_label(m), rs)?);
    }
    out.push(score(TOTAL_BUCKET.to_string(), records.to_vec())?);
    Ok(out)
}
