//! Loading, validation and calendar alignment of the raw inputs.
//!
//! All files are UTF-8, comma-delimited, with a mandatory header row. Leading
//! `# key: value` lines are treated as metadata and skipped by the loaders.
//! Bad rows are collected in a [`Loaded`] reject list instead of aborting the
//! whole ingest.

mod calendar;
mod load;

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use calendar::TradingCalendar;
pub use load::{
    load_option_quotes, load_proxies, load_rates, read_aligned_panel, read_option_quotes,
    read_proxies, read_rates, write_aligned_panel, write_option_quotes, write_proxies, write_rates,
    ProxySchema, QuoteSchema, RateBounds,
};

pub(crate) use load::{cell, date_cell, header_index};

pub const DATE_FORMAT: &str = "%Y-%m-%d";

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error(transparent)]
    Row(#[from] RowError),
    #[error("series `{series}` dates not strictly increasing at position {index}")]
    NotIncreasing { series: String, index: usize },
    #[error("series `{series}` has {dates} dates but {values} values")]
    LengthMismatch {
        series: String,
        dates: usize,
        values: usize,
    },
    #[error("no date common to all series")]
    EmptyIntersection,
    #[error("alignment needs at least one series")]
    NoSeries,
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("duplicate date {0}")]
    DuplicateDate(NaiveDate),
}

impl DataError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        DataError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn write(source: std::io::Error) -> Self {
        Self::io(Path::new("<writer>"), source)
    }
}

/// A rejected input row, identified by its physical line number.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RowError {
    #[error("line {line}: cannot parse `{value}` in column `{column}`")]
    UnparsableValue {
        line: u64,
        column: String,
        value: String,
    },
    #[error("line {line}: {reason}")]
    InvariantViolation { line: u64, reason: String },
}

impl RowError {
    pub fn line(&self) -> u64 {
        match self {
            RowError::UnparsableValue { line, .. } | RowError::InvariantViolation { line, .. } => {
                *line
            }
        }
    }
}

/// Accepted records plus the rows that were rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct Loaded<T> {
    pub records: Vec<T>,
    pub rejects: Vec<RowError>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptionKind {
    Call,
    Put,
}

impl OptionKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "call" | "c" => Some(OptionKind::Call),
            "put" | "p" => Some(OptionKind::Put),
            _ => None,
        }
    }
}

impl fmt::Display for OptionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OptionKind::Call => "call",
            OptionKind::Put => "put",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptionQuote {
    pub trade_date: NaiveDate,
    pub expiry_date: NaiveDate,
    pub strike: f64,
    pub kind: OptionKind,
    pub price: f64,
    pub underlying_price: f64,
}

impl OptionQuote {
    pub fn validate(&self) -> Result<(), String> {
        if self.expiry_date <= self.trade_date {
            return Err(format!(
                "expiry_date {} not after trade_date {}",
                self.expiry_date, self.trade_date
            ));
        }
        if !(self.strike > 0.0 && self.strike.is_finite()) {
            return Err(format!("strike {} must be positive", self.strike));
        }
        if !(self.underlying_price > 0.0 && self.underlying_price.is_finite()) {
            return Err(format!(
                "underlying_price {} must be positive",
                self.underlying_price
            ));
        }
        if !(self.price >= 0.0 && self.price.is_finite()) {
            return Err(format!("price {} must be non-negative", self.price));
        }
        Ok(())
    }

    /// Strike over same-day underlying.
    pub fn moneyness(&self) -> f64 {
        self.strike / self.underlying_price
    }

    /// Calendar-day year fraction, ACT/365.
    pub fn tau_years(&self) -> f64 {
        (self.expiry_date - self.trade_date).num_days() as f64 / 365.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub date: NaiveDate,
    /// Annualized, continuously compounded, decimal.
    pub rate: f64,
}

/// Daily market-breadth, turnover and closed-end fund inputs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProxyPanel {
    pub dates: Vec<NaiveDate>,
    pub n_up: Vec<u64>,
    pub n_down: Vec<u64>,
    pub volume: Vec<f64>,
    pub float_cap: Vec<f64>,
    pub cef_nav: Vec<f64>,
    pub cef_price: Vec<f64>,
}

impl ProxyPanel {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }
}

/// One named column of dated values.
#[derive(Debug, Clone, PartialEq)]
pub struct DatedSeries {
    pub name: String,
    pub dates: Vec<NaiveDate>,
    pub values: Vec<f64>,
}

impl DatedSeries {
    pub fn new(name: impl Into<String>, dates: Vec<NaiveDate>, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            dates,
            values,
        }
    }

    pub fn check(&self) -> Result<(), DataError> {
        if self.dates.len() != self.values.len() {
            return Err(DataError::LengthMismatch {
                series: self.name.clone(),
                dates: self.dates.len(),
                values: self.values.len(),
            });
        }
        check_increasing(&self.name, &self.dates)
    }
}

pub(crate) fn check_increasing(name: &str, dates: &[NaiveDate]) -> Result<(), DataError> {
    for (i, w) in dates.windows(2).enumerate() {
        if w[1] <= w[0] {
            return Err(DataError::NotIncreasing {
                series: name.to_string(),
                index: i + 1,
            });
        }
    }
    Ok(())
}

/// Columns sharing one strictly increasing date index with no gaps in values.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AlignedPanel {
    pub dates: Vec<NaiveDate>,
    pub columns: Vec<(String, Vec<f64>)>,
}

impl AlignedPanel {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    pub fn names(&self) -> Vec<&str> {
        self.columns.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn series(&self, name: &str) -> Option<DatedSeries> {
        self.column(name)
            .map(|v| DatedSeries::new(name, self.dates.clone(), v.to_vec()))
    }
}

/// Per-input list of dates that did not survive the intersection.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AlignmentReport {
    pub dropped: Vec<(String, Vec<NaiveDate>)>,
}

impl AlignmentReport {
    pub fn total_dropped(&self) -> usize {
        self.dropped.iter().map(|(_, d)| d.len()).sum()
    }
}

/// Inner-joins the inputs on date.
pub fn align_calendar(
    series: &[DatedSeries],
) -> Result<(AlignedPanel, AlignmentReport), DataError> {
    if series.is_empty() {
        return Err(DataError::NoSeries);
    }
    for s in series {
        s.check()?;
    }
    let mut common: BTreeSet<NaiveDate> = series[0].dates.iter().copied().collect();
    for s in &series[1..] {
        let other: BTreeSet<NaiveDate> = s.dates.iter().copied().collect();
        common = common.intersection(&other).copied().collect();
    }
    if common.is_empty() {
        return Err(DataError::EmptyIntersection);
    }
    let dates: Vec<NaiveDate> = common.iter().copied().collect();
    let mut columns = Vec::with_capacity(series.len());
    let mut report = AlignmentReport::default();
    for s in series {
        let mut values = Vec::with_capacity(dates.len());
        let mut dropped = Vec::new();
        for (d, v) in s.dates.iter().zip(&s.values) {
            if common.contains(d) {
                values.push(*v);
            } else {
                dropped.push(*d);
            }
        }
        columns.push((s.name.clone(), values));
        report.dropped.push((s.name.clone(), dropped));
    }
    Ok((AlignedPanel { dates, columns }, report))
}

/// Keeps quotes with at least `min_days_to_expiry` trading days left.
pub fn filter_quotes(
    quotes: &[OptionQuote],
    calendar: &TradingCalendar,
    min_days_to_expiry: u32,
) -> Vec<OptionQuote> {
    quotes
        .iter()
        .filter(|q| {
            calendar.trading_days_between(q.trade_date, q.expiry_date) >= min_days_to_expiry
        })
        .copied()
        .collect()
}

pub const DEFAULT_MIN_DAYS_TO_EXPIRY: u32 = 5;

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, DATE_FORMAT).unwrap()
    }

    fn quote(trade: &str, expiry: &str) -> OptionQuote {
        OptionQuote {
            trade_date: d(trade),
            expiry_date: d(expiry),
            strike: 100.0,
            kind: OptionKind::Call,
            price: 1.0,
            underlying_price: 100.0,
        }
    }

    #[test]
    fn filter_excludes_short_dated() {
        let cal = TradingCalendar::weekdays();
        // Mon 2024-01-08 -> Fri 2024-01-12: 4 trading days
        let short = quote("2024-01-08", "2024-01-12");
        // Mon 2024-01-08 -> Mon 2024-01-22: 10 trading days
        let long = quote("2024-01-08", "2024-01-22");
        let out = filter_quotes(&[short, long], &cal, 5);
        assert_eq!(out, vec![long]);
        assert!(filter_quotes(&[], &cal, 5).is_empty());
    }

    #[test]
    fn align_identical_dates() {
        let dates = vec![d("2024-01-02"), d("2024-01-03")];
        let a = DatedSeries::new("a", dates.clone(), vec![1.0, 2.0]);
        let b = DatedSeries::new("b", dates.clone(), vec![3.0, 4.0]);
        let (panel, report) = align_calendar(&[a, b]).unwrap();
        assert_eq!(panel.dates, dates);
        assert_eq!(report.total_dropped(), 0);
        assert_eq!(panel.column("b").unwrap(), &[3.0, 4.0]);
    }

    #[test]
    fn align_reports_missing_date() {
        let a = DatedSeries::new("a", vec![d("2024-01-02"), d("2024-01-04")], vec![1.0, 2.0]);
        let b = DatedSeries::new(
            "b",
            vec![d("2024-01-02"), d("2024-01-03"), d("2024-01-04")],
            vec![3.0, 4.0, 5.0],
        );
        let (panel, report) = align_calendar(&[a, b]).unwrap();
        assert_eq!(panel.dates, vec![d("2024-01-02"), d("2024-01-04")]);
        assert_eq!(panel.column("b").unwrap(), &[3.0, 5.0]);
        assert_eq!(report.dropped[1], ("b".to_string(), vec![d("2024-01-03")]));
    }

    #[test]
    fn align_disjoint_is_error() {
        let a = DatedSeries::new("a", vec![d("2024-01-02")], vec![1.0]);
        let b = DatedSeries::new("b", vec![d("2024-01-03")], vec![1.0]);
        assert!(matches!(
            align_calendar(&[a, b]),
            Err(DataError::EmptyIntersection)
        ));
    }

    #[test]
    fn align_rejects_unsorted_input() {
        let a = DatedSeries::new("a", vec![d("2024-01-03"), d("2024-01-02")], vec![1.0, 2.0]);
        assert!(matches!(
            align_calendar(&[a]),
            Err(DataError::NotIncreasing { .. })
        ));
    }

    fn arb_series(name: &'static str) -> impl Strategy<Value = DatedSeries> {
        proptest::collection::btree_set(0i64..60, 1..40).prop_map(move |offsets| {
            let base = d("2023-01-01");
            let dates: Vec<NaiveDate> = offsets
                .iter()
                .map(|o| base + chrono::Duration::days(*o))
                .collect();
            let values = (0..dates.len()).map(|i| i as f64).collect();
            DatedSeries::new(name, dates, values)
        })
    }

    proptest! {
        #[test]
        fn aligned_dates_are_subset_and_increasing(a in arb_series("a"), b in arb_series("b")) {
            match align_calendar(&[a.clone(), b.clone()]) {
                Ok((panel, _)) => {
                    for w in panel.dates.windows(2) {
                        prop_assert!(w[0] < w[1]);
                    }
                    for dt in &panel.dates {
                        prop_assert!(a.dates.contains(dt) && b.dates.contains(dt));
                    }
                }
                Err(DataError::EmptyIntersection) => {
                    prop_assert!(a.dates.iter().all(|x| !b.dates.contains(x)));
                }
                Err(e) => prop_assert!(false, "unexpected {e}"),
            }
        }

        #[test]
        fn filter_is_idempotent(days in proptest::collection::vec((0i64..30, 1i64..40), 0..30), min in 0u32..12) {
            let base = d("2024-03-01");
            let quotes: Vec<OptionQuote> = days.iter().map(|(t, e)| OptionQuote {
                trade_date: base + chrono::Duration::days(*t),
                expiry_date: base + chrono::Duration::days(t + e),
                strike: 1.0, kind: OptionKind::Put, price: 0.1, underlying_price: 1.0,
            }).collect();
            let cal = TradingCalendar::weekdays();
            let once = filter_quotes(&quotes, &cal, min);
            let twice = filter_quotes(&once, &cal, min);
            prop_assert_eq!(once, twice);
        }
    }
}
