//! Daily sentiment indices: market-proxy PCA composite, dictionary scores,
//! and externally produced scores.

mod io;

use chrono::NaiveDate;
use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data_io::{AlignedPanel, DataError, DatedSeries, ProxyPanel};
use crate::stats;

pub use io::{
    load_external_scores, read_external_scores, read_series, write_loadings, write_series,
};

pub const MIN_PCA_DATES: usize = 30;

#[derive(Debug, Error)]
pub enum SentimentError {
    #[error("float cap must be positive, got {0}")]
    NonPositiveFloatCap(f64),
    #[error("fund NAV must be positive, got {0}")]
    NonPositiveNav(f64),
    #[error("proxy `{0}` is constant")]
    ConstantColumn(String),
    #[error("need at least {needed} dates, got {got}")]
    TooFewDates { needed: usize, got: usize },
    #[error("no proxy columns")]
    NoProxies,
    #[error("document has no tokens")]
    EmptyDocument,
    #[error("{n_pos} positive + {n_neg} negative exceeds {n_total} tokens")]
    CountOverflow {
        n_pos: u64,
        n_neg: u64,
        n_total: u64,
    },
    #[error(transparent)]
    Data(#[from] DataError),
}

/// A dated sentiment series with a provenance label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentimentSeries {
    pub dates: Vec<NaiveDate>,
    pub values: Vec<f64>,
    pub label: String,
}

impl SentimentSeries {
    pub fn new(
        dates: Vec<NaiveDate>,
        values: Vec<f64>,
        label: impl Into<String>,
    ) -> Result<Self, DataError> {
        let s = Self {
            dates,
            values,
            label: label.into(),
        };
        s.as_dated().check()?;
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_dated(&self) -> DatedSeries {
        DatedSeries::new(self.label.clone(), self.dates.clone(), self.values.clone())
    }

    /// Same dates, values replaced.
    pub fn with_values(&self, values: Vec<f64>, label: impl Into<String>) -> Self {
        assert_eq!(values.len(), self.dates.len());
        Self {
            dates: self.dates.clone(),
            values,
            label: label.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaLoadings {
    pub proxies: Vec<String>,
    pub loadings: Vec<f64>,
    pub explained_variance: f64,
}

pub fn adl(n_up: u64, n_down: u64) -> f64 {
    n_up as f64 - n_down as f64
}

pub fn turnover(volume: f64, float_cap: f64) -> Result<f64, SentimentError> {
    if !(float_cap > 0.0) {
        return Err(SentimentError::NonPositiveFloatCap(float_cap));
    }
    Ok(volume / float_cap)
}

/// Positive when the fund trades below NAV.
pub fn cef_discount(nav: f64, price: f64) -> Result<f64, SentimentError> {
    if !(nav > 0.0) {
        return Err(SentimentError::NonPositiveNav(nav));
    }
    Ok((nav - price) / nav)
}

pub fn dictionary_score(n_pos: u64, n_neg: u64, n_total: u64) -> Result<f64, SentimentError> {
    if n_total == 0 {
        return Err(SentimentError::EmptyDocument);
    }
    if n_pos + n_neg > n_total {
        return Err(SentimentError::CountOverflow {
            n_pos,
            n_neg,
            n_total,
        });
    }
    Ok((n_pos as f64 - n_neg as f64) / n_total as f64)
}

/// The three daily proxies as panel columns `adl`, `turnover`, `cef_discount`.
pub fn proxy_columns(panel: &ProxyPanel) -> Result<AlignedPanel, SentimentError> {
    let n = panel.len();
    let mut a = Vec::with_capacity(n);
    let mut t = Vec::with_capacity(n);
    let mut c = Vec::with_capacity(n);
    for i in 0..n {
        a.push(adl(panel.n_up[i], panel.n_down[i]));
        t.push(turnover(panel.volume[i], panel.float_cap[i])?);
        c.push(cef_discount(panel.cef_nav[i], panel.cef_price[i])?);
    }
    Ok(AlignedPanel {
        dates: panel.dates.clone(),
        columns: vec![
            ("adl".to_string(), a),
            ("turnover".to_string(), t),
            ("cef_discount".to_string(), c),
        ],
    })
}

fn standardize(xs: &[f64]) -> Vec<f64> {
    let m = stats::mean(xs);
    let sd = stats::variance(xs).sqrt();
    xs.iter().map(|x| (x - m) / sd).collect()
}

/// First principal component of the standardized proxies.
///
/// The sign is chosen so the index correlates non-negatively with the `adl`
/// column (the first column when there is none).
pub fn composite_index(
    panel: &AlignedPanel,
) -> Result<(SentimentSeries, PcaLoadings), SentimentError> {
    let p = panel.columns.len();
    if p == 0 {
        return Err(SentimentError::NoProxies);
    }
    let t = panel.len();
    if t < MIN_PCA_DATES {
        return Err(SentimentError::TooFewDates {
            needed: MIN_PCA_DATES,
            got: t,
        });
    }
    let mut z = Vec::with_capacity(p);
    for (name, col) in &panel.columns {
        let m = stats::mean(col);
        let spread = col.iter().map(|x| (x - m).abs()).fold(0.0, f64::max);
        if !(spread > 1e-12 * m.abs().max(1.0)) {
            return Err(SentimentError::ConstantColumn(name.clone()));
        }
        z.push(standardize(col));
    }
    let corr = DMatrix::from_fn(p, p, |i, j| {
        z[i].iter().zip(&z[j]).map(|(a, b)| a * b).sum::<f64>() / t as f64
    });
    let eig = SymmetricEigen::new(corr);
    let mut best = 0;
    for k in 1..p {
        if eig.eigenvalues[k] > eig.eigenvalues[best] + 1e-12 {
            best = k;
        }
    }
    let mut v: Vec<f64> = eig.eigenvectors.column(best).iter().copied().collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);

    let mut scores: Vec<f64> = (0..t)
        .map(|i| (0..p).map(|j| v[j] * z[j][i]).sum())
        .collect();
    let anchor = panel
        .columns
        .iter()
        .position(|(n, _)| n == "adl")
        .unwrap_or(0);
    let c = stats::correlation(&scores, &z[anchor]);
    let flip = if c.abs() > 1e-12 {
        c < 0.0
    } else {
        let big = v
            .iter()
            .copied()
            .fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
        big < 0.0
    };
    if flip {
        v.iter_mut().for_each(|x| *x = -*x);
        scores.iter_mut().for_each(|x| *x = -*x);
    }
    let index = standardize(&scores);
    let trace = p as f64;
    let loadings = PcaLoadings {
        proxies: panel.columns.iter().map(|(n, _)| n.clone()).collect(),
        loadings: v,
        explained_variance: (eig.eigenvalues[best] / trace).min(1.0),
    };
    Ok((
        SentimentSeries::new(panel.dates.clone(), index, "pca")?,
        loadings,
    ))
}
