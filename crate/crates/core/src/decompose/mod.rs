//! High/low-frequency splits of a daily sentiment series.

mod emd;
mod fft;
mod io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::artifact::short_hash;
use crate::sentiment::SentimentSeries;

pub use emd::{
    auto_k, emd, emd_split_values, extrema, is_imf, zero_crossings, EmdConfig, ImfSet, SplitK,
    MIN_EMD_LEN,
};
pub use fft::{
    amplitude_spectrum, auto_cutoff_period, bin_period, fft_bands, fft_split_values,
    AUTO_PERIOD_BAND,
};
pub use io::{write_decomposition, write_imfs};

pub const DEFAULT_CUTOFF_PERIOD: f64 = 15.0;
pub const DEFAULT_MA_WINDOW: usize = 22;
/// Period separating the low band from the optional extreme-low band.
pub const EXTREME_LOW_PERIOD: f64 = 115.0;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecomposeError {
    #[error("series too short: need {needed}, got {got}")]
    SeriesTooShort { needed: usize, got: usize },
    #[error("series is constant")]
    ConstantSeries,
    #[error("need {needed} IMFs, decomposition produced {got}")]
    TooFewImfs { needed: usize, got: usize },
    #[error("window must be at least 1")]
    EmptyWindow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Fft,
    Emd,
    Ma,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Fft => "fft",
            Method::Emd => "emd",
            Method::Ma => "ma",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "fft" => Some(Method::Fft),
            "emd" => Some(Method::Emd),
            "ma" => Some(Method::Ma),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Cutoff {
    Period(f64),
    Auto,
}

impl Default for Cutoff {
    fn default() -> Self {
        Cutoff::Period(DEFAULT_CUTOFF_PERIOD)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionResult {
    pub hfs: SentimentSeries,
    pub lfs: SentimentSeries,
    pub method: Method,
    /// Canonical `key=value;...` rendering of the parameters actually used.
    pub params: String,
    pub imfs: Option<ImfSet>,
}

impl DecompositionResult {
    pub fn params_hash(&self) -> String {
        short_hash(
            format!("{};{}", self.method.as_str(), self.params).as_bytes(),
            12,
        )
    }
}

fn result(
    series: &SentimentSeries,
    hfs: Vec<f64>,
    lfs: Vec<f64>,
    method: Method,
    params: String,
) -> DecompositionResult {
    DecompositionResult {
        hfs: series.with_values(hfs, format!("{}:hfs:{}", series.label, method.as_str())),
        lfs: series.with_values(lfs, format!("{}:lfs:{}", series.label, method.as_str())),
        method,
        params,
        imfs: None,
    }
}

pub fn fft_split(
    series: &SentimentSeries,
    cutoff: Cutoff,
) -> Result<DecompositionResult, DecomposeError> {
    let period = match cutoff {
        Cutoff::Period(p) => p,
        Cutoff::Auto => {
            auto_cutoff_period(&series.values).ok_or(DecomposeError::SeriesTooShort {
                needed: (2.0 * AUTO_PERIOD_BAND.1) as usize,
                got: series.len(),
            })?
        }
    };
    let (h, l) = fft_split_values(&series.values, period)?;
    let params = match cutoff {
        Cutoff::Period(_) => format!("cutoff_period={period}"),
        Cutoff::Auto => format!("cutoff=auto;cutoff_period={period}"),
    };
    Ok(result(series, h, l, Method::Fft, params))
}

pub fn emd_split(
    series: &SentimentSeries,
    config: &EmdConfig,
    k: SplitK,
) -> Result<DecompositionResult, DecomposeError> {
    let set = emd(&series.values, config)?;
    let (h, l, used) = emd_split_values(&set, k)?;
    let k_label = match k {
        SplitK::Fixed(_) => used.to_string(),
        SplitK::Auto => format!("auto({used})"),
    };
    let params = format!(
        "max_imf={};sift_tolerance={};max_sifts={};k={k_label}",
        config.max_imf, config.sift_tolerance, config.max_sifts
    );
    let mut out = result(series, h, l, Method::Emd, params);
    out.imfs = Some(set);
    Ok(out)
}

/// Trailing mean over `window` points; the first `window - 1` use all points so far.
pub fn trailing_mean(xs: &[f64], window: usize) -> Vec<f64> {
    (0..xs.len())
        .map(|t| {
            let lo = (t + 1).saturating_sub(window);
            let slice = &xs[lo..=t];
            // centred on the current value so a constant run is reproduced exactly
            let anchor = xs[t];
            anchor + slice.iter().map(|x| x - anchor).sum::<f64>() / slice.len() as f64
        })
        .collect()
}

pub fn ma_split(
    series: &SentimentSeries,
    window: usize,
) -> Result<DecompositionResult, DecomposeError> {
    if window == 0 {
        return Err(DecomposeError::EmptyWindow);
    }
    if series.len() < window {
        return Err(DecomposeError::SeriesTooShort {
            needed: window,
            got: series.len(),
        });
    }
    let lfs = trailing_mean(&series.values, window);
    let hfs = series.values.iter().zip(&lfs).map(|(x, l)| x - l).collect();
    Ok(result(
        series,
        hfs,
        lfs,
        Method::Ma,
        format!("window={window}"),
    ))
}

/// Method-dispatching configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct DecomposeConfig {
    pub method: Method,
    pub cutoff: Cutoff,
    pub emd: EmdConfig,
    pub k: SplitK,
    pub window: usize,
}

impl Default for DecomposeConfig {
    fn default() -> Self {
        Self {
            method: Method::Fft,
            cutoff: Cutoff::default(),
            emd: EmdConfig::default(),
            k: SplitK::default(),
            window: DEFAULT_MA_WINDOW,
        }
    }
}

pub fn decompose(
    series: &SentimentSeries,
    config: &DecomposeConfig,
) -> Result<DecompositionResult, DecomposeError> {
    match config.method {
        Method::Fft => fft_split(series, config.cutoff),
        Method::Emd => emd_split(series, &config.emd, config.k),
        Method::Ma => ma_split(series, config.window),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn series(values: Vec<f64>) -> SentimentSeries {
        let d0 = NaiveDate::from_ymd_opt(2021, 1, 1).unwrap();
        let dates = (0..values.len())
            .map(|i| d0 + chrono::Duration::days(i as i64))
            .collect();
        SentimentSeries::new(dates, values, "test").unwrap()
    }

    #[test]
    fn ma_constant_series() {
        let r = ma_split(&series(vec![0.7; 40]), 22).unwrap();
        assert!(r.lfs.values.iter().all(|v| *v == 0.7));
        assert!(r.hfs.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn ma_linear_closed_form() {
        let xs: Vec<f64> = (1..=100).map(|t| t as f64).collect();
        let r = ma_split(&series(xs.clone()), 22).unwrap();
        for t in 22..=100usize {
            assert!((r.lfs.values[t - 1] - (t as f64 - 10.5)).abs() < 1e-12);
            assert!((r.hfs.values[t - 1] - 10.5).abs() < 1e-12);
        }
        // expanding mean before the window fills
        assert_eq!(r.lfs.values[3], 2.5);
    }

    #[test]
    fn ma_too_short() {
        assert_eq!(
            ma_split(&series(vec![1.0; 10]), 22).unwrap_err(),
            DecomposeError::SeriesTooShort {
                needed: 22,
                got: 10
            }
        );
    }

    #[test]
    fn params_hash_depends_on_params() {
        let s = series((0..100).map(|t| (t as f64 * 0.3).sin()).collect());
        let a = fft_split(&s, Cutoff::Period(15.0)).unwrap();
        let b = fft_split(&s, Cutoff::Period(20.0)).unwrap();
        assert_eq!(a.params, "cutoff_period=15");
        assert_ne!(a.params_hash(), b.params_hash());
        assert_eq!(a.params_hash().len(), 12);
    }
}
