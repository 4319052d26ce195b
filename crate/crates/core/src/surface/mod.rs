//! Option pricing, implied-volatility inversion, fixed-grid surfaces and
//! their shape descriptors (skewness, curvature, term slope).

mod black_scholes;
mod grid;
mod io;
mod params;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use black_scholes::{
    bs_price, bs_vega, implied_vol, norm_cdf, norm_pdf, price_bounds, VOL_CAP, VOL_FLOOR,
};
pub use grid::{build_grid, interpolate, BuildReport, HullPolicy, QuoteSide};
pub use io::{moneyness_label, read_params, read_surfaces, write_params, write_surfaces};
pub use params::{
    ladder_smile, smile_curvature, smile_skewness, surface_params, term_slope, CurvatureFormula,
    SurfaceParamVector,
};

/// Upper sanity cap on any grid volatility.
pub const GRID_VOL_CAP: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SurfaceError {
    #[error("spot, strike and tau must be positive and sigma non-negative")]
    NonPositiveInput,
    #[error("price {price} outside no-arbitrage bounds ({lower}, {upper})")]
    PriceOutOfBounds { price: f64, lower: f64, upper: f64 },
    #[error("implied vol for price {price} lies outside [1e-4, 5]")]
    VolOutsideBracket { price: f64 },
    #[error("inversion did not converge for price {price}")]
    NoConvergence { price: f64 },
    #[error("insufficient quotes: {0}")]
    InsufficientQuotes(String),
    #[error("every implied-vol inversion failed ({0} quotes)")]
    AllInversionsFailed(usize),
    #[error("quotes span several trade dates")]
    MixedTradeDates,
    #[error("query (tau={tau}, m={m}) outside the grid hull")]
    OutOfHull { tau: f64, m: f64 },
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("strikes are not uniformly spaced")]
    NonUniformSpacing,
    #[error("smile has zero variance")]
    DegenerateSmile,
    #[error("curvature undefined for this smile under the selected formula")]
    CurvatureUndefined,
    #[error("moneyness level {0} is not on the grid")]
    UnknownLevel(f64),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

/// Which moneyness axis to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridChoice {
    /// Seven levels including the at-the-money point.
    #[default]
    Default7,
    /// Six levels, 24 nodes with four maturities.
    Paper24,
}

impl GridChoice {
    pub fn moneyness_levels(self) -> Vec<f64> {
        match self {
            GridChoice::Default7 => vec![1.300, 1.100, 1.025, 1.000, 0.975, 0.900, 0.600],
            GridChoice::Paper24 => vec![1.300, 1.100, 1.025, 0.975, 0.900, 0.600],
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "default7" => Some(GridChoice::Default7),
            "paper24" => Some(GridChoice::Paper24),
            _ => None,
        }
    }
}

/// Grid axes and construction options.
#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub maturities_months: Vec<u32>,
    pub moneyness_levels: Vec<f64>,
    pub side: QuoteSide,
    pub curvature: CurvatureFormula,
    /// Uniform moneyness ladder `(low, high, step)` for skew and curvature.
    pub shape_ladder: (f64, f64, f64),
}

impl GridConfig {
    pub fn new(choice: GridChoice) -> Self {
        Self {
            maturities_months: vec![1, 3, 6, 12],
            moneyness_levels: choice.moneyness_levels(),
            side: QuoteSide::OutOfTheMoney,
            curvature: CurvatureFormula::Standard,
            shape_ladder: (0.900, 1.100, 0.025),
        }
    }

    pub fn ladder(&self) -> Vec<f64> {
        let (lo, hi, step) = self.shape_ladder;
        let n = ((hi - lo) / step).round() as usize;
        (0..=n).map(|i| lo + i as f64 * step).collect()
    }
}

impl Default for GridConfig {
    fn default() -> Self {
        Self::new(GridChoice::Default7)
    }
}

/// One inverted quote.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IVPoint {
    pub tau: f64,
    pub moneyness: f64,
    pub iv: f64,
}

/// Implied vols on a fixed maturity x moneyness grid for one date.
///
/// `values[i][j]` is the vol at `maturities_months[i]` and
/// `moneyness_levels[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IVSurfaceGrid {
    pub date: NaiveDate,
    pub maturities_months: Vec<u32>,
    pub moneyness_levels: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl IVSurfaceGrid {
    pub fn validate(&self) -> Result<(), SurfaceError> {
        if self.values.len() != self.maturities_months.len() {
            return Err(SurfaceError::InvalidGrid(
                "row count differs from maturities".into(),
            ));
        }
        for row in &self.values {
            if row.len() != self.moneyness_levels.len() {
                return Err(SurfaceError::InvalidGrid(
                    "column count differs from moneyness levels".into(),
                ));
            }
            for v in row {
                if !(v.is_finite() && *v > 0.0 && *v < GRID_VOL_CAP) {
                    return Err(SurfaceError::InvalidGrid(format!(
                        "vol {v} outside (0, {GRID_VOL_CAP})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn taus(&self) -> Vec<f64> {
        self.maturities_months
            .iter()
            .map(|m| *m as f64 / 12.0)
            .collect()
    }

    pub fn value(&self, months: u32, moneyness: f64) -> Option<f64> {
        let i = self.maturities_months.iter().position(|m| *m == months)?;
        let j = self.level_index(moneyness)?;
        Some(self.values[i][j])
    }

    pub fn level_index(&self, moneyness: f64) -> Option<usize> {
        self.moneyness_levels
            .iter()
            .position(|l| (l - moneyness).abs() < 1e-9)
    }

    /// A surface with every cell equal to `iv`.
    pub fn flat(
        date: NaiveDate,
        maturities_months: Vec<u32>,
        moneyness_levels: Vec<f64>,
        iv: f64,
    ) -> Self {
        let values = vec![vec![iv; moneyness_levels.len()]; maturities_months.len()];
        Self {
            date,
            maturities_months,
            moneyness_levels,
            values,
        }
    }
}
