use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{moneyness_label, GridConfig, IVSurfaceGrid, SurfaceError};
use crate::spline::CubicSpline;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurvatureFormula {
    /// Slope term squared, averaged over the interior points.
    #[default]
    Standard,
    /// Unsquared slope term, sum divided by the point count.
    PaperLiteral,
}

impl CurvatureFormula {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "standard" => Some(Self::Standard),
            "paper-literal" => Some(Self::PaperLiteral),
            _ => None,
        }
    }
}

/// Mean discrete curvature of a smile sampled on evenly spaced strikes.
pub fn smile_curvature(
    strikes: &[f64],
    ivs: &[f64],
    formula: CurvatureFormula,
) -> Result<f64, SurfaceError> {
    let n = strikes.len();
    if ivs.len() != n {
        return Err(SurfaceError::InvalidGrid(
            "strike and iv lengths differ".into(),
        ));
    }
    if n < 3 {
        return Err(SurfaceError::TooFewPoints { needed: 3, got: n });
    }
    let dk = strikes[1] - strikes[0];
    if !(dk > 0.0) {
        return Err(SurfaceError::NonUniformSpacing);
    }
    for w in strikes.windows(2) {
        if ((w[1] - w[0]) - dk).abs() > 1e-9 * dk {
            return Err(SurfaceError::NonUniformSpacing);
        }
    }
    let mut sum = 0.0;
    for i in 1..n - 1 {
        let second = (ivs[i - 1] + ivs[i + 1] - 2.0 * ivs[i]) / (dk * dk);
        let slope = (ivs[i + 1] - ivs[i - 1]) / (2.0 * dk);
        let base = match formula {
            CurvatureFormula::Standard => 1.0 + slope * slope,
            CurvatureFormula::PaperLiteral => 1.0 + slope,
        };
        if base <= 0.0 {
            return Err(SurfaceError::CurvatureUndefined);
        }
        sum += second / base.powf(1.5);
    }
    Ok(match formula {
        CurvatureFormula::Standard => sum / (n - 2) as f64,
        CurvatureFormula::PaperLiteral => sum / n as f64,
    })
}

/// Third standardized moment of the smile's vols.
pub fn smile_skewness(ivs: &[f64]) -> Result<f64, SurfaceError> {
    let n = ivs.len();
    if n < 3 {
        return Err(SurfaceError::TooFewPoints { needed: 3, got: n });
    }
    let mean = ivs.iter().sum::<f64>() / n as f64;
    let (mut m2, mut m3) = (0.0, 0.0);
    for v in ivs {
        let d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= n as f64;
    m3 /= n as f64;
    // relative threshold so a flat row with rounding noise is still flat
    if m2 <= (1e-14 * mean).powi(2) {
        return Err(SurfaceError::DegenerateSmile);
    }
    Ok(m3 / m2.powf(1.5))
}

/// OLS slope of iv on tau (years) across maturities at one moneyness level.
pub fn term_slope(surface: &IVSurfaceGrid, m: f64) -> Result<f64, SurfaceError> {
    let j = surface
        .level_index(m)
        .ok_or(SurfaceError::UnknownLevel(m))?;
    let taus = surface.taus();
    if taus.len() < 2 {
        return Err(SurfaceError::TooFewPoints {
            needed: 2,
            got: taus.len(),
        });
    }
    let ys: Vec<f64> = surface.values.iter().map(|row| row[j]).collect();
    let n = taus.len() as f64;
    let tbar = taus.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, y) in taus.iter().zip(&ys) {
        sxy += (t - tbar) * (y - ybar);
        sxx += (t - tbar) * (t - tbar);
    }
    Ok(sxy / sxx)
}

/// Skew and curvature per maturity, term slope per moneyness level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceParamVector {
    pub date: NaiveDate,
    pub maturities_months: Vec<u32>,
    pub moneyness_levels: Vec<f64>,
    pub skew_by_tau: Vec<f64>,
    pub cur_by_tau: Vec<f64>,
    pub slope_by_m: Vec<f64>,
    /// Maturities whose smile was flat; their skew is reported as 0.
    pub degenerate_rows: Vec<u32>,
}

impl SurfaceParamVector {
    pub fn len(&self) -> usize {
        self.skew_by_tau.len() + self.cur_by_tau.len() + self.slope_by_m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_vec(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        out.extend_from_slice(&self.skew_by_tau);
        out.extend_from_slice(&self.cur_by_tau);
        out.extend_from_slice(&self.slope_by_m);
        out
    }

    pub fn names(&self) -> Vec<String> {
        param_names(&self.maturities_months, &self.moneyness_levels)
    }
}

pub(crate) fn param_names(maturities: &[u32], levels: &[f64]) -> Vec<String> {
    let mut names: Vec<String> = maturities.iter().map(|m| format!("skew_{m}m")).collect();
    names.extend(maturities.iter().map(|m| format!("cur_{m}m")));
    names.extend(
        levels
            .iter()
            .map(|l| format!("slope_{}", moneyness_label(*l))),
    );
    names
}

/// Resamples one maturity row onto the config's uniform ladder.
pub fn ladder_smile(
    surface: &IVSurfaceGrid,
    row: usize,
    ladder: &[f64],
) -> Result<Vec<f64>, SurfaceError> {
    let mut pairs: Vec<(f64, f64)> = surface
        .moneyness_levels
        .iter()
        .copied()
        .zip(surface.values[row].iter().copied())
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let spline =
        CubicSpline::natural(&xs, &ys).map_err(|e| SurfaceError::InvalidGrid(e.to_string()))?;
    Ok(ladder.iter().map(|m| spline.eval(*m)).collect())
}

pub fn surface_params(
    surface: &IVSurfaceGrid,
    config: &GridConfig,
) -> Result<SurfaceParamVector, SurfaceError> {
    surface.validate()?;
    let ladder = config.ladder();
    let mut skew = Vec::new();
    let mut cur = Vec::new();
    let mut degenerate = Vec::new();
    for (i, months) in surface.maturities_months.iter().enumerate() {
        let smile = ladder_smile(surface, i, &ladder)?;
        match smile_skewness(&smile) {
            Ok(s) => skew.push(s),
            Err(SurfaceError::DegenerateSmile) => {
                skew.push(0.0);
                degenerate.push(*months);
            }
            Err(e) => return Err(e),
        }
        cur.push(smile_curvature(&ladder, &smile, config.curvature)?);
    }
    let slope = surface
        .moneyness_levels
        .iter()
        .map(|m| term_slope(surface, *m))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SurfaceParamVector {
        date: surface.date,
        maturities_months: surface.maturities_months.clone(),
        moneyness_levels: surface.moneyness_levels.clone(),
        skew_by_tau: skew,
        cur_by_tau: cur,
        slope_by_m: slope,
        degenerate_rows: degenerate,
    })
}
