use std::collections::BTreeMap;

use chrono::NaiveDate;

use super::{implied_vol, GridConfig, IVPoint, IVSurfaceGrid, SurfaceError};
use crate::data_io::{OptionKind, OptionQuote, RatePoint};
use crate::spline::{CubicSpline, Extrapolation};

/// Which quotes enter the inversion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuoteSide {
    /// Calls for moneyness >= 1, puts below.
    #[default]
    OutOfTheMoney,
    /// Every quote; duplicate strikes are averaged.
    All,
}

/// How [`interpolate`] treats queries outside the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HullPolicy {
    #[default]
    Clamp,
    Reject,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BuildReport {
    pub n_quotes: usize,
    pub n_off_side: usize,
    pub n_failed_inversion: usize,
    pub expiries_used: Vec<NaiveDate>,
    pub expiries_dropped: Vec<NaiveDate>,
}

// A listed expiry within this distance of a grid maturity is used as-is.
const SNAP_YEARS: f64 = 1.0 / 365.0;
const MIN_STRIKES: usize = 4;

struct Smile {
    tau: f64,
    spline: CubicSpline,
}

/// Builds one date's grid from its (already filtered) quotes.
///
/// Each quote is inverted; per listed expiry a natural cubic spline in
/// moneyness is evaluated at the grid levels, and grid maturities are then
/// reached by linear interpolation of total variance between the two
/// bracketing expiries (flat vol beyond the listed range).
pub fn build_grid(
    quotes: &[OptionQuote],
    rate: &RatePoint,
    config: &GridConfig,
) -> Result<(IVSurfaceGrid, BuildReport), SurfaceError> {
    let first = quotes
        .first()
        .ok_or_else(|| SurfaceError::InsufficientQuotes("no quotes".into()))?;
    let date = first.trade_date;
    if quotes.iter().any(|q| q.trade_date != date) {
        return Err(SurfaceError::MixedTradeDates);
    }
    let mut report = BuildReport {
        n_quotes: quotes.len(),
        ..Default::default()
    };

    let mut by_expiry: BTreeMap<NaiveDate, Vec<IVPoint>> = BTreeMap::new();
    let mut attempted = 0usize;
    for q in quotes {
        let m = q.moneyness();
        let on_side = match config.side {
            QuoteSide::All => true,
            QuoteSide::OutOfTheMoney => match q.kind {
                OptionKind::Call => m >= 1.0,
                OptionKind::Put => m < 1.0,
            },
        };
        if !on_side {
            report.n_off_side += 1;
            continue;
        }
        attempted += 1;
        let tau = q.tau_years();
        match implied_vol(
            q.price,
            q.underlying_price,
            q.strike,
            rate.rate,
            tau,
            q.kind,
        ) {
            Ok(iv) => by_expiry.entry(q.expiry_date).or_default().push(IVPoint {
                tau,
                moneyness: m,
                iv,
            }),
            Err(_) => report.n_failed_inversion += 1,
        }
    }
    if attempted > 0 && report.n_failed_inversion == attempted {
        return Err(SurfaceError::AllInversionsFailed(attempted));
    }

    let mut smiles = Vec::new();
    for (expiry, mut points) in by_expiry {
        points.sort_by(|a, b| a.moneyness.total_cmp(&b.moneyness));
        let (xs, ys) = merge_duplicate_strikes(&points);
        if xs.len() < MIN_STRIKES {
            report.expiries_dropped.push(expiry);
            continue;
        }
        let spline =
            CubicSpline::natural(&xs, &ys).map_err(|e| SurfaceError::InvalidGrid(e.to_string()))?;
        report.expiries_used.push(expiry);
        smiles.push(Smile {
            tau: points[0].tau,
            spline,
        });
    }
    if smiles.len() < 2 {
        return Err(SurfaceError::InsufficientQuotes(format!(
            "{} usable expiries (need 2 with >= {MIN_STRIKES} strikes)",
            smiles.len()
        )));
    }

    let values = config
        .maturities_months
        .iter()
        .map(|months| {
            let target = *months as f64 / 12.0;
            config
                .moneyness_levels
                .iter()
                .map(|m| vol_at(&smiles, target, *m))
                .collect()
        })
        .collect();
    let grid = IVSurfaceGrid {
        date,
        maturities_months: config.maturities_months.clone(),
        moneyness_levels: config.moneyness_levels.clone(),
        values,
    };
    grid.validate()?;
    Ok((grid, report))
}

fn merge_duplicate_strikes(points: &[IVPoint]) -> (Vec<f64>, Vec<f64>) {
    let mut xs: Vec<f64> = Vec::new();
    let mut sums: Vec<(f64, usize)> = Vec::new();
    for p in points {
        match xs.last() {
            Some(x) if (p.moneyness - x).abs() <= 1e-12 * x.abs() => {
                let last = sums.last_mut().expect("parallel vectors");
                last.0 += p.iv;
                last.1 += 1;
            }
            _ => {
                xs.push(p.moneyness);
                sums.push((p.iv, 1));
            }
        }
    }
    let ys = sums
        .into_iter()
        .map(|(s, n)| if n == 1 { s } else { s / n as f64 })
        .collect();
    (xs, ys)
}

fn vol_at(smiles: &[Smile], target: f64, m: f64) -> f64 {
    // snap to a listed expiry sitting on the grid maturity
    if let Some(s) = smiles
        .iter()
        .filter(|s| (s.tau - target).abs() <= SNAP_YEARS)
        .min_by(|a, b| (a.tau - target).abs().total_cmp(&(b.tau - target).abs()))
    {
        return s.spline.eval(m);
    }
    let first = &smiles[0];
    let last = &smiles[smiles.len() - 1];
    if target <= first.tau {
        return first.spline.eval(m);
    }
    if target >= last.tau {
        return last.spline.eval(m);
    }
    let hi = smiles
        .iter()
        .position(|s| s.tau > target)
        .expect("target inside range");
    let (a, b) = (&smiles[hi - 1], &smiles[hi]);
    let (va, vb) = (a.spline.eval(m), b.spline.eval(m));
    let (wa, wb) = (va * va * a.tau, vb * vb * b.tau);
    let w = wa + (wb - wa) * (target - a.tau) / (b.tau - a.tau);
    (w / target).sqrt()
}

/// Bicubic lookup: spline in moneyness per maturity row, then spline in tau.
pub fn interpolate(
    surface: &IVSurfaceGrid,
    tau: f64,
    m: f64,
    policy: HullPolicy,
) -> Result<f64, SurfaceError> {
    let mut order: Vec<usize> = (0..surface.moneyness_levels.len()).collect();
    order.sort_by(|a, b| surface.moneyness_levels[*a].total_cmp(&surface.moneyness_levels[*b]));
    let xs: Vec<f64> = order.iter().map(|j| surface.moneyness_levels[*j]).collect();
    let taus = surface.taus();
    if policy == HullPolicy::Reject {
        let inside_m = m >= xs[0] && m <= xs[xs.len() - 1];
        let inside_t = tau >= taus[0] && tau <= taus[taus.len() - 1];
        if !(inside_m && inside_t) {
            return Err(SurfaceError::OutOfHull { tau, m });
        }
    }
    let err = |e: crate::spline::SplineError| SurfaceError::InvalidGrid(e.to_string());
    let mut across = Vec::with_capacity(taus.len());
    for row in &surface.values {
        let ys: Vec<f64> = order.iter().map(|j| row[*j]).collect();
        across.push(
            CubicSpline::natural(&xs, &ys)
                .map_err(err)?
                .eval_with(m, Extrapolation::Clamp),
        );
    }
    let term = CubicSpline::natural(&taus, &across).map_err(err)?;
    Ok(term.eval_with(tau, Extrapolation::Clamp))
}
