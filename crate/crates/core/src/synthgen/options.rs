use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use super::{default_start, SimRng};
use crate::data_io::{OptionKind, OptionQuote, RatePoint, TradingCalendar};
use crate::surface::{bs_price, GridConfig, IVSurfaceGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum VolShape {
    Flat {
        sigma: f64,
    },
    /// `base + slope * (1 - m)+`
    Smirk {
        base: f64,
        slope: f64,
    },
}

impl VolShape {
    pub fn sigma(&self, m: f64) -> f64 {
        match *self {
            VolShape::Flat { sigma } => sigma,
            VolShape::Smirk { base, slope } => base + slope * (1.0 - m).max(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptionWorldSpec {
    pub days: usize,
    pub seed: u64,
    pub start: NaiveDate,
    pub spot0: f64,
    /// Annual volatility of the simulated underlying.
    pub spot_vol: f64,
    pub rate: f64,
    pub shape: VolShape,
    pub expiry_months: Vec<u32>,
    /// Listed strikes as multiples of the day's spot.
    pub strike_moneyness: Vec<f64>,
}

impl Default for OptionWorldSpec {
    fn default() -> Self {
        let mut strikes: Vec<f64> = (11..=29).map(|i| i as f64 * 0.05).collect();
        strikes.extend([0.975, 1.025]);
        strikes.sort_by(f64::total_cmp);
        Self {
            days: 100,
            seed: 7,
            start: default_start(),
            spot0: 3.0,
            spot_vol: 0.2,
            rate: 0.02,
            shape: VolShape::Flat { sigma: 0.2 },
            expiry_months: vec![1, 2, 3, 6, 9, 12],
            strike_moneyness: strikes,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptionWorld {
    pub dates: Vec<NaiveDate>,
    pub spots: Vec<f64>,
    pub quotes: Vec<OptionQuote>,
    pub rates: Vec<RatePoint>,
    /// The vol function sampled on the grid nodes, one per date.
    pub truth: Vec<IVSurfaceGrid>,
}

/// Calendar days to the expiry listed `months` out.
pub(crate) fn expiry_days(months: u32) -> i64 {
    (months as f64 * 365.0 / 12.0).round() as i64
}

pub fn gen_option_world(spec: &OptionWorldSpec, grid: &GridConfig) -> OptionWorld {
    let shape = spec.shape;
    gen_option_world_with(spec, grid, |_, _, m| shape.sigma(m))
}

/// Like [`gen_option_world`] with an arbitrary `vol(day, months, moneyness)`.
///
/// Quotes are exact Black-Scholes prices of calls and puts at every listed
/// expiry and strike; `truth` evaluates `vol` at the grid nodes.
pub fn gen_option_world_with<F>(spec: &OptionWorldSpec, grid: &GridConfig, vol: F) -> OptionWorld
where
    F: Fn(usize, u32, f64) -> f64,
{
    let mut rng = SimRng::new(spec.seed);
    let dates = TradingCalendar::weekdays().trading_days_from(spec.start, spec.days);
    let dt = 1.0 / 252.0;
    let drift = (spec.rate - 0.5 * spec.spot_vol * spec.spot_vol) * dt;
    let mut spots = Vec::with_capacity(spec.days);
    let mut s = spec.spot0;
    for i in 0..spec.days {
        if i > 0 {
            s *= (drift + spec.spot_vol * dt.sqrt() * rng.normal()).exp();
        }
        spots.push(s);
    }

    let mut quotes = Vec::new();
    let mut truth = Vec::with_capacity(spec.days);
    for (day, (&date, &spot)) in dates.iter().zip(&spots).enumerate() {
        for &months in &spec.expiry_months {
            let expiry_date = date + Duration::days(expiry_days(months));
            let tau = expiry_days(months) as f64 / 365.0;
            for &m in &spec.strike_moneyness {
                let strike = spot * m;
                let sigma = vol(day, months, m);
                for kind in [OptionKind::Call, OptionKind::Put] {
                    let price =
                        bs_price(spot, strike, spec.rate, tau, sigma, kind).expect("valid inputs");
                    quotes.push(OptionQuote {
                        trade_date: date,
                        expiry_date,
                        strike,
                        kind,
                        price,
                        underlying_price: spot,
                    });
                }
            }
        }
        let values = grid
            .maturities_months
            .iter()
            .map(|mo| {
                grid.moneyness_levels
                    .iter()
                    .map(|m| vol(day, *mo, *m))
                    .collect()
            })
            .collect();
        truth.push(IVSurfaceGrid {
            date,
            maturities_months: grid.maturities_months.clone(),
            moneyness_levels: grid.moneyness_levels.clone(),
            values,
        });
    }
    let rates = dates
        .iter()
        .map(|d| RatePoint {
            date: *d,
            rate: spec.rate,
        })
        .collect();
    OptionWorld {
        dates,
        spots,
        quotes,
        rates,
        truth,
    }
}
