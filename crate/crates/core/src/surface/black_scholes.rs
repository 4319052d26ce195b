//! European Black–Scholes pricing and implied-volatility inversion.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use libm::erfc;

use super::SurfaceError;
use crate::data_io::OptionKind;

pub const VOL_FLOOR: f64 = 1e-4;
pub const VOL_CAP: f64 = 5.0;
const MAX_ITER: usize = 100;
const PRICE_TOL: f64 = 1e-8;

pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

fn check_inputs(s: f64, k: f64, tau: f64, sigma: f64, r: f64) -> Result<(), SurfaceError> {
    let ok = s > 0.0 && k > 0.0 && tau > 0.0 && sigma >= 0.0;
    if !ok
        || !(s.is_finite()
            && k.is_finite()
            && tau.is_finite()
            && sigma.is_finite()
            && r.is_finite())
    {
        return Err(SurfaceError::NonPositiveInput);
    }
    Ok(())
}

/// Black–Scholes price; `sigma == 0` gives the discounted intrinsic value.
pub fn bs_price(
    s: f64,
    k: f64,
    r: f64,
    tau: f64,
    sigma: f64,
    kind: OptionKind,
) -> Result<f64, SurfaceError> {
    check_inputs(s, k, tau, sigma, r)?;
    Ok(price_unchecked(s, k, r, tau, sigma, kind))
}

fn price_unchecked(s: f64, k: f64, r: f64, tau: f64, sigma: f64, kind: OptionKind) -> f64 {
    let df = (-r * tau).exp();
    if sigma == 0.0 {
        return match kind {
            OptionKind::Call => (s - k * df).max(0.0),
            OptionKind::Put => (k * df - s).max(0.0),
        };
    }
    let sd = sigma * tau.sqrt();
    let d1 = ((s / k).ln() + (r + 0.5 * sigma * sigma) * tau) / sd;
    let d2 = d1 - sd;
    match kind {
        OptionKind::Call => s * norm_cdf(d1) - k * df * norm_cdf(d2),
        OptionKind::Put => k * df * norm_cdf(-d2) - s * norm_cdf(-d1),
    }
}

/// dPrice/dSigma, identical for calls and puts.
pub fn bs_vega(s: f64, k: f64, r: f64, tau: f64, sigma: f64) -> f64 {
    if sigma <= 0.0 {
        return 0.0;
    }
    let sd = sigma * tau.sqrt();
    let d1 = ((s / k).ln() + (r + 0.5 * sigma * sigma) * tau) / sd;
    s * norm_pdf(d1) * tau.sqrt()
}

/// No-arbitrage price interval `(lower, upper)` for the given contract.
pub fn price_bounds(s: f64, k: f64, r: f64, tau: f64, kind: OptionKind) -> (f64, f64) {
    let df = (-r * tau).exp();
    match kind {
        OptionKind::Call => ((s - k * df).max(0.0), s),
        OptionKind::Put => ((k * df - s).max(0.0), k * df),
    }
}

/// Brenner–Subrahmanyam starting point, applied to the time value.
fn initial_guess(price: f64, lower: f64, s: f64, tau: f64) -> f64 {
    ((2.0 * PI / tau).sqrt() * (price - lower) / s).clamp(0.05, 1.0)
}

/// Inverts Black–Scholes for volatility.
///
/// Safeguarded Newton iteration on vega inside a shrinking bracket
/// `[1e-4, 5.0]`, falling back to bisection whenever the Newton step leaves
/// the bracket or fails to halve the error. Convergence is judged on the
/// volatility step, so deep out-of-the-money prices far below any absolute
/// price tolerance still invert to full relative precision.
pub fn implied_vol(
    price: f64,
    s: f64,
    k: f64,
    r: f64,
    tau: f64,
    kind: OptionKind,
) -> Result<f64, SurfaceError> {
    check_inputs(s, k, tau, 0.0, r)?;
    if !price.is_finite() {
        return Err(SurfaceError::NonPositiveInput);
    }
    let (lower, upper) = price_bounds(s, k, r, tau, kind);
    if price <= lower || price >= upper {
        return Err(SurfaceError::PriceOutOfBounds {
            price,
            lower,
            upper,
        });
    }
    let f = |sigma: f64| price_unchecked(s, k, r, tau, sigma, kind) - price;
    let (mut lo, mut hi) = (VOL_FLOOR, VOL_CAP);
    if f(lo) >= 0.0 || f(hi) <= 0.0 {
        return Err(SurfaceError::VolOutsideBracket { price });
    }

    let mut x = initial_guess(price, lower, s, tau);
    let mut dx_old = hi - lo;
    let mut dx = dx_old;
    for _ in 0..MAX_ITER {
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let vega = bs_vega(s, k, r, tau, x);
        let newton = x - fx / vega;
        let take_newton =
            vega > 0.0 && newton > lo && newton < hi && (2.0 * fx).abs() <= (dx_old * vega).abs();
        dx_old = dx;
        if take_newton {
            dx = fx / vega;
            x = newton;
        } else {
            dx = 0.5 * (hi - lo);
            x = lo + dx;
        }
        if dx.abs() <= 1e-15 * x || hi - lo <= 4.0 * f64::EPSILON * x {
            if f(x).abs() <= PRICE_TOL {
                return Ok(x);
            }
            break;
        }
    }
    Err(SurfaceError::NoConvergence { price })
}
