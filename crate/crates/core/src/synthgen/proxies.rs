use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{default_start, SimRng};
use crate::data_io::{ProxyPanel, TradingCalendar};

/// One latent AR(1) sentiment factor driving all three proxies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorSpec {
    pub days: usize,
    pub seed: u64,
    pub start: NaiveDate,
    pub persistence: f64,
    /// Idiosyncratic noise sd, in units of the factor's sd.
    pub noise: f64,
    pub n_stocks: u64,
}

impl Default for FactorSpec {
    fn default() -> Self {
        Self {
            days: 500,
            seed: 3,
            start: default_start(),
            persistence: 0.95,
            noise: 0.3,
            n_stocks: 1000,
        }
    }
}

/// Proxies plus the unit-variance factor that generated them.
///
/// Breadth and turnover rise with the factor; the fund discount falls.
pub fn gen_factor_proxies(spec: &FactorSpec) -> (ProxyPanel, Vec<f64>) {
    let mut rng = SimRng::new(spec.seed);
    let dates = TradingCalendar::weekdays().trading_days_from(spec.start, spec.days);
    let innov_sd = (1.0 - spec.persistence * spec.persistence).sqrt();
    let mut f = rng.normal();
    let mut factor = Vec::with_capacity(spec.days);
    for t in 0..spec.days {
        if t > 0 {
            f = spec.persistence * f + innov_sd * rng.normal();
        }
        factor.push(f);
    }
    let panel = proxies_from_factor(spec, dates, &factor);
    (panel, factor)
}

/// Proxies driven by a given factor path (ideally unit variance), one per date.
///
/// Only `seed`, `noise` and `n_stocks` of the spec are used.
pub fn proxies_from_factor(spec: &FactorSpec, dates: Vec<NaiveDate>, factor: &[f64]) -> ProxyPanel {
    assert_eq!(dates.len(), factor.len(), "one factor value per date");
    let mut rng = SimRng::stream(spec.seed, 1);
    let mut panel = ProxyPanel {
        dates,
        ..Default::default()
    };
    let half = spec.n_stocks as f64 / 2.0;
    for (t, &f) in factor.iter().enumerate() {
        let share = (0.5 + 0.15 * (f + spec.noise * rng.normal())).clamp(0.0, 1.0);
        let up = (share * spec.n_stocks as f64).round() as u64;
        // a few unchanged names each day
        let flat = ((0.02 * half) as u64).min(spec.n_stocks - up);
        panel.n_up.push(up);
        panel.n_down.push(spec.n_stocks - up - flat);
        let cap = 1.0e10;
        panel.float_cap.push(cap);
        panel
            .volume
            .push(cap * (0.01f64.ln() + 0.25 * (f + spec.noise * rng.normal())).exp());
        let nav = 1.0 + 0.001 * t as f64;
        panel.cef_nav.push(nav);
        let discount = 0.08 - 0.02 * (f + spec.noise * rng.normal());
        panel.cef_price.push(nav * (1.0 - discount));
    }
    panel
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sentiment::{composite_index, proxy_columns};
    use crate::stats;

    #[test]
    fn first_component_tracks_factor() {
        let (panel, factor) = gen_factor_proxies(&FactorSpec::default());
        let cols = proxy_columns(&panel).unwrap();
        let (index, loadings) = composite_index(&cols).unwrap();
        let c = stats::correlation(&index.values, &factor);
        assert!(c > 0.9, "{c}");
        assert!(
            loadings.loadings[0] > 0.0 && loadings.loadings[1] > 0.0 && loadings.loadings[2] < 0.0
        );
    }

    #[test]
    fn counts_are_consistent() {
        let spec = FactorSpec {
            days: 200,
            ..Default::default()
        };
        let (panel, _) = gen_factor_proxies(&spec);
        for (u, d) in panel.n_up.iter().zip(&panel.n_down) {
            assert!(u + d <= spec.n_stocks);
        }
        assert_eq!(panel.len(), 200);
    }

    #[test]
    fn given_factor_is_recovered() {
        let dates = TradingCalendar::weekdays().trading_days_from(default_start(), 300);
        let factor: Vec<f64> = (0..300).map(|t| (t as f64 / 20.0).sin() * 1.4).collect();
        let panel = proxies_from_factor(&FactorSpec::default(), dates.clone(), &factor);
        assert_eq!(panel.dates, dates);
        let (index, _) = composite_index(&proxy_columns(&panel).unwrap()).unwrap();
        assert!(stats::correlation(&index.values, &factor) > 0.9);
    }
}
