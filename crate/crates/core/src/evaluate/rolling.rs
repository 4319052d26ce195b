use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{accuracy, AccuracyReport, EvalError, ForecastRecord};
use crate::sentiment::SentimentSeries;
use crate::varfit::{fit_var, forecast, select_lag, StatePanel, VarError, VarModel, HFS, LFS};

pub const MIN_INITIAL_WINDOW: usize = 250;
pub const DEFAULT_WINDOW: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowScheme {
    /// Fixed-length trailing window.
    Rolling,
    /// Grows from the initial window.
    Expanding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "policy")]
pub enum LagPolicy {
    Fixed {
        p: usize,
    },
    /// AIC over `1..=p_max`, chosen once on the initial window.
    Auto {
        p_max: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollingConfig {
    pub initial_window: usize,
    pub scheme: WindowScheme,
    pub lags: LagPolicy,
    /// Refit every `step` days; days in between reuse the last fit.
    pub step: usize,
    pub min_forecasts: usize,
}

impl Default for RollingConfig {
    fn default() -> Self {
        Self {
            initial_window: DEFAULT_WINDOW,
            scheme: WindowScheme::Rolling,
            lags: LagPolicy::Auto { p_max: 4 },
            step: 1,
            min_forecasts: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastRun {
    pub p: usize,
    /// Forecast dates, ascending.
    pub dates: Vec<NaiveDate>,
    pub records: Vec<ForecastRecord>,
    pub warnings: Vec<String>,
}

/// Every variable except the sentiment components.
pub fn surface_targets(panel: &StatePanel) -> Vec<String> {
    panel
        .names
        .iter()
        .filter(|n| *n != HFS && *n != LFS)
        .cloned()
        .collect()
}

fn check_window(panel: &StatePanel, cfg: &RollingConfig) -> Result<usize, EvalError> {
    if cfg.initial_window < MIN_INITIAL_WINDOW {
        return Err(EvalError::WindowTooShort {
            needed: MIN_INITIAL_WINDOW,
            got: cfg.initial_window,
        });
    }
    let got = panel.len().saturating_sub(cfg.initial_window);
    if got < cfg.min_forecasts.max(1) {
        return Err(EvalError::TooFewForecasts {
            needed: cfg.min_forecasts.max(1),
            got,
        });
    }
    Ok(got)
}

/// One-day-ahead forecasts for every date after the initial window.
///
/// Exogenous values enter at their realized level on the forecast date.
pub fn rolling_forecast(
    panel: &StatePanel,
    exog: Option<&StatePanel>,
    targets: &[String],
    cfg: &RollingConfig,
) -> Result<ForecastRun, EvalError> {
    check_window(panel, cfg)?;
    if let Some(x) = exog {
        if x.dates != panel.dates {
            return Err(VarError::MisalignedDates(
                ": exogenous dates differ from the state panel".into(),
            )
            .into());
        }
    }
    let idx = targets
        .iter()
        .map(|t| panel.index_of(t))
        .collect::<Result<Vec<_>, _>>()?;
    let w = cfg.initial_window;
    let p = match cfg.lags {
        LagPolicy::Fixed { p } => p,
        LagPolicy::Auto { p_max } => {
            let x0 = exog.map(|x| x.slice(0, w));
            select_lag(&panel.slice(0, w), p_max, x0.as_ref())?.p
        }
    };
    let step = cfg.step.max(1);
    let mut model: Option<VarModel> = None;
    let mut warnings = Vec::new();
    let mut dates = Vec::with_capacity(panel.len() - w);
    let mut records = Vec::with_capacity((panel.len() - w) * idx.len());
    for t in w..panel.len() {
        if (t - w).is_multiple_of(step) {
            let from = match cfg.scheme {
                WindowScheme::Rolling => t - w,
                WindowScheme::Expanding => 0,
            };
            let xs = exog.map(|x| x.slice(from, t));
            let m = fit_var(&panel.slice(from, t), p, xs.as_ref())?;
            for msg in &m.warnings {
                if !warnings.contains(msg) {
                    warnings.push(msg.clone());
                }
            }
            model = Some(m);
        }
        let m = model.as_ref().expect("fitted at the first step");
        let future = exog.map(|x| vec![x.rows[t].clone()]);
        let pred = forecast(m, &panel.rows[t - p..t], future.as_deref(), 1)?;
        let date = panel.dates[t];
        dates.push(date);
        for (name, j) in targets.iter().zip(&idx) {
            records.push(ForecastRecord {
                date,
                variable: name.clone(),
                predicted: pred[0][*j],
                realized: panel.rows[t][*j],
            });
        }
    }
    Ok(ForecastRun {
        p,
        dates,
        records,
        warnings,
    })
}

/// Tomorrow equals today, scored on the same dates as a rolling run.
pub fn random_walk_forecast(
    panel: &StatePanel,
    targets: &[String],
    cfg: &RollingConfig,
) -> Result<ForecastRun, EvalError> {
    check_window(panel, cfg)?;
    let idx = targets
        .iter()
        .map(|t| panel.index_of(t))
        .collect::<Result<Vec<_>, _>>()?;
    let w = cfg.initial_window;
    let mut records = Vec::new();
    for t in w..panel.len() {
        for (name, j) in targets.iter().zip(&idx) {
            records.push(ForecastRecord {
                date: panel.dates[t],
                variable: name.clone(),
                predicted: panel.rows[t - 1][*j],
                realized: panel.rows[t][*j],
            });
        }
    }
    Ok(ForecastRun {
        p: 1,
        dates: panel.dates[w..].to_vec(),
        records,
        warnings: vec![],
    })
}

/// A labeled sentiment source; `None` means a surface-only VAR.
#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    pub label: String,
    pub sentiment: Option<(SentimentSeries, SentimentSeries)>,
}

impl Variant {
    pub fn none() -> Self {
        Self {
            label: "None".into(),
            sentiment: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub dates: Vec<NaiveDate>,
    /// `(method, run)` in variant order, random walk last.
    pub runs: Vec<(String, ForecastRun)>,
    pub reports: Vec<AccuracyReport>,
}

pub const RANDOM_WALK: &str = "Random walk";

fn augment(
    surface: &StatePanel,
    hfs: &SentimentSeries,
    lfs: &SentimentSeries,
) -> Result<StatePanel, EvalError> {
    for (label, s) in [(HFS, hfs), (LFS, lfs)] {
        if s.dates != surface.dates {
            return Err(EvalError::DateMismatch(format!(
                "{label} dates differ from the surface panel"
            )));
        }
    }
    let mut names = surface.names.clone();
    names.push(HFS.into());
    names.push(LFS.into());
    let rows = surface
        .rows
        .iter()
        .enumerate()
        .map(|(t, r)| {
            let mut r = r.clone();
            r.push(hfs.values[t]);
            r.push(lfs.values[t]);
            r
        })
        .collect();
    Ok(StatePanel::new(surface.dates.clone(), names, rows)?)
}

/// Paired rolling evaluation of each sentiment variant on the surface variables.
pub fn compare_methods(
    surface: &StatePanel,
    variants: &[Variant],
    exog: Option<&StatePanel>,
    cfg: &RollingConfig,
    random_walk: bool,
) -> Result<Comparison, EvalError> {
    let targets = surface_targets(surface);
    let mut runs = Vec::with_capacity(variants.len() + 1);
    for v in variants {
        let run = match &v.sentiment {
            None => rolling_forecast(surface, exog, &targets, cfg)?,
            Some((h, l)) => rolling_forecast(&augment(surface, h, l)?, exog, &targets, cfg)?,
        };
        runs.push((v.label.clone(), run));
    }
    if random_walk {
        runs.push((
            RANDOM_WALK.to_string(),
            random_walk_forecast(surface, &targets, cfg)?,
        ));
    }
    let dates = runs.first().map(|r| r.1.dates.clone()).unwrap_or_default();
    for (label, run) in &runs {
        if run.dates != dates {
            return Err(EvalError::DateMismatch(format!(
                "{label} covers a different date set"
            )));
        }
    }
    let mut reports = Vec::new();
    for (label, run) in &runs {
        reports.extend(accuracy(label, &run.records)?);
    }
    Ok(Comparison {
        dates,
        runs,
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluate::{mape, maturity_of};
    use crate::synthgen::{gen_var_panel, VarSpec};
    use nalgebra::DMatrix;

    fn positive_panel(days: usize, seed: u64) -> StatePanel {
        let mut spec = VarSpec::diagonal(3, 0.6, days, seed);
        spec.intercept = vec![0.08, 0.1, 0.12];
        spec.shock_cov = DMatrix::identity(3, 3) * 1e-4;
        spec.names = vec![
            "iv_1m_0975".into(),
            "iv_3m_0975".into(),
            "iv_12m_0975".into(),
        ];
        gen_var_panel(&spec).unwrap().0
    }

    fn cfg(w: usize, min: usize) -> RollingConfig {
        RollingConfig {
            initial_window: w,
            lags: LagPolicy::Fixed { p: 1 },
            min_forecasts: min,
            ..Default::default()
        }
    }

    #[test]
    fn forecast_count() {
        let panel = positive_panel(260, 1);
        let run = rolling_forecast(&panel, None, &surface_targets(&panel), &cfg(250, 1)).unwrap();
        assert_eq!(run.dates.len(), 10);
        assert_eq!(run.records.len(), 30);
        assert_eq!(run.dates[0], panel.dates[250]);
    }

    #[test]
    fn window_rules() {
        let panel = positive_panel(300, 1);
        let t = surface_targets(&panel);
        assert_eq!(
            rolling_forecast(&panel, None, &t, &cfg(100, 1)),
            Err(EvalError::WindowTooShort {
                needed: 250,
                got: 100
            })
        );
        assert_eq!(
            rolling_forecast(&panel, None, &t, &cfg(280, 30)),
            Err(EvalError::TooFewForecasts {
                needed: 30,
                got: 20
            })
        );
    }

    #[test]
    fn first_forecast_matches_direct_fit() {
        let panel = positive_panel(300, 4);
        let t = surface_targets(&panel);
        let run = rolling_forecast(&panel, None, &t, &cfg(250, 1)).unwrap();
        let m = fit_var(&panel.slice(0, 250), 1, None).unwrap();
        let direct = forecast(&m, &panel.rows[249..250], None, 1).unwrap();
        for (rec, d) in run.records.iter().zip(&direct[0]) {
            assert_eq!(rec.predicted, *d);
        }
        let last = fit_var(&panel.slice(49, 299), 1, None).unwrap();
        let direct = forecast(&last, &panel.rows[298..299], None, 1).unwrap();
        assert_eq!(run.records[49 * 3 + 2].predicted, direct[0][2]);
    }

    #[test]
    fn step_reuses_fit() {
        let panel = positive_panel(270, 5);
        let t = surface_targets(&panel);
        let mut c = cfg(250, 1);
        c.step = 5;
        let run = rolling_forecast(&panel, None, &t, &c).unwrap();
        let m = fit_var(&panel.slice(0, 250), 1, None).unwrap();
        let direct = forecast(&m, &panel.rows[252..253], None, 1).unwrap();
        assert_eq!(run.records[3 * 3].predicted, direct[0][0]);
    }

    #[test]
    fn random_walk_is_mean_relative_change() {
        let panel = positive_panel(280, 2);
        let t = vec!["iv_1m_0975".to_string()];
        let run = random_walk_forecast(&panel, &t, &cfg(250, 1)).unwrap();
        let col = panel.column(0);
        let direct: f64 = (250..280)
            .map(|i| ((col[i] - col[i - 1]) / col[i]).abs())
            .sum::<f64>()
            / 30.0;
        assert!((mape(&run.records).unwrap() - direct).abs() < 1e-15);
    }

    #[test]
    fn random_walk_on_constant_panel_is_exact() {
        let dates = crate::data_io::TradingCalendar::weekdays()
            .trading_days_from(NaiveDate::from_ymd_opt(2020, 1, 1).unwrap(), 260);
        let panel =
            StatePanel::new(dates, vec!["iv_1m_1000".into()], vec![vec![0.2]; 260]).unwrap();
        let run = random_walk_forecast(&panel, &surface_targets(&panel), &cfg(250, 1)).unwrap();
        assert_eq!(mape(&run.records).unwrap(), 0.0);
    }

    #[test]
    fn zero_sentiment_variant_is_dropped_back_to_none() {
        let panel = positive_panel(280, 3);
        let zero = SentimentSeries::new(panel.dates.clone(), vec![0.0; 280], "zero").unwrap();
        let variants = vec![
            Variant::none(),
            Variant {
                label: "Zero".into(),
                sentiment: Some((zero.clone(), zero)),
            },
        ];
        let cmp = compare_methods(&panel, &variants, None, &cfg(250, 1), true).unwrap();
        assert_eq!(cmp.runs.len(), 3);
        assert_eq!(cmp.runs[0].1.records, cmp.runs[1].1.records);
        assert!(cmp.runs[1].1.warnings.iter().any(|w| w.contains("hfs")));
        let none: Vec<_> = cmp.reports.iter().filter(|r| r.method == "None").collect();
        let zero: Vec<_> = cmp.reports.iter().filter(|r| r.method == "Zero").collect();
        for (a, b) in none.iter().zip(&zero) {
            assert_eq!((a.mape, a.mspe), (b.mape, b.mspe));
        }
        assert!(cmp.runs[0]
            .1
            .records
            .iter()
            .all(|r| maturity_of(&r.variable).is_some()));
    }

    #[test]
    fn misaligned_variant() {
        let panel = positive_panel(280, 3);
        let s = SentimentSeries::new(panel.dates[1..].to_vec(), vec![0.1; 279], "s").unwrap();
        let v = Variant {
            label: "S".into(),
            sentiment: Some((s.clone(), s)),
        };
        assert!(matches!(
            compare_methods(&panel, &[v], None, &cfg(250, 1), false),
            Err(EvalError::DateMismatch(_))
        ));
    }
}
