use chrono::NaiveDate;

use super::EvalError;
use crate::varfit::{coefficient_report, critical_values, fit_var, StatePanel};

#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessRow {
    pub equation: String,
    pub regressor: String,
    pub coefs: Vec<f64>,
    pub ses: Vec<f64>,
    pub stars: Vec<&'static str>,
    /// Largest `|coef_w - coef_0|` over windows.
    pub max_delta: f64,
    /// Opposite signs against the first window with either side significant at 5%.
    pub sign_flip: bool,
    /// Significant at 5% on one side and not at 10% on the other.
    pub significance_change: bool,
}

impl RobustnessRow {
    pub fn flagged(&self) -> bool {
        self.sign_flip || self.significance_change
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessReport {
    pub windows: Vec<(NaiveDate, NaiveDate)>,
    pub n_obs: Vec<usize>,
    pub p: usize,
    pub rows: Vec<RobustnessRow>,
}

impl RobustnessReport {
    pub fn flagged(&self) -> impl Iterator<Item = &RobustnessRow> {
        self.rows.iter().filter(|r| r.flagged())
    }

    pub fn row(&self, equation: &str, regressor: &str) -> Option<&RobustnessRow> {
        self.rows
            .iter()
            .find(|r| r.equation == equation && r.regressor == regressor)
    }
}

fn window_rows(panel: &StatePanel, from: NaiveDate, to: NaiveDate) -> (usize, usize) {
    let a = panel.dates.partition_point(|d| *d < from);
    let b = panel.dates.partition_point(|d| *d <= to);
    (a, b.max(a))
}

/// Refits the same VAR(p) on each inclusive date window and compares every
/// coefficient with the first window.
pub fn subperiod_robustness(
    panel: &StatePanel,
    windows: &[(NaiveDate, NaiveDate)],
    exog: Option<&StatePanel>,
    p: usize,
) -> Result<RobustnessReport, EvalError> {
    if windows.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut fits = Vec::with_capacity(windows.len());
    let mut n_obs = Vec::with_capacity(windows.len());
    for (from, to) in windows {
        let (a, b) = window_rows(panel, *from, *to);
        let x = exog.map(|x| x.slice(a, b));
        let m = fit_var(&panel.slice(a, b), p, x.as_ref())?;
        n_obs.push(b - a);
        let crit = critical_values(m.df);
        fits.push((coefficient_report(&m), crit));
    }
    let base = &fits[0].0;
    let mut rows = Vec::with_capacity(base.len());
    for (i, b0) in base.iter().enumerate() {
        let cells: Vec<_> = fits.iter().map(|(rep, crit)| (&rep[i], crit)).collect();
        let sig = |k: usize, level: usize| cells[k].0.t.abs() > cells[k].1[level];
        let mut sign_flip = false;
        let mut significance_change = false;
        for (w, cell) in cells.iter().enumerate().skip(1) {
            let (c0, cw) = (b0.coef, cell.0.coef);
            if c0 * cw < 0.0 && (sig(0, 1) || sig(w, 1)) {
                sign_flip = true;
            }
            if (sig(0, 1) && !sig(w, 0)) || (sig(w, 1) && !sig(0, 0)) {
                significance_change = true;
            }
        }
        rows.push(RobustnessRow {
            equation: b0.equation.clone(),
            regressor: b0.regressor.clone(),
            coefs: cells.iter().map(|c| c.0.coef).collect(),
            ses: cells.iter().map(|c| c.0.se).collect(),
            stars: cells.iter().map(|c| c.0.stars).collect(),
            max_delta: cells
                .iter()
                .map(|c| (c.0.coef - b0.coef).abs())
                .fold(0.0, f64::max),
            sign_flip,
            significance_change,
        });
    }
    Ok(RobustnessReport {
        windows: windows.to_vec(),
        n_obs,
        p,
        rows,
    })
}
