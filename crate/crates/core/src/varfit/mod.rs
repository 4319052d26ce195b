//! Vector autoregressions over surface states and sentiment: estimation,
//! lag selection, forecasting, impulse responses, Granger tests.

mod dynamics;
mod estimate;
mod panel;
mod report;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

pub use dynamics::{companion, forecast, irf, psd_cholesky, stability_check, IrfResult, Stability};
pub use estimate::{fit_var, granger, select_lag, GrangerResult, LagSelection};
pub use panel::{
    build_param_state_panel, build_state_panel, default_selection, iv_name, StateForm, StatePanel,
    HFS, LFS,
};
pub use report::{
    coefficient_report, critical_values, format_cell, read_irf, regressor_labels,
    render_coefficient_table, sig3, stars_for_t, write_coefficient_report, write_irf,
    write_model_json, CoefficientRow, TableLayout, STAR_LEVELS,
};

pub const DEFAULT_P_MAX: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VarError {
    #[error("regressor matrix is rank deficient")]
    RankDeficient,
    #[error("insufficient sample: {t} observations for {k} regressors at lag {p}")]
    InsufficientSample { t: usize, k: usize, p: usize },
    #[error("dates differ between inputs{0}")]
    MisalignedDates(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("model has exogenous terms but no future exogenous values were given")]
    MissingExogenous,
    #[error("history has {got} rows, need {needed}")]
    ShortHistory { needed: usize, got: usize },
    #[error("lag order must be at least 1")]
    ZeroLag,
    #[error("surface: {0}")]
    Surface(String),
}

/// A fitted VAR(p) with intercept and optional contemporaneous exogenous terms.
///
/// `coef` has one column per equation and rows
/// `[const, y1(t-1)..yn(t-1), .., y1(t-p)..yn(t-p), x1(t)..xq(t)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct VarModel {
    pub names: Vec<String>,
    pub exog_names: Vec<String>,
    pub p: usize,
    pub coef: DMatrix<f64>,
    pub se: DMatrix<f64>,
    /// Residual covariance, cross-product over the degrees of freedom.
    pub sigma: DMatrix<f64>,
    /// Residual covariance over the effective sample size.
    pub sigma_ml: DMatrix<f64>,
    pub t_eff: usize,
    pub df: usize,
    pub dropped: Vec<String>,
    pub warnings: Vec<String>,
}

impl VarModel {
    /// A model with known coefficients and zero standard errors.
    pub fn from_parts(
        names: Vec<String>,
        intercept: &[f64],
        phis: &[DMatrix<f64>],
        exog_names: Vec<String>,
        gamma: Option<&DMatrix<f64>>,
        sigma: DMatrix<f64>,
    ) -> Self {
        let n = names.len();
        let p = phis.len();
        let q = exog_names.len();
        let mut coef = DMatrix::zeros(1 + n * p + q, n);
        for i in 0..n {
            coef[(0, i)] = intercept[i];
        }
        for (l, phi) in phis.iter().enumerate() {
            coef.view_mut((1 + l * n, 0), (n, n))
                .copy_from(&phi.transpose());
        }
        if let Some(g) = gamma {
            coef.view_mut((1 + n * p, 0), (q, n))
                .copy_from(&g.transpose());
        }
        Self {
            names,
            exog_names,
            p,
            se: DMatrix::zeros(coef.nrows(), n),
            coef,
            sigma_ml: sigma.clone(),
            sigma,
            t_eff: 0,
            df: 0,
            dropped: vec![],
            warnings: vec![],
        }
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn q(&self) -> usize {
        self.exog_names.len()
    }

    pub fn intercept(&self) -> DVector<f64> {
        self.coef.row(0).transpose()
    }

    /// Lag-`l` matrix: entry `(i, j)` is the effect of variable `j` on equation `i`.
    pub fn phi(&self, l: usize) -> DMatrix<f64> {
        assert!(l >= 1 && l <= self.p);
        let n = self.n();
        let start = 1 + (l - 1) * n;
        self.coef.rows(start, n).transpose()
    }

    pub fn gamma(&self) -> DMatrix<f64> {
        let start = 1 + self.n() * self.p;
        self.coef.rows(start, self.q()).transpose()
    }

    pub fn t_stats(&self) -> DMatrix<f64> {
        self.coef
            .zip_map(&self.se, |c, s| if s > 0.0 { c / s } else { 0.0 })
    }

    pub fn index_of(&self, name: &str) -> Result<usize, VarError> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| VarError::UnknownVariable(name.to_string()))
    }

    fn active(&self) -> Vec<usize> {
        (0..self.n())
            .filter(|i| !self.dropped.contains(&self.names[*i]))
            .collect()
    }

    /// `ln det(sigma_ml) + 2 (n^2 p + n + n q) / T` over the estimated variables.
    pub fn aic(&self) -> f64 {
        let act = self.active();
        let n = act.len();
        let sub = DMatrix::from_fn(n, n, |i, j| self.sigma_ml[(act[i], act[j])]);
        let det = sub.determinant();
        let params = (n * n * self.p + n + n * self.q()) as f64;
        det.ln() + 2.0 * params / self.t_eff as f64
    }
}
