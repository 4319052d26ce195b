use nalgebra::DMatrix;
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use super::{StatePanel, VarError, VarModel};

const RANK_TOL: f64 = 1e-10;

pub(crate) struct Ols {
    pub beta: DMatrix<f64>,
    pub resid: DMatrix<f64>,
    pub gram_inv: DMatrix<f64>,
}

/// Least squares through a QR factorisation of the column-scaled design.
pub(crate) fn ols(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<Ols, VarError> {
    let k = x.ncols();
    if x.nrows() <= k {
        return Err(VarError::RankDeficient);
    }
    let scale: Vec<f64> = (0..k).map(|j| x.column(j).norm()).collect();
    if scale.iter().any(|s| !(*s > 0.0)) {
        return Err(VarError::RankDeficient);
    }
    let xs = DMatrix::from_fn(x.nrows(), k, |i, j| x[(i, j)] / scale[j]);
    let qr = xs.qr();
    let r = qr.r();
    let dmax = (0..k).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if (0..k).any(|i| r[(i, i)].abs() <= RANK_TOL * dmax) {
        return Err(VarError::RankDeficient);
    }
    let qty = qr.q().transpose() * y;
    let beta_s = r
        .solve_upper_triangular(&qty)
        .ok_or(VarError::RankDeficient)?;
    let beta = DMatrix::from_fn(k, y.ncols(), |i, j| beta_s[(i, j)] / scale[i]);
    let resid = y - x * &beta;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or(VarError::RankDeficient)?;
    let g = &r_inv * r_inv.transpose();
    let gram_inv = DMatrix::from_fn(k, k, |i, j| g[(i, j)] / (scale[i] * scale[j]));
    Ok(Ols {
        beta,
        resid,
        gram_inv,
    })
}

/// Design rows for targets `start..T`: `[1, lags of vars.., exog]`.
pub(crate) fn design(
    panel: &StatePanel,
    vars: &[usize],
    p: usize,
    start: usize,
    exog: Option<(&StatePanel, &[usize])>,
) -> DMatrix<f64> {
    let t_eff = panel.len() - start;
    let q = exog.map_or(0, |(_, cols)| cols.len());
    let k = 1 + vars.len() * p + q;
    DMatrix::from_fn(t_eff, k, |row, col| {
        let t = start + row;
        if col == 0 {
            return 1.0;
        }
        let c = col - 1;
        if c < vars.len() * p {
            let (lag, j) = (c / vars.len() + 1, c % vars.len());
            panel.rows[t - lag][vars[j]]
        } else {
            let (x, cols) = exog.expect("exog columns counted");
            x.rows[t][cols[c - vars.len() * p]]
        }
    })
}

fn is_constant(values: impl Iterator<Item = f64>) -> bool {
    let mut first = None;
    for v in values {
        match first {
            None => first = Some(v),
            Some(f) if v != f => return false,
            _ => {}
        }
    }
    true
}

fn check_exog(panel: &StatePanel, exog: Option<&StatePanel>) -> Result<(), VarError> {
    if let Some(x) = exog {
        if x.dates != panel.dates {
            return Err(VarError::MisalignedDates(
                ": exogenous dates differ from the state panel".into(),
            ));
        }
    }
    Ok(())
}

/// Equation-by-equation OLS with intercept.
///
/// Variables constant over the sample are dropped with a warning; their
/// equations keep the constant as intercept and zero slopes.
pub fn fit_var(
    panel: &StatePanel,
    p: usize,
    exog: Option<&StatePanel>,
) -> Result<VarModel, VarError> {
    fit_from(panel, p, p, exog)
}

fn fit_from(
    panel: &StatePanel,
    p: usize,
    start: usize,
    exog: Option<&StatePanel>,
) -> Result<VarModel, VarError> {
    if p == 0 {
        return Err(VarError::ZeroLag);
    }
    check_exog(panel, exog)?;
    let n = panel.n();
    let q = exog.map_or(0, |x| x.n());
    let t = panel.len();
    let t_eff = t.saturating_sub(start);
    let k_full = 1 + n * p + q;
    if t_eff <= k_full || start < p {
        return Err(VarError::InsufficientSample { t, k: k_full, p });
    }

    let mut warnings = Vec::new();
    let mut dropped = Vec::new();
    let mut active = Vec::new();
    for j in 0..n {
        if is_constant(panel.rows[start - p..].iter().map(|r| r[j])) {
            warnings.push(format!(
                "variable `{}` is constant over the sample and was dropped",
                panel.names[j]
            ));
            dropped.push(panel.names[j].clone());
        } else {
            active.push(j);
        }
    }
    let mut exog_active = Vec::new();
    if let Some(x) = exog {
        for j in 0..q {
            if is_constant(x.rows[start..].iter().map(|r| r[j])) {
                warnings.push(format!(
                    "exogenous `{}` is constant over the sample and was dropped",
                    x.names[j]
                ));
            } else {
                exog_active.push(j);
            }
        }
    }

    let xmat = design(
        panel,
        &active,
        p,
        start,
        exog.map(|x| (x, exog_active.as_slice())),
    );
    let k = xmat.ncols();
    let ymat = DMatrix::from_fn(t_eff, active.len(), |r, c| panel.rows[start + r][active[c]]);
    let fit = if active.is_empty() {
        None
    } else {
        Some(ols(&xmat, &ymat)?)
    };

    // scatter the reduced fit back onto the full layout
    let full_row = |reduced: usize| -> usize {
        if reduced == 0 {
            return 0;
        }
        let c = reduced - 1;
        if c < active.len() * p {
            let (lag, j) = (c / active.len(), c % active.len());
            1 + lag * n + active[j]
        } else {
            1 + n * p + exog_active[c - active.len() * p]
        }
    };
    let df = t_eff - k;
    let mut coef = DMatrix::zeros(k_full, n);
    let mut se = DMatrix::zeros(k_full, n);
    let mut sigma = DMatrix::zeros(n, n);
    let mut sigma_ml = DMatrix::zeros(n, n);
    for j in 0..n {
        if !active.contains(&j) {
            coef[(0, j)] = panel.rows[start][j];
        }
    }
    if let Some(f) = &fit {
        let ete = f.resid.transpose() * &f.resid;
        for (a, &i) in active.iter().enumerate() {
            for (b, &j) in active.iter().enumerate() {
                sigma[(i, j)] = ete[(a, b)] / df as f64;
                sigma_ml[(i, j)] = ete[(a, b)] / t_eff as f64;
            }
            for r in 0..k {
                coef[(full_row(r), i)] = f.beta[(r, a)];
                se[(full_row(r), i)] = (sigma[(i, i)] * f.gram_inv[(r, r)]).max(0.0).sqrt();
            }
        }
    }
    Ok(VarModel {
        names: panel.names.clone(),
        exog_names: exog.map(|x| x.names.clone()).unwrap_or_default(),
        p,
        coef,
        se,
        sigma,
        sigma_ml,
        t_eff,
        df,
        dropped,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LagSelection {
    pub p: usize,
    /// AIC for p = 1..=p_max.
    pub aic: Vec<f64>,
}

/// AIC over a common estimation sample (targets from `p_max` on).
pub fn select_lag(
    panel: &StatePanel,
    p_max: usize,
    exog: Option<&StatePanel>,
) -> Result<LagSelection, VarError> {
    if p_max == 0 {
        return Err(VarError::ZeroLag);
    }
    let mut aic = Vec::with_capacity(p_max);
    for p in 1..=p_max {
        aic.push(fit_from(panel, p, p_max, exog)?.aic());
    }
    let mut best = 0;
    for (i, v) in aic.iter().enumerate() {
        if *v < aic[best] {
            best = i;
        }
    }
    Ok(LagSelection { p: best + 1, aic })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrangerResult {
    pub f: f64,
    pub p_value: f64,
    pub df1: usize,
    pub df2: usize,
    pub rss_restricted: f64,
    pub rss_unrestricted: f64,
}

/// F test that lags of `cause` add nothing to the equation of `effect`.
pub fn granger(
    panel: &StatePanel,
    cause: &[&str],
    effect: &str,
    p: usize,
    exog: Option<&StatePanel>,
) -> Result<GrangerResult, VarError> {
    if p == 0 {
        return Err(VarError::ZeroLag);
    }
    check_exog(panel, exog)?;
    let cause_idx = cause
        .iter()
        .map(|c| panel.index_of(c))
        .collect::<Result<Vec<_>, _>>()?;
    let e = panel.index_of(effect)?;
    let all: Vec<usize> = (0..panel.n()).collect();
    let kept: Vec<usize> = all
        .iter()
        .copied()
        .filter(|j| !cause_idx.contains(j))
        .collect();
    let xcols: Vec<usize> = (0..exog.map_or(0, |x| x.n())).collect();
    let ex = exog.map(|x| (x, xcols.as_slice()));
    let xu = design(panel, &all, p, p, ex);
    let xr = design(panel, &kept, p, p, ex);
    let t_eff = panel.len().saturating_sub(p);
    if t_eff <= xu.ncols() {
        return Err(VarError::InsufficientSample {
            t: panel.len(),
            k: xu.ncols(),
            p,
        });
    }
    let y = DMatrix::from_fn(t_eff, 1, |r, _| panel.rows[p + r][e]);
    let rss = |x: &DMatrix<f64>| -> Result<f64, VarError> { Ok(ols(x, &y)?.resid.norm_squared()) };
    let rss_u = rss(&xu)?;
    let rss_r = rss(&xr)?;
    let df1 = p * cause_idx.len();
    let df2 = t_eff - xu.ncols();
    let f = ((rss_r - rss_u) / df1 as f64) / (rss_u / df2 as f64);
    let dist = FisherSnedecor::new(df1 as f64, df2 as f64).expect("positive degrees of freedom");
    Ok(GrangerResult {
        f,
        p_value: dist.sf(f.max(0.0)),
        df1,
        df2,
        rss_restricted: rss_r,
        rss_unrestricted: rss_u,
    })
}
