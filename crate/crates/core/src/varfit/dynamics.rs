use nalgebra::{DMatrix, DVector};

use super::{VarError, VarModel};

/// Iterated forecasts for `h` steps after the last history row.
///
/// `history` is chronological; `exog_future[s]` holds the exogenous values
/// for step `s + 1`.
pub fn forecast(
    model: &VarModel,
    history: &[Vec<f64>],
    exog_future: Option<&[Vec<f64>]>,
    h: usize,
) -> Result<Vec<Vec<f64>>, VarError> {
    let (n, p, q) = (model.n(), model.p, model.q());
    if history.len() < p {
        return Err(VarError::ShortHistory {
            needed: p,
            got: history.len(),
        });
    }
    if q > 0 && exog_future.is_none_or(|x| x.len() < h) {
        return Err(VarError::MissingExogenous);
    }
    let mut path: Vec<DVector<f64>> = history[history.len() - p..]
        .iter()
        .map(|r| DVector::from_column_slice(r))
        .collect();
    let phis: Vec<DMatrix<f64>> = (1..=p).map(|l| model.phi(l)).collect();
    let gamma = model.gamma();
    let c = model.intercept();
    let mut out = Vec::with_capacity(h);
    for s in 0..h {
        let mut y = c.clone();
        for (l, phi) in phis.iter().enumerate() {
            y += phi * &path[path.len() - 1 - l];
        }
        if q > 0 {
            let x = DVector::from_column_slice(&exog_future.expect("checked above")[s]);
            y += &gamma * x;
        }
        debug_assert_eq!(y.len(), n);
        out.push(y.iter().copied().collect());
        path.push(y);
    }
    Ok(out)
}

/// Companion matrix of the lag polynomial (`n p` square).
pub fn companion(model: &VarModel) -> DMatrix<f64> {
    let (n, p) = (model.n(), model.p);
    let mut a = DMatrix::zeros(n * p, n * p);
    for l in 1..=p {
        a.view_mut((0, (l - 1) * n), (n, n))
            .copy_from(&model.phi(l));
    }
    for i in n..n * p {
        a[(i, i - n)] = 1.0;
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stability {
    pub stable: bool,
    pub max_modulus: f64,
}

pub fn stability_check(model: &VarModel) -> Stability {
    let max_modulus = companion(model)
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    Stability {
        stable: max_modulus < 1.0,
        max_modulus,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IrfResult {
    pub shock: String,
    pub responses: Vec<String>,
    /// `values[h][i]`: response of variable `i` at horizon `h`.
    pub values: Vec<Vec<f64>>,
    pub orthogonalized: bool,
    pub warning: Option<String>,
}

impl IrfResult {
    pub fn horizon(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    pub fn series(&self, response: &str) -> Option<Vec<f64>> {
        let i = self.responses.iter().position(|r| r == response)?;
        Some(self.values.iter().map(|row| row[i]).collect())
    }
}

/// Lower factor of a positive semidefinite matrix; zero pivots give zero columns.
pub fn psd_cholesky(s: &DMatrix<f64>) -> DMatrix<f64> {
    let n = s.nrows();
    let mut l = DMatrix::<f64>::zeros(n, n);
    let scale = (0..n).map(|i| s[(i, i)].abs()).fold(0.0, f64::max);
    for j in 0..n {
        let d = s[(j, j)] - (0..j).map(|k| l[(j, k)] * l[(j, k)]).sum::<f64>();
        if d <= 1e-14 * scale {
            continue;
        }
        let dj = d.sqrt();
        l[(j, j)] = dj;
        for i in j + 1..n {
            let v = s[(i, j)] - (0..j).map(|k| l[(i, k)] * l[(j, k)]).sum::<f64>();
            l[(i, j)] = v / dj;
        }
    }
    l
}

/// Responses to a one-time shock in `shock`.
///
/// Reduced form applies a unit shock; orthogonalized uses the column of the
/// lower Cholesky factor of the residual covariance in state order.
pub fn irf(
    model: &VarModel,
    shock: &str,
    horizon: usize,
    orthogonalized: bool,
) -> Result<IrfResult, VarError> {
    let j = model.index_of(shock)?;
    let (n, p) = (model.n(), model.p);
    let stab = stability_check(model);
    let warning = (!stab.stable).then(|| {
        format!(
            "model is not stable (companion modulus {:.4}); responses do not decay",
            stab.max_modulus
        )
    });
    let impulse = if orthogonalized {
        psd_cholesky(&model.sigma).column(j).into_owned()
    } else {
        let mut e = DVector::zeros(n);
        e[j] = 1.0;
        e
    };
    let phis: Vec<DMatrix<f64>> = (1..=p).map(|l| model.phi(l)).collect();
    let mut resp: Vec<DVector<f64>> = vec![impulse];
    for h in 1..=horizon {
        let mut r = DVector::zeros(n);
        for l in 1..=p.min(h) {
            r += &phis[l - 1] * &resp[h - l];
        }
        resp.push(r);
    }
    Ok(IrfResult {
        shock: shock.to_string(),
        responses: model.names.clone(),
        values: resp
            .into_iter()
            .map(|v| v.iter().copied().collect())
            .collect(),
        orthogonalized,
        warning,
    })
}
