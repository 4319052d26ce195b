use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};

use super::{default_start, SimRng, SynthError};
use crate::data_io::TradingCalendar;
use crate::varfit::{stability_check, StatePanel, VarModel};

pub const DEFAULT_BURN_IN: usize = 500;

#[derive(Debug, Clone, PartialEq)]
pub struct VarSpec {
    pub names: Vec<String>,
    pub intercept: Vec<f64>,
    pub phis: Vec<DMatrix<f64>>,
    pub shock_cov: DMatrix<f64>,
    pub days: usize,
    pub seed: u64,
    pub stream: u64,
    pub start: NaiveDate,
    pub burn_in: usize,
    /// Pre-sample value for every lag; the unconditional mean when absent.
    pub initial: Option<Vec<f64>>,
}

impl VarSpec {
    /// `Phi = a I`, unit shock covariance, zero intercept.
    pub fn diagonal(n: usize, a: f64, days: usize, seed: u64) -> Self {
        Self {
            names: (1..=n).map(|i| format!("y{i}")).collect(),
            intercept: vec![0.0; n],
            phis: vec![DMatrix::identity(n, n) * a],
            shock_cov: DMatrix::identity(n, n),
            days,
            seed,
            stream: 0,
            start: default_start(),
            burn_in: DEFAULT_BURN_IN,
            initial: None,
        }
    }

    pub fn true_model(&self) -> VarModel {
        VarModel::from_parts(
            self.names.clone(),
            &self.intercept,
            &self.phis,
            vec![],
            None,
            self.shock_cov.clone(),
        )
    }

    fn check(&self) -> Result<(), SynthError> {
        let n = self.names.len();
        if n == 0 || self.phis.is_empty() {
            return Err(SynthError::InvalidSpec(
                "need at least one variable and one lag".into(),
            ));
        }
        if self.intercept.len() != n
            || self.shock_cov.shape() != (n, n)
            || self.phis.iter().any(|p| p.shape() != (n, n))
        {
            return Err(SynthError::InvalidSpec("dimensions disagree".into()));
        }
        if self.initial.as_ref().is_some_and(|v| v.len() != n) {
            return Err(SynthError::InvalidSpec(
                "initial state has the wrong length".into(),
            ));
        }
        Ok(())
    }
}

/// Simulates the spec, discarding `burn_in` steps.
pub fn gen_var_panel(spec: &VarSpec) -> Result<(StatePanel, VarModel), SynthError> {
    spec.check()?;
    let truth = spec.true_model();
    let stab = stability_check(&truth);
    if !stab.stable {
        return Err(SynthError::UnstableSpec(stab.max_modulus));
    }
    let n = spec.names.len();
    let p = spec.phis.len();
    let c = DVector::from_column_slice(&spec.intercept);
    let sum_phi = spec
        .phis
        .iter()
        .fold(DMatrix::<f64>::zeros(n, n), |a, b| a + b);
    let start = match &spec.initial {
        Some(v) => DVector::from_column_slice(v),
        None => (DMatrix::<f64>::identity(n, n) - sum_phi)
            .lu()
            .solve(&c)
            .expect("stable spec has invertible I - sum(Phi)"),
    };
    let chol = crate::varfit::psd_cholesky(&spec.shock_cov);

    let mut rng = SimRng::stream(spec.seed, spec.stream);
    let mut lags: Vec<DVector<f64>> = vec![start; p];
    let total = spec.burn_in + spec.days;
    let mut rows = Vec::with_capacity(spec.days);
    for t in 0..total {
        let z = DVector::from_vec(rng.normals(n));
        let mut y = &c + &chol * z;
        for (l, phi) in spec.phis.iter().enumerate() {
            y += phi * &lags[lags.len() - 1 - l];
        }
        if t >= spec.burn_in {
            rows.push(y.iter().copied().collect());
        }
        lags.remove(0);
        lags.push(y);
    }
    let dates = TradingCalendar::weekdays().trading_days_from(spec.start, spec.days);
    let panel =
        StatePanel::new(dates, spec.names.clone(), rows).expect("generated shape is consistent");
    Ok((panel, truth))
}
