use chrono::NaiveDate;

use super::VarError;
use crate::data_io::AlignedPanel;
use crate::sentiment::SentimentSeries;
use crate::surface::{
    moneyness_label, surface_params, GridConfig, IVSurfaceGrid, SurfaceParamVector,
};

pub const HFS: &str = "hfs";
pub const LFS: &str = "lfs";

/// Dated rows of named variables, in a fixed column order.
#[derive(Debug, Clone, PartialEq)]
pub struct StatePanel {
    pub dates: Vec<NaiveDate>,
    pub names: Vec<String>,
    /// `rows[t][j]` is variable `j` on `dates[t]`.
    pub rows: Vec<Vec<f64>>,
}

impl StatePanel {
    pub fn new(
        dates: Vec<NaiveDate>,
        names: Vec<String>,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self, VarError> {
        if rows.len() != dates.len() || rows.iter().any(|r| r.len() != names.len()) {
            return Err(VarError::MisalignedDates(
                ": row shape does not match axes".into(),
            ));
        }
        if dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(VarError::MisalignedDates(
                ": dates not strictly increasing".into(),
            ));
        }
        Ok(Self { dates, names, rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn index_of(&self, name: &str) -> Result<usize, VarError> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| VarError::UnknownVariable(name.to_string()))
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    /// Rows `start..end`.
    pub fn slice(&self, start: usize, end: usize) -> Self {
        Self {
            dates: self.dates[start..end].to_vec(),
            names: self.names.clone(),
            rows: self.rows[start..end].to_vec(),
        }
    }

    /// Keeps only the named columns, in the given order.
    pub fn select(&self, names: &[&str]) -> Result<Self, VarError> {
        let idx = names
            .iter()
            .map(|n| self.index_of(n))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            dates: self.dates.clone(),
            names: names.iter().map(|s| s.to_string()).collect(),
            rows: self
                .rows
                .iter()
                .map(|r| idx.iter().map(|j| r[*j]).collect())
                .collect(),
        })
    }

    pub fn from_aligned(panel: &AlignedPanel) -> Self {
        Self {
            dates: panel.dates.clone(),
            names: panel.columns.iter().map(|(n, _)| n.clone()).collect(),
            rows: (0..panel.len())
                .map(|t| panel.columns.iter().map(|(_, v)| v[t]).collect())
                .collect(),
        }
    }

    pub fn to_aligned(&self) -> AlignedPanel {
        AlignedPanel {
            dates: self.dates.clone(),
            columns: self
                .names
                .iter()
                .enumerate()
                .map(|(j, n)| (n.clone(), self.column(j)))
                .collect(),
        }
    }
}

/// Surface part of the state vector.
#[derive(Debug, Clone, PartialEq)]
pub enum StateForm {
    /// Grid vols at `(months, moneyness)` pairs, in this order.
    NonParameter(Vec<(u32, f64)>),
    /// Skews, curvatures and term slopes.
    Parameter,
}

/// Moneyness 1.300, 0.975, 0.600 at every maturity, maturity-major.
pub fn default_selection(maturities: &[u32]) -> Vec<(u32, f64)> {
    maturities
        .iter()
        .flat_map(|m| [1.3, 0.975, 0.6].map(|k| (*m, k)))
        .collect()
}

pub fn iv_name(months: u32, m: f64) -> String {
    format!("iv_{months}m_{}", moneyness_label(m))
}

fn append_sentiment(
    dates: &[NaiveDate],
    names: &mut Vec<String>,
    rows: &mut [Vec<f64>],
    sentiment: Option<(&SentimentSeries, &SentimentSeries)>,
) -> Result<(), VarError> {
    let Some((hfs, lfs)) = sentiment else {
        return Ok(());
    };
    for (label, s) in [(HFS, hfs), (LFS, lfs)] {
        if s.dates != dates {
            let missing = dates.iter().find(|d| !s.dates.contains(d));
            let detail = match missing {
                Some(d) => format!(": {d} has a surface but no {label} value"),
                None => format!(": {label} dates differ from surface dates"),
            };
            return Err(VarError::MisalignedDates(detail));
        }
        names.push(label.to_string());
        for (r, v) in rows.iter_mut().zip(&s.values) {
            r.push(*v);
        }
    }
    Ok(())
}

/// Surface variables first, then HFS and LFS when given.
pub fn build_state_panel(
    surfaces: &[IVSurfaceGrid],
    sentiment: Option<(&SentimentSeries, &SentimentSeries)>,
    form: &StateForm,
    grid: &GridConfig,
) -> Result<StatePanel, VarError> {
    match form {
        StateForm::Parameter => {
            let params = surfaces
                .iter()
                .map(|s| surface_params(s, grid))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| VarError::Surface(e.to_string()))?;
            build_param_state_panel(&params, sentiment)
        }
        StateForm::NonParameter(sel) => {
            let dates: Vec<NaiveDate> = surfaces.iter().map(|s| s.date).collect();
            let mut names: Vec<String> = sel.iter().map(|(mo, m)| iv_name(*mo, *m)).collect();
            let mut rows = Vec::with_capacity(surfaces.len());
            for s in surfaces {
                let row = sel
                    .iter()
                    .map(|(mo, m)| {
                        s.value(*mo, *m)
                            .ok_or_else(|| VarError::Surface(format!("no grid node at {mo}m, {m}")))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                rows.push(row);
            }
            append_sentiment(&dates, &mut names, &mut rows, sentiment)?;
            StatePanel::new(dates, names, rows)
        }
    }
}

pub fn build_param_state_panel(
    params: &[SurfaceParamVector],
    sentiment: Option<(&SentimentSeries, &SentimentSeries)>,
) -> Result<StatePanel, VarError> {
    let dates: Vec<NaiveDate> = params.iter().map(|p| p.date).collect();
    let mut names = params.first().map(|p| p.names()).unwrap_or_default();
    let mut rows: Vec<Vec<f64>> = params.iter().map(|p| p.as_vec()).collect();
    append_sentiment(&dates, &mut names, &mut rows, sentiment)?;
    StatePanel::new(dates, names, rows)
}
