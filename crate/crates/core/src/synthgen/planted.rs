use chrono::NaiveDate;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::options::{gen_option_world_with, OptionWorld, OptionWorldSpec, VolShape};
use super::var::{gen_var_panel, VarSpec, DEFAULT_BURN_IN};
use super::{default_start, SynthError};
use crate::sentiment::SentimentSeries;
use crate::surface::{GridConfig, IVSurfaceGrid};
use crate::varfit::{iv_name, StatePanel, VarModel, HFS, LFS};

/// The near-the-money level that carries the HFS loading.
pub const ATM_LEVEL: f64 = 0.975;

/// Every grid vol follows
/// `iv(t) = (1 - a) level + a iv(t-1) + b hfs(t-1) + g lfs(t-1) + e(t)`,
/// with `b = hfs_loading` at [`ATM_LEVEL`] and `g = lfs_loading` at the two
/// outermost levels. HFS and LFS are independent AR(1) processes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedSpec {
    pub days: usize,
    pub seed: u64,
    pub stream: u64,
    pub start: NaiveDate,
    pub hfs_loading: f64,
    pub lfs_loading: f64,
    pub iv_persistence: f64,
    pub iv_noise: f64,
    /// Correlation of the vol shocks across nodes.
    pub iv_shock_corr: f64,
    pub hfs_ar: f64,
    pub hfs_sd: f64,
    pub lfs_ar: f64,
    pub lfs_sd: f64,
    pub base: VolShape,
}

impl Default for PlantedSpec {
    fn default() -> Self {
        Self {
            days: 2000,
            seed: 17,
            stream: 0,
            start: default_start(),
            hfs_loading: 0.3,
            lfs_loading: 0.2,
            iv_persistence: 0.8,
            iv_noise: 0.004,
            iv_shock_corr: 0.5,
            hfs_ar: -0.3,
            hfs_sd: 0.05,
            lfs_ar: 0.99,
            lfs_sd: 0.005,
            base: VolShape::Smirk {
                base: 0.2,
                slope: 0.3,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedWorld {
    /// All grid nodes (maturity-major), then `hfs`, `lfs`.
    pub panel: StatePanel,
    pub truth: VarModel,
    pub surfaces: Vec<IVSurfaceGrid>,
    /// Observed score: `hfs + lfs`.
    pub sentiment: SentimentSeries,
    pub hfs: Vec<f64>,
    pub lfs: Vec<f64>,
}

pub fn gen_planted_world(
    spec: &PlantedSpec,
    grid: &GridConfig,
) -> Result<PlantedWorld, SynthError> {
    let nodes: Vec<(u32, f64)> = grid
        .maturities_months
        .iter()
        .flat_map(|mo| grid.moneyness_levels.iter().map(move |m| (*mo, *m)))
        .collect();
    let k = nodes.len();
    let n = k + 2;
    let (h, l) = (k, k + 1);
    let lo = grid
        .moneyness_levels
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let hi = grid
        .moneyness_levels
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);

    let a = spec.iv_persistence;
    let mut phi = DMatrix::zeros(n, n);
    let mut intercept = vec![0.0; n];
    for (i, (mo, m)) in nodes.iter().enumerate() {
        let level = spec.base.sigma(*m) + 0.01 * (*mo as f64 / 12.0);
        intercept[i] = (1.0 - a) * level;
        phi[(i, i)] = a;
        if (*m - ATM_LEVEL).abs() < 1e-9 {
            phi[(i, h)] = spec.hfs_loading;
        }
        if *m == lo || *m == hi {
            phi[(i, l)] = spec.lfs_loading;
        }
    }
    phi[(h, h)] = spec.hfs_ar;
    phi[(l, l)] = spec.lfs_ar;

    let s2 = spec.iv_noise * spec.iv_noise;
    let mut cov = DMatrix::zeros(n, n);
    for i in 0..k {
        for j in 0..k {
            cov[(i, j)] = if i == j { s2 } else { spec.iv_shock_corr * s2 };
        }
    }
    cov[(h, h)] = spec.hfs_sd * spec.hfs_sd;
    cov[(l, l)] = spec.lfs_sd * spec.lfs_sd;

    let mut names: Vec<String> = nodes.iter().map(|(mo, m)| iv_name(*mo, *m)).collect();
    names.push(HFS.into());
    names.push(LFS.into());
    let var = VarSpec {
        names,
        intercept,
        phis: vec![phi],
        shock_cov: cov,
        days: spec.days,
        seed: spec.seed,
        stream: spec.stream,
        start: spec.start,
        burn_in: DEFAULT_BURN_IN,
        initial: None,
    };
    let (panel, truth) = gen_var_panel(&var)?;

    let surfaces = panel
        .rows
        .iter()
        .zip(&panel.dates)
        .map(|(row, date)| IVSurfaceGrid {
            date: *date,
            maturities_months: grid.maturities_months.clone(),
            moneyness_levels: grid.moneyness_levels.clone(),
            values: row[..k]
                .chunks(grid.moneyness_levels.len())
                .map(|c| c.to_vec())
                .collect(),
        })
        .collect();
    let hfs = panel.column(h);
    let lfs = panel.column(l);
    let score = hfs.iter().zip(&lfs).map(|(a, b)| a + b).collect();
    let sentiment = SentimentSeries::new(panel.dates.clone(), score, "synthetic:planted")
        .expect("generated dates increase");
    Ok(PlantedWorld {
        panel,
        truth,
        surfaces,
        sentiment,
        hfs,
        lfs,
    })
}

/// Option quotes whose implied vols are the planted surfaces, listed only at
/// the grid maturities and moneyness levels.
pub fn planted_quotes(world: &PlantedWorld, grid: &GridConfig, seed: u64) -> OptionWorld {
    let spec = OptionWorldSpec {
        days: world.surfaces.len(),
        seed,
        start: world
            .panel
            .dates
            .first()
            .copied()
            .unwrap_or_else(default_start),
        expiry_months: grid.maturities_months.clone(),
        strike_moneyness: grid.moneyness_levels.clone(),
        ..Default::default()
    };
    gen_option_world_with(&spec, grid, |day, months, m| {
        world.surfaces[day].value(months, m).expect("grid node")
    })
}
