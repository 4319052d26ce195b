//! Seeded generators for option worlds, VAR panels, sentiment proxies and
//! planted-signal scenarios. Every generator returns its ground truth.

mod options;
mod planted;
mod proxies;
mod rng;
mod var;

use chrono::NaiveDate;
use thiserror::Error;

pub use options::{
    gen_option_world, gen_option_world_with, OptionWorld, OptionWorldSpec, VolShape,
};
pub use planted::{gen_planted_world, planted_quotes, PlantedSpec, PlantedWorld, ATM_LEVEL};
pub use proxies::{gen_factor_proxies, proxies_from_factor, FactorSpec};
pub use rng::SimRng;
pub use var::{gen_var_panel, VarSpec, DEFAULT_BURN_IN};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("spec is not stable: companion modulus {0:.6} >= 1")]
    UnstableSpec(f64),
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
}

pub(crate) fn default_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2021, 1, 4).expect("valid date")
}
