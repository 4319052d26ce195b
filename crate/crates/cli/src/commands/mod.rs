//! One module per group of subcommands. Each returns staged artifacts.

pub mod evaluate;
pub mod model;
pub mod sentiment;
pub mod surface;
pub mod synth;

use crate::error::CliError;
use crate::output::{Artifacts, Context};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    BuildSurface,
    Sentiment,
    Decompose,
    VarFit,
    VarIrf,
    Granger,
    Forecast,
    Evaluate,
    Robustness,
    Synth,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::BuildSurface => "build-surface",
            Command::Sentiment => "sentiment",
            Command::Decompose => "decompose",
            Command::VarFit => "var-fit",
            Command::VarIrf => "var-irf",
            Command::Granger => "granger",
            Command::Forecast => "forecast",
            Command::Evaluate => "evaluate",
            Command::Robustness => "robustness",
            Command::Synth => "synth",
        }
    }

    pub fn run(self, ctx: &Context) -> Result<Artifacts, CliError> {
        match self {
            Command::BuildSurface => surface::run(ctx),
            Command::Sentiment => sentiment::run_sentiment(ctx),
            Command::Decompose => sentiment::run_decompose(ctx),
            Command::VarFit => model::run_fit(ctx),
            Command::VarIrf => model::run_irf(ctx),
            Command::Granger => model::run_granger(ctx),
            Command::Forecast => model::run_forecast(ctx),
            Command::Evaluate => evaluate::run_evaluate(ctx),
            Command::Robustness => evaluate::run_robustness(ctx),
            Command::Synth => synth::run(ctx),
        }
    }
}
