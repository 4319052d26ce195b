use sentivol_core::data_io::DataError;
use sentivol_core::decompose::DecomposeError;
use sentivol_core::evaluate::EvalError;
use sentivol_core::sentiment::SentimentError;
use sentivol_core::surface::SurfaceError;
use sentivol_core::synthgen::SynthError;
use sentivol_core::varfit::VarError;
use thiserror::Error;

/// Failure classes with their exit codes: config 2, data 3, numeric 4.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config-error",
            CliError::Data(_) => "data-error",
            CliError::Numeric(_) => "numeric-failure",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }

    /// `category: explanation` on a single line.
    pub fn line(&self) -> String {
        let msg = self.to_string().replace(['\n', '\r'], " ");
        format!("{}: {}", self.category(), msg)
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        CliError::Numeric(msg.into())
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<SentimentError> for CliError {
    fn from(e: SentimentError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<DecomposeError> for CliError {
    fn from(e: DecomposeError) -> Self {
        match e {
            DecomposeError::EmptyWindow => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<SurfaceError> for CliError {
    fn from(e: SurfaceError) -> Self {
        match e {
            SurfaceError::InsufficientQuotes(_) | SurfaceError::MixedTradeDates => {
                CliError::Data(e.to_string())
            }
            SurfaceError::InvalidGrid(_) | SurfaceError::UnknownLevel(_) => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<VarError> for CliError {
    fn from(e: VarError) -> Self {
        match e {
            VarError::UnknownVariable(_) | VarError::ZeroLag => CliError::Config(e.to_string()),
            VarError::MisalignedDates(_) | VarError::Surface(_) => CliError::Data(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Var(v) => v.into(),
            EvalError::WindowTooShort { .. } | EvalError::TooFewForecasts { .. } => {
                CliError::Config(e.to_string())
            }
            EvalError::ZeroRealized { .. } | EvalError::DateMismatch(_) | EvalError::Empty => {
                CliError::Data(e.to_string())
            }
        }
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        match e {
            SynthError::InvalidSpec(_) => CliError::Config(e.to_string()),
            SynthError::UnstableSpec(_) => CliError::Numeric(e.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_line_with_category() {
        let e = CliError::config("missing quotes file\nsecond line");
        assert_eq!(e.line(), "config-error: missing quotes file second line");
        assert_eq!(e.exit_code(), 2);
        assert_eq!(CliError::from(VarError::RankDeficient).exit_code(), 4);
    }
}
