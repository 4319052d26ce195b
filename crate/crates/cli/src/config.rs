//! TOML run configuration.
//!
//! Every key has a default, so an empty file is a valid config. Relative
//! paths resolve against the directory of the config file (or the working
//! directory when no file is given).

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use sentivol_core::artifact::short_hash;
use sentivol_core::data_io::DATE_FORMAT;
use sentivol_core::decompose::{Cutoff, DecomposeConfig, EmdConfig, Method, SplitK};
use sentivol_core::evaluate::{LagPolicy, RollingConfig, WindowScheme};
use sentivol_core::surface::{CurvatureFormula, GridChoice, GridConfig, QuoteSide};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub inputs: Inputs,
    pub surface: SurfaceSection,
    pub sentiment: SentimentSection,
    pub decompose: DecomposeSection,
    pub var: VarSection,
    pub evaluate: EvaluateSection,
    pub robustness: RobustnessSection,
    pub synth: SynthSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Inputs {
    pub quotes: String,
    pub rates: String,
    pub proxies: String,
    pub scores: String,
    pub holidays: String,
    pub surfaces: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurfaceSection {
    pub grid: String,
    pub quote_side: String,
    pub curvature: String,
    pub min_days_to_expiry: u32,
}

impl Default for SurfaceSection {
    fn default() -> Self {
        Self {
            grid: "default7".into(),
            quote_side: "otm".into(),
            curvature: "standard".into(),
            min_days_to_expiry: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SentimentSection {
    pub source: String,
}

impl Default for SentimentSection {
    fn default() -> Self {
        Self {
            source: "pca".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecomposeSection {
    pub method: String,
    pub cutoff_period: f64,
    pub auto_cutoff: bool,
    pub ma_window: usize,
    pub emd_k: usize,
    pub emd_max_imf: usize,
    pub emd_sift_tolerance: f64,
    pub emd_max_sifts: usize,
}

impl Default for DecomposeSection {
    fn default() -> Self {
        let emd = EmdConfig::default();
        Self {
            method: "fft".into(),
            cutoff_period: 15.0,
            auto_cutoff: false,
            ma_window: 22,
            emd_k: 4,
            emd_max_imf: emd.max_imf,
            emd_sift_tolerance: emd.sift_tolerance,
            emd_max_sifts: emd.max_sifts,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VarSection {
    pub form: String,
    pub lags: String,
    pub p_max: usize,
    pub exogenous: Vec<String>,
    pub irf_horizon: usize,
    pub irf_orthogonalized: bool,
    pub irf_shocks: Vec<String>,
    pub granger_causes: Vec<String>,
    pub forecast_horizon: usize,
}

impl Default for VarSection {
    fn default() -> Self {
        Self {
            form: "nonparameter".into(),
            lags: "auto".into(),
            p_max: 8,
            exogenous: vec![],
            irf_horizon: 20,
            irf_orthogonalized: false,
            irf_shocks: vec!["hfs".into(), "lfs".into()],
            granger_causes: vec!["hfs".into(), "lfs".into()],
            forecast_horizon: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateSection {
    pub window: usize,
    pub scheme: String,
    pub lags: String,
    pub p_max: usize,
    pub step: usize,
    pub min_forecasts: usize,
    pub variants: Vec<String>,
    pub random_walk: bool,
}

impl Default for EvaluateSection {
    fn default() -> Self {
        Self {
            window: 500,
            scheme: "rolling".into(),
            lags: "auto".into(),
            p_max: 4,
            step: 1,
            min_forecasts: 30,
            variants: vec!["none".into(), "pca".into()],
            random_walk: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RobustnessSection {
    pub windows: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSection {
    pub scenario: String,
    pub days: usize,
    pub flat_sigma: f64,
    pub smirk_base: f64,
    pub smirk_slope: f64,
    pub hfs_loading: f64,
    pub lfs_loading: f64,
}

impl Default for SynthSection {
    fn default() -> Self {
        Self {
            scenario: "planted".into(),
            days: 600,
            flat_sigma: 0.2,
            smirk_base: 0.2,
            smirk_slope: 0.3,
            hfs_loading: 0.3,
            lfs_loading: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: String,
    pub seed: u64,
    pub plots: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: "out".into(),
            seed: 42,
            plots: true,
        }
    }
}

const DOCS: &[(&str, &str, &str)] = &[
    (
        "inputs",
        "quotes",
        "Option quotes CSV: trade_date, expiry_date, strike, kind, price, underlying_price.",
    ),
    (
        "inputs",
        "rates",
        "Risk-free rates CSV: date, rate (annualized, continuous).",
    ),
    (
        "inputs",
        "proxies",
        "Sentiment proxies CSV: date, n_up, n_down, volume, float_cap, cef_nav, cef_price.",
    ),
    (
        "inputs",
        "scores",
        "External daily scores CSV: date, score, n_texts.",
    ),
    (
        "inputs",
        "holidays",
        "Optional holiday list, one YYYY-MM-DD per line. Weekends are always closed.",
    ),
    (
        "inputs",
        "surfaces",
        "Optional precomputed surfaces.csv; when set, surface construction is skipped.",
    ),
    ("surface", "grid", "Moneyness axis: default7 | paper24."),
    (
        "surface",
        "quote_side",
        "otm (calls at m >= 1, puts below) | all.",
    ),
    ("surface", "curvature", "standard | paper-literal."),
    (
        "surface",
        "min_days_to_expiry",
        "Quotes with fewer trading days to expiry are dropped.",
    ),
    (
        "sentiment",
        "source",
        "Sentiment for single-model commands: pca | external.",
    ),
    ("decompose", "method", "fft | emd | ma."),
    (
        "decompose",
        "cutoff_period",
        "FFT: periods shorter than this many days form the HFS.",
    ),
    (
        "decompose",
        "auto_cutoff",
        "FFT: pick the cutoff from the amplitude spectrum instead.",
    ),
    (
        "decompose",
        "ma_window",
        "MA: trailing window length in days.",
    ),
    (
        "decompose",
        "emd_k",
        "EMD: number of leading IMFs in the HFS; 0 picks it by a mean test.",
    ),
    ("decompose", "emd_max_imf", "EMD: maximum number of IMFs."),
    (
        "decompose",
        "emd_sift_tolerance",
        "EMD: sifting stop threshold.",
    ),
    (
        "decompose",
        "emd_max_sifts",
        "EMD: sifting iteration cap per IMF.",
    ),
    (
        "var",
        "form",
        "State variables: nonparameter (grid vols) | parameter (skew, curvature, term slope).",
    ),
    (
        "var",
        "lags",
        "auto (AIC up to p_max) or a fixed lag order.",
    ),
    ("var", "p_max", "Largest lag order tried by AIC."),
    ("var", "exogenous", "Exogenous regressors from: spot, rate."),
    ("var", "irf_horizon", "Impulse-response horizon in days."),
    (
        "var",
        "irf_orthogonalized",
        "false: reduced-form unit shocks; true: one-sd Cholesky shocks in state order.",
    ),
    ("var", "irf_shocks", "Variables shocked by var-irf."),
    (
        "var",
        "granger_causes",
        "Cause variables tested against every surface variable.",
    ),
    (
        "var",
        "forecast_horizon",
        "Days ahead produced by forecast.",
    ),
    (
        "evaluate",
        "window",
        "Estimation window in trading days (at least 250).",
    ),
    ("evaluate", "scheme", "rolling (fixed length) | expanding."),
    (
        "evaluate",
        "lags",
        "auto (AIC on the first window) or a fixed lag order.",
    ),
    ("evaluate", "p_max", "Largest lag order tried by AIC."),
    ("evaluate", "step", "Refit every this many days."),
    (
        "evaluate",
        "min_forecasts",
        "Fewer forecast dates than this is a config error.",
    ),
    (
        "evaluate",
        "variants",
        "Sentiment sources compared, each [Label=]none | pca | external[:PATH].",
    ),
    (
        "evaluate",
        "random_walk",
        "Also score the no-change baseline.",
    ),
    (
        "robustness",
        "windows",
        "Inclusive YYYY-MM-DD..YYYY-MM-DD windows; empty splits the sample in halves.",
    ),
    ("synth", "scenario", "flat | smirk | planted."),
    ("synth", "days", "Trading days generated."),
    ("synth", "flat_sigma", "Volatility of the flat scenario."),
    (
        "synth",
        "smirk_base",
        "Smirk scenario: base + slope * max(1 - m, 0).",
    ),
    ("synth", "smirk_slope", "Smirk scenario slope."),
    (
        "synth",
        "hfs_loading",
        "Planted scenario: HFS loading on next-day 0.975 vols.",
    ),
    (
        "synth",
        "lfs_loading",
        "Planted scenario: LFS loading on next-day outer-wing vols.",
    ),
    (
        "output",
        "dir",
        "Artifacts are written here; nothing is written elsewhere.",
    ),
    ("output", "seed", "Seed for every stochastic step."),
    (
        "output",
        "plots",
        "Write SVG figures next to the CSV artifacts.",
    ),
];

fn doc(section: &str, key: &str) -> Option<&'static str> {
    DOCS.iter()
        .find(|(s, k, _)| *s == section && *k == key)
        .map(|(_, _, d)| *d)
}

/// Per-invocation overrides from the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub cutoff_period: Option<f64>,
    pub lags: Option<String>,
    pub grid: Option<String>,
    pub window: Option<usize>,
    pub quotes: Option<PathBuf>,
    pub rates: Option<PathBuf>,
    pub proxies: Option<PathBuf>,
    pub scores: Option<PathBuf>,
}

/// A validated config plus the directory its relative paths hang off.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: RunConfig,
    pub base: PathBuf,
    pub out: PathBuf,
}

fn cwd_path(p: &Path) -> String {
    let abs = if p.is_absolute() {
        p.to_path_buf()
    } else {
        std::env::current_dir()
            .map(|d| d.join(p))
            .unwrap_or_else(|_| p.to_path_buf())
    };
    abs.to_string_lossy().into_owned()
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::config(format!("config: {}", e.message())))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Applies overrides and checks every enumerated value.
    pub fn resolve(
        mut self,
        config_path: Option<&Path>,
        ov: &Overrides,
    ) -> Result<Resolved, CliError> {
        let base = config_path
            .and_then(|p| p.parent())
            .map(|p| {
                if p.as_os_str().is_empty() {
                    Path::new(".")
                } else {
                    p
                }
            })
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        if let Some(s) = ov.seed {
            self.output.seed = s;
        }
        if let Some(c) = ov.cutoff_period {
            self.decompose.cutoff_period = c;
            self.decompose.auto_cutoff = false;
        }
        if let Some(l) = &ov.lags {
            self.var.lags = l.clone();
            self.evaluate.lags = l.clone();
        }
        if let Some(g) = &ov.grid {
            self.surface.grid = g.clone();
        }
        if let Some(w) = ov.window {
            self.evaluate.window = w;
        }
        for (slot, val) in [
            (&mut self.inputs.quotes, &ov.quotes),
            (&mut self.inputs.rates, &ov.rates),
            (&mut self.inputs.proxies, &ov.proxies),
            (&mut self.inputs.scores, &ov.scores),
        ] {
            if let Some(p) = val {
                *slot = cwd_path(p);
            }
        }
        let out = match &ov.out {
            Some(p) => p.clone(),
            None => base.join(&self.output.dir),
        };
        if let Some(p) = &ov.out {
            self.output.dir = cwd_path(p);
        }
        self.validate()?;
        Ok(Resolved {
            config: self,
            base,
            out,
        })
    }

    fn validate(&self) -> Result<(), CliError> {
        self.grid()?;
        self.decompose_config()?;
        parse_lags(&self.var.lags, self.var.p_max)?;
        self.rolling()?;
        self.state_form_is_known()?;
        for x in &self.var.exogenous {
            if x != "spot" && x != "rate" {
                return Err(CliError::config(format!(
                    "unknown exogenous variable `{x}` (spot | rate)"
                )));
            }
        }
        match self.sentiment.source.as_str() {
            "pca" | "external" => {}
            other => {
                return Err(CliError::config(format!(
                    "unknown sentiment source `{other}`"
                )))
            }
        }
        for v in &self.evaluate.variants {
            VariantSpec::parse(v)?;
        }
        self.robustness_windows()?;
        match self.synth.scenario.as_str() {
            "flat" | "smirk" | "planted" => {}
            other => return Err(CliError::config(format!("unknown scenario `{other}`"))),
        }
        Ok(())
    }

    fn state_form_is_known(&self) -> Result<(), CliError> {
        match self.var.form.as_str() {
            "nonparameter" | "parameter" => Ok(()),
            other => Err(CliError::config(format!("unknown VAR form `{other}`"))),
        }
    }

    pub fn grid(&self) -> Result<GridConfig, CliError> {
        let choice = GridChoice::parse(&self.surface.grid).ok_or_else(|| {
            CliError::config(format!(
                "unknown grid `{}` (default7 | paper24)",
                self.surface.grid
            ))
        })?;
        let mut grid = GridConfig::new(choice);
        grid.side = match self.surface.quote_side.as_str() {
            "otm" => QuoteSide::OutOfTheMoney,
            "all" => QuoteSide::All,
            other => {
                return Err(CliError::config(format!(
                    "unknown quote side `{other}` (otm | all)"
                )))
            }
        };
        grid.curvature = CurvatureFormula::parse(&self.surface.curvature).ok_or_else(|| {
            CliError::config(format!(
                "unknown curvature formula `{}`",
                self.surface.curvature
            ))
        })?;
        Ok(grid)
    }

    pub fn decompose_config(&self) -> Result<DecomposeConfig, CliError> {
        let d = &self.decompose;
        let method = Method::parse(&d.method).ok_or_else(|| {
            CliError::config(format!(
                "unknown decomposition method `{}` (fft | emd | ma)",
                d.method
            ))
        })?;
        if d.cutoff_period.is_nan() || d.cutoff_period <= 2.0 {
            return Err(CliError::config(format!(
                "cutoff_period must exceed 2 days, got {}",
                d.cutoff_period
            )));
        }
        if d.ma_window == 0 {
            return Err(CliError::config("ma_window must be at least 1"));
        }
        Ok(DecomposeConfig {
            method,
            cutoff: if d.auto_cutoff {
                Cutoff::Auto
            } else {
                Cutoff::Period(d.cutoff_period)
            },
            emd: EmdConfig {
                max_imf: d.emd_max_imf,
                sift_tolerance: d.emd_sift_tolerance,
                max_sifts: d.emd_max_sifts,
            },
            k: if d.emd_k == 0 {
                SplitK::Auto
            } else {
                SplitK::Fixed(d.emd_k)
            },
            window: d.ma_window,
        })
    }

    pub fn rolling(&self) -> Result<RollingConfig, CliError> {
        let e = &self.evaluate;
        let scheme = match e.scheme.as_str() {
            "rolling" => WindowScheme::Rolling,
            "expanding" => WindowScheme::Expanding,
            other => return Err(CliError::config(format!("unknown window scheme `{other}`"))),
        };
        if e.step == 0 {
            return Err(CliError::config("evaluate.step must be at least 1"));
        }
        Ok(RollingConfig {
            initial_window: e.window,
            scheme,
            lags: parse_lags(&e.lags, e.p_max)?,
            step: e.step,
            min_forecasts: e.min_forecasts,
        })
    }

    pub fn robustness_windows(&self) -> Result<Vec<(NaiveDate, NaiveDate)>, CliError> {
        self.robustness
            .windows
            .iter()
            .map(|w| {
                let bad = || {
                    CliError::config(format!(
                        "robustness window `{w}` is not YYYY-MM-DD..YYYY-MM-DD"
                    ))
                };
                let (a, b) = w.split_once("..").ok_or_else(bad)?;
                let a = NaiveDate::parse_from_str(a.trim(), DATE_FORMAT).map_err(|_| bad())?;
                let b = NaiveDate::parse_from_str(b.trim(), DATE_FORMAT).map_err(|_| bad())?;
                if b < a {
                    return Err(CliError::config(format!(
                        "robustness window `{w}` ends before it starts"
                    )));
                }
                Ok((a, b))
            })
            .collect()
    }

    pub fn var_lags(&self) -> LagPolicy {
        parse_lags(&self.var.lags, self.var.p_max).expect("validated")
    }

    /// Short hash of everything that shapes results (the output directory excluded).
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output.dir.clear();
        let text = toml::to_string(&c).expect("config serializes");
        short_hash(text.as_bytes(), 12)
    }

    /// The full config with one comment line per key.
    pub fn documented(&self) -> String {
        let text = toml::to_string(self).expect("config serializes");
        let mut out = String::from(
            "# sentivol run configuration. Relative paths resolve against this file's directory.\n",
        );
        let mut section = String::new();
        for line in text.lines() {
            let trimmed = line.trim();
            if let Some(name) = trimmed.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = name.to_string();
                out.push('\n');
            } else if let Some((key, _)) = trimmed.split_once(" = ") {
                if let Some(d) = doc(&section, key) {
                    out.push_str("# ");
                    out.push_str(d);
                    out.push('\n');
                }
            }
            if !trimmed.is_empty() {
                out.push_str(line);
                out.push('\n');
            }
        }
        out
    }
}

pub fn parse_lags(s: &str, p_max: usize) -> Result<LagPolicy, CliError> {
    if s == "auto" {
        if p_max == 0 {
            return Err(CliError::config("p_max must be at least 1"));
        }
        return Ok(LagPolicy::Auto { p_max });
    }
    match s.parse::<usize>() {
        Ok(p) if p >= 1 => Ok(LagPolicy::Fixed { p }),
        _ => Err(CliError::config(format!(
            "lags must be `auto` or a positive integer, got `{s}`"
        ))),
    }
}

impl Resolved {
    /// Absolute-or-base-relative path of a configured input, if set.
    pub fn input(&self, value: &str) -> Option<PathBuf> {
        if value.is_empty() {
            return None;
        }
        let p = Path::new(value);
        Some(if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        })
    }

    /// Like [`Resolved::input`] but the file must be configured and exist.
    pub fn require(&self, key: &str, value: &str) -> Result<PathBuf, CliError> {
        let p = self
            .input(value)
            .ok_or_else(|| CliError::config(format!("inputs.{key} is not set")))?;
        if !p.is_file() {
            return Err(CliError::config(format!(
                "{key} file not found: {}",
                p.display()
            )));
        }
        Ok(p)
    }
}

/// One entry of `evaluate.variants`.
#[derive(Debug, Clone, PartialEq)]
pub struct VariantSpec {
    pub label: Option<String>,
    pub source: VariantSource,
}

#[derive(Debug, Clone, PartialEq)]
pub enum VariantSource {
    None,
    Pca,
    External(Option<String>),
}

impl VariantSpec {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let (label, rest) = match s.split_once('=') {
            Some((l, r)) if !l.trim().is_empty() => (Some(l.trim().to_string()), r.trim()),
            _ => (None, s.trim()),
        };
        let source = match rest.split_once(':') {
            Some(("external", path)) => VariantSource::External(Some(path.to_string())),
            _ => match rest {
                "none" => VariantSource::None,
                "pca" => VariantSource::Pca,
                "external" => VariantSource::External(None),
                other => return Err(CliError::config(format!("unknown variant `{other}`"))),
            },
        };
        Ok(Self { label, source })
    }
}
