//! Stages shared by several commands.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use chrono::NaiveDate;
use sentivol_core::data_io::{
    filter_quotes, load_option_quotes, load_proxies, load_rates, OptionQuote, ProxySchema,
    QuoteSchema, RateBounds, RatePoint, TradingCalendar,
};
use sentivol_core::decompose::{decompose, DecompositionResult};
use sentivol_core::sentiment::{
    composite_index, load_external_scores, proxy_columns, PcaLoadings, SentimentSeries,
};
use sentivol_core::surface::{build_grid, read_surfaces, BuildReport, GridConfig, IVSurfaceGrid};
use sentivol_core::varfit::{build_state_panel, default_selection, StateForm, StatePanel};

use crate::config::{VariantSource, VariantSpec};
use crate::error::CliError;
use crate::output::Context;

pub fn calendar(ctx: &Context) -> Result<TradingCalendar, CliError> {
    match ctx.resolved.input(&ctx.config().inputs.holidays) {
        None => Ok(TradingCalendar::weekdays()),
        Some(p) => {
            if !p.is_file() {
                return Err(CliError::config(format!(
                    "holidays file not found: {}",
                    p.display()
                )));
            }
            Ok(TradingCalendar::load_holidays(&p)?)
        }
    }
}

/// Outcome of one trade date's surface build.
#[derive(Debug, Clone)]
pub struct BuildRow {
    pub date: NaiveDate,
    /// `ok`, or why the date was skipped.
    pub status: String,
    pub report: Option<BuildReport>,
}

#[derive(Debug, Clone, Default)]
pub struct SurfaceBuild {
    pub grids: Vec<IVSurfaceGrid>,
    pub log: Vec<BuildRow>,
    /// `file:line: reason` for every rejected input row.
    pub rejects: Vec<String>,
    /// Underlying price per trade date (first quote of the day).
    pub spots: BTreeMap<NaiveDate, f64>,
    pub rates: BTreeMap<NaiveDate, f64>,
}

fn load_market(ctx: &Context, build: &mut SurfaceBuild) -> Result<Vec<OptionQuote>, CliError> {
    let c = ctx.config();
    let qpath = ctx.resolved.require("quotes", &c.inputs.quotes)?;
    let rpath = ctx.resolved.require("rates", &c.inputs.rates)?;
    let quotes = load_option_quotes(&qpath, &QuoteSchema::default())?;
    let rates = load_rates(&rpath, RateBounds::default())?;
    build
        .rejects
        .extend(quotes.rejects.iter().map(|r| format!("quotes:{r}")));
    build
        .rejects
        .extend(rates.rejects.iter().map(|r| format!("rates:{r}")));
    for q in &quotes.records {
        build
            .spots
            .entry(q.trade_date)
            .or_insert(q.underlying_price);
    }
    for RatePoint { date, rate } in &rates.records {
        build.rates.insert(*date, *rate);
    }
    Ok(quotes.records)
}

/// Grids for every trade date, or the precomputed surfaces file when configured.
pub fn surfaces(
    ctx: &Context,
    grid: &GridConfig,
    need_market: bool,
) -> Result<SurfaceBuild, CliError> {
    let c = ctx.config();
    let mut build = SurfaceBuild::default();
    if let Some(path) = ctx.resolved.input(&c.inputs.surfaces) {
        if !path.is_file() {
            return Err(CliError::config(format!(
                "surfaces file not found: {}",
                path.display()
            )));
        }
        let file = std::fs::File::open(&path)
            .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        build.grids = read_surfaces(file)?;
        if let Some(g) = build.grids.first() {
            if g.maturities_months != grid.maturities_months
                || g.moneyness_levels != grid.moneyness_levels
            {
                return Err(CliError::config(
                    "surfaces file does not match the configured grid",
                ));
            }
        }
        if need_market {
            load_market(ctx, &mut build)?;
        }
        return Ok(build);
    }

    let quotes = load_market(ctx, &mut build)?;
    let cal = calendar(ctx)?;
    let kept = filter_quotes(&quotes, &cal, c.surface.min_days_to_expiry);
    let mut by_date: BTreeMap<NaiveDate, Vec<OptionQuote>> = BTreeMap::new();
    for q in kept {
        by_date.entry(q.trade_date).or_default().push(q);
    }
    for (date, day) in by_date {
        let Some(rate) = build.rates.get(&date) else {
            build.log.push(BuildRow {
                date,
                status: "no rate for this date".into(),
                report: None,
            });
            continue;
        };
        let point = RatePoint { date, rate: *rate };
        match build_grid(&day, &point, grid) {
            Ok((g, report)) => {
                build.grids.push(g);
                build.log.push(BuildRow {
                    date,
                    status: "ok".into(),
                    report: Some(report),
                });
            }
            Err(e) => build.log.push(BuildRow {
                date,
                status: e.to_string(),
                report: None,
            }),
        }
    }
    if build.grids.is_empty() {
        return Err(CliError::data("no trade date produced a surface"));
    }
    Ok(build)
}

pub struct Sentiment {
    pub series: SentimentSeries,
    pub loadings: Option<PcaLoadings>,
    pub rejects: Vec<String>,
}

pub fn pca_sentiment(ctx: &Context) -> Result<Sentiment, CliError> {
    let path = ctx
        .resolved
        .require("proxies", &ctx.config().inputs.proxies)?;
    let (panel, rejects) = load_proxies(&path, &ProxySchema::default())?;
    let (mut series, loadings) = composite_index(&proxy_columns(&panel)?)?;
    series.label = "pca".into();
    Ok(Sentiment {
        series,
        loadings: Some(loadings),
        rejects: rejects.iter().map(|r| format!("proxies:{r}")).collect(),
    })
}

pub fn external_sentiment(ctx: &Context, path: Option<&str>) -> Result<Sentiment, CliError> {
    let p = match path {
        Some(p) => {
            let p = ctx
                .resolved
                .input(p)
                .ok_or_else(|| CliError::config("empty external scores path"))?;
            if !p.is_file() {
                return Err(CliError::config(format!(
                    "scores file not found: {}",
                    p.display()
                )));
            }
            p
        }
        None => ctx
            .resolved
            .require("scores", &ctx.config().inputs.scores)?,
    };
    Ok(Sentiment {
        series: load_external_scores(&p)?,
        loadings: None,
        rejects: vec![],
    })
}

/// The sentiment named by `sentiment.source`.
pub fn configured_sentiment(ctx: &Context) -> Result<Sentiment, CliError> {
    match ctx.config().sentiment.source.as_str() {
        "external" => external_sentiment(ctx, None),
        _ => pca_sentiment(ctx),
    }
}

pub fn split(ctx: &Context, series: &SentimentSeries) -> Result<DecompositionResult, CliError> {
    Ok(decompose(series, &ctx.config().decompose_config()?)?)
}

pub fn common_dates(sets: &[Vec<NaiveDate>]) -> Vec<NaiveDate> {
    let Some(first) = sets.first() else {
        return vec![];
    };
    let mut common: BTreeSet<NaiveDate> = first.iter().copied().collect();
    for s in &sets[1..] {
        let other: BTreeSet<NaiveDate> = s.iter().copied().collect();
        common = common.intersection(&other).copied().collect();
    }
    common.into_iter().collect()
}

pub fn restrict_series(s: &SentimentSeries, dates: &[NaiveDate]) -> SentimentSeries {
    let keep: BTreeSet<&NaiveDate> = dates.iter().collect();
    let (d, v): (Vec<NaiveDate>, Vec<f64>) = s
        .dates
        .iter()
        .zip(&s.values)
        .filter(|(d, _)| keep.contains(d))
        .map(|(d, v)| (*d, *v))
        .unzip();
    SentimentSeries {
        dates: d,
        values: v,
        label: s.label.clone(),
    }
}

pub fn restrict_grids(grids: &[IVSurfaceGrid], dates: &[NaiveDate]) -> Vec<IVSurfaceGrid> {
    let keep: BTreeSet<&NaiveDate> = dates.iter().collect();
    grids
        .iter()
        .filter(|g| keep.contains(&g.date))
        .cloned()
        .collect()
}

pub fn state_form(ctx: &Context, grid: &GridConfig) -> StateForm {
    match ctx.config().var.form.as_str() {
        "parameter" => StateForm::Parameter,
        _ => StateForm::NonParameter(default_selection(&grid.maturities_months)),
    }
}

fn exog_dates(build: &SurfaceBuild, names: &[String]) -> Vec<Vec<NaiveDate>> {
    names
        .iter()
        .map(|n| match n.as_str() {
            "spot" => build.spots.keys().copied().collect(),
            _ => build.rates.keys().copied().collect(),
        })
        .collect()
}

pub fn exog_panel(
    build: &SurfaceBuild,
    names: &[String],
    dates: &[NaiveDate],
) -> Result<Option<StatePanel>, CliError> {
    if names.is_empty() {
        return Ok(None);
    }
    let rows = dates
        .iter()
        .map(|d| {
            names
                .iter()
                .map(|n| {
                    let src = if n == "spot" {
                        &build.spots
                    } else {
                        &build.rates
                    };
                    src.get(d)
                        .copied()
                        .ok_or_else(|| CliError::data(format!("no {n} on {d}")))
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Some(StatePanel::new(dates.to_vec(), names.to_vec(), rows)?))
}

/// Everything a single-model command needs, aligned on common dates.
pub struct ModelInputs {
    pub grid: GridConfig,
    pub build: SurfaceBuild,
    pub sentiment: Sentiment,
    pub decomposition: DecompositionResult,
    /// Surfaces on the common dates.
    pub surfaces: Vec<IVSurfaceGrid>,
    pub panel: StatePanel,
    pub exog: Option<StatePanel>,
    pub notes: Vec<String>,
}

pub fn model_inputs(ctx: &Context) -> Result<ModelInputs, CliError> {
    let c = ctx.config();
    let grid = c.grid()?;
    let build = surfaces(ctx, &grid, !c.var.exogenous.is_empty())?;
    let sentiment = configured_sentiment(ctx)?;
    let decomposition = split(ctx, &sentiment.series)?;
    let mut sets = vec![
        build.grids.iter().map(|g| g.date).collect::<Vec<_>>(),
        sentiment.series.dates.clone(),
    ];
    sets.extend(exog_dates(&build, &c.var.exogenous));
    let dates = common_dates(&sets);
    if dates.is_empty() {
        return Err(CliError::data("surfaces and sentiment share no dates"));
    }
    let mut notes = Vec::new();
    let dropped = build.grids.len() - dates.len();
    if dropped > 0 {
        notes.push(format!(
            "{dropped} surface dates have no matching sentiment or exogenous value"
        ));
    }
    let surfaces = restrict_grids(&build.grids, &dates);
    let hfs = restrict_series(&decomposition.hfs, &dates);
    let lfs = restrict_series(&decomposition.lfs, &dates);
    let panel = build_state_panel(
        &surfaces,
        Some((&hfs, &lfs)),
        &state_form(ctx, &grid),
        &grid,
    )?;
    let exog = exog_panel(&build, &c.var.exogenous, &dates)?;
    Ok(ModelInputs {
        grid,
        build,
        sentiment,
        decomposition,
        surfaces,
        panel,
        exog,
        notes,
    })
}

/// Label used in reports for a variant without an explicit one.
pub fn default_label(spec: &VariantSpec, series_label: Option<&str>) -> String {
    if let Some(l) = &spec.label {
        return l.clone();
    }
    match &spec.source {
        VariantSource::None => "None".into(),
        VariantSource::Pca => "PCA".into(),
        VariantSource::External(_) => match series_label {
            Some(l) if !l.is_empty() => l.to_string(),
            _ => "External".into(),
        },
    }
}

pub fn file_name(p: &Path) -> String {
    p.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}
