use sentivol_core::artifact::Metadata;
use sentivol_core::data_io::DATE_FORMAT;
use sentivol_core::evaluate::{
    compare_methods, render_accuracy_table, subperiod_robustness, write_accuracy, write_forecasts,
    write_robustness, Comparison, Metric, Variant,
};
use sentivol_core::varfit::{build_state_panel, StateForm};

use super::model::{fit, smirk_figure, smirk_panels};
use crate::config::{VariantSource, VariantSpec};
use crate::error::CliError;
use crate::output::{Artifacts, Context};
use crate::pipeline::{self, Sentiment};

struct Prepared {
    label: String,
    split: Option<(
        sentivol_core::sentiment::SentimentSeries,
        sentivol_core::sentiment::SentimentSeries,
    )>,
}

fn prepare(
    ctx: &Context,
    spec: &VariantSpec,
    pca: &mut Option<Sentiment>,
) -> Result<Prepared, CliError> {
    let s = match &spec.source {
        VariantSource::None => {
            return Ok(Prepared {
                label: pipeline::default_label(spec, None),
                split: None,
            })
        }
        VariantSource::Pca => {
            if pca.is_none() {
                *pca = Some(pipeline::pca_sentiment(ctx)?);
            }
            pca.as_ref().expect("just set").series.clone()
        }
        VariantSource::External(path) => pipeline::external_sentiment(ctx, path.as_deref())?.series,
    };
    let d = pipeline::split(ctx, &s)?;
    Ok(Prepared {
        label: pipeline::default_label(spec, Some(&s.label)),
        split: Some((d.hfs, d.lfs)),
    })
}

fn with_comments(meta: &Metadata, body: String) -> String {
    let mut buf = Vec::new();
    meta.write_comment_lines(&mut buf).expect("in-memory write");
    String::from_utf8(buf).expect("utf-8") + &body
}

pub fn run_evaluate(ctx: &Context) -> Result<Artifacts, CliError> {
    let c = ctx.config();
    let grid = c.grid()?;
    let cfg = c.rolling()?;
    let specs = c
        .evaluate
        .variants
        .iter()
        .map(|v| VariantSpec::parse(v))
        .collect::<Result<Vec<_>, _>>()?;
    if specs.is_empty() {
        return Err(CliError::config("evaluate.variants is empty"));
    }
    let build = pipeline::surfaces(ctx, &grid, !c.var.exogenous.is_empty())?;
    let mut pca = None;
    let prepared = specs
        .iter()
        .map(|s| prepare(ctx, s, &mut pca))
        .collect::<Result<Vec<_>, _>>()?;
    for (i, p) in prepared.iter().enumerate() {
        if prepared[..i].iter().any(|q| q.label == p.label) {
            return Err(CliError::config(format!(
                "duplicate variant label `{}`",
                p.label
            )));
        }
    }

    let mut sets = vec![build.grids.iter().map(|g| g.date).collect::<Vec<_>>()];
    for p in &prepared {
        if let Some((h, _)) = &p.split {
            sets.push(h.dates.clone());
        }
    }
    for x in &c.var.exogenous {
        sets.push(match x.as_str() {
            "spot" => build.spots.keys().copied().collect(),
            _ => build.rates.keys().copied().collect(),
        });
    }
    let dates = pipeline::common_dates(&sets);
    if dates.is_empty() {
        return Err(CliError::data(
            "surfaces and sentiment variants share no dates",
        ));
    }
    let dropped = build.grids.len() - dates.len();
    if dropped > 0 {
        eprintln!(
            "warning: {dropped} surface dates are missing from some variant and were dropped"
        );
    }
    let surfaces = pipeline::restrict_grids(&build.grids, &dates);
    let form = pipeline::state_form(ctx, &grid);
    let panel = build_state_panel(&surfaces, None, &form, &grid)?;
    let exog = pipeline::exog_panel(&build, &c.var.exogenous, &dates)?;
    let variants: Vec<Variant> = prepared
        .into_iter()
        .map(|p| Variant {
            label: p.label,
            sentiment: p.split.map(|(h, l)| {
                (
                    pipeline::restrict_series(&h, &dates),
                    pipeline::restrict_series(&l, &dates),
                )
            }),
        })
        .collect();
    let cmp = compare_methods(
        &panel,
        &variants,
        exog.as_ref(),
        &cfg,
        c.evaluate.random_walk,
    )?;
    for (label, run) in &cmp.runs {
        for w in &run.warnings {
            eprintln!("warning: {label}: {w}");
        }
    }

    let mut meta = ctx.meta(&cmp.dates);
    meta.insert("window", cfg.initial_window.to_string());
    meta.insert("scheme", c.evaluate.scheme.clone());
    meta.insert(
        "lags",
        cmp.runs
            .iter()
            .map(|(l, r)| format!("{l}={}", r.p))
            .collect::<Vec<_>>()
            .join(";"),
    );
    meta.insert("decomposition", c.decompose.method.clone());
    let mut out = Artifacts::new();
    let runs: Vec<(&str, &[_])> = cmp
        .runs
        .iter()
        .map(|(l, r)| (l.as_str(), r.records.as_slice()))
        .collect();
    out.csv("forecasts.csv", |b| write_forecasts(b, &runs, &meta))?;
    out.csv("accuracy.csv", |b| write_accuracy(b, &cmp.reports, &meta))?;
    out.text(
        "accuracy_mape.tsv",
        with_comments(&meta, render_accuracy_table(&cmp.reports, Metric::Mape)),
    );
    out.text(
        "accuracy_mspe.tsv",
        with_comments(&meta, render_accuracy_table(&cmp.reports, Metric::Mspe)),
    );
    if c.output.plots {
        if let StateForm::NonParameter(sel) = &form {
            if let Some(svg) = last_day_smirk(&cmp, sel, &grid.maturities_months, &meta) {
                out.text("smirk.svg", svg);
            }
        }
    }
    Ok(out)
}

/// Realized smirk on the last forecast date against the first sentiment variant.
fn last_day_smirk(
    cmp: &Comparison,
    sel: &[(u32, f64)],
    maturities: &[u32],
    meta: &Metadata,
) -> Option<String> {
    let last = *cmp.dates.last()?;
    let (label, run) = cmp
        .runs
        .iter()
        .find(|(l, _)| l != "None")
        .or(cmp.runs.first())?;
    let day: Vec<_> = run.records.iter().filter(|r| r.date == last).collect();
    let panels = smirk_panels(sel, maturities, |name| {
        day.iter()
            .find(|r| r.variable == name)
            .map(|r| (r.realized, r.predicted))
    });
    let labels = (
        format!("realized {}", last.format(DATE_FORMAT)),
        format!("predicted ({label})"),
    );
    Some(smirk_figure(panels, labels, meta))
}

pub fn run_robustness(ctx: &Context) -> Result<Artifacts, CliError> {
    let f = fit(ctx)?;
    let panel = &f.inputs.panel;
    let mut windows = ctx.config().robustness_windows()?;
    if windows.is_empty() {
        let n = panel.len();
        if n < 4 {
            return Err(CliError::data("too few dates to split the sample"));
        }
        let h = n / 2;
        windows = vec![
            (panel.dates[0], panel.dates[h - 1]),
            (panel.dates[h], panel.dates[n - 1]),
        ];
    }
    let report = subperiod_robustness(panel, &windows, f.inputs.exog.as_ref(), f.model.p)?;
    let flagged = report.flagged().count();
    if flagged > 0 {
        eprintln!("note: {flagged} coefficients change sign or significance across windows");
    }
    let mut meta = f.meta.clone();
    meta.insert("flagged", flagged.to_string());
    let mut out = Artifacts::new();
    out.csv("robustness.csv", |b| write_robustness(b, &report, &meta))?;
    Ok(out)
}
