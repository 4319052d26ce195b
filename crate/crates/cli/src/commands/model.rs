use chrono::NaiveDate;
use sentivol_core::artifact::{csv_writer, fmt_f64, Metadata};
use sentivol_core::data_io::{DataError, DATE_FORMAT};
use sentivol_core::evaluate::{surface_targets, LagPolicy};
use sentivol_core::varfit::{
    fit_var, forecast, granger, irf, render_coefficient_table, select_lag, stability_check,
    write_coefficient_report, write_irf, write_model_json, LagSelection, StateForm, TableLayout,
    VarModel,
};

use crate::error::CliError;
use crate::output::{Artifacts, Context};
use crate::pipeline::{self, ModelInputs};
use crate::svg::{figure, figure_with_note, Panel, Series};

pub(crate) struct Fitted {
    pub inputs: ModelInputs,
    pub model: VarModel,
    pub selection: Option<LagSelection>,
    pub meta: Metadata,
}

fn note_all(notes: &[String]) {
    for n in notes {
        eprintln!("warning: {n}");
    }
}

pub(crate) fn fit(ctx: &Context) -> Result<Fitted, CliError> {
    let inputs = pipeline::model_inputs(ctx)?;
    note_all(&inputs.notes);
    let (p, selection) = match ctx.config().var_lags() {
        LagPolicy::Fixed { p } => (p, None),
        LagPolicy::Auto { p_max } => {
            let sel = select_lag(&inputs.panel, p_max, inputs.exog.as_ref())?;
            (sel.p, Some(sel))
        }
    };
    let model = fit_var(&inputs.panel, p, inputs.exog.as_ref())?;
    note_all(&model.warnings);
    let stab = stability_check(&model);
    if !stab.stable {
        eprintln!(
            "warning: fitted VAR is not stable (max companion modulus {:.6})",
            stab.max_modulus
        );
    }
    let mut meta = ctx.meta(&inputs.panel.dates);
    meta.insert("sentiment", inputs.sentiment.series.label.clone());
    meta.insert(
        "decomposition",
        format!(
            "{};{}",
            inputs.decomposition.method.as_str(),
            inputs.decomposition.params
        ),
    );
    super::surface::describe_surface(ctx, &mut meta);
    meta.insert("form", ctx.config().var.form.clone());
    meta.insert("p", p.to_string());
    meta.insert("stable", stab.stable.to_string());
    meta.insert("max_modulus", fmt_f64(stab.max_modulus));
    Ok(Fitted {
        inputs,
        model,
        selection,
        meta,
    })
}

fn write_selection(
    buf: &mut Vec<u8>,
    sel: &LagSelection,
    meta: &Metadata,
) -> Result<(), DataError> {
    let mut w = csv_writer(buf, meta).map_err(DataError::write)?;
    w.write_record(["p", "aic", "selected"])?;
    for (i, a) in sel.aic.iter().enumerate() {
        w.write_record([
            (i + 1).to_string(),
            fmt_f64(*a),
            (i + 1 == sel.p).to_string(),
        ])?;
    }
    w.flush().map_err(DataError::write)
}

fn grid_layout(selection: &[(u32, f64)], maturities: &[u32]) -> TableLayout {
    let mut layout = TableLayout::skew_curvature(maturities);
    layout.groups = maturities
        .iter()
        .filter_map(|mo| {
            let cols: Vec<(String, String)> = selection
                .iter()
                .filter(|(m, _)| m == mo)
                .map(|(_, k)| (format!("{k}"), sentivol_core::varfit::iv_name(*mo, *k)))
                .collect();
            (!cols.is_empty()).then(|| (format!("{mo}M"), cols))
        })
        .collect();
    layout
}

fn with_comments(meta: &Metadata, body: String) -> String {
    let mut buf = Vec::new();
    meta.write_comment_lines(&mut buf).expect("in-memory write");
    String::from_utf8(buf).expect("utf-8") + &body
}

pub fn run_fit(ctx: &Context) -> Result<Artifacts, CliError> {
    let f = fit(ctx)?;
    let mut out = Artifacts::new();
    let mut json = Vec::new();
    write_model_json(&mut json, &f.model, &f.meta).map_err(|e| CliError::data(e.to_string()))?;
    out.add("model.json", json);
    out.csv("coefficients.csv", |b| {
        write_coefficient_report(b, &f.model, &f.meta)
    })?;
    let grid = &f.inputs.grid;
    match pipeline::state_form(ctx, grid) {
        StateForm::Parameter => {
            let t1 = render_coefficient_table(
                &f.model,
                &TableLayout::skew_curvature(&grid.maturities_months),
            );
            out.text("coefficients.tsv", with_comments(&f.meta, t1));
            let t2 =
                render_coefficient_table(&f.model, &TableLayout::slopes(&grid.moneyness_levels));
            out.text("slopes.tsv", with_comments(&f.meta, t2));
        }
        StateForm::NonParameter(sel) => {
            let t = render_coefficient_table(&f.model, &grid_layout(&sel, &grid.maturities_months));
            out.text("coefficients.tsv", with_comments(&f.meta, t));
        }
    }
    if let Some(sel) = &f.selection {
        out.csv("lag_selection.csv", |b| write_selection(b, sel, &f.meta))?;
    }
    Ok(out)
}

pub fn run_irf(ctx: &Context) -> Result<Artifacts, CliError> {
    let f = fit(ctx)?;
    let c = &ctx.config().var;
    let mut results = Vec::with_capacity(c.irf_shocks.len());
    for shock in &c.irf_shocks {
        let r = irf(&f.model, shock, c.irf_horizon, c.irf_orthogonalized)?;
        if let Some(w) = &r.warning {
            eprintln!("warning: {w}");
        }
        results.push(r);
    }
    let mut meta = f.meta.clone();
    meta.insert("horizon", c.irf_horizon.to_string());
    meta.insert("orthogonalized", c.irf_orthogonalized.to_string());
    let mut out = Artifacts::new();
    out.csv("irf.csv", |b| write_irf(b, &results, &meta))?;
    if ctx.config().output.plots {
        let targets = surface_targets(&f.inputs.panel);
        let mut panels = Vec::new();
        for r in &results {
            for t in &targets {
                let ys = r.series(t).unwrap_or_default();
                let pts = ys.iter().enumerate().map(|(h, v)| (h as f64, *v)).collect();
                panels.push(
                    Panel::new(format!("{} → {t}", r.shock), "days", "response")
                        .with(Series::new(t.clone(), pts)),
                );
            }
        }
        let cols = targets.len().clamp(1, 4);
        let note = if c.irf_orthogonalized {
            "One-sd Cholesky shocks, ordering: surface variables, hfs, lfs. No confidence bands."
        } else {
            "Reduced-form responses to a unit shock. No confidence bands."
        };
        out.text(
            "irf_grid.svg",
            figure_with_note("Impulse responses", &panels, cols, &meta, note),
        );
    }
    Ok(out)
}

pub fn run_granger(ctx: &Context) -> Result<Artifacts, CliError> {
    let f = fit(ctx)?;
    let panel = &f.inputs.panel;
    let targets = surface_targets(panel);
    let mut rows = Vec::new();
    for cause in &ctx.config().var.granger_causes {
        panel.index_of(cause)?;
        for effect in targets.iter().filter(|t| *t != cause) {
            let g = granger(
                panel,
                &[cause.as_str()],
                effect,
                f.model.p,
                f.inputs.exog.as_ref(),
            )?;
            rows.push((cause.clone(), effect.clone(), g));
        }
    }
    let mut out = Artifacts::new();
    let meta = f.meta.clone();
    out.csv("granger.csv", |buf| {
        let mut w = csv_writer(buf, &meta).map_err(DataError::write)?;
        w.write_record(["cause", "effect", "p", "f_stat", "df1", "df2", "p_value"])?;
        for (c, e, g) in &rows {
            w.write_record([
                c.clone(),
                e.clone(),
                f.model.p.to_string(),
                fmt_f64(g.f),
                g.df1.to_string(),
                g.df2.to_string(),
                fmt_f64(g.p_value),
            ])?;
        }
        w.flush().map_err(DataError::write)
    })?;
    Ok(out)
}

fn future_dates(ctx: &Context, last: NaiveDate, h: usize) -> Result<Vec<NaiveDate>, CliError> {
    let cal = pipeline::calendar(ctx)?;
    let next = last
        .succ_opt()
        .ok_or_else(|| CliError::data("date overflow"))?;
    Ok(cal.trading_days_from(next, h))
}

pub fn run_forecast(ctx: &Context) -> Result<Artifacts, CliError> {
    let f = fit(ctx)?;
    let h = ctx.config().var.forecast_horizon.max(1);
    let panel = &f.inputs.panel;
    // exogenous values are held at their last observation
    let exog_future = f
        .inputs
        .exog
        .as_ref()
        .map(|x| vec![x.rows.last().expect("non-empty panel").clone(); h]);
    let path = forecast(&f.model, &panel.rows, exog_future.as_deref(), h)?;
    let last = *panel.dates.last().expect("non-empty panel");
    let dates = future_dates(ctx, last, h)?;
    let mut meta = f.meta.clone();
    meta.insert("origin", last.format(DATE_FORMAT).to_string());
    let mut out = Artifacts::new();
    out.csv("forecast.csv", |buf| {
        let mut w = csv_writer(buf, &meta).map_err(DataError::write)?;
        w.write_record(["date", "horizon", "variable", "value"])?;
        for (s, row) in path.iter().enumerate() {
            for (name, v) in panel.names.iter().zip(row) {
                w.write_record([
                    dates[s].format(DATE_FORMAT).to_string(),
                    (s + 1).to_string(),
                    name.clone(),
                    fmt_f64(*v),
                ])?;
            }
        }
        w.flush().map_err(DataError::write)
    })?;
    if ctx.config().output.plots {
        if let StateForm::NonParameter(sel) = pipeline::state_form(ctx, &f.inputs.grid) {
            let observed = panel.rows.last().expect("non-empty panel");
            let panels = smirk_panels(&sel, &f.inputs.grid.maturities_months, |name| {
                let j = panel.index_of(name).ok()?;
                Some((observed[j], path[0][j]))
            });
            let labels = (
                format!("observed {}", last.format(DATE_FORMAT)),
                "next-day forecast".to_string(),
            );
            out.text("forecast_smirk.svg", smirk_figure(panels, labels, &meta));
        }
    }
    Ok(out)
}

/// A maturity and its `(moneyness, first, second)` points.
pub(crate) type SmirkPanel = (u32, Vec<(f64, f64, f64)>);

/// Per maturity, points from `lookup(variable)`.
pub(crate) fn smirk_panels<F>(sel: &[(u32, f64)], maturities: &[u32], lookup: F) -> Vec<SmirkPanel>
where
    F: Fn(&str) -> Option<(f64, f64)>,
{
    maturities
        .iter()
        .map(|mo| {
            let mut pts: Vec<(f64, f64, f64)> = sel
                .iter()
                .filter(|(m, _)| m == mo)
                .filter_map(|(m, k)| {
                    let (a, b) = lookup(&sentivol_core::varfit::iv_name(*m, *k))?;
                    Some((*k, a, b))
                })
                .collect();
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            (*mo, pts)
        })
        .filter(|(_, pts)| !pts.is_empty())
        .collect()
}

pub(crate) fn smirk_figure(
    panels: Vec<SmirkPanel>,
    labels: (String, String),
    meta: &Metadata,
) -> String {
    let panels: Vec<Panel> = panels
        .into_iter()
        .map(|(mo, pts)| {
            Panel::new(format!("{mo}M"), "moneyness K/S", "implied vol")
                .with(Series::new(
                    labels.0.clone(),
                    pts.iter().map(|p| (p.0, p.1)).collect(),
                ))
                .with(
                    Series::new(labels.1.clone(), pts.iter().map(|p| (p.0, p.2)).collect())
                        .dashed(),
                )
        })
        .collect();
    figure("Realized and predicted smirk", &panels, 2, meta)
}
