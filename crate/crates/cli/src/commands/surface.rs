use sentivol_core::artifact::{csv_writer, Metadata};
use sentivol_core::data_io::{DataError, DATE_FORMAT};
use sentivol_core::surface::{
    moneyness_label, surface_params, write_params, write_surfaces, IVSurfaceGrid,
};

use crate::error::CliError;
use crate::output::{Artifacts, Context};
use crate::pipeline::{self, BuildRow};
use crate::svg::{figure, Panel, Series};

fn write_build_log(buf: &mut Vec<u8>, rows: &[BuildRow], meta: &Metadata) -> Result<(), DataError> {
    let mut w = csv_writer(buf, meta).map_err(DataError::write)?;
    w.write_record([
        "date",
        "status",
        "n_quotes",
        "n_off_side",
        "n_failed_inversion",
        "expiries_used",
        "expiries_dropped",
    ])?;
    let join = |ds: &[chrono::NaiveDate]| {
        ds.iter()
            .map(|d| d.format(DATE_FORMAT).to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    for r in rows {
        let (a, b, c, used, dropped) = match &r.report {
            Some(rep) => (
                rep.n_quotes.to_string(),
                rep.n_off_side.to_string(),
                rep.n_failed_inversion.to_string(),
                join(&rep.expiries_used),
                join(&rep.expiries_dropped),
            ),
            None => Default::default(),
        };
        w.write_record([
            r.date.format(DATE_FORMAT).to_string(),
            r.status.clone(),
            a,
            b,
            c,
            used,
            dropped,
        ])?;
    }
    w.flush().map_err(DataError::write)
}

pub(crate) fn write_rejects(
    buf: &mut Vec<u8>,
    rejects: &[String],
    meta: &Metadata,
) -> Result<(), DataError> {
    let mut w = csv_writer(buf, meta).map_err(DataError::write)?;
    w.write_record(["input", "reason"])?;
    for r in rejects {
        let (input, reason) = r.split_once(':').unwrap_or(("", r));
        w.write_record([input, reason])?;
    }
    w.flush().map_err(DataError::write)
}

/// Smiles of one date, one line per maturity.
pub(crate) fn snapshot(g: &IVSurfaceGrid, meta: &Metadata) -> String {
    let mut panel = Panel::new(
        format!("{}", g.date.format(DATE_FORMAT)),
        "moneyness K/S",
        "implied vol",
    );
    for (row, mo) in g.values.iter().zip(&g.maturities_months) {
        let pts = g
            .moneyness_levels
            .iter()
            .zip(row)
            .map(|(m, v)| (*m, *v))
            .collect();
        panel.series.push(Series::new(format!("{mo}M"), pts));
    }
    figure("Implied volatility surface", &[panel], 1, meta)
}

/// Surface construction choices recorded alongside results.
pub(crate) fn describe_surface(ctx: &Context, meta: &mut Metadata) {
    let c = ctx.config();
    if let Some(p) = ctx.resolved.input(&c.inputs.surfaces) {
        meta.insert("surfaces", pipeline::file_name(&p));
        return;
    }
    meta.insert("quote_side", c.surface.quote_side.clone());
    meta.insert("curvature", c.surface.curvature.clone());
    let rates = ctx
        .resolved
        .input(&c.inputs.rates)
        .map(|p| pipeline::file_name(&p))
        .unwrap_or_default();
    meta.insert("rates", rates);
    meta.insert("slope_units", "per year");
}

pub fn run(ctx: &Context) -> Result<Artifacts, CliError> {
    let grid = ctx.config().grid()?;
    let build = pipeline::surfaces(ctx, &grid, false)?;
    let dates: Vec<_> = build.grids.iter().map(|g| g.date).collect();
    let mut meta = ctx.meta(&dates);
    meta.insert("grid", ctx.config().surface.grid.clone());
    describe_surface(ctx, &mut meta);
    meta.insert(
        "moneyness_levels",
        grid.moneyness_levels
            .iter()
            .map(|m| moneyness_label(*m))
            .collect::<Vec<_>>()
            .join(" "),
    );
    let mut out = Artifacts::new();
    out.csv("surfaces.csv", |b| write_surfaces(b, &build.grids, &meta))?;
    match build
        .grids
        .iter()
        .map(|g| surface_params(g, &grid))
        .collect::<Result<Vec<_>, _>>()
    {
        Ok(params) => out.csv("surface_params.csv", |b| write_params(b, &params, &meta))?,
        Err(e) => eprintln!("warning: surface parameters unavailable: {e}"),
    }
    out.csv("build_report.csv", |b| {
        write_build_log(b, &build.log, &meta)
    })?;
    out.csv("rejects.csv", |b| write_rejects(b, &build.rejects, &meta))?;
    let skipped = build.log.iter().filter(|r| r.status != "ok").count();
    if skipped > 0 {
        eprintln!("warning: {skipped} trade dates produced no surface (see build_report.csv)");
    }
    if !build.rejects.is_empty() {
        eprintln!(
            "warning: {} input rows rejected (see rejects.csv)",
            build.rejects.len()
        );
    }
    if ctx.config().output.plots {
        let last = build.grids.last().expect("at least one grid");
        out.text("surface_snapshot.svg", snapshot(last, &meta));
    }
    Ok(out)
}
