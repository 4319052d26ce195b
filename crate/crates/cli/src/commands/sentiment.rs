use sentivol_core::decompose::{amplitude_spectrum, write_decomposition, write_imfs, Cutoff};
use sentivol_core::sentiment::{write_loadings, write_series, SentimentSeries};

use super::surface::write_rejects;
use crate::error::CliError;
use crate::output::{Artifacts, Context};
use crate::pipeline;
use crate::svg::{figure, Panel, Series};

fn indexed(values: &[f64]) -> Vec<(f64, f64)> {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| (i as f64, *v))
        .collect()
}

pub fn run_sentiment(ctx: &Context) -> Result<Artifacts, CliError> {
    let s = pipeline::configured_sentiment(ctx)?;
    let meta = ctx.meta(&s.series.dates);
    let mut out = Artifacts::new();
    out.csv("sentiment.csv", |b| write_series(b, &s.series, &meta))?;
    if let Some(l) = &s.loadings {
        out.csv("loadings.csv", |b| write_loadings(b, l, &meta))?;
    }
    if !s.rejects.is_empty() {
        eprintln!(
            "warning: {} proxy rows rejected (see rejects.csv)",
            s.rejects.len()
        );
    }
    out.csv("rejects.csv", |b| write_rejects(b, &s.rejects, &meta))?;
    if ctx.config().output.plots {
        let p = Panel::new(s.series.label.clone(), "trading day", "index")
            .with(Series::new("score", indexed(&s.series.values)));
        out.text("sentiment.svg", figure("Daily sentiment", &[p], 1, &meta));
    }
    Ok(out)
}

/// Amplitude against frequency in cycles per day, with the cutoff marked.
fn spectrum_chart(
    series: &SentimentSeries,
    cutoff: Option<f64>,
    meta: &sentivol_core::artifact::Metadata,
) -> String {
    let pts = amplitude_spectrum(&series.values)
        .into_iter()
        .map(|(p, a)| (1.0 / p, a))
        .collect();
    let mut panel = Panel::new(
        series.label.clone(),
        "frequency (cycles per day)",
        "amplitude",
    )
    .with(Series::new("amplitude", pts));
    if let Some(c) = cutoff {
        panel.markers.push(1.0 / c);
    }
    figure("Amplitude spectrum", &[panel], 1, meta)
}

pub fn run_decompose(ctx: &Context) -> Result<Artifacts, CliError> {
    let s = pipeline::configured_sentiment(ctx)?;
    let res = pipeline::split(ctx, &s.series)?;
    let meta = ctx.meta(&s.series.dates);
    let mut out = Artifacts::new();
    out.csv("decomposition.csv", |b| {
        write_decomposition(b, &s.series, &res, &meta)
    })?;
    if let Some(set) = &res.imfs {
        out.csv("imfs.csv", |b| write_imfs(b, &s.series.dates, set, &meta))?;
    }
    if ctx.config().output.plots {
        let panels = [
            Panel::new("original", "trading day", "")
                .with(Series::new("original", indexed(&s.series.values))),
            Panel::new("HFS", "trading day", "").with(Series::new("hfs", indexed(&res.hfs.values))),
            Panel::new("LFS", "trading day", "").with(Series::new("lfs", indexed(&res.lfs.values))),
        ];
        out.text(
            "decomposition.svg",
            figure(&format!("{} split", res.method.as_str()), &panels, 1, &meta),
        );
        let cutoff = match ctx.config().decompose_config()?.cutoff {
            Cutoff::Period(p) => Some(p),
            Cutoff::Auto => res
                .params
                .split(';')
                .find_map(|kv| kv.strip_prefix("cutoff_period=")?.parse().ok()),
        };
        let shown = if res.method.as_str() == "fft" {
            cutoff
        } else {
            None
        };
        out.text("spectrum.svg", spectrum_chart(&s.series, shown, &meta));
        if let Some(set) = &res.imfs {
            let mut panels: Vec<Panel> = set
                .imfs
                .iter()
                .enumerate()
                .map(|(k, imf)| {
                    Panel::new(format!("IMF {}", k + 1), "trading day", "")
                        .with(Series::new("imf", indexed(imf)))
                })
                .collect();
            panels.push(
                Panel::new("residual", "trading day", "")
                    .with(Series::new("residual", indexed(&set.residual))),
            );
            out.text(
                "imf_stack.svg",
                figure("Intrinsic mode functions", &panels, 1, &meta),
            );
        }
    }
    Ok(out)
}
