use chrono::NaiveDate;
use sentivol_core::artifact::{csv_writer, fmt_f64, Metadata};
use sentivol_core::data_io::{
    write_option_quotes, write_proxies, write_rates, DataError, DATE_FORMAT,
};
use sentivol_core::evaluate::{DEFAULT_WINDOW, MIN_INITIAL_WINDOW};
use sentivol_core::stats::{mean, variance};
use sentivol_core::surface::write_surfaces;
use sentivol_core::synthgen::{
    gen_factor_proxies, gen_option_world, gen_planted_world, planted_quotes, proxies_from_factor,
    FactorSpec, OptionWorld, OptionWorldSpec, PlantedSpec, VolShape,
};
use sentivol_core::varfit::write_model_json;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{Artifacts, Context};

/// Writes a series in the external score format, one text per day.
fn write_scores(
    buf: &mut Vec<u8>,
    dates: &[NaiveDate],
    values: &[f64],
    label: &str,
    meta: &Metadata,
) -> Result<(), DataError> {
    let mut meta = meta.clone();
    meta.insert("label", label);
    let mut w = csv_writer(buf, &meta).map_err(DataError::write)?;
    w.write_record(["date", "score", "n_texts"])?;
    for (d, v) in dates.iter().zip(values) {
        w.write_record([d.format(DATE_FORMAT).to_string(), fmt_f64(*v), "1".into()])?;
    }
    w.flush().map_err(DataError::write)
}

fn standardized(xs: &[f64]) -> Vec<f64> {
    let m = mean(xs);
    let sd = variance(xs).sqrt();
    let sd = if sd > 0.0 { sd } else { 1.0 };
    xs.iter().map(|x| (x - m) / sd).collect()
}

/// Config for running the other commands on the generated files.
fn run_config(seed: u64, days: usize, with_scores: bool) -> String {
    let mut c = RunConfig::default();
    c.evaluate.window = DEFAULT_WINDOW
        .min(days.saturating_sub(c.evaluate.min_forecasts + 40))
        .max(MIN_INITIAL_WINDOW);
    c.inputs.quotes = "quotes.csv".into();
    c.inputs.rates = "rates.csv".into();
    c.inputs.proxies = "proxies.csv".into();
    c.output.seed = seed;
    if with_scores {
        c.inputs.scores = "sentiment.csv".into();
        c.evaluate.variants = vec!["none".into(), "pca".into(), "Planted=external".into()];
    }
    c.documented()
}

pub fn run(ctx: &Context) -> Result<Artifacts, CliError> {
    let c = ctx.config();
    let s = &c.synth;
    let seed = c.output.seed;
    let grid = c.grid()?;
    if s.days < 2 {
        return Err(CliError::config("synth.days must be at least 2"));
    }
    let mut out = Artifacts::new();
    let world: OptionWorld = match s.scenario.as_str() {
        "planted" => {
            let spec = PlantedSpec {
                days: s.days,
                seed,
                hfs_loading: s.hfs_loading,
                lfs_loading: s.lfs_loading,
                base: VolShape::Smirk {
                    base: s.smirk_base,
                    slope: s.smirk_slope,
                },
                ..Default::default()
            };
            let planted = gen_planted_world(&spec, &grid)?;
            let world = planted_quotes(&planted, &grid, seed);
            let meta = ctx.meta(&world.dates);
            let factor = standardized(&planted.sentiment.values);
            let fspec = FactorSpec {
                days: s.days,
                seed,
                ..Default::default()
            };
            let proxies = proxies_from_factor(&fspec, world.dates.clone(), &factor);
            out.csv("proxies.csv", |b| write_proxies(b, &proxies, &meta))?;
            out.csv("sentiment.csv", |b| {
                write_scores(
                    b,
                    &planted.sentiment.dates,
                    &planted.sentiment.values,
                    &planted.sentiment.label,
                    &meta,
                )
            })?;
            let mut json = Vec::new();
            write_model_json(&mut json, &planted.truth, &meta)
                .map_err(|e| CliError::data(e.to_string()))?;
            out.add("truth_model.json", json);
            world
        }
        scenario => {
            let shape = match scenario {
                "flat" => VolShape::Flat {
                    sigma: s.flat_sigma,
                },
                _ => VolShape::Smirk {
                    base: s.smirk_base,
                    slope: s.smirk_slope,
                },
            };
            let spec = OptionWorldSpec {
                days: s.days,
                seed,
                shape,
                ..Default::default()
            };
            let world = gen_option_world(&spec, &grid);
            let meta = ctx.meta(&world.dates);
            let fspec = FactorSpec {
                days: s.days,
                seed,
                start: world.dates[0],
                ..Default::default()
            };
            let (proxies, factor) = gen_factor_proxies(&fspec);
            let proxies = if proxies.dates == world.dates {
                proxies
            } else {
                proxies_from_factor(&fspec, world.dates.clone(), &factor)
            };
            out.csv("proxies.csv", |b| write_proxies(b, &proxies, &meta))?;
            world
        }
    };
    let meta = ctx.meta(&world.dates);
    out.csv("quotes.csv", |b| {
        write_option_quotes(b, &world.quotes, &meta)
    })?;
    out.csv("rates.csv", |b| write_rates(b, &world.rates, &meta))?;
    out.csv("truth_surface.csv", |b| {
        write_surfaces(b, &world.truth, &meta)
    })?;
    out.text(
        "sentivol.toml",
        run_config(seed, s.days, s.scenario == "planted"),
    );
    Ok(out)
}
