use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use sentivol_core::data_io::{OptionKind, OptionQuote};
use sentivol_core::decompose::{emd, fft_split, Cutoff, EmdConfig};
use sentivol_core::evaluate::{compare_methods, LagPolicy, RollingConfig, Variant};
use sentivol_core::surface::{build_grid, implied_vol, GridConfig};
use sentivol_core::synthgen::{gen_option_world, gen_planted_world, OptionWorldSpec, PlantedSpec};
use sentivol_core::varfit::{build_state_panel, default_selection, fit_var, StateForm};

fn inversion(c: &mut Criterion) {
    c.bench_function("implied_vol otm put", |b| {
        b.iter(|| implied_vol(black_box(1.2), 100.0, 95.0, 0.02, 0.5, OptionKind::Put))
    });
}

fn surface(c: &mut Criterion) {
    let grid = GridConfig::default();
    let world = gen_option_world(
        &OptionWorldSpec {
            days: 1,
            ..Default::default()
        },
        &grid,
    );
    let day: Vec<OptionQuote> = world.quotes.clone();
    c.bench_function("build_grid one day", |b| {
        b.iter(|| build_grid(black_box(&day), &world.rates[0], &grid))
    });
}

fn decomposition(c: &mut Criterion) {
    let grid = GridConfig::default();
    let w = gen_planted_world(
        &PlantedSpec {
            days: 2000,
            ..Default::default()
        },
        &grid,
    )
    .unwrap();
    c.bench_function("fft_split 2000", |b| {
        b.iter(|| fft_split(black_box(&w.sentiment), Cutoff::Period(15.0)))
    });
    c.bench_function("emd 2000", |b| {
        b.iter(|| emd(black_box(&w.sentiment.values), &EmdConfig::default()))
    });
}

fn var(c: &mut Criterion) {
    let grid = GridConfig::default();
    let w = gen_planted_world(
        &PlantedSpec {
            days: 1000,
            ..Default::default()
        },
        &grid,
    )
    .unwrap();
    c.bench_function("fit_var 30 vars p=1", |b| {
        b.iter(|| fit_var(black_box(&w.panel), 1, None))
    });

    let d = fft_split(&w.sentiment, Cutoff::Period(15.0)).unwrap();
    let form = StateForm::NonParameter(default_selection(&grid.maturities_months));
    let surface = build_state_panel(&w.surfaces, None, &form, &grid).unwrap();
    let variants = [
        Variant::none(),
        Variant {
            label: "FFT".into(),
            sentiment: Some((d.hfs, d.lfs)),
        },
    ];
    let cfg = RollingConfig {
        lags: LagPolicy::Fixed { p: 1 },
        ..Default::default()
    };
    let mut g = c.benchmark_group("rolling");
    g.sample_size(10);
    g.bench_function("compare_methods 1000 days", |b| {
        b.iter(|| compare_methods(black_box(&surface), &variants, None, &cfg, true))
    });
    g.finish();
}

criterion_group!(benches, inversion, surface, decomposition, var);
criterion_main!(benches);
