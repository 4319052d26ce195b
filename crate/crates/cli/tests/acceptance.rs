//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::f64::consts::PI;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use nalgebra::DMatrix;
use sentivol_core::data_io::{OptionKind, OptionQuote, TradingCalendar};
use sentivol_core::decompose::{
    emd, emd_split_values, fft_split_values, ma_split, EmdConfig, SplitK,
};
use sentivol_core::decompose::{fft_split, Cutoff};
use sentivol_core::evaluate::{
    compare_methods, mape, render_accuracy_table, AccuracyReport, Metric, RollingConfig, Variant,
    RANDOM_WALK, TOTAL_BUCKET,
};
use sentivol_core::sentiment::SentimentSeries;
use sentivol_core::stats::correlation;
use sentivol_core::surface::{bs_price, build_grid, implied_vol, GridConfig};
use sentivol_core::synthgen::{
    gen_option_world, gen_planted_world, gen_var_panel, OptionWorldSpec, PlantedSpec, SimRng,
    VarSpec,
};
use sentivol_core::varfit::{
    build_state_panel, default_selection, fit_var, granger, irf, render_coefficient_table,
    select_lag, StateForm, TableLayout, VarModel,
};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn inversion_and_parity() -> (Outcome, Outcome) {
    let mut rng = SimRng::new(2024);
    let tuples: Vec<[f64; 5]> = (0..10_000)
        .map(|_| {
            let s = rng.uniform_range(1.0, 500.0);
            [
                s,
                s * rng.uniform_range(-0.7, 0.7).exp(),
                rng.uniform_range(-0.02, 0.1),
                rng.uniform_range(0.25, 3.0),
                rng.uniform_range(0.05, 2.0),
            ]
        })
        .collect();
    let start = Instant::now();
    let mut max_err = 0.0f64;
    for &[s, k, r, tau, sigma] in &tuples {
        let kind = if k >= s {
            OptionKind::Call
        } else {
            OptionKind::Put
        };
        let price = bs_price(s, k, r, tau, sigma, kind).unwrap();
        let got =
            implied_vol(price, s, k, r, tau, kind).map_or(f64::INFINITY, |v| (v - sigma).abs());
        max_err = max_err.max(got);
    }
    let secs = start.elapsed().as_secs_f64();
    let inv = check(
        max_err < 1e-6 && secs < 5.0,
        format!("max |err| {max_err:.2e}, {secs:.2} s"),
    );

    let mut max_gap = 0.0f64;
    for &[s, k, r, tau, sigma] in &tuples {
        let c = bs_price(s, k, r, tau, sigma, OptionKind::Call).unwrap();
        let p = bs_price(s, k, r, tau, sigma, OptionKind::Put).unwrap();
        max_gap = max_gap.max((c - p - (s - k * (-r * tau).exp())).abs());
    }
    (
        inv,
        check(max_gap < 1e-10, format!("max parity gap {max_gap:.2e}")),
    )
}

fn flat_world() -> Outcome {
    let grid = GridConfig::default();
    let w = gen_option_world(
        &OptionWorldSpec {
            days: 100,
            ..Default::default()
        },
        &grid,
    );
    let (mut worst, mut ape, mut n) = (0.0f64, 0.0, 0usize);
    for (i, date) in w.dates.iter().enumerate() {
        let day: Vec<OptionQuote> = w
            .quotes
            .iter()
            .filter(|q| q.trade_date == *date)
            .copied()
            .collect();
        let (g, _) = build_grid(&day, &w.rates[i], &grid).map_err(|e| e.to_string())?;
        for (row, truth) in g.values.iter().zip(&w.truth[i].values) {
            for (v, t) in row.iter().zip(truth) {
                worst = worst.max((v - 0.2).abs());
                ape += ((v - t) / t).abs();
                n += 1;
            }
        }
    }
    let m = ape / n as f64;
    check(
        n == 2800 && worst < 1e-4 && m < 1e-3,
        format!(
            "{n} cells, max |iv-0.2| {worst:.2e}, MAPE {:.2e}%",
            100.0 * m
        ),
    )
}

fn series(values: Vec<f64>) -> SentimentSeries {
    let start = chrono::NaiveDate::from_ymd_opt(2015, 1, 2).unwrap();
    let dates = TradingCalendar::weekdays().trading_days_from(start, values.len());
    SentimentSeries::new(dates, values, "acceptance").unwrap()
}

fn decomposition() -> Outcome {
    let mut rng = SimRng::new(77);
    let (mut fft_err, mut emd_err, mut ma_ok) = (0.0f64, 0.0f64, true);
    for _ in 0..100 {
        let phi = rng.uniform_range(-0.5, 0.98);
        let drift = rng.uniform_range(-0.01, 0.01);
        let mut x = 0.0;
        let xs: Vec<f64> = (0..2000)
            .map(|t| {
                x = phi * x + rng.normal();
                x + drift * t as f64
            })
            .collect();
        let (h, l) = fft_split_values(&xs, 15.0).map_err(|e| e.to_string())?;
        for t in 0..xs.len() {
            fft_err = fft_err.max((h[t] + l[t] - xs[t]).abs());
        }
        let set = emd(&xs, &EmdConfig::default()).map_err(|e| e.to_string())?;
        let (h, l, _) = emd_split_values(&set, SplitK::Auto).map_err(|e| e.to_string())?;
        for t in 0..xs.len() {
            emd_err = emd_err.max((h[t] + l[t] - xs[t]).abs());
        }
        let d = ma_split(&series(xs.clone()), 22).map_err(|e| e.to_string())?;
        for ((x, h), l) in xs.iter().zip(&d.hfs.values).zip(&d.lfs.values) {
            ma_ok &= (h + l - x).abs() <= 2.0 * f64::EPSILON * x.abs().max(l.abs());
        }
    }

    let n = 2400;
    let fast: Vec<f64> = (0..n).map(|t| (2.0 * PI * t as f64 / 10.0).sin()).collect();
    let slow: Vec<f64> = (0..n)
        .map(|t| 2.0 * (2.0 * PI * t as f64 / 120.0).sin())
        .collect();
    let mix: Vec<f64> = fast.iter().zip(&slow).map(|(a, b)| a + b).collect();
    let (h, l) = fft_split_values(&mix, 15.0).map_err(|e| e.to_string())?;
    let tone_err = (0..n)
        .map(|t| ((h[t] - fast[t]).abs() / 1.0).max((l[t] - slow[t]).abs() / 2.0))
        .fold(0.0f64, f64::max);
    let m = 1500;
    let set = emd(&mix[..m], &EmdConfig::default()).map_err(|e| e.to_string())?;
    let (h, l, _) = emd_split_values(&set, SplitK::Fixed(1)).map_err(|e| e.to_string())?;
    let (cf, cs) = (correlation(&h, &fast[..m]), correlation(&l, &slow[..m]));

    check(
        fft_err < 1e-9 && emd_err < 1e-8 && ma_ok && tone_err < 1e-6 && cf > 0.95 && cs > 0.95,
        format!(
            "fft {fft_err:.1e}, emd {emd_err:.1e}, ma within 2 ulp: {ma_ok}; tones: fft {tone_err:.1e}×amp, emd corr {cf:.3}/{cs:.3}"
        ),
    )
}

fn var_recovery() -> Outcome {
    let (mut covered, mut total) = (0, 0);
    for rep in 0..200 {
        let mut spec = VarSpec::diagonal(2, 0.5, 5000, 101);
        spec.stream = rep;
        let (panel, _) = gen_var_panel(&spec).map_err(|e| e.to_string())?;
        let m = fit_var(&panel, 1, None).map_err(|e| e.to_string())?;
        for i in 0..2 {
            total += 1;
            covered += usize::from((m.coef[(1 + i, i)] - 0.5).abs() <= 3.0 * m.se[(1 + i, i)]);
        }
    }
    let coverage = covered as f64 / total as f64;

    let mut hits = 0;
    for rep in 0..100 {
        let mut spec = VarSpec::diagonal(2, 0.0, 2000, 202);
        spec.phis = vec![
            DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.0, 0.4]),
            DMatrix::from_row_slice(2, 2, &[-0.3, 0.0, 0.1, 0.2]),
        ];
        spec.stream = rep;
        let (panel, _) = gen_var_panel(&spec).map_err(|e| e.to_string())?;
        hits += usize::from(select_lag(&panel, 8, None).map_err(|e| e.to_string())?.p == 2);
    }

    let mut rejections = 0;
    for rep in 0..1000 {
        let mut spec = VarSpec::diagonal(2, 0.0, 300, 404);
        spec.stream = rep;
        let (panel, _) = gen_var_panel(&spec).map_err(|e| e.to_string())?;
        let g = granger(&panel, &["y2"], "y1", 2, None).map_err(|e| e.to_string())?;
        rejections += usize::from(g.p_value < 0.05);
    }
    let size = rejections as f64 / 1000.0;
    check(
        coverage >= 0.95 && hits >= 80 && (size - 0.05).abs() <= 0.02,
        format!(
            "±3se coverage {:.1}%, AIC picks p=2 in {hits}/100, Granger size {:.1}%",
            100.0 * coverage,
            100.0 * size
        ),
    )
}

fn irf_closed_form() -> Outcome {
    let mut rng = SimRng::new(9);
    let n = 4;
    let mut phi = DMatrix::from_fn(n, n, |_, _| rng.uniform_range(-0.4, 0.4));
    let radius = phi
        .clone()
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if radius > 0.9 {
        phi *= 0.9 / radius;
    }
    let names: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    let m = VarModel::from_parts(
        names.clone(),
        &vec![0.0; n],
        &[phi.clone()],
        vec![],
        None,
        DMatrix::identity(n, n),
    );
    let mut worst = 0.0f64;
    for (j, shock) in names.iter().enumerate() {
        let r = irf(&m, shock, 50, false).map_err(|e| e.to_string())?;
        let mut power = DMatrix::<f64>::identity(n, n);
        for h in 0..=50 {
            for i in 0..n {
                worst = worst.max((r.values[h][i] - power[(i, j)]).abs());
            }
            power = &phi * power;
        }
    }
    check(
        worst < 1e-10,
        format!("max |irf - Φ^h| {worst:.1e} over h ≤ 50"),
    )
}

fn planted_signal() -> Outcome {
    let grid = GridConfig::default();
    let form = StateForm::NonParameter(default_selection(&grid.maturities_months));
    let (mut atm_wins, mut walk_wins) = (0, 0);
    for rep in 0..50 {
        let spec = PlantedSpec {
            days: 600,
            stream: rep,
            ..Default::default()
        };
        let world = gen_planted_world(&spec, &grid).map_err(|e| e.to_string())?;
        let surface =
            build_state_panel(&world.surfaces, None, &form, &grid).map_err(|e| e.to_string())?;
        let split = fft_split(&world.sentiment, Cutoff::Period(15.0)).map_err(|e| e.to_string())?;
        let variants = [
            Variant::none(),
            Variant {
                label: "Sentiment".into(),
                sentiment: Some((split.hfs, split.lfs)),
            },
        ];
        let cmp = compare_methods(&surface, &variants, None, &RollingConfig::default(), true)
            .map_err(|e| e.to_string())?;
        let atm = |label: &str| {
            let run = &cmp.runs.iter().find(|r| r.0 == label).expect("run").1;
            let recs: Vec<_> = run
                .records
                .iter()
                .filter(|r| r.variable.ends_with("_0975"))
                .cloned()
                .collect();
            mape(&recs).expect("mape")
        };
        let total = |label: &str| {
            cmp.reports
                .iter()
                .find(|r| r.method == label && r.bucket == TOTAL_BUCKET)
                .expect("total")
                .mape
        };
        atm_wins += usize::from(atm("Sentiment") < atm("None"));
        walk_wins += usize::from(total("Sentiment") < total(RANDOM_WALK));
    }
    check(
        atm_wins >= 45 && walk_wins >= 45,
        format!("ATM MAPE beats no-sentiment in {atm_wins}/50, total beats random walk in {walk_wins}/50"),
    )
}

fn sentivol(args: &[&str], cwd: &Path) -> Result<(), String> {
    let o = Command::new(env!("CARGO_BIN_EXE_sentivol"))
        .args(args)
        .current_dir(cwd)
        .output()
        .map_err(|e| e.to_string())?;
    if o.status.success() {
        Ok(())
    } else {
        Err(format!(
            "{}: {}",
            args[0],
            String::from_utf8_lossy(&o.stderr).trim()
        ))
    }
}

fn full_pipeline() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    fs::write(d.join("synth.toml"), "[synth]\ndays = 2000\n").map_err(|e| e.to_string())?;
    let start = Instant::now();
    sentivol(&["synth", "--config", "synth.toml", "--out", "data"], d)?;
    let cmds = [
        "build-surface",
        "sentiment",
        "decompose",
        "var-fit",
        "var-irf",
        "granger",
        "forecast",
        "evaluate",
        "robustness",
    ];
    for c in cmds {
        sentivol(
            &[
                c,
                "--config",
                "data/sentivol.toml",
                "--out",
                &format!("out/{c}"),
            ],
            d,
        )?;
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        secs < 60.0,
        format!(
            "synth + {} commands on 2000 days in {secs:.1} s",
            cmds.len()
        ),
    )
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .map(|rd| {
            rd.filter_map(Result::ok)
                .map(|e| {
                    (
                        e.file_name().to_string_lossy().into_owned(),
                        fs::read(e.path()).unwrap_or_default(),
                    )
                })
                .collect()
        })
        .unwrap_or_default();
    v.sort();
    v
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    fs::write(d.join("synth.toml"), "[synth]\ndays = 700\n").map_err(|e| e.to_string())?;
    sentivol(
        &[
            "synth",
            "--config",
            "synth.toml",
            "--out",
            "data",
            "--seed",
            "31",
        ],
        d,
    )?;
    for out in ["a", "b"] {
        sentivol(
            &["evaluate", "--config", "data/sentivol.toml", "--out", out],
            d,
        )?;
    }
    let (a, b) = (files(&d.join("a")), files(&d.join("b")));
    check(
        !a.is_empty() && a == b,
        format!("{} evaluate artifacts compared byte for byte", a.len()),
    )
}

fn golden_tables() -> Outcome {
    let coef_golden = include_str!("../../core/tests/golden/coefficient_table.tsv");
    let acc_golden = include_str!("../../core/tests/golden/accuracy_table.tsv");
    let cells: [[[(f64, f64); 3]; 2]; 4] = [
        [
            [(0.194, 0.095), (-0.0183, 0.014), (0.144, 0.020)],
            [(0.0502, 0.052), (-0.0121, 0.008), (0.0959, 0.011)],
        ],
        [
            [(0.161, 0.101), (-0.0283, 0.015), (0.0894, 0.021)],
            [(0.0155, 0.041), (-0.0163, 0.006), (0.0718, 0.008)],
        ],
        [
            [(-0.00432, 0.145), (0.0459, 0.021), (0.0211, 0.030)],
            [(-0.108, 0.065), (-0.0297, 0.010), (0.0370, 0.014)],
        ],
        [
            [(-0.00232, 0.220), (0.0961, 0.032), (-0.0874, 0.046)],
            [(-1.98, 0.595), (-0.176, 0.087), (-0.214, 0.124)],
        ],
    ];
    let mut names: Vec<String> = [1, 3, 6, 12].iter().map(|m| format!("skew_{m}m")).collect();
    names.extend([1, 3, 6, 12].iter().map(|m| format!("cur_{m}m")));
    names.extend(
        ["1300", "1100", "1025", "1000", "0975", "0900", "0600"].map(|k| format!("slope_{k}")),
    );
    names.extend(["hfs".to_string(), "lfs".to_string()]);
    let n = names.len();
    let mut m = VarModel::from_parts(
        names,
        &vec![0.0; n],
        &[DMatrix::zeros(n, n)],
        vec![],
        None,
        DMatrix::identity(n, n),
    );
    m.t_eff = 2000;
    m.df = 1982;
    for (ti, eqs) in cells.iter().enumerate() {
        for (kind, row) in eqs.iter().enumerate() {
            for (r, (c, s)) in [16, 17, 0].iter().zip(row) {
                m.coef[(*r, kind * 4 + ti)] = *c;
                m.se[(*r, kind * 4 + ti)] = *s;
            }
        }
    }
    let t1 = render_coefficient_table(&m, &TableLayout::skew_curvature(&[1, 3, 6, 12]));

    let methods = ["None", "Dictionary", "PCA", "LSTM", "BERT-BigBird"];
    let values = [
        [0.2113, 0.2105, 0.2159, 0.2117, 0.2083],
        [0.1665, 0.1669, 0.1634, 0.1662, 0.1619],
        [0.2883, 0.2908, 0.2830, 0.2879, 0.2809],
        [0.2221, 0.2227, 0.2208, 0.2219, 0.2170],
    ];
    let mut reports = Vec::new();
    for (j, method) in methods.iter().enumerate() {
        for (i, bucket) in ["1M", "3M", "12M", TOTAL_BUCKET].iter().enumerate() {
            reports.push(AccuracyReport {
                method: method.to_string(),
                bucket: bucket.to_string(),
                mape: values[i][j],
                mspe: 0.0,
                n_days: 250,
                n_records: 750,
            });
        }
    }
    let t5 = render_accuracy_table(&reports, Metric::Mape);
    check(
        t1 == coef_golden && t5 == acc_golden,
        format!(
            "coefficient table matches: {}, accuracy table matches: {}",
            t1 == coef_golden,
            t5 == acc_golden
        ),
    )
}

fn run(name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        Err(format!("panicked: {msg}"))
    });
    let secs = start.elapsed().as_secs_f64();
    match outcome {
        Ok(d) => {
            println!("PASS  {name}: {d} [{secs:.1}s]");
            true
        }
        Err(d) => {
            println!("FAIL  {name}: {d} [{secs:.1}s]");
            false
        }
    }
}

fn main() -> ExitCode {
    let (inv, parity) = inversion_and_parity();
    let mut ok = run("implied vol inversion round trip", || inv);
    ok &= run("put-call parity", || parity);
    ok &= run("flat-world surface", flat_world);
    ok &= run(
        "decomposition reconstruction and two-tone separation",
        decomposition,
    );
    ok &= run("VAR recovery, AIC lag choice, Granger size", var_recovery);
    ok &= run("IRF closed form", irf_closed_form);
    ok &= run("planted signal end to end", planted_signal);
    ok &= run("full pipeline on 2000 days under 60 s", full_pipeline);
    ok &= run("evaluate is deterministic", determinism);
    ok &= run("report tables match golden files", golden_tables);
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
