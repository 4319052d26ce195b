use nalgebra::DMatrix;
use sentivol_core::decompose::{fft_split, Cutoff};
use sentivol_core::evaluate::{
    compare_methods, mape, subperiod_robustness, RollingConfig, Variant, TOTAL_BUCKET,
};
use sentivol_core::surface::GridConfig;
use sentivol_core::synthgen::{gen_planted_world, gen_var_panel, PlantedSpec, VarSpec};
use sentivol_core::varfit::{build_state_panel, default_selection, StateForm, StatePanel};

struct Outcome {
    atm_gain: bool,
    beats_walk: bool,
}

fn planted_run(rep: u64) -> Outcome {
    let grid = GridConfig::default();
    let spec = PlantedSpec {
        days: 600,
        stream: rep,
        ..Default::default()
    };
    let world = gen_planted_world(&spec, &grid).unwrap();
    let form = StateForm::NonParameter(default_selection(&grid.maturities_months));
    let surface = build_state_panel(&world.surfaces, None, &form, &grid).unwrap();
    let split = fft_split(&world.sentiment, Cutoff::Period(15.0)).unwrap();
    let variants = [
        Variant::none(),
        Variant {
            label: "FFT".into(),
            sentiment: Some((split.hfs, split.lfs)),
        },
    ];
    let cmp = compare_methods(&surface, &variants, None, &RollingConfig::default(), true).unwrap();
    let atm = |label: &str| {
        let run = &cmp.runs.iter().find(|r| r.0 == label).unwrap().1;
        let recs: Vec<_> = run
            .records
            .iter()
            .filter(|r| r.variable.ends_with("_0975"))
            .cloned()
            .collect();
        mape(&recs).unwrap()
    };
    let total = |label: &str| {
        cmp.reports
            .iter()
            .find(|r| r.method == label && r.bucket == TOTAL_BUCKET)
            .unwrap()
            .mape
    };
    Outcome {
        atm_gain: atm("FFT") < atm("None"),
        beats_walk: total("FFT") < total("Random walk"),
    }
}

#[test]
fn planted_sentiment_improves_atm_forecasts() {
    let runs: Vec<Outcome> = (0..50).map(planted_run).collect();
    let gains = runs.iter().filter(|o| o.atm_gain).count();
    let walk = runs.iter().filter(|o| o.beats_walk).count();
    assert!(gains >= 45, "augmented beat None on ATM in {gains}/50");
    assert!(walk >= 45, "augmented beat the random walk in {walk}/50");
}

fn halves(panel: &StatePanel) -> Vec<(chrono::NaiveDate, chrono::NaiveDate)> {
    let mid = panel.len() / 2;
    vec![
        (panel.dates[0], panel.dates[mid - 1]),
        (panel.dates[mid], panel.dates[panel.len() - 1]),
    ]
}

fn cross_spec(b: f64, days: usize, rep: u64, seed: u64) -> VarSpec {
    let mut spec = VarSpec::diagonal(2, 0.0, days, seed);
    spec.phis = vec![DMatrix::from_row_slice(2, 2, &[0.5, b, 0.0, 0.3])];
    spec.stream = rep;
    spec
}

#[test]
fn stationary_halves_rarely_flip() {
    let (mut flips, mut total) = (0, 0);
    for rep in 0..50 {
        let (panel, _) = gen_var_panel(&cross_spec(0.2, 1000, rep, 606)).unwrap();
        let report = subperiod_robustness(&panel, &halves(&panel), None, 1).unwrap();
        total += report.rows.len();
        flips += report.rows.iter().filter(|r| r.sign_flip).count();
    }
    let rate = flips as f64 / total as f64;
    assert!(rate <= 0.10, "sign flips {rate}");
}

#[test]
fn planted_break_is_flagged() {
    let mut flagged = 0;
    for rep in 0..50 {
        let (first, _) = gen_var_panel(&cross_spec(0.4, 500, rep, 707)).unwrap();
        let mut second = cross_spec(-0.4, 500, rep, 708);
        second.burn_in = 0;
        second.initial = Some(first.rows.last().unwrap().clone());
        second.start = *first.dates.last().unwrap() + chrono::Duration::days(1);
        let (tail, _) = gen_var_panel(&second).unwrap();
        let mut rows = first.rows.clone();
        rows.extend(tail.rows);
        let mut dates = first.dates.clone();
        dates.extend(tail.dates);
        let panel = StatePanel::new(dates, first.names.clone(), rows).unwrap();
        let report = subperiod_robustness(&panel, &halves(&panel), None, 1).unwrap();
        flagged += usize::from(report.row("y1", "y2_l1").unwrap().flagged());
    }
    assert!(flagged >= 45, "{flagged}/50");
}
