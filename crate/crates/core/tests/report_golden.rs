use nalgebra::DMatrix;
use sentivol_core::evaluate::{render_accuracy_table, AccuracyReport, Metric};
use sentivol_core::surface::GridConfig;
use sentivol_core::varfit::{format_cell, render_coefficient_table, TableLayout, VarModel};

const GOLDEN_COEFFICIENTS: &str = include_str!("golden/coefficient_table.tsv");
const GOLDEN_ACCURACY: &str = include_str!("golden/accuracy_table.tsv");

// (coef, se) for hfs_l1, lfs_l1, const in the skew and cur equations per maturity
const SKEW_CUR: [[[(f64, f64); 3]; 2]; 4] = [
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

fn parameter_model() -> VarModel {
    let cfg = GridConfig::default();
    let mut names: Vec<String> = cfg
        .maturities_months
        .iter()
        .map(|m| format!("skew_{m}m"))
        .collect();
    names.extend(cfg.maturities_months.iter().map(|m| format!("cur_{m}m")));
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
    let (hfs_row, lfs_row) = (1 + 15, 1 + 16);
    for (ti, eqs) in SKEW_CUR.iter().enumerate() {
        for (kind, cells) in eqs.iter().enumerate() {
            let eq = kind * 4 + ti;
            for (r, (c, s)) in [hfs_row, lfs_row, 0].iter().zip(cells) {
                m.coef[(*r, eq)] = *c;
                m.se[(*r, eq)] = *s;
            }
        }
    }
    m
}

#[test]
fn coefficient_table_matches_golden() {
    let m = parameter_model();
    let table = render_coefficient_table(&m, &TableLayout::skew_curvature(&[1, 3, 6, 12]));
    assert_eq!(table, GOLDEN_COEFFICIENTS);
}

#[test]
fn headline_cell() {
    assert_eq!(format_cell(0.194, 0.095, 1982), "0.194** (0.095)");
    assert_eq!(format_cell(-0.0163, 0.006, 1982), "-0.0163*** (0.006)");
    assert_eq!(format_cell(-0.108, 0.065, 1982), "-0.108* (0.065)");
}

#[test]
fn accuracy_table_matches_golden() {
    let methods = ["None", "Dictionary", "PCA", "LSTM", "BERT-BigBird"];
    let values = [
        [0.2113, 0.2105, 0.2159, 0.2117, 0.2083],
        [0.1665, 0.1669, 0.1634, 0.1662, 0.1619],
        [0.2883, 0.2908, 0.2830, 0.2879, 0.2809],
        [0.2221, 0.2227, 0.2208, 0.2219, 0.2170],
    ];
    let buckets = ["1M", "3M", "12M", "Total"];
    let mut reports = Vec::new();
    for (j, m) in methods.iter().enumerate() {
        for (i, b) in buckets.iter().enumerate() {
            reports.push(AccuracyReport {
                method: m.to_string(),
                bucket: b.to_string(),
                mape: values[i][j],
                mspe: 0.0,
                n_days: 250,
                n_records: 750,
            });
        }
    }
    assert_eq!(
        render_accuracy_table(&reports, Metric::Mape),
        GOLDEN_ACCURACY
    );
}
