use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;

use super::{IrfResult, VarModel};
use crate::artifact::{csv_reader, csv_writer, fmt_f64, read_metadata, Metadata};
use crate::data_io::{cell, header_index, DataError};
use crate::stats::student_two_sided_p;

/// Two-sided levels for one, two and three stars.
pub const STAR_LEVELS: [f64; 3] = [0.10, 0.05, 0.01];

/// Student-t critical values at the star levels, loosest first.
pub fn critical_values(df: usize) -> [f64; 3] {
    let df = df.max(1) as f64;
    STAR_LEVELS.map(|a| two_sided_critical(a, df))
}

// Bisection on the tail probability; the library quantile drifts for large df.
fn two_sided_critical(alpha: f64, df: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    while student_two_sided_p(hi, df) > alpha {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if student_two_sided_p(mid, df) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Stars earned by `|t|`; each level needs a strict exceedance.
pub fn stars_for_t(t: f64, df: usize) -> &'static str {
    stars_against(t, &critical_values(df))
}

fn stars_against(t: f64, crit: &[f64; 3]) -> &'static str {
    let a = t.abs();
    if !a.is_finite() {
        return if a.is_nan() { "" } else { "***" };
    }
    match crit.iter().filter(|c| a > **c).count() {
        0 => "",
        1 => "*",
        2 => "**",
        _ => "***",
    }
}

/// Three significant figures, fixed notation.
pub fn sig3(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() {
            "0".into()
        } else {
            format!("{x}")
        };
    }
    let mag = x.abs().log10().floor() as i32;
    let mut decimals = (2 - mag).max(0);
    let s = format!("{:.*}", decimals as usize, x);
    // rounding can carry into the next decade, e.g. 0.09996 -> 0.1000
    let carried: f64 = s.parse().expect("formatted float");
    if carried.abs() >= 10f64.powi(mag + 1) && decimals > 0 {
        decimals -= 1;
        return format!("{:.*}", decimals as usize, x);
    }
    s
}

/// `coef` to three significant figures with stars, then the standard error in parentheses.
pub fn format_cell(coef: f64, se: f64, df: usize) -> String {
    cell_against(coef, se, &critical_values(df))
}

fn cell_against(coef: f64, se: f64, crit: &[f64; 3]) -> String {
    let t = if se > 0.0 { coef / se } else { 0.0 };
    format!("{}{} ({:.3})", sig3(coef), stars_against(t, crit), se)
}

/// Row labels of `coef`: `const`, `<name>_l<lag>`, then exogenous names.
pub fn regressor_labels(model: &VarModel) -> Vec<String> {
    let mut out = vec!["const".to_string()];
    for l in 1..=model.p {
        out.extend(model.names.iter().map(|n| format!("{n}_l{l}")));
    }
    out.extend(model.exog_names.iter().cloned());
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientRow {
    pub equation: String,
    pub regressor: String,
    pub coef: f64,
    pub se: f64,
    pub t: f64,
    pub p_value: f64,
    pub stars: &'static str,
}

impl CoefficientRow {
    pub fn cell(&self) -> String {
        format!("{}{} ({:.3})", sig3(self.coef), self.stars, self.se)
    }
}

/// Every coefficient, equation-major.
pub fn coefficient_report(model: &VarModel) -> Vec<CoefficientRow> {
    let labels = regressor_labels(model);
    let crit = critical_values(model.df);
    let mut rows = Vec::with_capacity(labels.len() * model.n());
    for (eq, name) in model.names.iter().enumerate() {
        for (r, reg) in labels.iter().enumerate() {
            let (coef, se) = (model.coef[(r, eq)], model.se[(r, eq)]);
            let t = if se > 0.0 { coef / se } else { 0.0 };
            rows.push(CoefficientRow {
                equation: name.clone(),
                regressor: reg.clone(),
                coef,
                se,
                t,
                p_value: if se > 0.0 {
                    student_two_sided_p(t, model.df as f64)
                } else {
                    1.0
                },
                stars: stars_against(t, &crit),
            });
        }
    }
    rows
}

/// Column groups and row picks for a tab-separated coefficient table.
#[derive(Debug, Clone, PartialEq)]
pub struct TableLayout {
    pub corner: String,
    /// Group heading with `(sub-heading, equation)` columns.
    pub groups: Vec<(String, Vec<(String, String)>)>,
    /// `(display label, regressor label)`.
    pub rows: Vec<(String, String)>,
}

fn sentiment_rows() -> Vec<(String, String)> {
    vec![
        ("HFS_{t-1}".into(), "hfs_l1".into()),
        ("LFS_{t-1}".into(), "lfs_l1".into()),
        ("Constant".into(), "const".into()),
    ]
}

impl TableLayout {
    /// Skew and curvature equations per maturity.
    pub fn skew_curvature(maturities: &[u32]) -> Self {
        Self {
            corner: "τ".into(),
            groups: maturities
                .iter()
                .map(|m| {
                    (
                        m.to_string(),
                        vec![
                            ("skew".into(), format!("skew_{m}m")),
                            ("cur".into(), format!("cur_{m}m")),
                        ],
                    )
                })
                .collect(),
            rows: sentiment_rows(),
        }
    }

    /// Term-slope equations per moneyness level.
    pub fn slopes(levels: &[f64]) -> Self {
        Self {
            corner: "K".into(),
            groups: levels
                .iter()
                .map(|l| {
                    let label = crate::surface::moneyness_label(*l);
                    (
                        label.clone(),
                        vec![(String::new(), format!("slope_{label}"))],
                    )
                })
                .collect(),
            rows: sentiment_rows(),
        }
    }
}

/// Renders the layout; cells that name an unknown equation or regressor stay empty.
pub fn render_coefficient_table(model: &VarModel, layout: &TableLayout) -> String {
    let labels = regressor_labels(model);
    let crit = critical_values(model.df);
    let mut out = String::new();
    out.push_str(&layout.corner);
    for (g, cols) in &layout.groups {
        out.push('\t');
        out.push_str(g);
        for _ in 1..cols.len() {
            out.push('\t');
        }
    }
    out.push('\n');
    if layout
        .groups
        .iter()
        .any(|(_, cols)| cols.iter().any(|(s, _)| !s.is_empty()))
    {
        for (_, cols) in &layout.groups {
            for (s, _) in cols {
                out.push('\t');
                out.push_str(s);
            }
        }
        out.push('\n');
    }
    for (display, reg) in &layout.rows {
        out.push_str(display);
        let r = labels.iter().position(|l| l == reg);
        for (_, cols) in &layout.groups {
            for (_, eq) in cols {
                out.push('\t');
                if let (Some(r), Ok(e)) = (r, model.index_of(eq)) {
                    out.push_str(&cell_against(model.coef[(r, e)], model.se[(r, e)], &crit));
                }
            }
        }
        out.push('\n');
    }
    out
}

/// Long-form CSV with standard errors and t-statistics in separate, labeled columns.
pub fn write_coefficient_report<W: Write>(
    writer: W,
    model: &VarModel,
    meta: &Metadata,
) -> Result<(), DataError> {
    let mut w = csv_writer(writer, meta).map_err(DataError::write)?;
    w.write_record([
        "equation",
        "regressor",
        "coef",
        "se",
        "t_stat",
        "p_value",
        "stars",
        "cell",
    ])?;
    for row in coefficient_report(model) {
        w.write_record([
            row.equation.clone(),
            row.regressor.clone(),
            fmt_f64(row.coef),
            fmt_f64(row.se),
            fmt_f64(row.t),
            fmt_f64(row.p_value),
            row.stars.to_string(),
            row.cell(),
        ])?;
    }
    w.flush().map_err(DataError::write)
}

#[derive(Serialize)]
struct ModelJson<'a> {
    metadata: std::collections::BTreeMap<String, String>,
    names: &'a [String],
    exog_names: &'a [String],
    p: usize,
    /// Row order of `se`.
    regressors: Vec<String>,
    intercept: Vec<f64>,
    /// `phi[l][i][j]`: lag `l + 1`, equation `i`, variable `j`.
    phi: Vec<Vec<Vec<f64>>>,
    /// `gamma[i][k]`: equation `i`, exogenous `k`.
    gamma: Vec<Vec<f64>>,
    sigma: Vec<Vec<f64>>,
    /// `se[r][i]`: regressor `r`, equation `i`.
    se: Vec<Vec<f64>>,
    t_eff: usize,
    df: usize,
    aic: f64,
    dropped: &'a [String],
    warnings: &'a [String],
}

fn rows_of(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

pub fn write_model_json<W: Write>(
    mut writer: W,
    model: &VarModel,
    meta: &Metadata,
) -> std::io::Result<()> {
    let doc = ModelJson {
        metadata: meta.to_map(),
        names: &model.names,
        exog_names: &model.exog_names,
        p: model.p,
        regressors: regressor_labels(model),
        intercept: model.intercept().iter().copied().collect(),
        phi: (1..=model.p).map(|l| rows_of(&model.phi(l))).collect(),
        gamma: rows_of(&model.gamma()),
        sigma: rows_of(&model.sigma),
        se: rows_of(&model.se),
        t_eff: model.t_eff,
        df: model.df,
        aic: model.aic(),
        dropped: &model.dropped,
        warnings: &model.warnings,
    };
    serde_json::to_writer_pretty(&mut writer, &doc)?;
    writer.write_all(b"\n")
}

/// `shock, response, horizon, value`, horizons innermost.
pub fn write_irf<W: Write>(
    writer: W,
    results: &[IrfResult],
    meta: &Metadata,
) -> Result<(), DataError> {
    let mut meta = meta.clone();
    if let Some(r) = results.first() {
        meta.insert("orthogonalized", r.orthogonalized.to_string());
    }
    let mut w = csv_writer(writer, &meta).map_err(DataError::write)?;
    w.write_record(["shock", "response", "horizon", "value"])?;
    for r in results {
        for (i, resp) in r.responses.iter().enumerate() {
            for (h, row) in r.values.iter().enumerate() {
                w.write_record([
                    r.shock.clone(),
                    resp.clone(),
                    h.to_string(),
                    fmt_f64(row[i]),
                ])?;
            }
        }
    }
    w.flush().map_err(DataError::write)
}

/// Reads back [`write_irf`] output, one result per shock in file order.
pub fn read_irf<R: Read>(mut reader: R) -> Result<Vec<IrfResult>, DataError> {
    let ctx = Path::new("<irf>");
    let mut text = Vec::new();
    reader
        .read_to_end(&mut text)
        .map_err(|e| DataError::io(ctx, e))?;
    let meta = read_metadata(text.as_slice()).map_err(|e| DataError::io(ctx, e))?;
    let orthogonalized = meta.get("orthogonalized") == Some("true");
    let mut rdr = csv_reader(text.as_slice());
    let headers = rdr.headers()?.clone();
    let idx = ["shock", "response", "horizon", "value"]
        .map(|c| header_index(&headers, c))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let mut out: Vec<IrfResult> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let shock: String = cell(&rec, idx[0], "shock")?;
        let response: String = cell(&rec, idx[1], "response")?;
        let h: usize = cell(&rec, idx[2], "horizon")?;
        let v: f64 = cell(&rec, idx[3], "value")?;
        if out.last().is_none_or(|r| r.shock != shock) {
            out.push(IrfResult {
                shock: shock.clone(),
                responses: vec![],
                values: vec![],
                orthogonalized,
                warning: None,
            });
        }
        let r = out.last_mut().expect("pushed above");
        let i = match r.responses.iter().position(|x| *x == response) {
            Some(i) => i,
            None => {
                r.responses.push(response);
                r.responses.len() - 1
            }
        };
        if r.values.len() <= h {
            r.values.resize(h + 1, vec![]);
        }
        if r.values[h].len() <= i {
            r.values[h].resize(i + 1, f64::NAN);
        }
        r.values[h][i] = v;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::varfit::dynamics::tests::model;
    use crate::varfit::irf;
    use nalgebra::DMatrix;

    #[test]
    fn sig3_cases() {
        assert_eq!(sig3(0.194), "0.194");
        assert_eq!(sig3(0.05021), "0.0502");
        assert_eq!(sig3(-0.004321), "-0.00432");
        assert_eq!(sig3(-1.98), "-1.98");
        assert_eq!(sig3(114.04), "114");
        assert_eq!(sig3(0.09996), "0.100");
        assert_eq!(sig3(9.996), "10.0");
        assert_eq!(sig3(0.0), "0");
    }

    #[test]
    fn cell_format_example() {
        assert_eq!(format_cell(0.194, 0.095, 1_000_000), "0.194** (0.095)");
        assert_eq!(format_cell(0.0, 0.095, 50), "0 (0.095)");
    }

    #[test]
    fn star_boundary_is_strict() {
        let df = 40;
        let crit = critical_values(df);
        assert_eq!(stars_for_t(crit[1], df), "*");
        assert_eq!(stars_for_t(crit[1].next_up(), df), "**");
        assert_eq!(stars_for_t(-crit[2].next_up(), df), "***");
        assert_eq!(stars_for_t(0.0, df), "");
    }

    #[test]
    fn critical_values_match_reference_quantiles() {
        // t quantiles at df = 40
        let c = critical_values(40);
        for (got, want) in
            c.iter()
                .zip([1.6838510133356523, 2.0210753903062733, 2.7044592674331502])
        {
            assert!((got - want).abs() < 1e-9, "{got} {want}");
        }
    }

    #[test]
    fn critical_values_large_df_approach_normal() {
        let c = critical_values(10_000_000);
        for (got, want) in c
            .iter()
            .zip([1.6448536269514722, 1.959963984540054, 2.5758293035489004])
        {
            assert!((got - want).abs() < 1e-5, "{got} {want}");
        }
    }

    #[test]
    fn irf_csv_round_trip() {
        let phi = DMatrix::from_row_slice(2, 2, &[0.5, 0.1, -0.2, 0.3]);
        let m = model(&[phi], &[0.0, 0.0], DMatrix::identity(2, 2));
        let rs = vec![
            irf(&m, "y0", 6, true).unwrap(),
            irf(&m, "y1", 6, true).unwrap(),
        ];
        let mut buf = Vec::new();
        write_irf(&mut buf, &rs, &Metadata::new().with("tool", "t")).unwrap();
        let back = read_irf(buf.as_slice()).unwrap();
        assert_eq!(back, rs);
    }

    #[test]
    fn labels_follow_coefficient_rows() {
        let m = model(
            &[DMatrix::zeros(2, 2), DMatrix::zeros(2, 2)],
            &[0.0, 0.0],
            DMatrix::identity(2, 2),
        );
        assert_eq!(
            regressor_labels(&m),
            ["const", "y0_l1", "y1_l1", "y0_l2", "y1_l2"]
        );
        assert_eq!(coefficient_report(&m).len(), 10);
    }
}
