use std::io::{Read, Write};

use chrono::NaiveDate;

use super::params::param_names;
use super::{IVSurfaceGrid, SurfaceParamVector};
use crate::artifact::{csv_reader, csv_writer, fmt_f64, Metadata};
use crate::data_io::{cell, date_cell, header_index, DataError, DATE_FORMAT};

/// Per-mille label used in column names: 1.3 -> "1300", 0.975 -> "0975".
pub fn moneyness_label(m: f64) -> String {
    format!("{:04}", (m * 1000.0).round() as i64)
}

/// Long format: one row per (date, maturity, level).
pub fn write_surfaces<W: Write>(
    writer: W,
    grids: &[IVSurfaceGrid],
    meta: &Metadata,
) -> Result<(), DataError> {
    let mut w = csv_writer(writer, meta).map_err(DataError::write)?;
    w.write_record(["date", "tau_months", "moneyness", "iv"])?;
    for g in grids {
        let date = g.date.format(DATE_FORMAT).to_string();
        for (i, months) in g.maturities_months.iter().enumerate() {
            for (j, m) in g.moneyness_levels.iter().enumerate() {
                w.write_record([
                    date.clone(),
                    months.to_string(),
                    fmt_f64(*m),
                    fmt_f64(g.values[i][j]),
                ])?;
            }
        }
    }
    w.flush().map_err(DataError::write)
}

pub fn read_surfaces<R: Read>(reader: R) -> Result<Vec<IVSurfaceGrid>, DataError> {
    let mut rdr = csv_reader(reader);
    let headers = rdr.headers()?.clone();
    let idx = [
        header_index(&headers, "date")?,
        header_index(&headers, "tau_months")?,
        header_index(&headers, "moneyness")?,
        header_index(&headers, "iv")?,
    ];
    let mut cells: Vec<(NaiveDate, u32, f64, f64)> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        cells.push((
            date_cell(&rec, idx[0], "date")?,
            cell(&rec, idx[1], "tau_months")?,
            cell(&rec, idx[2], "moneyness")?,
            cell(&rec, idx[3], "iv")?,
        ));
    }
    let mut out: Vec<IVSurfaceGrid> = Vec::new();
    let mut start = 0;
    while start < cells.len() {
        let date = cells[start].0;
        let end = cells[start..]
            .iter()
            .position(|c| c.0 != date)
            .map_or(cells.len(), |p| start + p);
        let block = &cells[start..end];
        let mut maturities: Vec<u32> = Vec::new();
        let mut levels: Vec<f64> = Vec::new();
        for c in block {
            if !maturities.contains(&c.1) {
                maturities.push(c.1);
            }
            if !levels.contains(&c.2) {
                levels.push(c.2);
            }
        }
        if block.len() != maturities.len() * levels.len() {
            return Err(DataError::SchemaMismatch(format!(
                "surface for {date} is not a full grid"
            )));
        }
        let mut values = vec![vec![f64::NAN; levels.len()]; maturities.len()];
        for c in block {
            let i = maturities
                .iter()
                .position(|m| *m == c.1)
                .expect("collected above");
            let j = levels
                .iter()
                .position(|l| *l == c.2)
                .expect("collected above");
            values[i][j] = c.3;
        }
        if values.iter().flatten().any(|v| v.is_nan()) {
            return Err(DataError::SchemaMismatch(format!(
                "surface for {date} has repeated cells"
            )));
        }
        if let Some(prev) = out.last() {
            if prev.date >= date {
                return Err(DataError::NotIncreasing {
                    series: "surface".into(),
                    index: out.len(),
                });
            }
        }
        out.push(IVSurfaceGrid {
            date,
            maturities_months: maturities,
            moneyness_levels: levels,
            values,
        });
        start = end;
    }
    Ok(out)
}

/// Wide format: date, skews, curvatures, slopes.
pub fn write_params<W: Write>(
    writer: W,
    params: &[SurfaceParamVector],
    meta: &Metadata,
) -> Result<(), DataError> {
    let mut w = csv_writer(writer, meta).map_err(DataError::write)?;
    if let Some(first) = params.first() {
        let mut header = vec!["date".to_string()];
        header.extend(first.names());
        w.write_record(&header)?;
    }
    for p in params {
        let mut rec = vec![p.date.format(DATE_FORMAT).to_string()];
        rec.extend(p.as_vec().into_iter().map(fmt_f64));
        w.write_record(&rec)?;
    }
    w.flush().map_err(DataError::write)
}

/// Reads params.csv for known grid axes.
pub fn read_params<R: Read>(
    reader: R,
    maturities: &[u32],
    levels: &[f64],
) -> Result<Vec<SurfaceParamVector>, DataError> {
    let mut rdr = csv_reader(reader);
    let headers = rdr.headers()?.clone();
    let names = param_names(maturities, levels);
    let di = header_index(&headers, "date")?;
    let cols = names
        .iter()
        .map(|n| header_index(&headers, n))
        .collect::<Result<Vec<_>, _>>()?;
    let (nm, nl) = (maturities.len(), levels.len());
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let mut v = Vec::with_capacity(cols.len());
        for (c, n) in cols.iter().zip(&names) {
            v.push(cell::<f64>(&rec, *c, n)?);
        }
        out.push(SurfaceParamVector {
            date: date_cell(&rec, di, "date")?,
            maturities_months: maturities.to_vec(),
            moneyness_levels: levels.to_vec(),
            skew_by_tau: v[..nm].to_vec(),
            cur_by_tau: v[nm..2 * nm].to_vec(),
            slope_by_m: v[2 * nm..2 * nm + nl].to_vec(),
            degenerate_rows: Vec::new(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{surface_params, GridConfig};
    use proptest::prelude::*;

    #[test]
    fn labels() {
        assert_eq!(moneyness_label(1.3), "1300");
        assert_eq!(moneyness_label(0.975), "0975");
        assert_eq!(moneyness_label(0.6), "0600");
        assert_eq!(moneyness_label(1.025), "1025");
    }

    fn grid(date: NaiveDate, shift: f64) -> IVSurfaceGrid {
        let cfg = GridConfig::default();
        let values = cfg
            .maturities_months
            .iter()
            .map(|mo| {
                cfg.moneyness_levels
                    .iter()
                    .map(|m| 0.2 + shift + 0.25 * (1.0 - m).max(0.0) + 0.003 * *mo as f64)
                    .collect()
            })
            .collect();
        IVSurfaceGrid {
            date,
            maturities_months: cfg.maturities_months,
            moneyness_levels: cfg.moneyness_levels,
            values,
        }
    }

    #[test]
    fn params_round_trip() {
        let cfg = GridConfig::default();
        let d = NaiveDate::from_ymd_opt(2024, 5, 2).unwrap();
        let ps: Vec<_> = (0..3)
            .map(|i| {
                surface_params(&grid(d + chrono::Duration::days(i), 0.01 * i as f64), &cfg).unwrap()
            })
            .collect();
        let mut buf = Vec::new();
        write_params(
            &mut buf,
            &ps,
            &Metadata::new().with("slope_units", "per year"),
        )
        .unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# slope_units: per year\ndate,skew_1m,skew_3m"));
        let back = read_params(
            buf.as_slice(),
            &cfg.maturities_months,
            &cfg.moneyness_levels,
        )
        .unwrap();
        assert_eq!(back, ps);
    }

    proptest! {
        #[test]
        fn surfaces_round_trip(shifts in prop::collection::vec(-0.1f64..0.5, 1..6)) {
            let d = NaiveDate::from_ymd_opt(2023, 1, 2).unwrap();
            let grids: Vec<_> = shifts
                .iter()
                .enumerate()
                .map(|(i, s)| grid(d + chrono::Duration::days(i as i64), *s))
                .collect();
            let mut buf = Vec::new();
            write_surfaces(&mut buf, &grids, &Metadata::new()).unwrap();
            prop_assert_eq!(read_surfaces(buf.as_slice()).unwrap(), grids);
        }
    }
}
