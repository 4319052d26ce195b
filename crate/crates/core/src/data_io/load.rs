use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;

use super::{
    check_increasing, AlignedPanel, DataError, Loaded, OptionKind, OptionQuote, ProxyPanel,
    RatePoint, RowError, DATE_FORMAT,
};
use crate::artifact::{csv_reader, csv_writer, fmt_f64, Metadata};

/// Maps the canonical quote fields onto the header names used in a file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuoteSchema {
    pub trade_date: String,
    pub expiry_date: String,
    pub strike: String,
    pub kind: String,
    pub price: String,
    pub underlying_price: String,
}

impl Default for QuoteSchema {
    fn default() -> Self {
        Self {
            trade_date: "trade_date".into(),
            expiry_date: "expiry_date".into(),
            strike: "strike".into(),
            kind: "kind".into(),
            price: "price".into(),
            underlying_price: "underlying_price".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProxySchema {
    pub date: String,
    pub n_up: String,
    pub n_down: String,
    pub volume: String,
    pub float_cap: String,
    pub cef_nav: String,
    pub cef_price: String,
}

impl Default for ProxySchema {
    fn default() -> Self {
        Self {
            date: "date".into(),
            n_up: "n_up".into(),
            n_down: "n_down".into(),
            volume: "volume".into(),
            float_cap: "float_cap".into(),
            cef_nav: "cef_nav".into(),
            cef_price: "cef_price".into(),
        }
    }
}

/// Sanity bounds for annualized rates (exclusive).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBounds {
    pub min: f64,
    pub max: f64,
}

impl Default for RateBounds {
    fn default() -> Self {
        Self {
            min: -0.05,
            max: 0.5,
        }
    }
}

fn open(path: &Path) -> Result<File, DataError> {
    File::open(path).map_err(|e| DataError::io(path, e))
}

fn column_indices(headers: &csv::StringRecord, names: &[&str]) -> Result<Vec<usize>, DataError> {
    names
        .iter()
        .map(|name| {
            headers
                .iter()
                .position(|h| h == *name)
                .ok_or_else(|| DataError::MissingColumn((*name).to_string()))
        })
        .collect()
}

struct Row<'a> {
    record: &'a csv::StringRecord,
    line: u64,
}

impl Row<'_> {
    fn raw(&self, idx: usize) -> &str {
        self.record.get(idx).unwrap_or("")
    }

    fn unparsable(&self, idx: usize, column: &str) -> RowError {
        RowError::UnparsableValue {
            line: self.line,
            column: column.to_string(),
            value: self.raw(idx).to_string(),
        }
    }

    fn parse<T: FromStr>(&self, idx: usize, column: &str) -> Result<T, RowError> {
        self.raw(idx)
            .parse::<T>()
            .map_err(|_| self.unparsable(idx, column))
    }

    fn date(&self, idx: usize, column: &str) -> Result<NaiveDate, RowError> {
        NaiveDate::parse_from_str(self.raw(idx), DATE_FORMAT)
            .map_err(|_| self.unparsable(idx, column))
    }

    fn invariant(&self, reason: impl Into<String>) -> RowError {
        RowError::InvariantViolation {
            line: self.line,
            reason: reason.into(),
        }
    }
}

/// Strict cell parsing for artifact readers: failures become errors with the record's line.
pub(crate) fn cell<T: FromStr>(
    record: &csv::StringRecord,
    idx: usize,
    column: &str,
) -> Result<T, DataError> {
    let row = Row {
        record,
        line: record.position().map(|p| p.line()).unwrap_or(0),
    };
    Ok(row.parse(idx, column)?)
}

pub(crate) fn date_cell(
    record: &csv::StringRecord,
    idx: usize,
    column: &str,
) -> Result<NaiveDate, DataError> {
    let row = Row {
        record,
        line: record.position().map(|p| p.line()).unwrap_or(0),
    };
    Ok(row.date(idx, column)?)
}

pub(crate) fn header_index(headers: &csv::StringRecord, name: &str) -> Result<usize, DataError> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| DataError::MissingColumn(name.to_string()))
}

fn for_each_row<R: Read>(
    reader: &mut csv::Reader<R>,
    mut f: impl FnMut(Row<'_>),
) -> Result<(), DataError> {
    let mut record = csv::StringRecord::new();
    loop {
        if !reader.read_record(&mut record)? {
            break;
        }
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        f(Row {
            record: &record,
            line,
        });
    }
    Ok(())
}

pub fn load_option_quotes(
    path: &Path,
    schema: &QuoteSchema,
) -> Result<Loaded<OptionQuote>, DataError> {
    read_option_quotes(open(path)?, schema)
}

pub fn read_option_quotes<R: Read>(
    reader: R,
    schema: &QuoteSchema,
) -> Result<Loaded<OptionQuote>, DataError> {
    let mut rdr = csv_reader(reader);
    let names = [
        schema.trade_date.as_str(),
        schema.expiry_date.as_str(),
        schema.strike.as_str(),
        schema.kind.as_str(),
        schema.price.as_str(),
        schema.underlying_price.as_str(),
    ];
    let idx = column_indices(rdr.headers()?, &names)?;
    let mut out = Loaded {
        records: Vec::new(),
        rejects: Vec::new(),
    };
    for_each_row(&mut rdr, |row| {
        let parsed = (|| {
            let kind_raw = row.raw(idx[3]);
            let kind =
                OptionKind::parse(kind_raw).ok_or_else(|| row.unparsable(idx[3], names[3]))?;
            let q = OptionQuote {
                trade_date: row.date(idx[0], names[0])?,
                expiry_date: row.date(idx[1], names[1])?,
                strike: row.parse(idx[2], names[2])?,
                kind,
                price: row.parse(idx[4], names[4])?,
                underlying_price: row.parse(idx[5], names[5])?,
            };
            q.validate().map_err(|r| row.invariant(r))?;
            Ok(q)
        })();
        match parsed {
            Ok(q) => out.records.push(q),
            Err(e) => out.rejects.push(e),
        }
    })?;
    Ok(out)
}

pub fn write_option_quotes<W: Write>(
    writer: W,
    quotes: &[OptionQuote],
    meta: &Metadata,
) -> Result<(), DataError> {
    let mut w = csv_writer(writer, meta).map_err(|e| DataError::io(Path::new("<writer>"), e))?;
    w.write_record([
        "trade_date",
        "expiry_date",
        "strike",
        "kind",
        "price",
        "underlying_price",
    ])?;
    for q in quotes {
        w.write_record([
            q.trade_date.format(DATE_FORMAT).to_string(),
            q.expiry_date.format(DATE_FORMAT).to_string(),
            fmt_f64(q.strike),
            q.kind.to_string(),
            fmt_f64(q.price),
            fmt_f64(q.underlying_price),
        ])?;
    }
    w.flush()
        .map_err(|e| DataError::io(Path::new("<writer>"), e))?;
    Ok(())
}

/// Rates must be finite, inside `bounds`, and strictly increasing in date;
/// rows breaking the ordering are rejected.
pub fn load_rates(path: &Path, bounds: RateBounds) -> Result<Loaded<RatePoint>, DataError> {
    read_rates(open(path)?, bounds)
}

pub fn read_rates<R: Read>(reader: R, bounds: RateBounds) -> Result<Loaded<RatePoint>, DataError> {
    let mut rdr = csv_reader(reader);
    let idx = column_indices(rdr.headers()?, &["date", "rate"])?;
    let mut out: Loaded<RatePoint> = Loaded {
        records: Vec::new(),
        rejects: Vec::new(),
    };
    for_each_row(&mut rdr, |row| {
        let parsed = (|| {
            let p = RatePoint {
                date: row.date(idx[0], "date")?,
                rate: row.parse(idx[1], "rate")?,
            };
            if !(p.rate.is_finite() && p.rate > bounds.min && p.rate < bounds.max) {
                return Err(row.invariant(format!(
                    "rate {} outside ({}, {})",
                    p.rate, bounds.min, bounds.max
                )));
            }
            if let Some(prev) = out.records.last() {
                if p.date <= prev.date {
                    return Err(row.invariant(format!("date {} not increasing", p.date)));
                }
            }
            Ok(p)
        })();
        match parsed {
            Ok(p) => out.records.push(p),
            Err(e) => out.rejects.push(e),
        }
    })?;
    Ok(out)
}

pub fn write_rates<W: Write>(
    writer: W,
    rates: &[RatePoint],
    meta: &Metadata,
) -> Result<(), DataError> {
    let mut w = csv_writer(writer, meta).map_err(|e| DataError::io(Path::new("<writer>"), e))?;
    w.write_record(["date", "rate"])?;
    for r in rates {
        w.write_record([r.date.format(DATE_FORMAT).to_string(), fmt_f64(r.rate)])?;
    }
    w.flush()
        .map_err(|e| DataError::io(Path::new("<writer>"), e))?;
    Ok(())
}

pub fn load_proxies(
    path: &Path,
    schema: &ProxySchema,
) -> Result<(ProxyPanel, Vec<RowError>), DataError> {
    read_proxies(open(path)?, schema)
}

pub fn read_proxies<R: Read>(
    reader: R,
    schema: &ProxySchema,
) -> Result<(ProxyPanel, Vec<RowError>), DataError> {
    let mut rdr = csv_reader(reader);
    let names = [
        schema.date.as_str(),
        schema.n_up.as_str(),
        schema.n_down.as_str(),
        schema.volume.as_str(),
        schema.float_cap.as_str(),
        schema.cef_nav.as_str(),
        schema.cef_price.as_str(),
    ];
    let idx = column_indices(rdr.headers()?, &names)?;
    let mut panel = ProxyPanel::default();
    let mut rejects = Vec::new();
    for_each_row(&mut rdr, |row| {
        let parsed = (|| {
            let date = row.date(idx[0], names[0])?;
            let n_up: u64 = row.parse(idx[1], names[1])?;
            let n_down: u64 = row.parse(idx[2], names[2])?;
            let volume: f64 = row.parse(idx[3], names[3])?;
            let float_cap: f64 = row.parse(idx[4], names[4])?;
            let cef_nav: f64 = row.parse(idx[5], names[5])?;
            let cef_price: f64 = row.parse(idx[6], names[6])?;
            if !(volume >= 0.0 && volume.is_finite()) {
                return Err(row.invariant("volume must be non-negative"));
            }
            for (v, n) in [
                (float_cap, "float_cap"),
                (cef_nav, "cef_nav"),
                (cef_price, "cef_price"),
            ] {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(row.invariant(format!("{n} must be positive")));
                }
            }
            if let Some(prev) = panel.dates.last() {
                if date <= *prev {
                    return Err(row.invariant(format!("date {date} not increasing")));
                }
            }
            Ok((date, n_up, n_down, volume, float_cap, cef_nav, cef_price))
        })();
        match parsed {
            Ok((date, n_up, n_down, volume, float_cap, cef_nav, cef_price)) => {
                panel.dates.push(date);
                panel.n_up.push(n_up);
                panel.n_down.push(n_down);
                panel.volume.push(volume);
                panel.float_cap.push(float_cap);
                panel.cef_nav.push(cef_nav);
                panel.cef_price.push(cef_price);
            }
            Err(e) => rejects.push(e),
        }
    })?;
    Ok((panel, rejects))
}

pub fn write_proxies<W: Write>(
    writer: W,
    panel: &ProxyPanel,
    meta: &Metadata,
) -> Result<(), DataError> {
    let mut w = csv_writer(writer, meta).map_err(|e| DataError::io(Path::new("<writer>"), e))?;
    w.write_record([
        "date",
        "n_up",
        "n_down",
        "volume",
        "float_cap",
        "cef_nav",
        "cef_price",
    ])?;
    for i in 0..panel.len() {
        w.write_record([
            panel.dates[i].format(DATE_FORMAT).to_string(),
            panel.n_up[i].to_string(),
            panel.n_down[i].to_string(),
            fmt_f64(panel.volume[i]),
            fmt_f64(panel.float_cap[i]),
            fmt_f64(panel.cef_nav[i]),
            fmt_f64(panel.cef_price[i]),
        ])?;
    }
    w.flush()
        .map_err(|e| DataError::io(Path::new("<writer>"), e))?;
    Ok(())
}

pub fn write_aligned_panel<W: Write>(
    writer: W,
    panel: &AlignedPanel,
    meta: &Metadata,
) -> Result<(), DataError> {
    let mut w = csv_writer(writer, meta).map_err(|e| DataError::io(Path::new("<writer>"), e))?;
    let mut header = vec!["date".to_string()];
    header.extend(panel.columns.iter().map(|(n, _)| n.clone()));
    w.write_record(&header)?;
    for (i, d) in panel.dates.iter().enumerate() {
        let mut rec = vec![d.format(DATE_FORMAT).to_string()];
        rec.extend(panel.columns.iter().map(|(_, v)| fmt_f64(v[i])));
        w.write_record(&rec)?;
    }
    w.flush()
        .map_err(|e| DataError::io(Path::new("<writer>"), e))?;
    Ok(())
}

/// Strict reader: any unparsable cell is an error, not a reject.
pub fn read_aligned_panel<R: Read>(reader: R) -> Result<AlignedPanel, DataError> {
    let mut rdr = csv_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.get(0) != Some("date") {
        return Err(DataError::MissingColumn("date".into()));
    }
    let mut panel = AlignedPanel {
        dates: Vec::new(),
        columns: headers
            .iter()
            .skip(1)
            .map(|h| (h.to_string(), Vec::new()))
            .collect(),
    };
    let mut err = None;
    for_each_row(&mut rdr, |row| {
        if err.is_some() {
            return;
        }
        let res = (|| {
            panel.dates.push(row.date(0, "date")?);
            for (j, col) in panel.columns.iter_mut().enumerate() {
                col.1.push(row.parse(j + 1, &col.0)?);
            }
            Ok::<(), RowError>(())
        })();
        if let Err(e) = res {
            err = Some(e);
        }
    })?;
    if let Some(e) = err {
        return Err(e.into());
    }
    check_increasing("panel", &panel.dates)?;
    Ok(panel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const QUOTES: &str = "\
trade_date,expiry_date,strike,kind,price,underlying_price
2024-01-08,2024-02-28,2.5,call,0.12,2.6
2024-01-08,2024-02-28,2.7,put,0.15,2.6
2024-01-08,2024-03-27,2.6,call,0.2,2.6
";

    #[test]
    fn loads_well_formed_file() {
        let out = read_option_quotes(QUOTES.as_bytes(), &QuoteSchema::default()).unwrap();
        assert_eq!(out.records.len(), 3);
        assert!(out.rejects.is_empty());
        assert_eq!(out.records[1].kind, OptionKind::Put);
    }

    #[test]
    fn rejects_expiry_not_after_trade_date() {
        let text = "\
trade_date,expiry_date,strike,kind,price,underlying_price
2024-01-08,2024-02-28,2.5,call,0.12,2.6
2024-01-08,2024-01-08,2.7,put,0.15,2.6
";
        let out = read_option_quotes(text.as_bytes(), &QuoteSchema::default()).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.rejects.len(), 1);
        assert!(matches!(
            out.rejects[0],
            RowError::InvariantViolation { line: 3, .. }
        ));
    }

    #[test]
    fn reports_unparsable_with_line_after_comments() {
        let text = "\
# tool: test
trade_date,expiry_date,strike,kind,price,underlying_price
2024-01-08,2024-02-28,abc,call,0.12,2.6
";
        let out = read_option_quotes(text.as_bytes(), &QuoteSchema::default()).unwrap();
        assert_eq!(
            out.rejects,
            vec![RowError::UnparsableValue {
                line: 3,
                column: "strike".into(),
                value: "abc".into()
            }]
        );
    }

    #[test]
    fn shuffled_columns_match_canonical() {
        let shuffled = "\
price,kind,underlying_price,strike,expiry_date,trade_date
0.12,call,2.6,2.5,2024-02-28,2024-01-08
0.15,put,2.6,2.7,2024-02-28,2024-01-08
0.2,call,2.6,2.6,2024-03-27,2024-01-08
";
        let a = read_option_quotes(QUOTES.as_bytes(), &QuoteSchema::default()).unwrap();
        let b = read_option_quotes(shuffled.as_bytes(), &QuoteSchema::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn custom_schema_and_missing_column() {
        let text = "td,ed,k,cp,px,s\n2024-01-08,2024-02-28,2.5,C,0.12,2.6\n";
        let schema = QuoteSchema {
            trade_date: "td".into(),
            expiry_date: "ed".into(),
            strike: "k".into(),
            kind: "cp".into(),
            price: "px".into(),
            underlying_price: "s".into(),
        };
        assert_eq!(
            read_option_quotes(text.as_bytes(), &schema)
                .unwrap()
                .records
                .len(),
            1
        );
        let err = read_option_quotes(text.as_bytes(), &QuoteSchema::default()).unwrap_err();
        assert!(matches!(err, DataError::MissingColumn(c) if c == "trade_date"));
    }

    #[test]
    fn rates_bounds_and_order() {
        let text =
            "date,rate\n2024-01-02,0.02\n2024-01-03,0.9\n2024-01-02,0.02\n2024-01-04,0.021\n";
        let out = read_rates(text.as_bytes(), RateBounds::default()).unwrap();
        assert_eq!(out.records.len(), 2);
        assert_eq!(out.rejects.len(), 2);
    }

    #[test]
    fn proxies_round_trip() {
        let text = "\
date,n_up,n_down,volume,float_cap,cef_nav,cef_price
2024-01-02,300,200,5000000000,100000000000,1.0,0.9
2024-01-03,120,450,4000000000,100000000000,1.0,0.95
";
        let (panel, rejects) = read_proxies(text.as_bytes(), &ProxySchema::default()).unwrap();
        assert!(rejects.is_empty());
        let mut buf = Vec::new();
        write_proxies(&mut buf, &panel, &Metadata::new()).unwrap();
        let (back, _) = read_proxies(buf.as_slice(), &ProxySchema::default()).unwrap();
        assert_eq!(back, panel);
    }

    proptest! {
        #[test]
        fn aligned_panel_round_trip(
            rows in proptest::collection::vec(proptest::collection::vec(-1e6f64..1e6, 3), 1..30)
        ) {
            let base = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
            let panel = AlignedPanel {
                dates: (0..rows.len()).map(|i| base + chrono::Duration::days(i as i64)).collect(),
                columns: (0..3)
                    .map(|j| (format!("c{j}"), rows.iter().map(|r| r[j]).collect()))
                    .collect(),
            };
            let mut buf = Vec::new();
            write_aligned_panel(&mut buf, &panel, &Metadata::new().with("k", "v")).unwrap();
            let back = read_aligned_panel(buf.as_slice()).unwrap();
            prop_assert_eq!(back, panel);
        }

        #[test]
        fn quotes_round_trip(
            strikes in proptest::collection::vec(0.01f64..10.0, 1..20),
            prices in proptest::collection::vec(0.0f64..3.0, 20),
        ) {
            let base = NaiveDate::from_ymd_opt(2020, 1, 6).unwrap();
            let quotes: Vec<OptionQuote> = strikes.iter().enumerate().map(|(i, k)| OptionQuote {
                trade_date: base,
                expiry_date: base + chrono::Duration::days(7 + i as i64),
                strike: *k,
                kind: if i % 2 == 0 { OptionKind::Call } else { OptionKind::Put },
                price: prices[i],
                underlying_price: 2.5,
            }).collect();
            let mut buf = Vec::new();
            write_option_quotes(&mut buf, &quotes, &Metadata::new()).unwrap();
            let back = read_option_quotes(buf.as_slice(), &QuoteSchema::default()).unwrap();
            prop_assert!(back.rejects.is_empty());
            prop_assert_eq!(back.records, quotes);
        }
    }
}
