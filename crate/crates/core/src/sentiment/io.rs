use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;

use super::{PcaLoadings, SentimentSeries};
use crate::artifact::{csv_reader, csv_writer, fmt_f64, read_metadata, Metadata};
use crate::data_io::{cell, date_cell, header_index, DataError, RowError, DATE_FORMAT};

/// Reads the external score contract: `date, score, n_texts`.
///
/// Days with `n_texts = 0` and an empty score are skipped. The label comes
/// from a `# label: ...` header line, else `external:<file stem>`.
pub fn load_external_scores(path: &Path) -> Result<SentimentSeries, DataError> {
    let bytes = std::fs::read(path).map_err(|e| DataError::io(path, e))?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scores".into());
    read_external_scores(bytes.as_slice(), &format!("external:{stem}"))
}

pub fn read_external_scores<R: Read>(
    mut reader: R,
    default_label: &str,
) -> Result<SentimentSeries, DataError> {
    let mut text = Vec::new();
    reader
        .read_to_end(&mut text)
        .map_err(|e| DataError::io(Path::new("<reader>"), e))?;
    let meta =
        read_metadata(text.as_slice()).map_err(|e| DataError::io(Path::new("<reader>"), e))?;
    let label = meta.get("label").unwrap_or(default_label).to_string();

    let mut rdr = csv_reader(text.as_slice());
    let headers = rdr.headers()?.clone();
    let names: Vec<&str> = headers.iter().collect();
    if names != ["date", "score", "n_texts"] {
        return Err(DataError::SchemaMismatch(format!(
            "expected columns date,score,n_texts; found {}",
            names.join(",")
        )));
    }
    let mut rows: Vec<(NaiveDate, f64)> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let date = date_cell(&rec, 0, "date")?;
        let n_texts: u64 = cell(&rec, 2, "n_texts")?;
        if rec.get(1).unwrap_or("").is_empty() {
            if n_texts == 0 {
                continue;
            }
            return Err(DataError::Row(RowError::InvariantViolation {
                line: rec.position().map_or(0, |p| p.line()),
                reason: "empty score on a day with texts".into(),
            }));
        }
        let score: f64 = cell(&rec, 1, "score")?;
        if !score.is_finite() {
            return Err(DataError::Row(RowError::InvariantViolation {
                line: rec.position().map_or(0, |p| p.line()),
                reason: "score not finite".into(),
            }));
        }
        rows.push((date, score));
    }
    rows.sort_by_key(|r| r.0);
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(DataError::DuplicateDate(w[0].0));
    }
    let (dates, values) = rows.into_iter().unzip();
    SentimentSeries::new(dates, values, label)
}

/// Writes a series as `date, score` with its label in the header block.
pub fn write_series<W: Write>(
    writer: W,
    series: &SentimentSeries,
    meta: &Metadata,
) -> Result<(), DataError> {
    let mut meta = meta.clone();
    meta.insert("label", series.label.clone());
    let mut w = csv_writer(writer, &meta).map_err(DataError::write)?;
    w.write_record(["date", "score"])?;
    for (d, v) in series.dates.iter().zip(&series.values) {
        w.write_record([d.format(DATE_FORMAT).to_string(), fmt_f64(*v)])?;
    }
    w.flush().map_err(DataError::write)
}

/// Reads a series written by [`write_series`] (an `n_texts` column is ignored).
pub fn read_series<R: Read>(mut reader: R) -> Result<SentimentSeries, DataError> {
    let mut text = Vec::new();
    reader
        .read_to_end(&mut text)
        .map_err(|e| DataError::io(Path::new("<reader>"), e))?;
    let meta =
        read_metadata(text.as_slice()).map_err(|e| DataError::io(Path::new("<reader>"), e))?;
    let mut rdr = csv_reader(text.as_slice());
    let headers = rdr.headers()?.clone();
    let di = header_index(&headers, "date")?;
    let si = header_index(&headers, "score")?;
    let mut dates = Vec::new();
    let mut values = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        dates.push(date_cell(&rec, di, "date")?);
        values.push(cell(&rec, si, "score")?);
    }
    SentimentSeries::new(dates, values, meta.get("label").unwrap_or("unlabeled"))
}

pub fn write_loadings<W: Write>(
    writer: W,
    loadings: &PcaLoadings,
    meta: &Metadata,
) -> Result<(), DataError> {
    let mut w = csv_writer(writer, meta).map_err(DataError::write)?;
    w.write_record(["proxy", "loading", "explained_variance"])?;
    for (p, l) in loadings.proxies.iter().zip(&loadings.loadings) {
        w.write_record([p.clone(), fmt_f64(*l), fmt_f64(loadings.explained_variance)])?;
    }
    w.flush().map_err(DataError::write)
}
