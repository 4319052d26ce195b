use std::io::Write;

use chrono::NaiveDate;

use super::{DecompositionResult, ImfSet};
use crate::artifact::{csv_writer, fmt_f64, Metadata};
use crate::data_io::{DataError, DATE_FORMAT};
use crate::sentiment::SentimentSeries;

/// `date, original, hfs, lfs, method, params_hash`.
pub fn write_decomposition<W: Write>(
    writer: W,
    original: &SentimentSeries,
    result: &DecompositionResult,
    meta: &Metadata,
) -> Result<(), DataError> {
    let mut meta = meta.clone();
    meta.insert("method", result.method.as_str());
    meta.insert("params", result.params.clone());
    let mut w = csv_writer(writer, &meta).map_err(DataError::write)?;
    w.write_record(["date", "original", "hfs", "lfs", "method", "params_hash"])?;
    let hash = result.params_hash();
    for (i, d) in original.dates.iter().enumerate() {
        w.write_record([
            d.format(DATE_FORMAT).to_string(),
            fmt_f64(original.values[i]),
            fmt_f64(result.hfs.values[i]),
            fmt_f64(result.lfs.values[i]),
            result.method.as_str().to_string(),
            hash.clone(),
        ])?;
    }
    w.flush().map_err(DataError::write)
}

/// One column per IMF then the residual.
pub fn write_imfs<W: Write>(
    writer: W,
    dates: &[NaiveDate],
    set: &ImfSet,
    meta: &Metadata,
) -> Result<(), DataError> {
    let mut w = csv_writer(writer, meta).map_err(DataError::write)?;
    let mut header = vec!["date".to_string()];
    header.extend((1..=set.len()).map(|k| format!("imf{k}")));
    header.push("residual".into());
    w.write_record(&header)?;
    for (t, d) in dates.iter().enumerate() {
        let mut rec = vec![d.format(DATE_FORMAT).to_string()];
        rec.extend(set.imfs.iter().map(|imf| fmt_f64(imf[t])));
        rec.push(fmt_f64(set.residual[t]));
        w.write_record(&rec)?;
    }
    w.flush().map_err(DataError::write)
}
