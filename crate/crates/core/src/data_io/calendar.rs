use std::collections::BTreeSet;
use std::path::Path;

use chrono::{Datelike, NaiveDate, Weekday};

use super::DataError;

/// Weekdays minus an explicit holiday set.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TradingCalendar {
    holidays: BTreeSet<NaiveDate>,
}

impl TradingCalendar {
    pub fn weekdays() -> Self {
        Self::default()
    }

    pub fn with_holidays<I: IntoIterator<Item = NaiveDate>>(holidays: I) -> Self {
        Self {
            holidays: holidays.into_iter().collect(),
        }
    }

    /// One ISO-8601 date per line; blank lines and `#` comments ignored.
    pub fn load_holidays(path: &Path) -> Result<Self, DataError> {
        let text = std::fs::read_to_string(path).map_err(|e| DataError::io(path, e))?;
        let mut holidays = BTreeSet::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let d = NaiveDate::parse_from_str(line, "%Y-%m-%d").map_err(|_| {
                DataError::Row(super::RowError::UnparsableValue {
                    line: i as u64 + 1,
                    column: "date".into(),
                    value: line.into(),
                })
            })?;
            holidays.insert(d);
        }
        Ok(Self { holidays })
    }

    pub fn is_trading_day(&self, d: NaiveDate) -> bool {
        !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) && !self.holidays.contains(&d)
    }

    /// Trading days in `(from, to]`; zero when `to <= from`.
    pub fn trading_days_between(&self, from: NaiveDate, to: NaiveDate) -> u32 {
        let mut n = 0;
        let mut d = from;
        while d < to {
            d = d.succ_opt().expect("date overflow");
            if self.is_trading_day(d) {
                n += 1;
            }
        }
        n
    }

    /// The first `count` trading days on or after `start`.
    pub fn trading_days_from(&self, start: NaiveDate, count: usize) -> Vec<NaiveDate> {
        let mut out = Vec::with_capacity(count);
        let mut d = start;
        while out.len() < count {
            if self.is_trading_day(d) {
                out.push(d);
            }
            d = d.succ_opt().expect("date overflow");
        }
        out
    }
}
