//! Calendar months and per-month summaries.

use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MonthKey {
    pub year: i32,
    /// 1..=12
    pub month: u32,
}

impl MonthKey {
    pub fn new(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::Domain(format!(
                "month must be in 1..=12, got {month}"
            )));
        }
        Ok(Self { year, month })
    }

    /// Months since January of year 0; January has index ≡ 0 (mod 12).
    pub fn index(self) -> i64 {
        12 * self.year as i64 + (self.month as i64 - 1)
    }

    pub fn from_index(i: i64) -> Self {
        Self {
            year: i.div_euclid(12) as i32,
            month: i.rem_euclid(12) as u32 + 1,
        }
    }

    pub fn next(self) -> Self {
        Self::from_index(self.index() + 1)
    }
}

impl fmt::Display for MonthKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

/// Per-month quantiles across an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MonthlyQuantiles<T> {
    pub months: Vec<MonthKey>,
    pub levels: Vec<T>,
    /// `values[m][k]` is the `levels[k]` quantile for `months[m]`.
    pub values: Vec<Vec<T>>,
    pub path_count: usize,
}

impl<T: Real> MonthlyQuantiles<T> {
    /// Quantiles of each `(month, values)` group; `levels` are sorted first.
    pub fn from_groups<I>(groups: I, levels: &[T], path_count: usize) -> Self
    where
        I: IntoIterator<Item = (MonthKey, Vec<T>)>,
    {
        let mut levels = levels.to_vec();
        stats::sort_total(&mut levels);
        let (months, values) = groups
            .into_iter()
            .map(|(m, xs)| (m, stats::quantiles(&xs, &levels)))
            .unzip();
        Self {
            months,
            levels,
            values,
            path_count,
        }
    }

    /// CSV with columns `year,month,level,value`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "year,month,level,value")?;
        for (m, row) in self.months.iter().zip(&self.values) {
            for (l, v) in self.levels.iter().zip(row) {
                writeln!(w, "{},{},{},{}", m.year, m.month, l, v)?;
            }
        }
        Ok(())
    }
}
