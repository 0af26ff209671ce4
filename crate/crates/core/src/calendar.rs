//! Calendar months as a flat integer index, formatted `YYYY-MM`.

use std::fmt;
use std::ops::{Add, Sub};
use std::str::FromStr;

use crate::error::Error;

/// A calendar month, stored as `year * 12 + (month - 1)`.
///
/// `CalMonth` is `Ord`, supports `+ i32` / `- i32` in months and differences
/// via `-`, and round-trips through its `YYYY-MM` display form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CalMonth(i32);

impl CalMonth {
    /// Build from a calendar year and 1-based month number.
    pub fn new(year: i32, month: u32) -> Self {
        assert!((1..=12).contains(&month), "month must be 1..=12, got {month}");
        CalMonth(year * 12 + month as i32 - 1)
    }

    pub fn year(self) -> i32 {
        self.0.div_euclid(12)
    }

    /// 1-based month number.
    pub fn month(self) -> u32 {
        (self.0.rem_euclid(12) + 1) as u32
    }

    /// Flat month index (useful as a deterministic seed component).
    pub fn index(self) -> i32 {
        self.0
    }
}

impl Add<i32> for CalMonth {
    type Output = CalMonth;
    fn add(self, months: i32) -> CalMonth {
        CalMonth(self.0 + months)
    }
}

impl Sub<i32> for CalMonth {
    type Output = CalMonth;
    fn sub(self, months: i32) -> CalMonth {
        CalMonth(self.0 - months)
    }
}

impl Sub<CalMonth> for CalMonth {
    type Output = i32;
    /// Signed number of months from `rhs` to `self`.
    fn sub(self, rhs: CalMonth) -> i32 {
        self.0 - rhs.0
    }
}

impl fmt::Display for CalMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year(), self.month())
    }
}

impl FromStr for CalMonth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let invalid = || Error::InvalidParameter { what: format!("month `{s}` is not YYYY-MM") };
        let (y, m) = s.split_once('-').ok_or_else(invalid)?;
        let year: i32 = y.parse().map_err(|_| invalid())?;
        let month: u32 = m.parse().map_err(|_| invalid())?;
        if !(1..=12).contains(&month) {
            return Err(invalid());
        }
        Ok(CalMonth::new(year, month))
    }
}

/// Inclusive range of calendar months.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonthRange {
    pub start: CalMonth,
    pub end: CalMonth,
}

impl MonthRange {
    pub fn new(start: CalMonth, end: CalMonth) -> Self {
        assert!(start <= end, "month range start {start} after end {end}");
        MonthRange { start, end }
    }

    /// Number of months in the range (inclusive).
    pub fn len(&self) -> usize {
        (self.end - self.start + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false // construction enforces start <= end
    }

    pub fn contains(&self, m: CalMonth) -> bool {
        self.start <= m && m <= self.end
    }

    /// Iterate the months in calendar order.
    pub fn iter(&self) -> impl Iterator<Item = CalMonth> + '_ {
        let start = self.start;
        (0..self.len() as i32).map(move |i| start + i)
    }
}
