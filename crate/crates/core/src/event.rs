//! SICR trigger definitions, status series and outcome labelling.
//!
//! A definition `(d, s, k)` reads: flag the account at month `t` when its
//! delinquency level `g0` has been at or above the threshold `d` for each of
//! the `s` consecutive months ending at `t`. The status is defined from the
//! `s`-th observed month onward. The outcome attached to month `t` is the
//! status `k` months ahead; months whose look-ahead runs past the end of the
//! history get no outcome at all (censored, never "false").

use std::collections::{BTreeMap, BTreeSet};

use crate::calendar::CalMonth;
use crate::error::{Error, Result};
use crate::synth::LoanHistory;

/// Delinquency level at or above which an account counts as defaulted.
pub const DEFAULT_LEVEL: u32 = 3;

/// A loan-month is in default when `g0 >= 3`.
pub fn is_default(g0: u32) -> bool {
    g0 >= DEFAULT_LEVEL
}

/// A SICR trigger definition.
///
/// `d >= 1` is the delinquency threshold, `s >= 1` the required consecutive
/// months, `k >= 0` the outcome look-ahead in months. The canonical study
/// grid uses `d in {1,2}`, `s in {1,2,3}`, `k in {3,6,9,12}`; other positive
/// values are accepted everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SicrDefinition {
    pub d: u32,
    pub s: u32,
    pub k: u32,
}

impl SicrDefinition {
    pub fn new(d: u32, s: u32, k: u32) -> Self {
        assert!(d >= 1, "threshold d must be >= 1");
        assert!(s >= 1, "persistence s must be >= 1");
        SicrDefinition { d, s, k }
    }

    /// Class label shared by all look-aheads of one `(d, s)` pair, e.g. `1a`.
    pub fn class_label(&self) -> String {
        assert!(self.s <= 26, "no letter label beyond s = 26");
        let letter = (b'a' + (self.s - 1) as u8) as char;
        format!("{}{}", self.d, letter)
    }
}

/// Lowercase roman numeral for a 1-based rank.
pub fn roman_lower(mut n: u32) -> String {
    assert!(n >= 1, "roman numerals start at 1");
    const TABLE: [(u32, &str); 13] = [
        (1000, "m"),
        (900, "cm"),
        (500, "d"),
        (400, "cd"),
        (100, "c"),
        (90, "xc"),
        (50, "l"),
        (40, "xl"),
        (10, "x"),
        (9, "ix"),
        (5, "v"),
        (4, "iv"),
        (1, "i"),
    ];
    let mut out = String::new();
    for (v, sym) in TABLE {
        while n >= v {
            out.push_str(sym);
            n -= v;
        }
    }
    out
}

/// Per-loan SICR status series for one `(d, s)` pair.
///
/// `status[i]` is the flag at calendar month `start + i`; `start` is the
/// `s`-th observed month of the loan, so the series is empty when the history
/// is shorter than `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct SicrStatusSeries {
    pub loan_id: String,
    pub definition: SicrDefinition,
    /// First observed month of the underlying history.
    pub observed_start: CalMonth,
    /// Month of the first defined status (`observed_start + s - 1`).
    pub start: CalMonth,
    pub status: Vec<bool>,
}

impl SicrStatusSeries {
    pub fn status_at(&self, m: CalMonth) -> Option<bool> {
        let idx = m - self.start;
        if idx < 0 {
            return None;
        }
        self.status.get(idx as usize).copied()
    }

    pub fn last_month(&self) -> Option<CalMonth> {
        if self.status.is_empty() {
            None
        } else {
            Some(self.start + (self.status.len() as i32 - 1))
        }
    }
}

/// Outcome labels for one loan under a definition: `y[i]` at calendar month
/// `start + i` is the SICR status `definition.k` months later.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeSeries {
    pub loan_id: String,
    pub definition: SicrDefinition,
    pub start: CalMonth,
    pub y: Vec<bool>,
}

impl OutcomeSeries {
    pub fn y_at(&self, m: CalMonth) -> Option<bool> {
        let idx = m - self.start;
        if idx < 0 {
            return None;
        }
        self.y.get(idx as usize).copied()
    }
}

/// Evaluate the trigger status for every month where it is defined.
///
/// Errors with `empty-series` on a history without observations. A history
/// shorter than `s` yields an empty (but well-formed) series.
pub fn compute_status(history: &LoanHistory, definition: SicrDefinition) -> Result<SicrStatusSeries> {
    if history.g0.is_empty() {
        return Err(Error::EmptySeries { loan_id: history.loan_id.clone() });
    }
    let s = definition.s as usize;
    let start = history.start_month + (definition.s as i32 - 1);
    let mut status = Vec::new();
    if history.g0.len() >= s {
        status.reserve(history.g0.len() - s + 1);
        // Run length of consecutive months with g0 >= d, ending at the
        // current month; the flag is set exactly when the run reaches s.
        let mut run = 0usize;
        for (i, &g) in history.g0.iter().enumerate() {
            if g >= definition.d {
                run += 1;
            } else {
                run = 0;
            }
            if i + 1 >= s {
                status.push(run >= s);
            }
        }
    }
    Ok(SicrStatusSeries {
        loan_id: history.loan_id.clone(),
        definition,
        observed_start: history.start_month,
        start,
        status,
    })
}

/// Attach the `k`-months-ahead status as the outcome of each earlier month.
///
/// `k` overrides the look-ahead recorded in the status series' definition
/// (status series depend only on `(d, s)`, so one series serves every `k`).
/// `k = 0` returns the status series itself as outcomes. Months whose
/// look-ahead target is unobserved are dropped.
pub fn label_outcomes(status: &SicrStatusSeries, k: u32) -> OutcomeSeries {
    let definition = SicrDefinition { k, ..status.definition };
    let loan_id = status.loan_id.clone();
    let Some(status_end) = status.last_month() else {
        return OutcomeSeries { loan_id, definition, start: status.observed_start, y: Vec::new() };
    };
    // Outcome at m needs the status at m + k, and m itself must be observed.
    let start = (status.start - k as i32).max(status.observed_start);
    let end = status_end - (k as i32);
    let mut y = Vec::new();
    let mut m = start;
    while m <= end {
        y.push(status.status_at(m + k as i32).expect("look-ahead inside status range"));
        m = m + 1;
    }
    OutcomeSeries { loan_id, definition, start, y }
}

/// One labelled entry of a definition grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridEntry {
    pub definition: SicrDefinition,
    /// Full label, e.g. `1a(i)`: threshold digit, persistence letter, roman
    /// look-ahead rank within the `(d, s)` class.
    pub label: String,
}

/// Build a labelled definition grid from value sets plus ad-hoc extensions.
///
/// The grid is the cartesian product of the three sets (each sorted and
/// deduplicated) unioned with `extensions`; entries are ordered threshold
/// first, persistence second, look-ahead last. Within each `(d, s)` class the
/// roman numeral reflects the rank of `k` among that class's look-aheads.
pub fn grid_with_extensions(
    d_values: &[u32],
    s_values: &[u32],
    k_values: &[u32],
    extensions: &[(u32, u32, u32)],
) -> Vec<GridEntry> {
    assert!(!d_values.is_empty() && !s_values.is_empty() && !k_values.is_empty(), "grid value sets must be non-empty");
    for &v in d_values.iter().chain(s_values).chain(k_values) {
        assert!(v >= 1, "grid values must be positive");
    }
    let mut by_class: BTreeMap<(u32, u32), BTreeSet<u32>> = BTreeMap::new();
    for &d in d_values {
        for &s in s_values {
            for &k in k_values {
                by_class.entry((d, s)).or_default().insert(k);
            }
        }
    }
    for &(d, s, k) in extensions {
        assert!(d >= 1 && s >= 1 && k >= 1, "extension values must be positive");
        by_class.entry((d, s)).or_default().insert(k);
    }
    let mut grid = Vec::new();
    for ((d, s), ks) in by_class {
        for (rank, &k) in ks.iter().enumerate() {
            let definition = SicrDefinition::new(d, s, k);
            let label = format!("{}({})", definition.class_label(), roman_lower(rank as u32 + 1));
            grid.push(GridEntry { definition, label });
        }
    }
    grid
}

/// Cartesian definition grid without extensions.
pub fn definition_grid(d_values: &[u32], s_values: &[u32], k_values: &[u32]) -> Vec<GridEntry> {
    grid_with_extensions(d_values, s_values, k_values, &[])
}
