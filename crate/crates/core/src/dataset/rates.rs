//! Monthly SICR-rate series and series comparison.

use std::collections::BTreeMap;

use super::LabeledPanel;
use crate::calendar::CalMonth;
use crate::error::{Error, Result};
use crate::Real;

/// Which population a rate series describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateKind {
    /// Share of at-risk rows whose outcome is 1.
    Actual,
    /// Mean predicted probability over at-risk rows.
    Expected,
    /// Share of at-risk rows whose dichotomised score is 1.
    Discrete,
}

impl RateKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RateKind::Actual => "actual",
            RateKind::Expected => "expected",
            RateKind::Discrete => "discrete",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "actual" => Some(RateKind::Actual),
            "expected" => Some(RateKind::Expected),
            "discrete" => Some(RateKind::Discrete),
            _ => None,
        }
    }
}

/// One month of a rate series.
#[derive(Debug, Clone, PartialEq)]
pub struct RatePoint {
    pub month: CalMonth,
    /// At-risk rows this month.
    pub n: usize,
    /// Event mass: an integer count for actual/discrete series, a sum of
    /// probabilities for expected series.
    pub events: Real,
    /// `events / n`.
    pub rate: Real,
}

/// A monthly rate series, months strictly ascending; months without at-risk
/// rows are absent rather than zero.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSeries {
    pub kind: RateKind,
    pub points: Vec<RatePoint>,
}

impl RateSeries {
    pub fn from_monthly(kind: RateKind, monthly: BTreeMap<CalMonth, (usize, Real)>) -> Self {
        let points = monthly
            .into_iter()
            .filter(|(_, (n, _))| *n > 0)
            .map(|(month, (n, events))| RatePoint { month, n, events, rate: events / n as Real })
            .collect();
        RateSeries { kind, points }
    }

    pub fn rates(&self) -> Vec<Real> {
        self.points.iter().map(|p| p.rate).collect()
    }

    pub fn rate_at(&self, m: CalMonth) -> Option<Real> {
        self.points.iter().find(|p| p.month == m).map(|p| p.rate)
    }

    pub fn first_month(&self) -> Option<CalMonth> {
        self.points.first().map(|p| p.month)
    }

    pub fn last_month(&self) -> Option<CalMonth> {
        self.points.last().map(|p| p.month)
    }
}

/// Monthly share of at-risk (stage-1) rows that become SICR-flagged `k`
/// months ahead: the "actual" rate series of a labelled panel.
///
/// Rows that are already flagged or in default are excluded from both the
/// numerator and the denominator.
pub fn sicr_rate_series(panel: &LabeledPanel) -> RateSeries {
    let mut monthly: BTreeMap<CalMonth, (usize, Real)> = BTreeMap::new();
    for row in &panel.rows {
        if !row.stage1 {
            continue;
        }
        let e = monthly.entry(row.month).or_insert((0, 0.0));
        e.0 += 1;
        e.1 += row.y as u8 as Real;
    }
    RateSeries::from_monthly(RateKind::Actual, monthly)
}

/// Mean absolute difference between two rate series over their common months.
///
/// Errors with `no-overlap` when the series share no month.
pub fn series_mae(a: &RateSeries, b: &RateSeries) -> Result<Real> {
    let bm: BTreeMap<CalMonth, Real> = b.points.iter().map(|p| (p.month, p.rate)).collect();
    let mut total = 0.0;
    let mut n = 0usize;
    for p in &a.points {
        if let Some(&rb) = bm.get(&p.month) {
            total += (p.rate - rb).abs();
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::NoOverlap);
    }
    Ok(total / n as Real)
}

/// How closely a sample's rate series tracks the population's: the mean
/// absolute per-month difference. Identical series score 0.
pub fn representativeness_mae(sample: &RateSeries, population: &RateSeries) -> Result<Real> {
    series_mae(sample, population)
}
