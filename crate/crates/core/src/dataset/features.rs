//! Per loan-month feature computation.
//!
//! The engine precomputes delinquency-derived series once per loan, then
//! serves schema features by name. Trailing-window features shorten their
//! window at the start of the observed history rather than dropping rows.

use crate::calendar::CalMonth;
use crate::error::{Error, Result};
use crate::event::DEFAULT_LEVEL;
use crate::synth::{LoanHistory, MacroScenario, MacroSeries};
use crate::Real;

/// Identifies a computable feature. `Macro(series, lag)` covers any
/// `<Series>_<lag>mo` column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FeatureId {
    G0Delinq,
    ArrearsTrend3mo,
    NumArrearsEver24mo,
    TimeInPerfSpell,
    PerfSpellNum,
    InterestRateMargin,
    Term,
    BalanceLog,
    PayMethod,
    PrelimPerc,
    Macro(MacroSeries, u32),
}

impl FeatureId {
    pub fn from_name(name: &str) -> Option<FeatureId> {
        match name {
            "g0_Delinq" => return Some(FeatureId::G0Delinq),
            "ArrearsTrend_3mo" => return Some(FeatureId::ArrearsTrend3mo),
            "Num_ArrearsEver_24mo" => return Some(FeatureId::NumArrearsEver24mo),
            "TimeInPerfSpell" => return Some(FeatureId::TimeInPerfSpell),
            "PerfSpell_Num" => return Some(FeatureId::PerfSpellNum),
            "InterestRate_Margin" => return Some(FeatureId::InterestRateMargin),
            "Term" => return Some(FeatureId::Term),
            "BalanceLog" => return Some(FeatureId::BalanceLog),
            "PayMethod" => return Some(FeatureId::PayMethod),
            "Prelim_Perc" => return Some(FeatureId::PrelimPerc),
            _ => {}
        }
        // Macro columns: `<base>_<lag>mo`.
        let rest = name.strip_suffix("mo")?;
        let (base, lag) = rest.rsplit_once('_')?;
        let lag: u32 = lag.parse().ok()?;
        let series = match base {
            "Repo_Rate" => MacroSeries::RepoRate,
            "Inflation_Growth" => MacroSeries::InflationGrowth,
            "DTI_Level" => MacroSeries::DtiLevel,
            "RealIncome_Growth" => MacroSeries::RealIncomeGrowth,
            "Employment_Growth" => MacroSeries::EmploymentGrowth,
            _ => return None,
        };
        Some(FeatureId::Macro(series, lag))
    }
}

/// Trend classification levels, in schema order.
pub const TREND_DOWN: Real = 0.0;
pub const TREND_FLAT: Real = 1.0;
pub const TREND_UP: Real = 2.0;

/// PayMethod levels, in schema order.
fn pay_method_level(loan: &LoanHistory) -> Real {
    use crate::synth::PayMethod::*;
    match loan.pay_method {
        DebitOrder => 0.0,
        Cash => 1.0,
        Payroll => 2.0,
    }
}

pub struct FeatureEngine<'a> {
    loan: &'a LoanHistory,
    scenario: &'a MacroScenario,
    /// 1-based age within the current performing spell; 0 during default.
    time_in_perf_spell: Vec<u32>,
    /// 1-based count of performing spells started so far.
    perf_spell_num: Vec<u32>,
    /// Months with g0 > 0 among the previous 24 observed months (exclusive).
    arrears_ever_24mo: Vec<u32>,
}

impl<'a> FeatureEngine<'a> {
    pub fn new(loan: &'a LoanHistory, scenario: &'a MacroScenario) -> Self {
        let n = loan.g0.len();
        let mut time_in_perf_spell = Vec::with_capacity(n);
        let mut perf_spell_num = Vec::with_capacity(n);
        let mut spell_age = 0u32;
        let mut spell_num = 0u32;
        let mut prev_in_default = true; // so a performing first month opens spell 1
        for &g in &loan.g0 {
            let in_default = g >= DEFAULT_LEVEL;
            if in_default {
                spell_age = 0;
            } else {
                if prev_in_default {
                    spell_num += 1;
                    spell_age = 0;
                }
                spell_age += 1;
            }
            prev_in_default = in_default;
            time_in_perf_spell.push(spell_age);
            perf_spell_num.push(spell_num.max(1));
        }

        // Count of arrears months in the trailing window [i-24, i-1],
        // truncated at the start of the observed history.
        let arrears_ever_24mo: Vec<u32> = (0..n)
            .map(|i| loan.g0[i.saturating_sub(24)..i].iter().filter(|&&g| g > 0).count() as u32)
            .collect();

        FeatureEngine { loan, scenario, time_in_perf_spell, perf_spell_num, arrears_ever_24mo }
    }

    /// Value of `id` at observed index `obs_idx` (calendar month `month`).
    pub fn value(&self, id: FeatureId, obs_idx: usize, month: CalMonth) -> Result<Real> {
        let g0 = &self.loan.g0;
        Ok(match id {
            FeatureId::G0Delinq => g0[obs_idx] as Real,
            FeatureId::ArrearsTrend3mo => {
                let back = obs_idx.saturating_sub(3);
                let (now, then) = (g0[obs_idx], g0[back]);
                if now > then {
                    TREND_UP
                } else if now < then {
                    TREND_DOWN
                } else {
                    TREND_FLAT
                }
            }
            FeatureId::NumArrearsEver24mo => self.arrears_ever_24mo[obs_idx] as Real,
            FeatureId::TimeInPerfSpell => self.time_in_perf_spell[obs_idx] as Real,
            FeatureId::PerfSpellNum => self.perf_spell_num[obs_idx] as Real,
            FeatureId::InterestRateMargin => self.loan.interest_rate_margin,
            FeatureId::Term => self.loan.term_months as Real,
            FeatureId::BalanceLog => self.loan.monthly[obs_idx].balance_log,
            FeatureId::PayMethod => pay_method_level(self.loan),
            FeatureId::PrelimPerc => self.loan.monthly[obs_idx].prelim_perc,
            FeatureId::Macro(series, lag) => {
                let target = month - lag as i32;
                let row = self.scenario.at(target).ok_or_else(|| Error::InvalidParameter {
                    what: format!("macro scenario does not cover {target} (lag {lag} from {month})"),
                })?;
                row.value(series)
            }
        })
    }
}
