//! Synthetic loan portfolio and macro-economic scenario generation.
//!
//! Everything here is seeded and deterministic: the macro scenario is one
//! sub-stream of the root seed, and each loan's path is generated from its own
//! sub-stream derived from `(seed, loan index)`, so portfolios are bitwise
//! reproducible regardless of thread count or generation order.

mod loans;
mod scenario;

pub use loans::{gen_all, gen_portfolio};
pub use scenario::gen_macro;

use crate::calendar::{CalMonth, MonthRange};

/// Distinct macro-economic regimes a month can belong to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Normal,
    Crisis,
    Recovery,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Normal => "normal",
            Regime::Crisis => "crisis",
            Regime::Recovery => "recovery",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "normal" => Some(Regime::Normal),
            "crisis" => Some(Regime::Crisis),
            "recovery" => Some(Regime::Recovery),
            _ => None,
        }
    }
}

/// One month of macro-economic state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacroRow {
    pub regime: Regime,
    /// Central-bank policy rate, percent.
    pub repo_rate: f64,
    /// Year-on-year consumer inflation, percent.
    pub inflation_growth: f64,
    /// Household debt-to-income level, percent.
    pub dti_level: f64,
    /// Real disposable income growth, percent.
    pub real_income_growth: f64,
    /// Employment growth, percent.
    pub employment_growth: f64,
}

impl MacroRow {
    pub fn value(&self, series: MacroSeries) -> f64 {
        match series {
            MacroSeries::RepoRate => self.repo_rate,
            MacroSeries::InflationGrowth => self.inflation_growth,
            MacroSeries::DtiLevel => self.dti_level,
            MacroSeries::RealIncomeGrowth => self.real_income_growth,
            MacroSeries::EmploymentGrowth => self.employment_growth,
        }
    }
}

/// Identifiers for the five macro series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MacroSeries {
    RepoRate,
    InflationGrowth,
    DtiLevel,
    RealIncomeGrowth,
    EmploymentGrowth,
}

pub const MACRO_SERIES: [MacroSeries; 5] = [
    MacroSeries::RepoRate,
    MacroSeries::InflationGrowth,
    MacroSeries::DtiLevel,
    MacroSeries::RealIncomeGrowth,
    MacroSeries::EmploymentGrowth,
];

/// A generated macro scenario covering the modelling window plus a 12-month
/// lead-in (so 12-month-lagged features never fall off the front).
#[derive(Debug, Clone, PartialEq)]
pub struct MacroScenario {
    /// First covered month; always `window.start - 12`.
    pub start: CalMonth,
    pub rows: Vec<MacroRow>,
}

impl MacroScenario {
    pub fn at(&self, m: CalMonth) -> Option<&MacroRow> {
        let idx = m - self.start;
        if idx < 0 {
            return None;
        }
        self.rows.get(idx as usize)
    }

    pub fn months(&self) -> impl Iterator<Item = (CalMonth, &MacroRow)> + '_ {
        let start = self.start;
        self.rows.iter().enumerate().map(move |(i, r)| (start + i as i32, r))
    }

    pub fn last_month(&self) -> CalMonth {
        self.start + (self.rows.len() as i32 - 1)
    }
}

/// How a loan pays its instalment. `Cash` carries extra delinquency risk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PayMethod {
    DebitOrder,
    Cash,
    Payroll,
}

impl PayMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            PayMethod::DebitOrder => "debit_order",
            PayMethod::Cash => "cash",
            PayMethod::Payroll => "payroll",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "debit_order" => Some(PayMethod::DebitOrder),
            "cash" => Some(PayMethod::Cash),
            "payroll" => Some(PayMethod::Payroll),
            _ => None,
        }
    }

    pub const ALL: [PayMethod; 3] = [PayMethod::DebitOrder, PayMethod::Cash, PayMethod::Payroll];
}

/// Per observed month loan state that is not derivable from `g0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonthObs {
    /// Natural log of (outstanding balance + 1).
    pub balance_log: f64,
    /// Prepaid/advance buffer as a fraction of instalment capacity, in [0, 1].
    pub prelim_perc: f64,
}

/// One loan's observed monthly history.
///
/// `g0` holds the delinquency measure (integer months in arrears) for each
/// observed month, starting at `start_month` and contiguous thereafter.
/// Observation may begin after `origination_month` when a loan predates the
/// reporting window, but never before origination, and never extends past the
/// loan's term.
#[derive(Debug, Clone, PartialEq)]
pub struct LoanHistory {
    pub loan_id: String,
    pub origination_month: CalMonth,
    pub term_months: u32,
    /// First observed month (`>= origination_month`).
    pub start_month: CalMonth,
    pub g0: Vec<u32>,
    pub pay_method: PayMethod,
    /// Rate spread over the reference rate, percentage points; fixed at origination.
    pub interest_rate_margin: f64,
    /// Time-varying observations, aligned with `g0`.
    pub monthly: Vec<MonthObs>,
}

impl LoanHistory {
    /// Minimal history for tests and doc examples: observation starts at
    /// origination and covariates are neutral.
    pub fn bare(loan_id: &str, start_month: CalMonth, g0: Vec<u32>) -> Self {
        let n = g0.len();
        LoanHistory {
            loan_id: loan_id.to_string(),
            origination_month: start_month,
            term_months: n.max(1) as u32,
            start_month,
            g0,
            pay_method: PayMethod::DebitOrder,
            interest_rate_margin: 0.0,
            monthly: vec![MonthObs { balance_log: 0.0, prelim_perc: 0.0 }; n],
        }
    }

    /// Number of observed months.
    pub fn len(&self) -> usize {
        self.g0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g0.is_empty()
    }

    /// Last observed month; `None` for an empty history.
    pub fn last_month(&self) -> Option<CalMonth> {
        if self.g0.is_empty() {
            None
        } else {
            Some(self.start_month + (self.g0.len() as i32 - 1))
        }
    }

    /// Delinquency level at a calendar month, if observed.
    pub fn g0_at(&self, m: CalMonth) -> Option<u32> {
        let idx = m - self.start_month;
        if idx < 0 {
            return None;
        }
        self.g0.get(idx as usize).copied()
    }

    /// Panics if internal invariants are broken; used by tests and the
    /// portfolio parser.
    pub fn validate(&self) {
        assert_eq!(self.g0.len(), self.monthly.len(), "{}: g0/monthly length mismatch", self.loan_id);
        assert!(
            self.start_month >= self.origination_month,
            "{}: observed before origination",
            self.loan_id
        );
        if let Some(last) = self.last_month() {
            let end_of_term = self.origination_month + (self.term_months as i32 - 1);
            assert!(last <= end_of_term, "{}: observed past end of term", self.loan_id);
        }
        assert!(self.g0.len() as u32 <= self.term_months, "{}: more observations than term", self.loan_id);
    }
}

/// Log-odds loadings for one transition direction of the delinquency chain.
///
/// The transition probability each month is `sigmoid(intercept + loadings)`,
/// where loadings multiply centred macro values and loan-level state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionParams {
    pub intercept: f64,
    /// Per percentage point of repo rate above its normal-regime base.
    pub repo_rate: f64,
    /// Per point of debt-to-income above base.
    pub dti_level: f64,
    /// Per percentage point of real income growth.
    pub real_income_growth: f64,
    /// Per percentage point of employment growth.
    pub employment_growth: f64,
    /// Times the prepaid-buffer fraction in [0, 1].
    pub prelim_perc: f64,
    /// Per percentage point of interest-rate margin.
    pub rate_margin: f64,
    /// Added when the loan pays by cash.
    pub pay_cash: f64,
    /// Times the loan's latent N(0,1) frailty.
    pub frailty: f64,
    /// Per current delinquency level (distress escalation / slower deep cures).
    pub g0_escalation: f64,
}

impl TransitionParams {
    pub const fn zero() -> Self {
        TransitionParams {
            intercept: 0.0,
            repo_rate: 0.0,
            dti_level: 0.0,
            real_income_growth: 0.0,
            employment_growth: 0.0,
            prelim_perc: 0.0,
            rate_margin: 0.0,
            pay_cash: 0.0,
            frailty: 0.0,
            g0_escalation: 0.0,
        }
    }
}

/// Full configuration of the synthetic portfolio generator.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n_loans: u32,
    /// Reporting window; loans are observed only inside it.
    pub window: MonthRange,
    /// Months whose macro regime is stressed; `None` for no crisis.
    pub crisis_window: Option<MonthRange>,
    /// Probability of the delinquency level rising by one in a month.
    pub worsen: TransitionParams,
    /// Probability of the delinquency level falling by one in a month.
    pub cure: TransitionParams,
    /// Monthly probability that a default spell ends in cure (g0 reset to 0).
    pub cure_after_default_probability: f64,
    /// Monthly probability that a default spell ends the loan (write-off).
    pub writeoff_probability: f64,
    /// Monthly probability of voluntary early settlement while performing.
    pub settle_probability: f64,
    /// How many months before the window start originations are spread over.
    pub origination_lead_months: u32,
    /// Hard cap on the delinquency level.
    pub max_g0: u32,
    pub seed: u64,
}

impl Default for SimConfig {
    /// Defaults tuned so a mid-2000s style window with a two-year crisis
    /// produces: a low-single-digit share of months at `g0 >= 1`, a much
    /// smaller share at `g0 >= 2`, a visible crisis hump in trigger rates,
    /// and loan-level heterogeneity a scoring model can rank on.
    fn default() -> Self {
        SimConfig {
            n_loans: 3000,
            window: MonthRange::new(CalMonth::new(2005, 1), CalMonth::new(2014, 12)),
            crisis_window: Some(MonthRange::new(CalMonth::new(2008, 1), CalMonth::new(2009, 12))),
            worsen: TransitionParams {
                intercept: -3.9,
                repo_rate: 0.12,
                dti_level: 0.03,
                real_income_growth: -0.06,
                employment_growth: -0.04,
                prelim_perc: -1.2,
                rate_margin: 0.25,
                pay_cash: 0.5,
                frailty: 0.8,
                g0_escalation: 0.5,
            },
            cure: TransitionParams {
                intercept: -0.6,
                repo_rate: -0.02,
                dti_level: -0.01,
                real_income_growth: 0.05,
                employment_growth: 0.03,
                prelim_perc: 0.3,
                rate_margin: -0.05,
                pay_cash: -0.2,
                frailty: -0.3,
                g0_escalation: -0.15,
            },
            cure_after_default_probability: 0.20,
            writeoff_probability: 0.06,
            settle_probability: 0.003,
            origination_lead_months: 48,
            max_g0: 9,
            seed: 42,
        }
    }
}
