//! Panel assembly: feature schema, labelled loan-month rows, rate series and
//! stratified sampling.

mod features;
pub mod rates;
pub mod sampling;

pub use features::FeatureId;
pub use rates::{representativeness_mae, series_mae, sicr_rate_series, RateKind, RatePoint, RateSeries};
pub use sampling::{split, stratified_subsample, SplitMode};

use rayon::prelude::*;

use crate::calendar::CalMonth;
use crate::error::{Error, Result};
use crate::event::{self, SicrDefinition};
use crate::seed::fnv1a64;
use crate::synth::{LoanHistory, MacroScenario};
use crate::Real;

/// Where a feature's information comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Theme {
    Delinquency,
    Account,
    Behavioural,
    Macroeconomic,
}

impl Theme {
    pub fn as_str(self) -> &'static str {
        match self {
            Theme::Delinquency => "delinquency",
            Theme::Account => "account",
            Theme::Behavioural => "behavioural",
            Theme::Macroeconomic => "macroeconomic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "delinquency" => Some(Theme::Delinquency),
            "account" => Some(Theme::Account),
            "behavioural" => Some(Theme::Behavioural),
            "macroeconomic" => Some(Theme::Macroeconomic),
            _ => None,
        }
    }
}

/// Value type of a feature. Categorical features carry their fixed, ordered
/// level list; rows store the level index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeatureKind {
    Numeric,
    Categorical(Vec<String>),
}

/// One feature declaration.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSpec {
    pub name: String,
    pub kind: FeatureKind,
    pub theme: Theme,
}

/// Ordered feature list; the single source of truth for panel columns and
/// design-matrix column order. Categorical levels are fixed here, before any
/// fitting happens.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSchema {
    features: Vec<FeatureSpec>,
}

impl FeatureSchema {
    pub fn new(features: Vec<FeatureSpec>) -> Self {
        let mut seen = std::collections::BTreeSet::new();
        for f in &features {
            assert!(seen.insert(f.name.clone()), "duplicate feature name {}", f.name);
            if let FeatureKind::Categorical(levels) = &f.kind {
                assert!(!levels.is_empty(), "{}: categorical feature with no levels", f.name);
            }
        }
        FeatureSchema { features }
    }

    /// The default modelling schema: delinquency state and dynamics, account
    /// terms, behavioural signals, and the five macro series at the current
    /// month plus their 12-month lags.
    pub fn standard() -> Self {
        use FeatureKind::*;
        use Theme::*;
        let cat = |names: &[&str]| Categorical(names.iter().map(|s| s.to_string()).collect());
        let spec = |name: &str, kind: FeatureKind, theme: Theme| FeatureSpec { name: name.to_string(), kind, theme };
        FeatureSchema::new(vec![
            spec("g0_Delinq", Numeric, Delinquency),
            spec("ArrearsTrend_3mo", cat(&["down", "flat", "up"]), Delinquency),
            spec("Num_ArrearsEver_24mo", Numeric, Delinquency),
            spec("TimeInPerfSpell", Numeric, Delinquency),
            spec("PerfSpell_Num", Numeric, Delinquency),
            spec("InterestRate_Margin", Numeric, Account),
            spec("Term", Numeric, Account),
            spec("BalanceLog", Numeric, Account),
            spec("PayMethod", cat(&["debit_order", "cash", "payroll"]), Behavioural),
            spec("Prelim_Perc", Numeric, Behavioural),
            spec("Repo_Rate_0mo", Numeric, Macroeconomic),
            spec("Repo_Rate_12mo", Numeric, Macroeconomic),
            spec("Inflation_Growth_0mo", Numeric, Macroeconomic),
            spec("Inflation_Growth_12mo", Numeric, Macroeconomic),
            spec("DTI_Level_0mo", Numeric, Macroeconomic),
            spec("DTI_Level_12mo", Numeric, Macroeconomic),
            spec("RealIncome_Growth_0mo", Numeric, Macroeconomic),
            spec("RealIncome_Growth_12mo", Numeric, Macroeconomic),
            spec("Employment_Growth_0mo", Numeric, Macroeconomic),
            spec("Employment_Growth_12mo", Numeric, Macroeconomic),
        ])
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn features(&self) -> &[FeatureSpec] {
        &self.features
    }

    pub fn feature(&self, idx: usize) -> &FeatureSpec {
        &self.features[idx]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    /// Stable 64-bit fingerprint of the schema (names, kinds, levels, themes,
    /// order). Written into model files and checked before scoring.
    pub fn hash(&self) -> u64 {
        let mut canon = String::new();
        for f in &self.features {
            canon.push_str(&f.name);
            canon.push('|');
            match &f.kind {
                FeatureKind::Numeric => canon.push_str("numeric"),
                FeatureKind::Categorical(levels) => {
                    canon.push_str("categorical:");
                    canon.push_str(&levels.join(","));
                }
            }
            canon.push('|');
            canon.push_str(f.theme.as_str());
            canon.push(';');
        }
        fnv1a64(canon.as_bytes())
    }

    /// Render a categorical level index back to its string form.
    pub fn level_name(&self, feature_idx: usize, level_idx: usize) -> &str {
        match &self.features[feature_idx].kind {
            FeatureKind::Categorical(levels) => &levels[level_idx],
            FeatureKind::Numeric => panic!("{} is numeric", self.features[feature_idx].name),
        }
    }
}

/// One labelled loan-month.
///
/// `values` is aligned with the schema; categorical entries hold the level
/// index as an exact small float.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelRow {
    pub loan_id: String,
    pub month: CalMonth,
    /// Outcome: SICR status `k` months ahead.
    pub y: bool,
    /// At-risk flag: not currently SICR-flagged (or status undefined) and not
    /// in default at this month.
    pub stage1: bool,
    pub values: Vec<Real>,
}

/// A labelled modelling panel for one definition.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPanel {
    pub definition: SicrDefinition,
    /// Grid label, e.g. `1a(i)`; kept for file naming and reports.
    pub definition_label: String,
    pub schema: FeatureSchema,
    pub rows: Vec<PanelRow>,
}

impl LabeledPanel {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Share of rows with `y = 1`.
    pub fn prevalence(&self) -> Real {
        if self.rows.is_empty() {
            return 0.0;
        }
        self.rows.iter().filter(|r| r.y).count() as Real / self.rows.len() as Real
    }

    pub fn labels(&self) -> Vec<bool> {
        self.rows.iter().map(|r| r.y).collect()
    }

    /// Row indices grouped by loan, in first-appearance order; within each
    /// loan rows keep their panel order (months ascending for built panels).
    pub fn rows_by_loan(&self) -> Vec<(&str, Vec<usize>)> {
        let mut order: Vec<&str> = Vec::new();
        let mut map: std::collections::HashMap<&str, Vec<usize>> = std::collections::HashMap::new();
        for (i, r) in self.rows.iter().enumerate() {
            let e = map.entry(r.loan_id.as_str()).or_default();
            if e.is_empty() {
                order.push(&r.loan_id);
            }
            e.push(i);
        }
        order.into_iter().map(|id| (id, map.remove(id).unwrap())).collect()
    }

    /// Panics on schema/row inconsistencies; used by parsers and tests.
    pub fn validate(&self) {
        for row in &self.rows {
            assert_eq!(row.values.len(), self.schema.len(), "row width != schema width");
            for (j, &v) in row.values.iter().enumerate() {
                assert!(v.is_finite(), "non-finite value in feature {}", self.schema.feature(j).name);
                if let FeatureKind::Categorical(levels) = &self.schema.feature(j).kind {
                    let idx = v as usize;
                    assert!(idx as Real == v && idx < levels.len(), "bad level index {v} for {}", self.schema.feature(j).name);
                }
            }
        }
    }
}

/// Build the labelled panel for one definition over a whole portfolio.
///
/// Emits one row per loan-month whose `k`-ahead outcome is observable. Rows
/// carry the at-risk (`stage1`) flag but every labelled row is kept, so the
/// caller decides which population to condition on. Loans too short to label
/// contribute nothing. Features referencing months before a loan's first
/// observation fall back to the available shorter window.
pub fn build_panel(
    portfolio: &[LoanHistory],
    scenario: &MacroScenario,
    definition: SicrDefinition,
    definition_label: &str,
    schema: &FeatureSchema,
) -> Result<LabeledPanel> {
    let ids: Vec<FeatureId> = schema
        .features()
        .iter()
        .map(|f| FeatureId::from_name(&f.name).ok_or_else(|| Error::UnknownFeature { name: f.name.clone() }))
        .collect::<Result<_>>()?;

    let per_loan: Vec<Result<Vec<PanelRow>>> = portfolio
        .par_iter()
        .map(|loan| build_loan_rows(loan, scenario, definition, &ids))
        .collect();

    let mut rows = Vec::new();
    for r in per_loan {
        rows.extend(r?);
    }
    Ok(LabeledPanel {
        definition,
        definition_label: definition_label.to_string(),
        schema: schema.clone(),
        rows,
    })
}

fn build_loan_rows(
    loan: &LoanHistory,
    scenario: &MacroScenario,
    definition: SicrDefinition,
    ids: &[FeatureId],
) -> Result<Vec<PanelRow>> {
    if loan.is_empty() {
        return Ok(Vec::new());
    }
    let status = event::compute_status(loan, definition)?;
    let outcomes = event::label_outcomes(&status, definition.k);
    if outcomes.y.is_empty() {
        return Ok(Vec::new());
    }
    let engine = features::FeatureEngine::new(loan, scenario);
    let mut rows = Vec::with_capacity(outcomes.y.len());
    for (i, &y) in outcomes.y.iter().enumerate() {
        let month = outcomes.start + i as i32;
        let obs_idx = (month - loan.start_month) as usize;
        let flagged = status.status_at(month).unwrap_or(false);
        let in_default = event::is_default(loan.g0[obs_idx]);
        let values = ids
            .iter()
            .map(|id| engine.value(*id, obs_idx, month))
            .collect::<Result<Vec<Real>>>()?;
        rows.push(PanelRow {
            loan_id: loan.loan_id.clone(),
            month,
            y,
            stage1: !flagged && !in_default,
            values,
        });
    }
    Ok(rows)
}
