//! Portfolio and macro-scenario CSV: the raw simulated inputs, one row per
//! loan-month / calendar month, at full float precision.

use sicr_core::calendar::CalMonth;
use sicr_core::error::{Error, Result};
use sicr_core::synth::{LoanHistory, MacroRow, MacroScenario, MonthObs, PayMethod, Regime};

use super::{check_field, expect_header, fmt_full, parse_real, parse_u32, split_fields};

const PORTFOLIO_HEADER: &str =
    "loan_id,month,g0,term,origination_month,balance_log,interest_rate_margin,prelim_perc,pay_method";

const MACRO_HEADER: &str =
    "month,regime,repo_rate,inflation_growth,dti_level,real_income_growth,employment_growth";

/// One row per observed loan-month, grouped by loan in input order. The
/// per-loan constants (term, origination, margin, pay method) repeat on
/// every row so each line stands alone.
pub fn portfolio_to_csv(portfolio: &[LoanHistory]) -> String {
    let mut out = String::from(PORTFOLIO_HEADER);
    out.push('\n');
    for loan in portfolio {
        check_field(&loan.loan_id, "loan_id");
        for (i, &g0) in loan.g0.iter().enumerate() {
            let obs = &loan.monthly[i];
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                loan.loan_id,
                loan.start_month + i as i32,
                g0,
                loan.term_months,
                loan.origination_month,
                fmt_full(obs.balance_log),
                fmt_full(loan.interest_rate_margin),
                fmt_full(obs.prelim_perc),
                loan.pay_method.as_str(),
            ));
        }
    }
    out
}

pub fn portfolio_from_csv(text: &str) -> Result<Vec<LoanHistory>> {
    let mut lines = text.lines();
    expect_header(lines.next(), PORTFOLIO_HEADER, "portfolio")?;

    let mut portfolio: Vec<LoanHistory> = Vec::new();
    for (number, line) in lines.enumerate() {
        let what = format!("portfolio line {}", number + 2);
        let f = split_fields(line, 9, &what)?;
        let month: CalMonth = f[1].parse()?;
        let g0 = parse_u32(f[2], &what)?;
        let term = parse_u32(f[3], &what)?;
        let origination: CalMonth = f[4].parse()?;
        let obs = MonthObs {
            balance_log: parse_real(f[5], &what)?,
            prelim_perc: parse_real(f[7], &what)?,
        };
        let margin = parse_real(f[6], &what)?;
        let pay_method = PayMethod::parse(f[8])
            .ok_or_else(|| Error::InvalidParameter { what: format!("{what}: bad pay method `{}`", f[8]) })?;

        match portfolio.last_mut() {
            Some(loan) if loan.loan_id == f[0] => {
                let expected = loan.start_month + loan.g0.len() as i32;
                if month != expected {
                    return Err(Error::InvalidParameter {
                        what: format!("{what}: month {month} breaks contiguity, expected {expected}"),
                    });
                }
                if term != loan.term_months
                    || origination != loan.origination_month
                    || margin != loan.interest_rate_margin
                    || pay_method != loan.pay_method
                {
                    return Err(Error::InvalidParameter {
                        what: format!("{what}: loan-constant fields changed mid-loan"),
                    });
                }
                loan.g0.push(g0);
                loan.monthly.push(obs);
            }
            _ => {
                if portfolio.iter().any(|l| l.loan_id == f[0]) {
                    return Err(Error::InvalidParameter {
                        what: format!("{what}: loan {} reappears after other loans", f[0]),
                    });
                }
                portfolio.push(LoanHistory {
                    loan_id: f[0].to_string(),
                    origination_month: origination,
                    term_months: term,
                    start_month: month,
                    g0: vec![g0],
                    pay_method,
                    interest_rate_margin: margin,
                    monthly: vec![obs],
                });
            }
        }
    }
    for loan in &portfolio {
        if loan.start_month < loan.origination_month {
            return Err(Error::InvalidParameter {
                what: format!("portfolio: loan {} observed before origination", loan.loan_id),
            });
        }
    }
    Ok(portfolio)
}

/// One row per scenario month, regimes by name, values at full precision.
pub fn scenario_to_csv(scenario: &MacroScenario) -> String {
    let mut out = String::from(MACRO_HEADER);
    out.push('\n');
    for (month, row) in scenario.months() {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            month,
            row.regime.as_str(),
            fmt_full(row.repo_rate),
            fmt_full(row.inflation_growth),
            fmt_full(row.dti_level),
            fmt_full(row.real_income_growth),
            fmt_full(row.employment_growth),
        ));
    }
    out
}

pub fn scenario_from_csv(text: &str) -> Result<MacroScenario> {
    let mut lines = text.lines();
    expect_header(lines.next(), MACRO_HEADER, "macro scenario")?;

    let mut start: Option<CalMonth> = None;
    let mut rows: Vec<MacroRow> = Vec::new();
    for (number, line) in lines.enumerate() {
        let what = format!("macro line {}", number + 2);
        let f = split_fields(line, 7, &what)?;
        let month: CalMonth = f[0].parse()?;
        match start {
            None => start = Some(month),
            Some(s) => {
                let expected = s + rows.len() as i32;
                if month != expected {
                    return Err(Error::InvalidParameter {
                        what: format!("{what}: month {month} breaks contiguity, expected {expected}"),
                    });
                }
            }
        }
        rows.push(MacroRow {
            regime: Regime::parse(f[1]).ok_or_else(|| Error::InvalidParameter {
                what: format!("{what}: bad regime `{}`", f[1]),
            })?,
            repo_rate: parse_real(f[2], &what)?,
            inflation_growth: parse_real(f[3], &what)?,
            dti_level: parse_real(f[4], &what)?,
            real_income_growth: parse_real(f[5], &what)?,
            employment_growth: parse_real(f[6], &what)?,
        });
    }
    let start = start.ok_or_else(|| Error::InvalidParameter { what: "macro scenario: no rows".into() })?;
    Ok(MacroScenario { start, rows })
}
