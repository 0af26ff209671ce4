//! Per-loan delinquency path simulation.
//!
//! Each loan runs a bounded integer chain on its delinquency level `g0`:
//! the level rises by one with probability `sigmoid(worsen score)`, falls by
//! one with probability `sigmoid(cure score)`, and holds otherwise. Months at
//! `g0 >= 3` form default spells, which each month either cure (reset to 0,
//! opening a new performing spell), write the loan off, or continue. Scores
//! load on the macro scenario, the loan's prepaid buffer, pricing margin, pay
//! method, a latent frailty and the current level itself, so portfolios carry
//! both a systematic cycle and rankable loan-level heterogeneity.
//!
//! Loan `i` draws from a sub-stream derived from `(seed, i)`; generation is
//! embarrassingly parallel and bitwise reproducible at any thread count.

use rand::Rng;
use rayon::prelude::*;

use super::scenario::{base_row, randn, REPO_BASE};
use super::{gen_macro, LoanHistory, MacroRow, MacroScenario, MonthObs, PayMethod, SimConfig, TransitionParams};
use crate::calendar::CalMonth;
use crate::error::Result;
use crate::seed;

/// Plain logistic function. Saturates to exactly 0.0 / 1.0 for extreme
/// scores, so an intercept like -1e9 genuinely switches a transition off.
fn sigmoid(w: f64) -> f64 {
    if w >= 0.0 {
        1.0 / (1.0 + (-w).exp())
    } else {
        let e = w.exp();
        e / (1.0 + e)
    }
}

struct LoanTraits {
    pay_method: PayMethod,
    margin: f64,
    frailty: f64,
}

fn transition_prob(p: &TransitionParams, mac: &MacroRow, traits: &LoanTraits, prelim: f64, g0: u32) -> f64 {
    let w = p.intercept
        + p.repo_rate * (mac.repo_rate - REPO_BASE)
        + p.dti_level * (mac.dti_level - super::scenario::DTI_BASE)
        + p.real_income_growth * mac.real_income_growth
        + p.employment_growth * mac.employment_growth
        + p.prelim_perc * prelim
        + p.rate_margin * traits.margin
        + if traits.pay_method == PayMethod::Cash { p.pay_cash } else { 0.0 }
        + p.frailty * traits.frailty
        + p.g0_escalation * g0 as f64;
    sigmoid(w)
}

/// Scheduled outstanding balance of an annuity loan after `age` paid months.
fn scheduled_balance(principal: f64, monthly_rate: f64, term: u32, age: u32) -> f64 {
    if age >= term {
        return 0.0;
    }
    let n = term as f64;
    let a = age as f64;
    let g = 1.0 + monthly_rate;
    principal * (g.powf(n) - g.powf(a)) / (g.powf(n) - 1.0)
}

fn gen_loan(config: &SimConfig, scenario: &MacroScenario, index: u32) -> Option<LoanHistory> {
    let mut rng = seed::rng(seed::derive(seed::derive_str(config.seed, "portfolio"), index as u64));

    // Static traits.
    let pay_method = {
        let u: f64 = rng.gen();
        if u < 0.70 {
            PayMethod::DebitOrder
        } else if u < 0.90 {
            PayMethod::Cash
        } else {
            PayMethod::Payroll
        }
    };
    let margin = (0.5 + 0.8 * randn(&mut rng)).clamp(-1.0, 3.0);
    let frailty = randn(&mut rng);
    let principal = (13.3 + 0.5 * randn(&mut rng)).exp();
    let term = {
        let u: f64 = rng.gen();
        *[120u32, 180, 240, 300, 360]
            .iter()
            .zip([0.10f64, 0.25, 0.45, 0.60, 1.0])
            .find(|(_, cum)| u < *cum)
            .map(|(t, _)| t)
            .unwrap_or(&360)
    };

    // Originations spread from `lead` months before the window start up to a
    // year before it ends, so early window months already have a seasoned book.
    let lead = config.origination_lead_months as i32;
    let span = lead + (config.window.len() as i32 - 12).max(1);
    let origination = config.window.start - lead + (rng.gen::<f64>() * span as f64) as i32;

    let traits = LoanTraits { pay_method, margin, frailty };
    let monthly_rate = (REPO_BASE + 3.5 + margin) / 1200.0;
    let instalment = principal * monthly_rate / (1.0 - (1.0 + monthly_rate).powi(-(term as i32)));

    let mut g0: u32 = 0;
    let mut prelim = (rng.gen::<f64>().powi(2) * 0.6).clamp(0.0, 1.0);

    let mut months: Vec<u32> = Vec::new();
    let mut obs: Vec<MonthObs> = Vec::new();
    let mut start_month: Option<CalMonth> = None;

    let end_of_term = origination + (term as i32 - 1);
    let mut m = origination;
    loop {
        if m > end_of_term || m > config.window.end {
            break;
        }
        // Record the state at month `m` if it falls inside the window.
        if m >= config.window.start {
            let age = (m - origination) as u32;
            let balance = scheduled_balance(principal, monthly_rate, term, age) + g0 as f64 * instalment;
            if start_month.is_none() {
                start_month = Some(m);
            }
            months.push(g0);
            obs.push(MonthObs { balance_log: (balance + 1.0).ln(), prelim_perc: prelim });
        }

        // Evolve to month m+1. Months before the scenario's coverage use the
        // normal-regime base levels (the warm-up for seasoned loans).
        let mac = scenario.at(m).copied().unwrap_or_else(base_row);
        let p_up = transition_prob(&config.worsen, &mac, &traits, prelim, g0);
        if g0 >= 3 {
            let u: f64 = rng.gen();
            if u < config.cure_after_default_probability {
                g0 = 0; // cured: new performing spell
            } else if u < config.cure_after_default_probability + config.writeoff_probability {
                break; // written off
            } else if rng.gen::<f64>() < p_up && g0 < config.max_g0 {
                g0 += 1;
            }
        } else {
            if rng.gen::<f64>() < p_up {
                g0 += 1;
            } else if g0 > 0 {
                let p_down = transition_prob(&config.cure, &mac, &traits, prelim, g0);
                if rng.gen::<f64>() < p_down {
                    g0 -= 1;
                }
            }
            if rng.gen::<f64>() < config.settle_probability {
                break; // voluntary early settlement
            }
        }
        prelim = (prelim + 0.02 * randn(&mut rng)).clamp(0.0, 1.0);
        m = m + 1;
    }

    let start_month = start_month?;
    let history = LoanHistory {
        loan_id: format!("L{:06}", index + 1),
        origination_month: origination,
        term_months: term,
        start_month,
        g0: months,
        pay_method,
        interest_rate_margin: margin,
        monthly: obs,
    };
    history.validate();
    Some(history)
}

/// Generate the portfolio for `config` under `scenario`.
///
/// Loans that never enter the reporting window (settled or written off before
/// it opens) are dropped, so the result may hold fewer than `n_loans`
/// histories. Output order is by loan index and independent of parallelism.
pub fn gen_portfolio(config: &SimConfig, scenario: &MacroScenario) -> Vec<LoanHistory> {
    (0..config.n_loans)
        .into_par_iter()
        .map(|i| gen_loan(config, scenario, i))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// Convenience: scenario plus portfolio in one call.
pub fn gen_all(config: &SimConfig) -> Result<(MacroScenario, Vec<LoanHistory>)> {
    let scenario = gen_macro(config)?;
    let portfolio = gen_portfolio(config, &scenario);
    Ok((scenario, portfolio))
}
