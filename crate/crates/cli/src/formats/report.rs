//! Definition-report CSV — one row per definition, one column per report
//! field — and the human-readable comparison summary.

use sicr_core::error::{Error, Result};
use sicr_core::evalx::{AucEstimate, CrisisSummary, CutoffResult, DefinitionReport};
use sicr_core::event::SicrDefinition;

use super::{check_field, expect_header, fmt6, parse_real, parse_u32, parse_usize, split_fields};

const REPORT_HEADER: &str = "label,d,s,k,prevalence,\
auc_prob,auc_prob_ci_low,auc_prob_ci_high,auc_prob_replicates,auc_prob_gini,\
flexibility,instability,cutoff,youden_j,cost_ratio,sensitivity,specificity,\
auc_disc,auc_disc_ci_low,auc_disc_ci_high,auc_disc_replicates,auc_disc_gini,\
rate_earliest,rate_max,rate_post_crisis_mean,early_warning_degree,recovery_degree,\
mae_expected,mae_discrete";

const N_COLUMNS: usize = 29;

pub fn report_to_csv(reports: &[DefinitionReport]) -> String {
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    for r in reports {
        check_field(&r.label, "definition label");
        let cells: Vec<String> = vec![
            r.label.clone(),
            r.definition.d.to_string(),
            r.definition.s.to_string(),
            r.definition.k.to_string(),
            fmt6(r.prevalence),
            fmt6(r.auc_probabilistic.auc),
            fmt6(r.auc_probabilistic.ci_low),
            fmt6(r.auc_probabilistic.ci_high),
            r.auc_probabilistic.replicates.to_string(),
            fmt6(r.auc_probabilistic.gini),
            fmt6(r.flexibility),
            fmt6(r.instability),
            fmt6(r.cutoff.cutoff),
            fmt6(r.cutoff.j_a),
            fmt6(r.cutoff.cost_ratio),
            fmt6(r.cutoff.sensitivity),
            fmt6(r.cutoff.specificity),
            fmt6(r.auc_discrete.auc),
            fmt6(r.auc_discrete.ci_low),
            fmt6(r.auc_discrete.ci_high),
            r.auc_discrete.replicates.to_string(),
            fmt6(r.auc_discrete.gini),
            fmt6(r.crisis.earliest),
            fmt6(r.crisis.max),
            fmt6(r.crisis.post_crisis_mean),
            fmt6(r.crisis.early_warning_degree),
            fmt6(r.crisis.recovery_degree),
            fmt6(r.mae_expected),
            fmt6(r.mae_discrete),
        ];
        debug_assert_eq!(cells.len(), N_COLUMNS);
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Rebuild the report rows. The cut-off's fitting prevalence equals the
/// report's prevalence column (same training sample by construction), so
/// the one column fills both fields.
pub fn report_from_csv(text: &str) -> Result<Vec<DefinitionReport>> {
    let mut lines = text.lines();
    expect_header(lines.next(), REPORT_HEADER, "report")?;

    let mut reports = Vec::new();
    for line in lines {
        let what = format!("report row {}", reports.len() + 1);
        let f = split_fields(line, N_COLUMNS, &what)?;
        let real = |i: usize| parse_real(f[i], &what);
        let (d, s, k) =
            (parse_u32(f[1], &what)?, parse_u32(f[2], &what)?, parse_u32(f[3], &what)?);
        if d == 0 || s == 0 {
            return Err(Error::InvalidParameter {
                what: format!("{what}: definition ({d},{s},{k}) needs d >= 1 and s >= 1"),
            });
        }
        let prevalence = real(4)?;
        reports.push(DefinitionReport {
            definition: SicrDefinition::new(d, s, k),
            label: f[0].to_string(),
            prevalence,
            auc_probabilistic: AucEstimate {
                auc: real(5)?,
                ci_low: real(6)?,
                ci_high: real(7)?,
                replicates: parse_usize(f[8], &what)?,
                gini: real(9)?,
            },
            flexibility: real(10)?,
            instability: real(11)?,
            cutoff: CutoffResult {
                cutoff: real(12)?,
                j_a: real(13)?,
                cost_ratio: real(14)?,
                prevalence,
                sensitivity: real(15)?,
                specificity: real(16)?,
            },
            auc_discrete: AucEstimate {
                auc: real(17)?,
                ci_low: real(18)?,
                ci_high: real(19)?,
                replicates: parse_usize(f[20], &what)?,
                gini: real(21)?,
            },
            crisis: CrisisSummary {
                earliest: real(22)?,
                max: real(23)?,
                post_crisis_mean: real(24)?,
                early_warning_degree: real(25)?,
                recovery_degree: real(26)?,
            },
            mae_expected: real(27)?,
            mae_discrete: real(28)?,
        });
    }
    Ok(reports)
}

/// Fixed-width comparison table of the headline metrics, one definition per
/// line, for reading at the end of a grid run.
pub fn summary_text(reports: &[DefinitionReport]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<9} {:>10} {:>8} {:>23} {:>8} {:>11} {:>11} {:>10} {:>9}\n",
        "defn", "prevalence", "auc", "auc 95% ci", "auc_disc", "flexibility", "instability",
        "early_warn", "recovery"
    ));
    for r in reports {
        out.push_str(&format!(
            "{:<9} {:>10} {:>8} {:>23} {:>8} {:>11} {:>11} {:>10} {:>9}\n",
            r.label,
            fmt6(r.prevalence),
            format!("{:.4}", r.auc_probabilistic.auc),
            format!(
                "[{:.4}, {:.4}]",
                r.auc_probabilistic.ci_low, r.auc_probabilistic.ci_high
            ),
            format!("{:.4}", r.auc_discrete.auc),
            fmt6(r.flexibility),
            fmt6(r.instability),
            fmt6(r.crisis.early_warning_degree),
            fmt6(r.crisis.recovery_degree),
        ));
    }
    out
}
