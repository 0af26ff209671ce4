//! Every file format the tool reads or writes, with a parser for each
//! emitted format so artifacts round-trip.
//!
//! Two serialisation registers are used deliberately:
//!
//! - **data artifacts** (portfolio, macro scenario, panel, model) carry
//!   full-precision floats — Rust's shortest-round-trip display — because
//!   downstream stages recompute from them and must see the exact values;
//! - **result artifacts** (report, rate series, attributions, rankings,
//!   plot data) carry rates and metrics as decimal fractions with six
//!   decimal places, which is stable under parse-and-rewrite.
//!
//! Months are ISO `YYYY-MM` everywhere. No field in any format contains a
//! comma, so the CSV dialect is plain `split(',')` with no quoting; writers
//! enforce this. Every parser validates headers and field counts and fails
//! with a diagnostic naming the offending line.

mod attribution;
mod model;
mod panel;
mod portfolio;
mod report;
mod series;

pub use attribution::{attribution_from_csv, attribution_to_csv, ranking_from_csv, ranking_to_csv};
pub use model::{model_from_text, model_to_text};
pub use panel::{panel_from_csv, panel_to_csv};
pub use portfolio::{portfolio_from_csv, portfolio_to_csv, scenario_from_csv, scenario_to_csv};
pub use report::{report_from_csv, report_to_csv, summary_text};
pub use series::{rate_chart_svg, rates_from_csv, rates_to_csv, tidy_from_csv, tidy_to_csv, TIDY_METRICS_HEADER, TIDY_RATES_HEADER};

use sicr_core::dataset::{FeatureKind, FeatureSpec, Theme};
use sicr_core::error::{Error, Result};
use sicr_core::Real;

// ---------------------------------------------------------------- filenames

pub const PORTFOLIO_FILE: &str = "portfolio.csv";
pub const MACRO_FILE: &str = "macro.csv";
pub const REPORT_FILE: &str = "report.csv";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const PLOT_METRICS_FILE: &str = "plot_metrics.csv";

/// Filesystem-safe form of a definition label: `1a(i)` → `1a_i`.
pub fn slug(label: &str) -> String {
    let mut out = String::with_capacity(label.len());
    for c in label.chars() {
        match c {
            '(' => out.push('_'),
            c if c.is_ascii_alphanumeric() || c == '_' => out.push(c),
            _ => {}
        }
    }
    out
}

pub fn panel_file(label: &str) -> String {
    format!("panel_{}.csv", slug(label))
}

pub fn train_file(label: &str) -> String {
    format!("train_{}.csv", slug(label))
}

pub fn valid_file(label: &str) -> String {
    format!("valid_{}.csv", slug(label))
}

pub fn model_file(label: &str) -> String {
    format!("model_{}.txt", slug(label))
}

pub fn rates_file(label: &str) -> String {
    format!("rates_{}.csv", slug(label))
}

pub fn attribution_file(label: &str) -> String {
    format!("attribution_{}.csv", slug(label))
}

pub fn ranking_file(label: &str) -> String {
    format!("ranking_{}.csv", slug(label))
}

pub fn plot_rates_file(label: &str) -> String {
    format!("plot_rates_{}.csv", slug(label))
}

pub fn plot_rates_svg(label: &str) -> String {
    format!("plot_rates_{}.svg", slug(label))
}

// ------------------------------------------------------------- value syntax

/// Full-precision float: the shortest decimal that parses back exactly.
pub(crate) fn fmt_full(x: Real) -> String {
    format!("{x}")
}

/// Six-decimal fraction for rates and metrics.
pub(crate) fn fmt6(x: Real) -> String {
    format!("{x:.6}")
}

pub(crate) fn parse_real(s: &str, what: &str) -> Result<Real> {
    s.parse().map_err(|_| Error::InvalidParameter { what: format!("{what}: bad number `{s}`") })
}

pub(crate) fn parse_usize(s: &str, what: &str) -> Result<usize> {
    s.parse().map_err(|_| Error::InvalidParameter { what: format!("{what}: bad count `{s}`") })
}

pub(crate) fn parse_u32(s: &str, what: &str) -> Result<u32> {
    s.parse().map_err(|_| Error::InvalidParameter { what: format!("{what}: bad integer `{s}`") })
}

/// `0`/`1` flags in data rows.
pub(crate) fn parse_flag(s: &str, what: &str) -> Result<bool> {
    match s {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(Error::InvalidParameter { what: format!("{what}: flag must be 0 or 1, got `{s}`") }),
    }
}

pub(crate) fn fmt_flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

/// Split a CSV line into exactly `n` fields.
pub(crate) fn split_fields<'a>(line: &'a str, n: usize, what: &str) -> Result<Vec<&'a str>> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != n {
        return Err(Error::InvalidParameter {
            what: format!("{what}: expected {n} fields, got {} in `{line}`", fields.len()),
        });
    }
    Ok(fields)
}

pub(crate) fn expect_header(line: Option<&str>, want: &str, what: &str) -> Result<()> {
    match line {
        Some(got) if got == want => Ok(()),
        Some(got) => Err(Error::InvalidParameter {
            what: format!("{what}: header is `{got}`, expected `{want}`"),
        }),
        None => Err(Error::InvalidParameter { what: format!("{what}: empty file") }),
    }
}

/// Writers refuse to emit a field that would corrupt the comma-separated
/// layout; with the fixed schema and generated identifiers this never fires
/// on pipeline output, only on hand-built inputs.
pub(crate) fn check_field(s: &str, what: &str) {
    assert!(
        !s.contains(',') && !s.contains('\n') && !s.contains('|'),
        "{what}: `{s}` contains a delimiter"
    );
}

// ------------------------------------------------------- schema declarations

/// One feature as a declaration line: `name|kind|theme`, where kind is
/// `numeric` or `categorical:level,level,…`. Shared by the panel header
/// block and the model file.
pub(crate) fn feature_decl(spec: &FeatureSpec) -> String {
    check_field(&spec.name, "feature name");
    let kind = match &spec.kind {
        FeatureKind::Numeric => "numeric".to_string(),
        FeatureKind::Categorical(levels) => {
            for level in levels {
                check_field(level, "categorical level");
            }
            format!("categorical:{}", levels.join(","))
        }
    };
    format!("{}|{}|{}", spec.name, kind, spec.theme.as_str())
}

pub(crate) fn parse_feature_decl(s: &str) -> Result<FeatureSpec> {
    let bad = |why: &str| Error::InvalidParameter { what: format!("feature `{s}`: {why}") };
    let mut parts = s.split('|');
    let (name, kind, theme) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
        (Some(n), Some(k), Some(t), None) => (n, k, t),
        _ => return Err(bad("expected name|kind|theme")),
    };
    if name.is_empty() {
        return Err(bad("empty name"));
    }
    let kind = if kind == "numeric" {
        FeatureKind::Numeric
    } else if let Some(levels) = kind.strip_prefix("categorical:") {
        let levels: Vec<String> = levels.split(',').map(str::to_string).collect();
        if levels.iter().any(String::is_empty) {
            return Err(bad("empty categorical level"));
        }
        FeatureKind::Categorical(levels)
    } else {
        return Err(bad("kind must be numeric or categorical:…"));
    };
    let theme = Theme::parse(theme).ok_or_else(|| bad("unknown theme"))?;
    Ok(FeatureSpec { name: name.to_string(), kind, theme })
}
