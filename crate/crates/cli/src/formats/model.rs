//! Fitted-model file: flat `name=value` text at full float precision.
//!
//! ```text
//! model: ridge-logit
//! schema_hash=0x9f0e…
//! feature=g0_Delinq|numeric|delinquency
//! …
//! reference=ArrearsTrend_3mo:flat
//! reference=PayMethod:debit_order
//! converged=true
//! iterations=13
//! log_likelihood=-4821.51…
//! intercept=-5.01…
//! intercept_se=0.062…
//! coef:g0_Delinq=1.21…
//! se:g0_Delinq=0.014…
//! coef:ArrearsTrend_3mo=up=0.35…
//! …
//! ```
//!
//! The schema is embedded in full (`feature=` lines) so a model file is
//! self-contained: loading rebuilds the design from the schema plus the
//! `reference=` lines and verifies the declared hash. Dummy-column names
//! contain `=`, so values are read after the *last* `=` of a line.

use sicr_core::dataset::{FeatureKind, FeatureSchema};
use sicr_core::error::{Error, Result};
use sicr_core::logit::{Design, LogitModel};

use super::{feature_decl, fmt_full, parse_feature_decl, parse_real, parse_usize};

const FORMAT_LINE: &str = "model: ridge-logit";

pub fn model_to_text(model: &LogitModel, schema: &FeatureSchema) -> Result<String> {
    if schema.hash() != model.schema_hash() {
        return Err(Error::SchemaMismatch { model: model.schema_hash(), panel: schema.hash() });
    }
    let mut out = String::from(FORMAT_LINE);
    out.push('\n');
    out.push_str(&format!("schema_hash={:#018x}\n", model.schema_hash()));
    for spec in schema.features() {
        out.push_str(&format!("feature={}\n", feature_decl(spec)));
    }
    for (fi, reference) in model.design.reference_levels.iter().enumerate() {
        if let Some(level) = reference {
            out.push_str(&format!(
                "reference={}:{}\n",
                schema.feature(fi).name,
                schema.level_name(fi, *level)
            ));
        }
    }
    out.push_str(&format!("converged={}\n", model.converged));
    out.push_str(&format!("iterations={}\n", model.iterations));
    if let Some(warning) = &model.warning {
        assert!(!warning.contains('\n'), "model warning contains a newline");
        out.push_str(&format!("warning={warning}\n"));
    }
    out.push_str(&format!("log_likelihood={}\n", fmt_full(model.log_likelihood)));
    out.push_str(&format!("intercept={}\n", fmt_full(model.intercept)));
    out.push_str(&format!("intercept_se={}\n", fmt_full(model.intercept_se)));
    for (column, (coef, se)) in model
        .design
        .columns
        .iter()
        .zip(model.coefficients.iter().zip(&model.standard_errors))
    {
        out.push_str(&format!("coef:{}={}\n", column.name, fmt_full(*coef)));
        out.push_str(&format!("se:{}={}\n", column.name, fmt_full(*se)));
    }
    Ok(out)
}

pub fn model_from_text(text: &str) -> Result<LogitModel> {
    let bad = |what: String| Error::InvalidParameter { what: format!("model file: {what}") };
    let mut lines = text.lines();
    match lines.next() {
        Some(FORMAT_LINE) => {}
        other => return Err(bad(format!("first line is {other:?}, expected `{FORMAT_LINE}`"))),
    }

    // name=value pairs in order; names of coefficient lines embed `=`.
    let mut declared_hash: Option<u64> = None;
    let mut specs = Vec::new();
    let mut references: Vec<(String, String)> = Vec::new();
    let mut converged: Option<bool> = None;
    let mut iterations: Option<usize> = None;
    let mut warning: Option<String> = None;
    let mut log_likelihood: Option<f64> = None;
    let mut intercept: Option<f64> = None;
    let mut intercept_se: Option<f64> = None;
    let mut coefficients: Vec<(String, f64)> = Vec::new();
    let mut standard_errors: Vec<(String, f64)> = Vec::new();

    for line in lines {
        if let Some(rest) = line.strip_prefix("coef:") {
            let (name, value) =
                rest.rsplit_once('=').ok_or_else(|| bad(format!("bad line `{line}`")))?;
            coefficients.push((name.to_string(), parse_real(value, "coefficient")?));
            continue;
        }
        if let Some(rest) = line.strip_prefix("se:") {
            let (name, value) =
                rest.rsplit_once('=').ok_or_else(|| bad(format!("bad line `{line}`")))?;
            standard_errors.push((name.to_string(), parse_real(value, "standard error")?));
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| bad(format!("bad line `{line}`")))?;
        match key {
            "schema_hash" => {
                let digits = value
                    .strip_prefix("0x")
                    .ok_or_else(|| bad(format!("schema_hash `{value}` is not hexadecimal")))?;
                declared_hash = Some(
                    u64::from_str_radix(digits, 16)
                        .map_err(|_| bad(format!("schema_hash `{value}` is not hexadecimal")))?,
                );
            }
            "feature" => specs.push(parse_feature_decl(value)?),
            "reference" => {
                let (feature, level) = value
                    .split_once(':')
                    .ok_or_else(|| bad(format!("reference `{value}` is not feature:level")))?;
                references.push((feature.to_string(), level.to_string()));
            }
            "converged" => {
                converged = Some(match value {
                    "true" => true,
                    "false" => false,
                    _ => return Err(bad(format!("converged must be true/false, got `{value}`"))),
                });
            }
            "iterations" => iterations = Some(parse_usize(value, "iterations")?),
            "warning" => warning = Some(value.to_string()),
            "log_likelihood" => log_likelihood = Some(parse_real(value, "log_likelihood")?),
            "intercept" => intercept = Some(parse_real(value, "intercept")?),
            "intercept_se" => intercept_se = Some(parse_real(value, "intercept_se")?),
            _ => return Err(bad(format!("unknown key `{key}`"))),
        }
    }

    let declared_hash = declared_hash.ok_or_else(|| bad("missing schema_hash".into()))?;
    if specs.is_empty() {
        return Err(bad("no feature lines".into()));
    }
    let schema = FeatureSchema::new(specs);
    if schema.hash() != declared_hash {
        return Err(bad(format!(
            "feature lines hash to {:#018x}, file declares {:#018x}",
            schema.hash(),
            declared_hash
        )));
    }

    // Reference levels by feature, then the design. Numeric features stay
    // `None`; every categorical feature must be filled by a `reference=`
    // line, checked after the fill loop.
    let mut reference_levels: Vec<Option<usize>> = vec![None; schema.len()];
    for (feature, level) in &references {
        let fi = schema
            .index_of(feature)
            .ok_or_else(|| bad(format!("reference for unknown feature `{feature}`")))?;
        let FeatureKind::Categorical(levels) = &schema.feature(fi).kind else {
            return Err(bad(format!("reference for numeric feature `{feature}`")));
        };
        let li = levels
            .iter()
            .position(|l| l == level)
            .ok_or_else(|| bad(format!("`{level}` is not a level of {feature}")))?;
        reference_levels[fi] = Some(li);
    }
    for (fi, spec) in schema.features().iter().enumerate() {
        if matches!(spec.kind, FeatureKind::Categorical(_)) && reference_levels[fi].is_none() {
            return Err(bad(format!("missing reference level for {}", spec.name)));
        }
    }
    let design = Design::with_reference_levels(&schema, reference_levels)?;

    // Coefficients and standard errors must list every design column once,
    // in design order.
    let column_names = design.column_names();
    for (rows, what) in [(&coefficients, "coef"), (&standard_errors, "se")] {
        let got: Vec<&str> = rows.iter().map(|(n, _)| n.as_str()).collect();
        if got != column_names {
            return Err(bad(format!(
                "{what} lines list columns {got:?}, design has {column_names:?}"
            )));
        }
    }

    Ok(LogitModel {
        design,
        intercept: intercept.ok_or_else(|| bad("missing intercept".into()))?,
        coefficients: coefficients.into_iter().map(|(_, v)| v).collect(),
        intercept_se: intercept_se.ok_or_else(|| bad("missing intercept_se".into()))?,
        standard_errors: standard_errors.into_iter().map(|(_, v)| v).collect(),
        log_likelihood: log_likelihood.ok_or_else(|| bad("missing log_likelihood".into()))?,
        iterations: iterations.ok_or_else(|| bad("missing iterations".into()))?,
        converged: converged.ok_or_else(|| bad("missing converged".into()))?,
        warning,
    })
}
