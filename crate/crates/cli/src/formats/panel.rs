//! Labelled panel CSV: a commented header block carrying the definition and
//! the feature schema, then one row per labelled loan-month.
//!
//! ```text
//! # definition: 1,1,3
//! # label: 1a(i)
//! # schema_hash: 0x9f0e…
//! # feature: g0_Delinq|numeric|delinquency
//! # feature: PayMethod|categorical:debit_order,cash,payroll|behavioural
//! loan_id,month,y,stage1,g0_Delinq,…,PayMethod,…
//! L000001,2005-03,0,1,2,…,debit_order,…
//! ```
//!
//! Categorical cells hold the level name, numeric cells the full-precision
//! value; `y`/`stage1` are 0/1 flags. The schema hash in the header guards
//! against editing the feature block without rebuilding the rows.

use sicr_core::calendar::CalMonth;
use sicr_core::dataset::{FeatureKind, FeatureSchema, LabeledPanel, PanelRow};
use sicr_core::error::{Error, Result};
use sicr_core::event::SicrDefinition;
use sicr_core::Real;

use super::{check_field, expect_header, feature_decl, fmt_flag, fmt_full, parse_feature_decl, parse_flag, parse_real, parse_u32, split_fields};

pub fn panel_to_csv(panel: &LabeledPanel) -> String {
    let schema = &panel.schema;
    let mut out = String::new();
    let d = panel.definition;
    out.push_str(&format!("# definition: {},{},{}\n", d.d, d.s, d.k));
    check_field(&panel.definition_label, "definition label");
    out.push_str(&format!("# label: {}\n", panel.definition_label));
    out.push_str(&format!("# schema_hash: {:#018x}\n", schema.hash()));
    for spec in schema.features() {
        out.push_str(&format!("# feature: {}\n", feature_decl(spec)));
    }

    out.push_str("loan_id,month,y,stage1");
    for spec in schema.features() {
        out.push(',');
        out.push_str(&spec.name);
    }
    out.push('\n');

    for row in &panel.rows {
        check_field(&row.loan_id, "loan_id");
        out.push_str(&format!(
            "{},{},{},{}",
            row.loan_id,
            row.month,
            fmt_flag(row.y),
            fmt_flag(row.stage1)
        ));
        for (j, &v) in row.values.iter().enumerate() {
            out.push(',');
            match &schema.feature(j).kind {
                FeatureKind::Numeric => out.push_str(&fmt_full(v)),
                FeatureKind::Categorical(_) => out.push_str(schema.level_name(j, v as usize)),
            }
        }
        out.push('\n');
    }
    out
}

pub fn panel_from_csv(text: &str) -> Result<LabeledPanel> {
    let bad = |what: String| Error::InvalidParameter { what: format!("panel: {what}") };
    let mut lines = text.lines().peekable();

    // Commented header block.
    let mut definition: Option<SicrDefinition> = None;
    let mut label: Option<String> = None;
    let mut declared_hash: Option<u64> = None;
    let mut specs = Vec::new();
    while let Some(line) = lines.peek() {
        let Some(comment) = line.strip_prefix("# ") else { break };
        if let Some(v) = comment.strip_prefix("definition: ") {
            let f = split_fields(v, 3, "panel definition")?;
            let (d, s, k) =
                (parse_u32(f[0], "d")?, parse_u32(f[1], "s")?, parse_u32(f[2], "k")?);
            if d == 0 || s == 0 {
                return Err(bad(format!("definition ({d},{s},{k}) needs d >= 1 and s >= 1")));
            }
            definition = Some(SicrDefinition::new(d, s, k));
        } else if let Some(v) = comment.strip_prefix("label: ") {
            label = Some(v.to_string());
        } else if let Some(v) = comment.strip_prefix("schema_hash: ") {
            let digits = v
                .strip_prefix("0x")
                .ok_or_else(|| bad(format!("schema_hash `{v}` is not hexadecimal")))?;
            declared_hash = Some(
                u64::from_str_radix(digits, 16)
                    .map_err(|_| bad(format!("schema_hash `{v}` is not hexadecimal")))?,
            );
        } else if let Some(v) = comment.strip_prefix("feature: ") {
            specs.push(parse_feature_decl(v)?);
        } else {
            return Err(bad(format!("unknown header line `{line}`")));
        }
        lines.next();
    }
    let definition = definition.ok_or_else(|| bad("missing `# definition:` line".into()))?;
    let label = label.ok_or_else(|| bad("missing `# label:` line".into()))?;
    let declared_hash = declared_hash.ok_or_else(|| bad("missing `# schema_hash:` line".into()))?;
    if specs.is_empty() {
        return Err(bad("no `# feature:` lines".into()));
    }
    let schema = FeatureSchema::new(specs);
    if schema.hash() != declared_hash {
        return Err(bad(format!(
            "feature block hashes to {:#018x}, header declares {:#018x}",
            schema.hash(),
            declared_hash
        )));
    }

    // Column header, then rows.
    let mut want = String::from("loan_id,month,y,stage1");
    for spec in schema.features() {
        want.push(',');
        want.push_str(&spec.name);
    }
    expect_header(lines.next(), &want, "panel")?;

    let n_fields = 4 + schema.len();
    let mut rows = Vec::new();
    for line in lines {
        let what = format!("panel row {}", rows.len() + 1);
        let f = split_fields(line, n_fields, &what)?;
        let month: CalMonth = f[1].parse()?;
        let mut values = Vec::with_capacity(schema.len());
        for (j, cell) in f[4..].iter().enumerate() {
            let spec = schema.feature(j);
            let v = match &spec.kind {
                FeatureKind::Numeric => parse_real(cell, &format!("{what}, {}", spec.name))?,
                FeatureKind::Categorical(levels) => {
                    let idx = levels.iter().position(|l| l == cell).ok_or_else(|| {
                        bad(format!("{what}: `{cell}` is not a level of {}", spec.name))
                    })?;
                    idx as Real
                }
            };
            values.push(v);
        }
        rows.push(PanelRow {
            loan_id: f[0].to_string(),
            month,
            y: parse_flag(f[2], &what)?,
            stage1: parse_flag(f[3], &what)?,
            values,
        });
    }

    Ok(LabeledPanel { definition, definition_label: label, schema, rows })
}
