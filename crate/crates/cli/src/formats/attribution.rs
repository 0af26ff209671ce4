//! Per-row attribution CSV (one column per schema feature) and the ranked
//! feature-importance CSV.

use std::str::FromStr;

use sicr_core::calendar::CalMonth;
use sicr_core::dataset::FeatureSchema;
use sicr_core::error::{Error, Result};
use sicr_core::shapley::{AttributionRow, ImportanceRanking, RankedFeature};

use super::{check_field, expect_header, fmt6, parse_real, parse_usize, split_fields};

pub fn attribution_to_csv(schema: &FeatureSchema, rows: &[AttributionRow]) -> String {
    let names: Vec<&str> = schema.features().iter().map(|f| f.name.as_str()).collect();
    for n in &names {
        check_field(n, "feature name");
    }
    let mut out = format!("loan_id,month,{}\n", names.join(","));
    for r in rows {
        check_field(&r.loan_id, "loan id");
        assert_eq!(
            r.values.len(),
            names.len(),
            "attribution row for {} has {} values, schema has {} features",
            r.loan_id,
            r.values.len(),
            names.len()
        );
        out.push_str(&format!("{},{}", r.loan_id, r.month));
        for v in &r.values {
            out.push(',');
            out.push_str(&fmt6(*v));
        }
        out.push('\n');
    }
    out
}

/// Rebuild the attribution rows, returning the feature names the file was
/// written against alongside them.
pub fn attribution_from_csv(text: &str) -> Result<(Vec<String>, Vec<AttributionRow>)> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    let mut cols = header.split(',');
    if cols.next() != Some("loan_id") || cols.next() != Some("month") {
        return Err(Error::InvalidParameter {
            what: format!("attribution header must start `loan_id,month,`, got `{header}`"),
        });
    }
    let names: Vec<String> = cols.map(str::to_string).collect();
    if names.is_empty() || names.iter().any(String::is_empty) {
        return Err(Error::InvalidParameter {
            what: "attribution header needs at least one non-empty feature column".to_string(),
        });
    }

    let mut rows = Vec::new();
    for line in lines {
        let what = format!("attribution row {}", rows.len() + 1);
        let f = split_fields(line, names.len() + 2, &what)?;
        let values: Vec<_> =
            f[2..].iter().map(|v| parse_real(v, &what)).collect::<Result<_>>()?;
        rows.push(AttributionRow {
            loan_id: f[0].to_string(),
            month: CalMonth::from_str(f[1])?,
            values,
        });
    }
    Ok((names, rows))
}

const RANKING_HEADER: &str = "feature,mean_abs_attribution,rank";

pub fn ranking_to_csv(ranking: &ImportanceRanking) -> String {
    let mut out = format!("# rows: {}\n{RANKING_HEADER}\n", ranking.n_rows);
    for (i, e) in ranking.entries.iter().enumerate() {
        check_field(&e.name, "feature name");
        out.push_str(&format!("{},{},{}\n", e.name, fmt6(e.mean_abs), i + 1));
    }
    out
}

pub fn ranking_from_csv(text: &str) -> Result<ImportanceRanking> {
    let mut lines = text.lines();
    let n_rows = lines
        .next()
        .and_then(|l| l.strip_prefix("# rows: "))
        .ok_or_else(|| Error::InvalidParameter {
            what: "ranking file must open with a `# rows: N` line".to_string(),
        })
        .and_then(|n| parse_usize(n, "ranking row count"))?;
    expect_header(lines.next(), RANKING_HEADER, "ranking")?;

    let mut entries = Vec::new();
    for (i, line) in lines.enumerate() {
        let what = format!("ranking row {}", i + 1);
        let f = split_fields(line, 3, &what)?;
        let rank = parse_usize(f[2], &what)?;
        if rank != i + 1 {
            return Err(Error::InvalidParameter {
                what: format!("{what}: rank {rank} out of sequence, expected {}", i + 1),
            });
        }
        entries.push(RankedFeature { name: f[0].to_string(), mean_abs: parse_real(f[1], &what)? });
    }
    Ok(ImportanceRanking { entries, n_rows })
}
