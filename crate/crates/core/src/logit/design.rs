//! Design-matrix layout: dummy coding for categoricals and the mapping
//! between schema features and model columns.

use crate::dataset::{FeatureKind, FeatureSchema, LabeledPanel};
use crate::error::{Error, Result};
use crate::Real;

/// What one design column encodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnKind {
    /// A numeric feature taken as-is.
    Numeric { feature: usize },
    /// Indicator for one non-reference level of a categorical feature.
    Dummy { feature: usize, level: usize },
}

/// One column of the design matrix (the intercept is implicit and not
/// listed here).
#[derive(Debug, Clone, PartialEq)]
pub struct DesignColumn {
    /// Display name: the feature name, or `"Feature=level"` for a dummy.
    pub name: String,
    pub kind: ColumnKind,
}

/// How panel rows map onto model columns. Categorical features are
/// dummy-coded against a reference level, so the column count generally
/// exceeds the feature count by (levels − 1) per categorical.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    /// Hash of the schema the design was built from; used to refuse
    /// scoring panels built under a different schema.
    pub schema_hash: u64,
    /// Feature count of that schema (row value vectors must match it).
    pub n_features: usize,
    /// Per schema feature: `Some(level)` for categoricals, `None` for
    /// numerics.
    pub reference_levels: Vec<Option<usize>>,
    /// Per schema feature: level count for categoricals, 0 for numerics.
    pub level_counts: Vec<usize>,
    pub columns: Vec<DesignColumn>,
}

fn level_index(value: Real, n_levels: usize, feature: &str) -> Result<usize> {
    let rounded = value.round();
    if !value.is_finite() || (rounded - value).abs() > 1e-9 || rounded < 0.0 {
        return Err(Error::InvalidParameter {
            what: format!("{feature}: {value} is not a categorical level index"),
        });
    }
    let idx = rounded as usize;
    if idx >= n_levels {
        return Err(Error::InvalidParameter {
            what: format!("{feature}: level index {idx} out of range (< {n_levels})"),
        });
    }
    Ok(idx)
}

impl Design {
    /// Lay out columns for a schema with the given reference levels.
    pub fn with_reference_levels(
        schema: &FeatureSchema,
        reference_levels: Vec<Option<usize>>,
    ) -> Result<Design> {
        if reference_levels.len() != schema.len() {
            return Err(Error::InvalidParameter {
                what: format!(
                    "reference levels for {} features supplied, schema has {}",
                    reference_levels.len(),
                    schema.len()
                ),
            });
        }
        let mut columns = Vec::new();
        let mut level_counts = Vec::with_capacity(schema.len());
        for (fi, spec) in schema.features().iter().enumerate() {
            match (&spec.kind, reference_levels[fi]) {
                (FeatureKind::Numeric, None) => {
                    level_counts.push(0);
                    columns.push(DesignColumn {
                        name: spec.name.clone(),
                        kind: ColumnKind::Numeric { feature: fi },
                    });
                }
                (FeatureKind::Categorical(levels), Some(reference)) => {
                    level_counts.push(levels.len());
                    if reference >= levels.len() {
                        return Err(Error::InvalidParameter {
                            what: format!(
                                "{}: reference level {reference} out of range",
                                spec.name
                            ),
                        });
                    }
                    for (li, level) in levels.iter().enumerate() {
                        if li != reference {
                            columns.push(DesignColumn {
                                name: format!("{}={}", spec.name, level),
                                kind: ColumnKind::Dummy { feature: fi, level: li },
                            });
                        }
                    }
                }
                _ => {
                    return Err(Error::InvalidParameter {
                        what: format!(
                            "{}: reference level must be set for categorical features only",
                            spec.name
                        ),
                    });
                }
            }
        }
        Ok(Design {
            schema_hash: schema.hash(),
            n_features: schema.len(),
            reference_levels,
            level_counts,
            columns,
        })
    }

    /// Build the design for a fitting panel: validates every value and picks
    /// each categorical's reference level as its most frequent level in the
    /// panel (ties go to the lowest level index).
    pub fn from_panel(panel: &LabeledPanel) -> Result<Design> {
        if panel.rows.is_empty() {
            return Err(Error::EmptyPanel { what: "design panel".into() });
        }
        let schema = &panel.schema;
        for row in &panel.rows {
            if row.values.len() != schema.len() {
                return Err(Error::InvalidParameter {
                    what: format!(
                        "row for {} holds {} values, schema has {} features",
                        row.loan_id,
                        row.values.len(),
                        schema.len()
                    ),
                });
            }
        }
        let mut reference_levels = Vec::with_capacity(schema.len());
        for (fi, spec) in schema.features().iter().enumerate() {
            match &spec.kind {
                FeatureKind::Numeric => {
                    if let Some(row) = panel.rows.iter().find(|r| !r.values[fi].is_finite()) {
                        return Err(Error::NonFiniteInput {
                            what: format!("{} for {}", spec.name, row.loan_id),
                        });
                    }
                    reference_levels.push(None);
                }
                FeatureKind::Categorical(levels) => {
                    let mut counts = vec![0usize; levels.len()];
                    for row in &panel.rows {
                        counts[level_index(row.values[fi], levels.len(), &spec.name)?] += 1;
                    }
                    let mut best = 0;
                    for (li, &count) in counts.iter().enumerate() {
                        if count > counts[best] {
                            best = li;
                        }
                    }
                    reference_levels.push(Some(best));
                }
            }
        }
        Design::with_reference_levels(schema, reference_levels)
    }

    /// Expand one row of schema-ordered values into design-column values
    /// (no intercept entry).
    pub fn expand_row(&self, values: &[Real]) -> Result<Vec<Real>> {
        if values.len() != self.n_features {
            return Err(Error::InvalidParameter {
                what: format!(
                    "feature vector holds {} values, design expects {}",
                    values.len(),
                    self.n_features
                ),
            });
        }
        let mut out = Vec::with_capacity(self.columns.len());
        for col in &self.columns {
            match col.kind {
                ColumnKind::Numeric { feature } => {
                    let v = values[feature];
                    if !v.is_finite() {
                        return Err(Error::NonFiniteInput { what: col.name.clone() });
                    }
                    out.push(v);
                }
                ColumnKind::Dummy { feature, level } => {
                    let li = level_index(values[feature], self.level_counts[feature], &col.name)?;
                    out.push(if li == level { 1.0 } else { 0.0 });
                }
            }
        }
        Ok(out)
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }
}
