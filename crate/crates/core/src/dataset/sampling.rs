//! Stratified subsampling and train/validation splitting.
//!
//! Both operations stratify on (month, outcome) so that samples preserve the
//! monthly event profile of the population. Rows are selected per stratum
//! with a single global sampling fraction and largest-remainder rounding,
//! then re-emitted in their original panel order. Everything is driven by
//! derived sub-seeds, so results are reproducible and independent of thread
//! count (selection is single-threaded by design).

use std::collections::BTreeMap;

use rand::seq::SliceRandom;

use super::LabeledPanel;
use crate::calendar::CalMonth;
use crate::error::{Error, Result};
use crate::seed::{derive, fnv1a64, rng};

/// Granularity of the train/validation split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitMode {
    /// Stratified split of individual rows (the default).
    Observation,
    /// Whole loans assigned to one side or the other; avoids leakage of a
    /// loan's own history across the split at the cost of coarser balance.
    Account,
}

impl SplitMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SplitMode::Observation => "observation",
            SplitMode::Account => "account",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "observation" => Some(SplitMode::Observation),
            "account" => Some(SplitMode::Account),
            _ => None,
        }
    }
}

/// Row indices per (month, outcome) stratum, in panel order.
fn strata(panel: &LabeledPanel) -> BTreeMap<(CalMonth, bool), Vec<usize>> {
    let mut map: BTreeMap<(CalMonth, bool), Vec<usize>> = BTreeMap::new();
    for (i, row) in panel.rows.iter().enumerate() {
        map.entry((row.month, row.y)).or_default().push(i);
    }
    map
}

/// Proportional allocation of `target` across strata of the given sizes,
/// using largest-remainder rounding. Ties break in stratum order, and a
/// stratum is never allocated more rows than it holds.
fn allocate(sizes: &[usize], target: usize) -> Vec<usize> {
    let total: usize = sizes.iter().sum();
    debug_assert!(target <= total);
    if total == 0 {
        return vec![];
    }
    let f = target as f64 / total as f64;
    let mut alloc: Vec<usize> = Vec::with_capacity(sizes.len());
    let mut remainders: Vec<(usize, f64)> = Vec::with_capacity(sizes.len());
    for (i, &n) in sizes.iter().enumerate() {
        let ideal = f * n as f64;
        let base = (ideal.floor() as usize).min(n);
        alloc.push(base);
        remainders.push((i, ideal - base as f64));
    }
    // Hand out the rows the floors left over, largest remainder first.
    remainders.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut assigned: usize = alloc.iter().sum();
    for &(i, _) in &remainders {
        if assigned >= target {
            break;
        }
        if alloc[i] < sizes[i] {
            alloc[i] += 1;
            assigned += 1;
        }
    }
    // Float dust can leave the count off in either direction; settle it
    // against strata that still have room (or rows to give back).
    while assigned < target {
        let before = assigned;
        for i in 0..alloc.len() {
            if assigned >= target {
                break;
            }
            if alloc[i] < sizes[i] {
                alloc[i] += 1;
                assigned += 1;
            }
        }
        assert!(assigned > before, "allocation stuck below target");
    }
    while assigned > target {
        let before = assigned;
        for &(i, _) in remainders.iter().rev() {
            if assigned <= target {
                break;
            }
            if alloc[i] > 0 {
                alloc[i] -= 1;
                assigned -= 1;
            }
        }
        assert!(assigned < before, "allocation stuck above target");
    }
    alloc
}

/// Deterministic sub-seed for one stratum.
fn stratum_seed(base: u64, key: (CalMonth, bool)) -> u64 {
    let tag = format!("{}|{}", key.0, key.1 as u8);
    derive(base, fnv1a64(tag.as_bytes()))
}

/// Pick `count` of the stratum's row indices by seeded shuffle. The full
/// stratum is returned untouched when everything is selected, so a
/// whole-panel sample is the identity.
fn pick(indices: &[usize], count: usize, seed: u64) -> Vec<usize> {
    if count >= indices.len() {
        return indices.to_vec();
    }
    if count == 0 {
        return vec![];
    }
    let mut shuffled = indices.to_vec();
    shuffled.shuffle(&mut rng(seed));
    shuffled.truncate(count);
    shuffled
}

fn subset(panel: &LabeledPanel, mut indices: Vec<usize>) -> LabeledPanel {
    indices.sort_unstable();
    LabeledPanel {
        definition: panel.definition,
        definition_label: panel.definition_label.clone(),
        schema: panel.schema.clone(),
        rows: indices.iter().map(|&i| panel.rows[i].clone()).collect(),
    }
}

/// Draw a fixed-size subsample stratified by (month, outcome).
///
/// One global fraction `target_rows / len` is applied to every stratum with
/// largest-remainder rounding, so each stratum's share of the sample matches
/// its share of the population to within one row. Row order is preserved.
pub fn stratified_subsample(
    panel: &LabeledPanel,
    target_rows: usize,
    seed: u64,
) -> Result<LabeledPanel> {
    let total = panel.rows.len();
    if target_rows > total {
        return Err(Error::TargetExceedsPopulation { target: target_rows, population: total });
    }
    let base = crate::seed::derive_str(seed, "subsample");
    let strata = strata(panel);
    let sizes: Vec<usize> = strata.values().map(|v| v.len()).collect();
    let alloc = allocate(&sizes, target_rows);
    let mut selected = Vec::with_capacity(target_rows);
    for ((key, indices), count) in strata.iter().zip(&alloc) {
        selected.extend(pick(indices, *count, stratum_seed(base, *key)));
    }
    Ok(subset(panel, selected))
}

/// Split a panel into train/validation parts.
///
/// Observation mode draws `round(train_fraction * len)` rows with the same
/// stratified largest-remainder scheme as [`stratified_subsample`]; account
/// mode assigns whole loans (in seeded shuffle order) to the training side
/// until it reaches the target row count. Both parts keep panel row order,
/// and together they partition the input exactly.
pub fn split(
    panel: &LabeledPanel,
    train_fraction: f64,
    mode: SplitMode,
    seed: u64,
) -> Result<(LabeledPanel, LabeledPanel)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidParameter {
            what: format!("train_fraction must lie in (0, 1), got {train_fraction}"),
        });
    }
    let total = panel.rows.len();
    let target = (train_fraction * total as f64).round() as usize;
    let train_indices: Vec<usize> = match mode {
        SplitMode::Observation => {
            let base = crate::seed::derive_str(seed, "split");
            let strata = strata(panel);
            let sizes: Vec<usize> = strata.values().map(|v| v.len()).collect();
            let alloc = allocate(&sizes, target.min(total));
            strata
                .iter()
                .zip(&alloc)
                .flat_map(|((key, indices), count)| pick(indices, *count, stratum_seed(base, *key)))
                .collect()
        }
        SplitMode::Account => {
            let mut loans: Vec<&str> = Vec::new();
            let mut rows_by_loan: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
            for (i, row) in panel.rows.iter().enumerate() {
                let entry = rows_by_loan.entry(row.loan_id.as_str()).or_default();
                if entry.is_empty() {
                    loans.push(row.loan_id.as_str());
                }
                entry.push(i);
            }
            loans.shuffle(&mut rng(crate::seed::derive_str(seed, "split-account")));
            let mut picked = Vec::new();
            for loan in loans {
                if picked.len() >= target {
                    break;
                }
                picked.extend(&rows_by_loan[loan]);
            }
            picked
        }
    };
    let mut in_train = vec![false; total];
    for &i in &train_indices {
        in_train[i] = true;
    }
    let valid_indices: Vec<usize> = (0..total).filter(|&i| !in_train[i]).collect();
    Ok((subset(panel, train_indices), subset(panel, valid_indices)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{FeatureSchema, PanelRow};
    use crate::event::SicrDefinition;

    fn m(i: i32) -> CalMonth {
        CalMonth::new(2011, 1) + i
    }

    /// `spec[j] = (month offset, y, count)` expands to that many rows.
    fn panel_of(spec: &[(i32, bool, usize)]) -> LabeledPanel {
        let mut rows = Vec::new();
        for &(off, y, count) in spec {
            for _ in 0..count {
                rows.push(PanelRow {
                    loan_id: format!("L{}", rows.len()),
                    month: m(off),
                    y,
                    stage1: true,
                    values: vec![],
                });
            }
        }
        LabeledPanel {
            definition: SicrDefinition::new(1, 1, 3),
            definition_label: "1a(i)".into(),
            schema: FeatureSchema::new(vec![]),
            rows,
        }
    }

    fn count_y(panel: &LabeledPanel, y: bool) -> usize {
        panel.rows.iter().filter(|r| r.y == y).count()
    }

    #[test]
    fn full_target_is_identity() {
        let p = panel_of(&[(0, false, 30), (0, true, 7), (1, false, 13)]);
        let s = stratified_subsample(&p, 50, 99).unwrap();
        assert_eq!(s.rows, p.rows);
    }

    #[test]
    fn proportional_allocation_80_20() {
        let p = panel_of(&[(0, false, 80), (0, true, 20)]);
        let s = stratified_subsample(&p, 50, 1).unwrap();
        assert_eq!(s.rows.len(), 50);
        assert_eq!(count_y(&s, false), 40);
        assert_eq!(count_y(&s, true), 10);
    }

    #[test]
    fn target_above_population_errors() {
        let p = panel_of(&[(0, false, 10)]);
        let err = stratified_subsample(&p, 11, 1).unwrap_err();
        assert_eq!(err.tag(), "target-exceeds-population");
    }

    #[test]
    fn stratum_share_stays_within_one_row() {
        // Apply the allocation over many random stratum layouts and check the
        // defining property of largest-remainder rounding.
        let mut state = 0x2545F4914F6CDD1Du64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..200 {
            let n_strata = 1 + (next() % 12) as usize;
            let sizes: Vec<usize> = (0..n_strata).map(|_| 1 + (next() % 50) as usize).collect();
            let total: usize = sizes.iter().sum();
            let target = (next() % (total as u64 + 1)) as usize;
            let alloc = allocate(&sizes, target);
            assert_eq!(alloc.iter().sum::<usize>(), target);
            let f = target as f64 / total as f64;
            for (a, n) in alloc.iter().zip(&sizes) {
                assert!(*a <= *n);
                assert!((*a as f64 - f * *n as f64).abs() < 1.0 + 1e-9);
            }
        }
    }

    #[test]
    fn seed_changes_selection_but_not_shape() {
        let p = panel_of(&[(0, false, 60), (0, true, 20), (1, false, 40)]);
        let a = stratified_subsample(&p, 60, 7).unwrap();
        let b = stratified_subsample(&p, 60, 7).unwrap();
        let c = stratified_subsample(&p, 60, 8).unwrap();
        assert_eq!(a.rows, b.rows);
        assert_eq!(a.rows.len(), c.rows.len());
        let ids = |p: &LabeledPanel| p.rows.iter().map(|r| r.loan_id.clone()).collect::<Vec<_>>();
        assert_ne!(ids(&a), ids(&c));
    }

    #[test]
    fn split_partitions_exactly() {
        let p = panel_of(&[(0, false, 33), (0, true, 11), (1, false, 22), (2, true, 5)]);
        let (train, valid) = split(&p, 0.7, SplitMode::Observation, 3).unwrap();
        assert_eq!(train.rows.len() + valid.rows.len(), p.rows.len());
        let mut merged: Vec<&str> = train
            .rows
            .iter()
            .chain(&valid.rows)
            .map(|r| r.loan_id.as_str())
            .collect();
        merged.sort_unstable();
        let mut want: Vec<&str> = p.rows.iter().map(|r| r.loan_id.as_str()).collect();
        want.sort_unstable();
        assert_eq!(merged, want);
        // No row appears on both sides.
        for t in &train.rows {
            assert!(!valid.rows.iter().any(|v| v.loan_id == t.loan_id));
        }
    }

    #[test]
    fn seventy_thirty_on_a_thousand_rows() {
        let p = panel_of(&[
            (0, false, 400),
            (0, true, 100),
            (1, false, 350),
            (1, true, 150),
        ]);
        let (train, valid) = split(&p, 0.7, SplitMode::Observation, 5).unwrap();
        assert_eq!(train.rows.len(), 700);
        assert_eq!(valid.rows.len(), 300);
        // Event profile carries over stratum-exactly: 0.7 of each stratum.
        assert_eq!(count_y(&train, true), 175);
    }

    #[test]
    fn account_split_keeps_loans_whole() {
        let mut p = panel_of(&[]);
        for loan in 0..40 {
            for t in 0..10 {
                p.rows.push(PanelRow {
                    loan_id: format!("A{loan}"),
                    month: m(t),
                    y: (loan + t as usize).is_multiple_of(7),
                    stage1: true,
                    values: vec![],
                });
            }
        }
        let (train, valid) = split(&p, 0.7, SplitMode::Account, 17).unwrap();
        assert_eq!(train.rows.len() + valid.rows.len(), 400);
        let train_loans: std::collections::BTreeSet<&str> =
            train.rows.iter().map(|r| r.loan_id.as_str()).collect();
        for v in &valid.rows {
            assert!(!train_loans.contains(v.loan_id.as_str()));
        }
        // Loans are uniform 10 rows, so the boundary lands on a multiple of 10.
        assert_eq!(train.rows.len() % 10, 0);
        assert!(train.rows.len() >= 280);
    }

    #[test]
    fn bad_fraction_rejected() {
        let p = panel_of(&[(0, false, 10)]);
        for f in [0.0, 1.0, -0.2, 1.7] {
            let err = split(&p, f, SplitMode::Observation, 1).unwrap_err();
            assert_eq!(err.tag(), "invalid-parameter");
        }
    }

    #[test]
    fn train_rates_track_population_rates() {
        // On a generated panel the training partition preserves each
        // (month, outcome) cell to within one row of its fair share, and the
        // monthly event rate stays within 2 percentage points of the
        // population's wherever the month has enough observations for a rate
        // to be meaningful.
        use crate::dataset::build_panel;
        use crate::synth::{gen_all, SimConfig};
        use std::collections::BTreeMap;

        let cfg = SimConfig { n_loans: 1500, seed: 4242, ..SimConfig::default() };
        let (scenario, portfolio) = gen_all(&cfg).unwrap();
        let schema = FeatureSchema::standard();
        let panel = build_panel(
            &portfolio,
            &scenario,
            SicrDefinition::new(1, 1, 3),
            "1a(i)",
            &schema,
        )
        .unwrap();
        let (train, _) = split(&panel, 0.7, SplitMode::Observation, 4242).unwrap();
        let fraction = train.rows.len() as f64 / panel.rows.len() as f64;

        // Exact allocation guarantee: every stratum is within one row of
        // fraction * stratum size.
        let full_strata = strata(&panel);
        let train_strata = strata(&train);
        for (key, members) in &full_strata {
            let got = train_strata.get(key).map_or(0, Vec::len);
            let fair = fraction * members.len() as f64;
            assert!(
                (got as f64 - fair).abs() <= 1.0 + 1e-9,
                "stratum {key:?}: {got} rows vs fair share {fair:.2}"
            );
        }

        // Rate comparison on months with a usable base: per-month event rate
        // over all rows, population vs train.
        let mut pop: BTreeMap<CalMonth, (usize, usize)> = BTreeMap::new();
        let mut sub: BTreeMap<CalMonth, (usize, usize)> = BTreeMap::new();
        for r in &panel.rows {
            let e = pop.entry(r.month).or_default();
            e.0 += 1;
            e.1 += usize::from(r.y);
        }
        for r in &train.rows {
            let e = sub.entry(r.month).or_default();
            e.0 += 1;
            e.1 += usize::from(r.y);
        }
        let mut checked = 0;
        for (month, &(n, events)) in &pop {
            if n < 200 {
                continue;
            }
            let (tn, te) = sub[month];
            assert!(tn > 0, "month {month} missing from train");
            let gap = (events as f64 / n as f64 - te as f64 / tn as f64).abs();
            assert!(gap < 0.02, "month {month} rate gap {gap:.4}");
            checked += 1;
        }
        assert!(checked > 60, "only {checked} months compared");
    }
}
