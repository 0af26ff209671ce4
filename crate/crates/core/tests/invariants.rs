//! Randomised invariants of the trigger/outcome layer: subset relations
//! between definitions, the status/outcome shift identity, and the link
//! probability's symmetry. Deterministic companions to the module unit
//! tests, run over generated delinquency histories.

use proptest::prelude::*;

use sicr_core::calendar::CalMonth;
use sicr_core::event::{compute_status, is_default, label_outcomes, SicrDefinition};
use sicr_core::logit::sigmoid;
use sicr_core::synth::LoanHistory;
use sicr_core::Real;

fn history() -> impl Strategy<Value = LoanHistory> {
    (prop::collection::vec(0u32..=6, 1..=60), 0i32..48)
        .prop_map(|(g0, offset)| LoanHistory::bare("L1", CalMonth::new(2005, 1) + offset, g0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    /// A trigger that held for s+1 consecutive months also held for s.
    #[test]
    fn stickier_status_implies_looser_status(
        history in history(),
        d in 1u32..=3,
        s in 1u32..=4,
    ) {
        let loose = compute_status(&history, SicrDefinition::new(d, s, 3)).unwrap();
        let strict = compute_status(&history, SicrDefinition::new(d, s + 1, 3)).unwrap();
        let mut m = strict.start;
        while let Some(flag) = strict.status_at(m) {
            if flag {
                prop_assert_eq!(loose.status_at(m), Some(true), "month {}", m);
            }
            m = m + 1;
        }
    }

    /// A trigger at threshold d+1 also trips the threshold-d test.
    #[test]
    fn higher_threshold_implies_lower_threshold(
        history in history(),
        d in 1u32..=3,
        s in 1u32..=4,
    ) {
        let loose = compute_status(&history, SicrDefinition::new(d, s, 3)).unwrap();
        let strict = compute_status(&history, SicrDefinition::new(d + 1, s, 3)).unwrap();
        let mut m = strict.start;
        while let Some(flag) = strict.status_at(m) {
            if flag {
                prop_assert_eq!(loose.status_at(m), Some(true), "month {}", m);
            }
            m = m + 1;
        }
    }

    /// Outcome labels are the status series read k months ahead: the label
    /// at t exists exactly when t is observed and the status at t+k is
    /// defined, and then the two agree.
    #[test]
    fn outcomes_shift_the_status_series(
        history in history(),
        d in 1u32..=2,
        s in 1u32..=3,
        k in 0u32..=12,
    ) {
        let status = compute_status(&history, SicrDefinition::new(d, s, 3)).unwrap();
        let outcomes = label_outcomes(&status, k);
        let last_observed = history.start_month + (history.g0.len() as i32 - 1);
        let mut m = history.start_month;
        while m <= last_observed {
            let ahead = status.status_at(m + k as i32);
            prop_assert_eq!(outcomes.y_at(m), ahead, "month {}", m);
            m = m + 1;
        }
        // No labels outside the observed months either.
        prop_assert!(outcomes.start >= history.start_month);
        prop_assert!(outcomes.start + (outcomes.y.len() as i32) <= last_observed + 1);
    }

    /// A defaulted month always trips the one-month persistence test for
    /// thresholds at or below the default line.
    #[test]
    fn default_months_are_flagged_immediately(history in history(), d in 1u32..=3) {
        let status = compute_status(&history, SicrDefinition::new(d, 1, 3)).unwrap();
        for (i, &g) in history.g0.iter().enumerate() {
            if is_default(g) {
                prop_assert_eq!(
                    status.status_at(history.start_month + i as i32),
                    Some(true),
                    "defaulted month {} not flagged at d={}", i, d
                );
            }
        }
    }

    /// Tightening either definition parameter never adds positive labels.
    #[test]
    fn positive_label_count_is_monotone_in_s_and_d(
        history in history(),
        d in 1u32..=2,
        s in 1u32..=3,
        k in 1u32..=6,
    ) {
        let count = |d: u32, s: u32| -> usize {
            let status = compute_status(&history, SicrDefinition::new(d, s, k)).unwrap();
            label_outcomes(&status, k).y.iter().filter(|&&y| y).count()
        };
        let base = count(d, s);
        prop_assert!(count(d, s + 1) <= base);
        prop_assert!(count(d + 1, s) <= base);
    }

    /// The link probability is symmetric and strictly inside (0, 1), so a
    /// negated linear predictor scores one minus the original.
    #[test]
    fn link_probability_is_symmetric_and_bounded(w in -40.0f64..40.0) {
        let p: Real = sigmoid(w);
        let q: Real = sigmoid(-w);
        prop_assert!(p > 0.0 && p < 1.0);
        prop_assert!((p + q - 1.0).abs() < 1e-12, "p={p}, q={q}");
    }
}
