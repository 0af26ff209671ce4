//! Model evaluation: ranking power, cost-sensitive cut-offs, and
//! portfolio-level rate diagnostics.
//!
//! Three layers build on each other. At the bottom sit the sample-level
//! metrics: [`auc`] (rank-based, ties counted half) with a case-resampling
//! bootstrap in [`bootstrap_auc_ci`], and the generalised Youden cut-off
//! selector [`youden_cutoff`], which weighs specificity against sensitivity
//! through a false-negative cost ratio. On top of those, score-path measures
//! describe how a model behaves through time: [`flexibility`] (mean per-loan
//! spread of predicted probabilities) and [`instability`] (spread of the
//! monthly actual rate). [`evaluate_definition`] ties everything together for
//! one trigger definition: fit on the training panel, pick the operating
//! point there, measure ranking power on the validation panel, and compare
//! actual/expected/discrete monthly rate series over the combined panel.
//!
//! All stochastic steps derive their sub-streams from the caller's root seed,
//! so every number here is reproducible bit for bit.

use std::collections::BTreeMap;

use rand::Rng;

use crate::calendar::CalMonth;
use crate::dataset::{sicr_rate_series, LabeledPanel, RateKind, RateSeries};
use crate::error::{Error, Result};
use crate::event::SicrDefinition;
use crate::logit::{self, FitOptions, LogitModel};
use crate::seed;
use crate::Real;

pub use crate::dataset::series_mae;

/// Redraws allowed per bootstrap replicate before it is skipped because the
/// resample keeps coming up one-class.
const MAX_REDRAWS: usize = 100;

/// Area under the ROC curve with percentile-bootstrap uncertainty.
#[derive(Debug, Clone, PartialEq)]
pub struct AucEstimate {
    /// Point estimate on the full sample.
    pub auc: Real,
    /// 2.5th percentile across bootstrap replicates, clamped to [0, 1].
    pub ci_low: Real,
    /// 97.5th percentile across bootstrap replicates, clamped to [0, 1].
    pub ci_high: Real,
    /// Replicates that produced a usable (two-class) resample.
    pub replicates: usize,
    /// Gini coefficient, `2 * auc - 1`.
    pub gini: Real,
}

/// Operating point chosen by maximising the generalised Youden index
/// `J_a(c) = q(c) + ((1 - phi) / (a * phi)) * p(c) - 1`, where `q` is
/// sensitivity, `p` specificity, `phi` the event prevalence and `a` the cost
/// ratio of false negatives to false positives.
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffResult {
    /// The selected cut-off; scores strictly above it are flagged.
    pub cutoff: Real,
    /// Value of the generalised Youden index at the cut-off.
    pub j_a: Real,
    /// Cost ratio `a` the index was built with.
    pub cost_ratio: Real,
    /// Event prevalence `phi` of the sample the cut-off was fitted on.
    pub prevalence: Real,
    /// Sensitivity `q(cutoff)`: share of events scored above the cut-off.
    pub sensitivity: Real,
    /// Specificity `p(cutoff)`: share of non-events scored at or below it.
    pub specificity: Real,
}

/// First/peak/settled levels of a monthly rate series around a crisis.
#[derive(Debug, Clone, PartialEq)]
pub struct CrisisSummary {
    /// Rate of the earliest month.
    pub earliest: Real,
    /// Maximum rate over the whole series.
    pub max: Real,
    /// Mean rate from the post-crisis marker onward.
    pub post_crisis_mean: Real,
    /// `max - earliest`: how far the series rose above its starting level.
    pub early_warning_degree: Real,
    /// `max - post_crisis_mean`: how far it fell back after the crisis.
    pub recovery_degree: Real,
}

/// Knobs for [`evaluate_definition`].
#[derive(Debug, Clone)]
pub struct EvalOptions {
    /// False-negative cost ratio `a` for the cut-off selection.
    pub cost_ratio: Real,
    /// Bootstrap replicates for both AUC intervals (at least 100).
    pub replicates: usize,
    /// First month of the post-crisis regime for the series summaries.
    pub post_crisis_start: CalMonth,
    /// Root seed; bootstrap sub-streams are derived from it with the tags
    /// `"auc-probabilistic"` and `"auc-discrete"`.
    pub seed: u64,
    /// Passed through to the underlying model fit.
    pub fit: FitOptions,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            cost_ratio: 6.0,
            replicates: 200,
            post_crisis_start: CalMonth::new(2010, 1),
            seed: 42,
            fit: FitOptions::default(),
        }
    }
}

/// Everything measured about one trigger definition: discrimination on the
/// validation panel, the training-side operating point, score-path spread,
/// and the monthly actual/expected/discrete rate comparison.
#[derive(Debug, Clone)]
pub struct DefinitionReport {
    pub definition: SicrDefinition,
    pub label: String,
    /// Share of training rows with outcome 1 (also `phi` in the cut-off).
    pub prevalence: Real,
    /// Rank AUC of predicted probabilities on the validation panel.
    pub auc_probabilistic: AucEstimate,
    /// Mean per-loan spread of validation scores.
    pub flexibility: Real,
    /// Spread of the monthly actual rate over the combined panel.
    pub instability: Real,
    /// Operating point fitted on training scores.
    pub cutoff: CutoffResult,
    /// Rank AUC of the dichotomised validation scores.
    pub auc_discrete: AucEstimate,
    /// Crisis shape of the actual rate series.
    pub crisis: CrisisSummary,
    /// Mean absolute gap between actual and expected monthly rates.
    pub mae_expected: Real,
    /// Mean absolute gap between actual and discrete monthly rates.
    pub mae_discrete: Real,
}

/// Validate a scored sample: equal lengths, at least one row, finite scores,
/// and both label classes present.
fn check_scored_sample(scores: &[Real], labels: &[bool]) -> Result<()> {
    if scores.len() != labels.len() {
        return Err(Error::InvalidParameter {
            what: format!("{} scores against {} labels", scores.len(), labels.len()),
        });
    }
    if scores.is_empty() {
        return Err(Error::EmptyPanel { what: "scored sample".into() });
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::NonFiniteInput { what: format!("score at index {i}") });
    }
    let positives = labels.iter().filter(|&&y| y).count();
    if positives == 0 || positives == labels.len() {
        return Err(Error::DegenerateLabels);
    }
    Ok(())
}

/// Rank AUC on a pre-validated sample: the Mann-Whitney statistic computed
/// from mid-ranks, so tied score pairs count one half.
fn rank_auc(scores: &[Real], labels: &[bool]) -> Real {
    let n = scores.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| scores[i].total_cmp(&scores[j]));

    let mut positive_rank_sum = 0.0;
    let mut start = 0;
    while start < n {
        let mut end = start;
        while end + 1 < n && scores[order[end + 1]] == scores[order[end]] {
            end += 1;
        }
        // 1-based mid-rank shared by the tied block [start, end].
        let mid_rank = (start + end) as Real / 2.0 + 1.0;
        for &i in &order[start..=end] {
            if labels[i] {
                positive_rank_sum += mid_rank;
            }
        }
        start = end + 1;
    }

    let n_pos = labels.iter().filter(|&&y| y).count() as Real;
    let n_neg = n as Real - n_pos;
    (positive_rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg)
}

/// Probability that a random event row outscores a random non-event row,
/// ties counted half.
pub fn auc(scores: &[Real], labels: &[bool]) -> Result<Real> {
    check_scored_sample(scores, labels)?;
    Ok(rank_auc(scores, labels))
}

/// Linearly interpolated percentile of an ascending-sorted slice.
fn percentile(sorted: &[Real], q: Real) -> Real {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = q * (n - 1) as Real;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as Real) * (sorted[hi] - sorted[lo])
}

/// Case-resampling bootstrap interval around [`auc`].
///
/// Each replicate resamples the rows with replacement under its own derived
/// seed, so the estimate is independent of evaluation order. Replicates that
/// draw a one-class sample are redrawn up to [`MAX_REDRAWS`] times and then
/// skipped; the returned `replicates` field counts the usable ones. Bounds
/// are the 2.5th/97.5th percentiles, clamped to [0, 1].
pub fn bootstrap_auc_ci(
    scores: &[Real],
    labels: &[bool],
    replicates: usize,
    seed: u64,
) -> Result<AucEstimate> {
    if replicates < 100 {
        return Err(Error::InvalidParameter {
            what: format!("bootstrap needs at least 100 replicates, got {replicates}"),
        });
    }
    let point = auc(scores, labels)?;

    let n = scores.len();
    let mut stats = Vec::with_capacity(replicates);
    let mut resampled_scores = vec![0.0; n];
    let mut resampled_labels = vec![false; n];
    for r in 0..replicates {
        let mut rng = seed::rng(seed::derive(seed, r as u64));
        for _ in 0..MAX_REDRAWS {
            let mut positives = 0;
            for slot in 0..n {
                let pick = rng.gen_range(0..n);
                resampled_scores[slot] = scores[pick];
                resampled_labels[slot] = labels[pick];
                positives += usize::from(labels[pick]);
            }
            if positives > 0 && positives < n {
                stats.push(rank_auc(&resampled_scores, &resampled_labels));
                break;
            }
        }
    }
    if stats.is_empty() {
        return Err(Error::InvalidParameter {
            what: "every bootstrap replicate drew a single class".into(),
        });
    }
    stats.sort_by(Real::total_cmp);

    Ok(AucEstimate {
        auc: point,
        ci_low: percentile(&stats, 0.025).clamp(0.0, 1.0),
        ci_high: percentile(&stats, 0.975).clamp(0.0, 1.0),
        replicates: stats.len(),
        gini: 2.0 * point - 1.0,
    })
}

/// Pick the cut-off maximising the generalised Youden index.
///
/// Prevalence `phi` is estimated from `labels`. Candidate cut-offs are the
/// midpoints between consecutive distinct scores plus the endpoints 0 and 1,
/// which covers every distinct operating point of the strict `score > c`
/// rule, so the maximisation is exact. Ties in the index break toward the
/// smaller cut-off — flagging more, never fewer, accounts.
pub fn youden_cutoff(scores: &[Real], labels: &[bool], cost_ratio: Real) -> Result<CutoffResult> {
    check_scored_sample(scores, labels)?;
    if !cost_ratio.is_finite() || cost_ratio <= 0.0 {
        return Err(Error::InvalidParameter {
            what: format!("cost ratio must be positive, got {cost_ratio}"),
        });
    }
    if let Some(s) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
        return Err(Error::InvalidParameter {
            what: format!("cut-off selection needs probability scores in [0, 1], got {s}"),
        });
    }

    let n = scores.len();
    let n_pos = labels.iter().filter(|&&y| y).count();
    let n_neg = n - n_pos;
    let prevalence = n_pos as Real / n as Real;
    let specificity_weight = (1.0 - prevalence) / (cost_ratio * prevalence);

    let mut by_score: Vec<(Real, bool)> =
        scores.iter().copied().zip(labels.iter().copied()).collect();
    by_score.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut candidates = vec![0.0];
    for w in by_score.windows(2) {
        if w[1].0 > w[0].0 {
            candidates.push((w[0].0 + w[1].0) / 2.0);
        }
    }
    candidates.push(1.0);

    // One ascending sweep: maintain counts of rows with score <= c.
    let mut best: Option<(Real, Real, Real, Real)> = None;
    let mut row = 0;
    let mut pos_below = 0;
    let mut neg_below = 0;
    for &c in &candidates {
        while row < n && by_score[row].0 <= c {
            if by_score[row].1 {
                pos_below += 1;
            } else {
                neg_below += 1;
            }
            row += 1;
        }
        let sensitivity = (n_pos - pos_below) as Real / n_pos as Real;
        let specificity = neg_below as Real / n_neg as Real;
        let j = sensitivity + specificity_weight * specificity - 1.0;
        if best.is_none_or(|(best_j, ..)| j > best_j) {
            best = Some((j, c, sensitivity, specificity));
        }
    }

    let (j_a, cutoff, sensitivity, specificity) = best.expect("candidate set is never empty");
    Ok(CutoffResult { cutoff, j_a, cost_ratio, prevalence, sensitivity, specificity })
}

/// Flag every score strictly above the cut-off.
pub fn dichotomise(scores: &[Real], cutoff: Real) -> Result<Vec<bool>> {
    if !(0.0..=1.0).contains(&cutoff) {
        return Err(Error::InvalidParameter {
            what: format!("cut-off must lie in [0, 1], got {cutoff}"),
        });
    }
    Ok(scores.iter().map(|&s| s > cutoff).collect())
}

/// Rank AUC of already-dichotomised predictions, with the same bootstrap
/// interval as [`bootstrap_auc_ci`].
///
/// With a single operating point the point estimate collapses to
/// `(sensitivity + specificity) / 2`.
pub fn discrete_auc(
    predictions: &[bool],
    labels: &[bool],
    replicates: usize,
    seed: u64,
) -> Result<AucEstimate> {
    let scores: Vec<Real> = predictions.iter().map(|&f| if f { 1.0 } else { 0.0 }).collect();
    bootstrap_auc_ci(&scores, labels, replicates, seed)
}

/// Population standard deviation (divide by n).
fn population_sd(xs: &[Real]) -> Real {
    let n = xs.len() as Real;
    let mean = xs.iter().sum::<Real>() / n;
    (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<Real>() / n).sqrt()
}

/// Mean per-loan spread of predicted probabilities.
///
/// Every loan with at least two predictions contributes the population
/// standard deviation of its score path; the result is the mean over those
/// loans. A definition whose scores barely move within a loan cannot move
/// accounts between stages, so larger is livelier.
pub fn flexibility(predictions_by_loan: &[Vec<Real>]) -> Result<Real> {
    let mut total = 0.0;
    let mut qualifying = 0usize;
    for path in predictions_by_loan {
        if path.len() < 2 {
            continue;
        }
        total += population_sd(path);
        qualifying += 1;
    }
    if qualifying == 0 {
        return Err(Error::InsufficientHistories { min: 2 });
    }
    Ok(total / qualifying as Real)
}

/// Population standard deviation of a monthly rate series.
pub fn instability(actual: &RateSeries) -> Result<Real> {
    if actual.points.len() < 2 {
        return Err(Error::SeriesTooShort { min: 2, got: actual.points.len() });
    }
    Ok(population_sd(&actual.rates()))
}

/// Summarise a rate series around a crisis: earliest level, peak, and the
/// mean from `post_crisis_start` onward, plus the two differences.
///
/// Errors when the marker lies beyond the last series month; a marker before
/// the first month simply averages the whole series.
pub fn crisis_summaries(actual: &RateSeries, post_crisis_start: CalMonth) -> Result<CrisisSummary> {
    let Some(first) = actual.points.first() else {
        return Err(Error::SeriesTooShort { min: 1, got: 0 });
    };
    let end = actual.last_month().expect("non-empty series has a last month");
    if post_crisis_start > end {
        return Err(Error::PostCrisisOutOfRange {
            start: post_crisis_start.to_string(),
            end: end.to_string(),
        });
    }

    let earliest = first.rate;
    let max = actual.rates().iter().copied().fold(Real::NEG_INFINITY, Real::max);
    let post: Vec<Real> =
        actual.points.iter().filter(|p| p.month >= post_crisis_start).map(|p| p.rate).collect();
    let post_crisis_mean = post.iter().sum::<Real>() / post.len() as Real;

    Ok(CrisisSummary {
        earliest,
        max,
        post_crisis_mean,
        early_warning_degree: max - earliest,
        recovery_degree: max - post_crisis_mean,
    })
}

/// Monthly expected and discrete rate series of a model over a panel's
/// at-risk rows.
///
/// The expected rate is the mean predicted probability per month; the
/// discrete rate is the share of predictions strictly above `cutoff`.
/// Months without at-risk rows are absent from both series.
pub fn expected_rate_series(
    model: &LogitModel,
    panel: &LabeledPanel,
    cutoff: Real,
) -> Result<(RateSeries, RateSeries)> {
    if !(0.0..=1.0).contains(&cutoff) {
        return Err(Error::InvalidParameter {
            what: format!("cut-off must lie in [0, 1], got {cutoff}"),
        });
    }
    let scores = logit::score_panel(model, panel)?;

    let mut expected: BTreeMap<CalMonth, (usize, Real)> = BTreeMap::new();
    let mut discrete: BTreeMap<CalMonth, (usize, Real)> = BTreeMap::new();
    for (r, &s) in panel.rows.iter().zip(&scores) {
        if !r.stage1 {
            continue;
        }
        let e = expected.entry(r.month).or_insert((0, 0.0));
        e.0 += 1;
        e.1 += s;
        let d = discrete.entry(r.month).or_insert((0, 0.0));
        d.0 += 1;
        if s > cutoff {
            d.1 += 1.0;
        }
    }
    Ok((
        RateSeries::from_monthly(RateKind::Expected, expected),
        RateSeries::from_monthly(RateKind::Discrete, discrete),
    ))
}

/// A [`DefinitionReport`] together with the intermediates a caller may want
/// to keep: the fitted model and the three monthly rate series the report's
/// instability, crisis and MAE figures were measured on.
#[derive(Debug, Clone)]
pub struct DefinitionEvaluation {
    pub report: DefinitionReport,
    pub model: LogitModel,
    pub actual: RateSeries,
    pub expected: RateSeries,
    pub discrete: RateSeries,
}

/// Run the whole evaluation for one definition.
///
/// Fits on `train`, picks the operating point from training scores, and
/// measures discrimination on `valid`. Flexibility uses validation score
/// paths; the actual/expected/discrete rate series — and with them
/// instability, the crisis summaries and both MAEs — use both panels
/// combined. Bootstrap sub-streams are derived from `options.seed` with the
/// tags `"auc-probabilistic"` and `"auc-discrete"`. Component failures come
/// back wrapped with the definition label.
pub fn evaluate_definition(
    definition: SicrDefinition,
    train: &LabeledPanel,
    valid: &LabeledPanel,
    options: &EvalOptions,
) -> Result<DefinitionReport> {
    Ok(evaluate_definition_full(definition, train, valid, options)?.report)
}

/// [`evaluate_definition`] plus the fitted model and rate series, for callers
/// that serialise or plot the intermediates without fitting twice.
pub fn evaluate_definition_full(
    definition: SicrDefinition,
    train: &LabeledPanel,
    valid: &LabeledPanel,
    options: &EvalOptions,
) -> Result<DefinitionEvaluation> {
    if train.definition != definition || valid.definition != definition {
        return Err(Error::InvalidParameter {
            what: format!(
                "panels carry definitions {:?} and {:?}, expected {:?}",
                train.definition, valid.definition, definition
            ),
        });
    }
    if train.schema.hash() != valid.schema.hash() {
        return Err(Error::InvalidParameter {
            what: "training and validation panels disagree on the feature schema".into(),
        });
    }
    let label = train.definition_label.clone();
    let ctx = |e: Error| e.for_definition(&label);

    let model = logit::fit(train, &options.fit).map_err(ctx)?;
    let train_scores = logit::score_panel(&model, train).map_err(ctx)?;
    let valid_scores = logit::score_panel(&model, valid).map_err(ctx)?;
    let train_labels = train.labels();
    let valid_labels = valid.labels();

    let auc_probabilistic = bootstrap_auc_ci(
        &valid_scores,
        &valid_labels,
        options.replicates,
        seed::derive_str(options.seed, "auc-probabilistic"),
    )
    .map_err(ctx)?;

    let cutoff = youden_cutoff(&train_scores, &train_labels, options.cost_ratio).map_err(ctx)?;
    let valid_flags = dichotomise(&valid_scores, cutoff.cutoff).map_err(ctx)?;
    let auc_discrete = discrete_auc(
        &valid_flags,
        &valid_labels,
        options.replicates,
        seed::derive_str(options.seed, "auc-discrete"),
    )
    .map_err(ctx)?;

    let score_paths: Vec<Vec<Real>> = valid
        .rows_by_loan()
        .into_iter()
        .map(|(_, rows)| rows.into_iter().map(|i| valid_scores[i]).collect())
        .collect();
    let flexibility = flexibility(&score_paths).map_err(ctx)?;

    let combined = LabeledPanel {
        definition,
        definition_label: label.clone(),
        schema: train.schema.clone(),
        rows: train.rows.iter().chain(&valid.rows).cloned().collect(),
    };
    let actual = sicr_rate_series(&combined);
    let (expected, discrete) =
        expected_rate_series(&model, &combined, cutoff.cutoff).map_err(ctx)?;
    let instability = instability(&actual).map_err(ctx)?;
    let crisis = crisis_summaries(&actual, options.post_crisis_start).map_err(ctx)?;
    let mae_expected = series_mae(&actual, &expected).map_err(ctx)?;
    let mae_discrete = series_mae(&actual, &discrete).map_err(ctx)?;

    let report = DefinitionReport {
        definition,
        label,
        prevalence: train.prevalence(),
        auc_probabilistic,
        flexibility,
        instability,
        cutoff,
        auc_discrete,
        crisis,
        mae_expected,
        mae_discrete,
    };
    Ok(DefinitionEvaluation { report, model, actual, expected, discrete })
}
