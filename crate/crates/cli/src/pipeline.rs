//! Pipeline stages behind the subcommands.
//!
//! Each stage reads its inputs from the output directory (written by the
//! prior stage), runs one library module, and writes that module's artifacts
//! atomically. `run_grid` chains the stages in memory instead — the panel
//! and model files round-trip losslessly, so both routes produce identical
//! reports from the same seed.

use std::path::Path;

use rayon::prelude::*;

use sicr_core::dataset::{
    build_panel, split, stratified_subsample, FeatureSchema, LabeledPanel,
};
use sicr_core::error::{Error, Result};
use sicr_core::evalx::{evaluate_definition_full, DefinitionEvaluation, DefinitionReport};
use sicr_core::event::GridEntry;
use sicr_core::synth::{gen_all, LoanHistory, MacroScenario};
use sicr_core::{logit, seed, shapley, Real};

use crate::config::RunConfig;
use crate::{formats, read_input, write_atomic, CliError};

/// Seed stream for one definition, keyed by its label so a `--definitions`
/// subset reproduces the full run's per-definition results exactly.
pub fn definition_seed(root: u64, label: &str) -> u64 {
    seed::derive(root, seed::fnv1a64(label.as_bytes()))
}

/// Subsample a panel to the configured row target (capped at the panel size)
/// and split it into train/validation. Both draws key off the definition
/// seed.
pub fn prepare_samples(
    panel: &LabeledPanel,
    config: &RunConfig,
    def_seed: u64,
) -> Result<(LabeledPanel, LabeledPanel)> {
    let target = config.sampling.target_rows.min(panel.n_rows());
    let sample = stratified_subsample(panel, target, def_seed)?;
    split(&sample, config.sampling.train_fraction, config.split_mode()?, def_seed)
}

/// The grid entries to operate on, in grid order, optionally narrowed to the
/// `--definitions` labels. Unknown labels fail rather than silently no-op.
pub fn select_entries(
    config: &RunConfig,
    labels: Option<&[String]>,
) -> std::result::Result<Vec<GridEntry>, CliError> {
    let all = config.grid_entries();
    let Some(wanted) = labels else { return Ok(all) };
    for w in wanted {
        if !all.iter().any(|e| &e.label == w) {
            return Err(CliError::Failure(format!(
                "unknown definition label `{w}`; this grid defines: {}",
                all.iter().map(|e| e.label.as_str()).collect::<Vec<_>>().join(", ")
            )));
        }
    }
    Ok(all.into_iter().filter(|e| wanted.contains(&e.label)).collect())
}

/// Tag an error with the definition it occurred under, unless it already is.
fn for_definition(e: Error, label: &str) -> Error {
    match e {
        e @ Error::DefinitionFailed { .. } => e,
        other => other.for_definition(label),
    }
}

/// `simulate`: generate the portfolio and macro scenario, write both CSVs.
pub fn cmd_simulate(config: &RunConfig, out: &Path) -> std::result::Result<(), CliError> {
    let (scenario, portfolio) = gen_all(&config.sim_config())?;
    write_atomic(&out.join(formats::PORTFOLIO_FILE), &formats::portfolio_to_csv(&portfolio))?;
    write_atomic(&out.join(formats::MACRO_FILE), &formats::scenario_to_csv(&scenario))?;
    Ok(())
}

fn load_portfolio(out: &Path) -> std::result::Result<(Vec<LoanHistory>, MacroScenario), CliError> {
    let portfolio = formats::portfolio_from_csv(&read_input(&out.join(formats::PORTFOLIO_FILE))?)?;
    let scenario = formats::scenario_from_csv(&read_input(&out.join(formats::MACRO_FILE))?)?;
    Ok((portfolio, scenario))
}

fn load_panel(out: &Path, file: &str, entry: &GridEntry) -> std::result::Result<LabeledPanel, CliError> {
    let panel = formats::panel_from_csv(&read_input(&out.join(file))?)?;
    if panel.definition != entry.definition || panel.definition_label != entry.label {
        return Err(CliError::Failure(format!(
            "{file}: holds definition {} ({},{},{}), the config expects {} ({},{},{})",
            panel.definition_label,
            panel.definition.d,
            panel.definition.s,
            panel.definition.k,
            entry.label,
            entry.definition.d,
            entry.definition.s,
            entry.definition.k,
        )));
    }
    Ok(panel)
}

/// `label`: build and write one labelled panel per selected definition.
pub fn cmd_label(
    config: &RunConfig,
    out: &Path,
    labels: Option<&[String]>,
) -> std::result::Result<(), CliError> {
    let entries = select_entries(config, labels)?;
    let (portfolio, scenario) = load_portfolio(out)?;
    let schema = FeatureSchema::standard();
    for e in &entries {
        let panel = build_panel(&portfolio, &scenario, e.definition, &e.label, &schema)
            .map_err(|err| for_definition(err, &e.label))?;
        write_atomic(&out.join(formats::panel_file(&e.label)), &formats::panel_to_csv(&panel))?;
    }
    Ok(())
}

/// `sample`: subsample and split each selected panel into train/valid CSVs.
pub fn cmd_sample(
    config: &RunConfig,
    out: &Path,
    labels: Option<&[String]>,
) -> std::result::Result<(), CliError> {
    for e in &select_entries(config, labels)? {
        let panel = load_panel(out, &formats::panel_file(&e.label), e)?;
        let def_seed = definition_seed(config.seed.0, &e.label);
        let (train, valid) = prepare_samples(&panel, config, def_seed)
            .map_err(|err| for_definition(err, &e.label))?;
        write_atomic(&out.join(formats::train_file(&e.label)), &formats::panel_to_csv(&train))?;
        write_atomic(&out.join(formats::valid_file(&e.label)), &formats::panel_to_csv(&valid))?;
    }
    Ok(())
}

/// `fit`: fit the penalised logit on each selected training panel.
pub fn cmd_fit(
    config: &RunConfig,
    out: &Path,
    labels: Option<&[String]>,
) -> std::result::Result<(), CliError> {
    for e in &select_entries(config, labels)? {
        let train = load_panel(out, &formats::train_file(&e.label), e)?;
        let model = logit::fit(&train, &config.fit_options())
            .map_err(|err| for_definition(err, &e.label))?;
        let text = formats::model_to_text(&model, &train.schema)?;
        write_atomic(&out.join(formats::model_file(&e.label)), &text)?;
    }
    Ok(())
}

/// `evaluate`: full report rows plus rate-series artifacts for the selected
/// definitions, from the train/valid panels on disk.
pub fn cmd_evaluate(
    config: &RunConfig,
    out: &Path,
    labels: Option<&[String]>,
) -> std::result::Result<(), CliError> {
    let entries = select_entries(config, labels)?;
    let mut reports = Vec::with_capacity(entries.len());
    for e in &entries {
        let train = load_panel(out, &formats::train_file(&e.label), e)?;
        let valid = load_panel(out, &formats::valid_file(&e.label), e)?;
        let def_seed = definition_seed(config.seed.0, &e.label);
        let evaluation =
            evaluate_definition_full(e.definition, &train, &valid, &config.eval_options(def_seed))
                .map_err(|err| for_definition(err, &e.label))?;
        write_definition_outputs(config, out, &e.label, &evaluation)?;
        reports.push(evaluation.report);
    }
    write_comparison_outputs(out, &reports)
}

/// `attribute`: per-row attributions and the feature ranking for each
/// selected definition, scored on the validation panel.
pub fn cmd_attribute(
    config: &RunConfig,
    out: &Path,
    labels: Option<&[String]>,
) -> std::result::Result<(), CliError> {
    for e in &select_entries(config, labels)? {
        let model = formats::model_from_text(&read_input(&out.join(formats::model_file(&e.label)))?)?;
        let valid = load_panel(out, &formats::valid_file(&e.label), e)?;
        let def_seed = definition_seed(config.seed.0, &e.label);
        let rows = match config.attribution.method.as_str() {
            "monte-carlo" => shapley::mc_shapley(
                &model,
                &valid,
                config.attribution.mc_samples,
                seed::derive_str(def_seed, "attribution"),
            ),
            _ => shapley::exact_linear_shapley(&model, &valid),
        }
        .map_err(|err| for_definition(err, &e.label))?;
        let ranking = shapley::importance_ranking(&valid, &rows)
            .map_err(|err| for_definition(err, &e.label))?;
        write_atomic(
            &out.join(formats::attribution_file(&e.label)),
            &formats::attribution_to_csv(&valid.schema, &rows),
        )?;
        write_atomic(&out.join(formats::ranking_file(&e.label)), &formats::ranking_to_csv(&ranking))?;
    }
    Ok(())
}

/// What `run-grid` produced, for the binary to summarise.
pub struct GridOutcome {
    /// Successful report rows, in grid order.
    pub reports: Vec<DefinitionReport>,
    /// `(label, diagnostic)` per failed definition; the other definitions'
    /// artifacts stay on disk.
    pub failures: Vec<(String, String)>,
}

/// The whole experiment in one call: simulate (or ingest a portfolio), then
/// label → sample → fit → evaluate per grid entry under the configured
/// parallelism degree, then the comparison artifacts. Entries are
/// independent — each derives its own seed stream from the root seed — so
/// the output is identical for any thread count.
pub fn run_grid(
    config: &RunConfig,
    out: &Path,
    parallel: Option<usize>,
    labels: Option<&[String]>,
    portfolio_path: Option<&Path>,
    macro_path: Option<&Path>,
) -> std::result::Result<GridOutcome, CliError> {
    let entries = select_entries(config, labels)?;

    let (portfolio, scenario) = match (portfolio_path, macro_path) {
        (Some(p), Some(m)) => {
            let portfolio = formats::portfolio_from_csv(&read_input(p)?)?;
            let scenario = formats::scenario_from_csv(&read_input(m)?)?;
            (portfolio, scenario)
        }
        (None, None) => {
            let (scenario, portfolio) = gen_all(&config.sim_config())?;
            write_atomic(&out.join(formats::PORTFOLIO_FILE), &formats::portfolio_to_csv(&portfolio))?;
            write_atomic(&out.join(formats::MACRO_FILE), &formats::scenario_to_csv(&scenario))?;
            (portfolio, scenario)
        }
        _ => {
            return Err(CliError::Failure(
                "--portfolio and --macro must be given together".into(),
            ))
        }
    };

    let schema = FeatureSchema::standard();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallel.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Failure(format!("thread pool: {e}")))?;

    // Ordered work queue: compute in parallel, collect back in grid order.
    let results: Vec<Result<DefinitionEvaluation>> = pool.install(|| {
        entries
            .par_iter()
            .map(|e| {
                let def_seed = definition_seed(config.seed.0, &e.label);
                let panel = build_panel(&portfolio, &scenario, e.definition, &e.label, &schema)
                    .map_err(|err| for_definition(err, &e.label))?;
                let (train, valid) = prepare_samples(&panel, config, def_seed)
                    .map_err(|err| for_definition(err, &e.label))?;
                evaluate_definition_full(
                    e.definition,
                    &train,
                    &valid,
                    &config.eval_options(def_seed),
                )
                .map_err(|err| for_definition(err, &e.label))
            })
            .collect()
    });

    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for (e, result) in entries.iter().zip(results) {
        match result {
            Ok(evaluation) => {
                write_definition_outputs(config, out, &e.label, &evaluation)?;
                reports.push(evaluation.report);
            }
            Err(err) => failures.push((e.label.clone(), err.to_string())),
        }
    }
    write_comparison_outputs(out, &reports)?;
    Ok(GridOutcome { reports, failures })
}

/// Per-definition artifacts: the rate-series CSV, the long-format plot CSV,
/// and (when configured) the SVG chart.
fn write_definition_outputs(
    config: &RunConfig,
    out: &Path,
    label: &str,
    evaluation: &DefinitionEvaluation,
) -> std::result::Result<(), CliError> {
    let series = [&evaluation.actual, &evaluation.expected, &evaluation.discrete];
    write_atomic(&out.join(formats::rates_file(label)), &formats::rates_to_csv(&series))?;

    let mut tidy = Vec::new();
    for s in series {
        for p in &s.points {
            tidy.push((p.month.to_string(), s.kind.as_str().to_string(), p.rate));
        }
    }
    write_atomic(
        &out.join(formats::plot_rates_file(label)),
        &formats::tidy_to_csv(formats::TIDY_RATES_HEADER, &tidy),
    )?;

    if config.evaluation.emit_plots {
        let svg = formats::rate_chart_svg(
            &format!("monthly SICR rate, definition {label}"),
            &[
                ("actual", &evaluation.actual),
                ("expected", &evaluation.expected),
                ("discrete", &evaluation.discrete),
            ],
        );
        write_atomic(&out.join(formats::plot_rates_svg(label)), &svg)?;
    }
    Ok(())
}

/// Cross-definition artifacts: the report CSV, the readable summary, and the
/// long-format metric plot CSV.
fn write_comparison_outputs(
    out: &Path,
    reports: &[DefinitionReport],
) -> std::result::Result<(), CliError> {
    write_atomic(&out.join(formats::REPORT_FILE), &formats::report_to_csv(reports))?;
    write_atomic(&out.join(formats::SUMMARY_FILE), &formats::summary_text(reports))?;

    let mut tidy = Vec::new();
    for r in reports {
        for (metric, value) in report_metrics(r) {
            tidy.push((r.label.clone(), metric.to_string(), value));
        }
    }
    write_atomic(
        &out.join(formats::PLOT_METRICS_FILE),
        &formats::tidy_to_csv(formats::TIDY_METRICS_HEADER, &tidy),
    )
}

/// The headline metrics exported to the plot CSV, one series per metric.
fn report_metrics(r: &DefinitionReport) -> [(&'static str, Real); 9] {
    [
        ("prevalence", r.prevalence),
        ("auc_probabilistic", r.auc_probabilistic.auc),
        ("auc_discrete", r.auc_discrete.auc),
        ("flexibility", r.flexibility),
        ("instability", r.instability),
        ("early_warning_degree", r.crisis.early_warning_degree),
        ("recovery_degree", r.crisis.recovery_degree),
        ("mae_expected", r.mae_expected),
        ("mae_discrete", r.mae_discrete),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> RunConfig {
        RunConfig::from_toml(
            "seed = 7\n\
             [simulation]\n\
             n_loans = 60\n\
             [grid]\n\
             d = [1]\n\
             s = [1]\n\
             k = [3, 6]\n\
             extensions = []\n\
             [sampling]\n\
             target_rows = 3000\n",
        )
        .unwrap()
    }

    #[test]
    fn definition_seeds_differ_by_label_and_root() {
        let a = definition_seed(42, "1a(i)");
        assert_eq!(a, definition_seed(42, "1a(i)"));
        assert_ne!(a, definition_seed(42, "1a(ii)"));
        assert_ne!(a, definition_seed(43, "1a(i)"));
    }

    #[test]
    fn select_entries_filters_in_grid_order() {
        let config = tiny_config();
        let all = select_entries(&config, None).unwrap();
        assert_eq!(all.len(), 2);

        let wanted = vec!["1a(ii)".to_string(), "1a(i)".to_string()];
        let some = select_entries(&config, Some(&wanted)).unwrap();
        let labels: Vec<&str> = some.iter().map(|e| e.label.as_str()).collect();
        assert_eq!(labels, vec!["1a(i)", "1a(ii)"]);

        let err = select_entries(&config, Some(&["9z".to_string()])).unwrap_err();
        assert!(err.to_string().contains("unknown definition label"));
    }

    #[test]
    fn stepwise_stages_match_run_grid() {
        let config = tiny_config();
        let grid_dir = tempfile::tempdir().unwrap();
        let step_dir = tempfile::tempdir().unwrap();

        let outcome = run_grid(&config, grid_dir.path(), Some(2), None, None, None).unwrap();
        assert!(outcome.failures.is_empty(), "failures: {:?}", outcome.failures);
        assert_eq!(outcome.reports.len(), 2);

        cmd_simulate(&config, step_dir.path()).unwrap();
        cmd_label(&config, step_dir.path(), None).unwrap();
        cmd_sample(&config, step_dir.path(), None).unwrap();
        cmd_fit(&config, step_dir.path(), None).unwrap();
        cmd_evaluate(&config, step_dir.path(), None).unwrap();

        // File-mediated and in-process routes agree byte-for-byte.
        for file in [formats::REPORT_FILE, formats::SUMMARY_FILE, formats::PLOT_METRICS_FILE] {
            let a = std::fs::read_to_string(grid_dir.path().join(file)).unwrap();
            let b = std::fs::read_to_string(step_dir.path().join(file)).unwrap();
            assert_eq!(a, b, "{file} differs between run-grid and stepwise routes");
        }
        let rates = formats::rates_file("1a(i)");
        let a = std::fs::read_to_string(grid_dir.path().join(&rates)).unwrap();
        let b = std::fs::read_to_string(step_dir.path().join(&rates)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn attribution_stage_writes_both_artifacts() {
        let config = tiny_config();
        let dir = tempfile::tempdir().unwrap();
        let only = vec!["1a(i)".to_string()];

        cmd_simulate(&config, dir.path()).unwrap();
        cmd_label(&config, dir.path(), Some(&only)).unwrap();
        cmd_sample(&config, dir.path(), Some(&only)).unwrap();
        cmd_fit(&config, dir.path(), Some(&only)).unwrap();
        cmd_attribute(&config, dir.path(), Some(&only)).unwrap();

        let text =
            std::fs::read_to_string(dir.path().join(formats::attribution_file("1a(i)"))).unwrap();
        let (names, rows) = formats::attribution_from_csv(&text).unwrap();
        assert_eq!(names.len(), FeatureSchema::standard().len());
        assert!(!rows.is_empty());

        let text =
            std::fs::read_to_string(dir.path().join(formats::ranking_file("1a(i)"))).unwrap();
        let ranking = formats::ranking_from_csv(&text).unwrap();
        assert_eq!(ranking.entries.len(), names.len());
        assert_eq!(ranking.n_rows, rows.len());
    }

    #[test]
    fn missing_portfolio_reports_exit_code_two() {
        let config = tiny_config();
        let dir = tempfile::tempdir().unwrap();
        let err = cmd_label(&config, dir.path(), None).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains(formats::PORTFOLIO_FILE));
    }
}
