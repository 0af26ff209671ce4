//! Run configuration: a sectioned TOML file in which every key has a
//! default, so an empty file is a complete (and canonical) experiment.
//!
//! Unknown keys are rejected — a typo in a sweep config should fail loudly,
//! not silently run the defaults. Months are written `YYYY-MM`.
//!
//! ```toml
//! seed = 42
//! out_dir = "out"
//!
//! [simulation]
//! n_loans = 3000
//! window_start = "2005-01"
//! window_end = "2014-12"
//! crisis_start = "2008-01"          # optional; omit both for no crisis
//! crisis_end = "2009-12"
//! cure_after_default_probability = 0.20
//! writeoff_probability = 0.06
//! settle_probability = 0.003
//! origination_lead_months = 48
//! max_g0 = 9
//!
//! [simulation.worsen]               # per-field overrides of the monthly
//! intercept = -3.9                  # worsening transition's log-odds
//!
//! [simulation.cure]                 # likewise for the cure transition
//!
//! [grid]
//! d = [1, 2]
//! s = [1, 2, 3]
//! k = [3, 6, 9, 12]
//! extensions = [[1, 1, 18], [1, 1, 24], [1, 1, 36]]
//!
//! [sampling]
//! target_rows = 50000               # capped at the panel size
//! train_fraction = 0.7
//! split_mode = "observation"        # or "account"
//!
//! [model]
//! ridge = 1e-6
//! max_iterations = 100
//! gradient_tolerance = 1e-8
//! loglik_tolerance = 1e-10
//!
//! [evaluation]
//! cost_ratio = 6.0
//! bootstrap_replicates = 200
//! post_crisis_start = "2010-01"
//! emit_plots = false                # SVG charts next to the plot CSVs
//!
//! [attribution]
//! method = "exact"                  # or "monte-carlo"
//! mc_samples = 500
//! ```

use std::fmt;
use std::path::Path;

use serde::Deserialize;

use sicr_core::calendar::{CalMonth, MonthRange};
use sicr_core::dataset::SplitMode;
use sicr_core::error::{Error, Result};
use sicr_core::event::GridEntry;
use sicr_core::evalx::EvalOptions;
use sicr_core::logit::FitOptions;
use sicr_core::synth::{SimConfig, TransitionParams};

/// `YYYY-MM` in TOML, [`CalMonth`] in memory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Month(pub CalMonth);

impl<'de> Deserialize<'de> for Month {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map(Month).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for Month {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// `""` clears an optional month (TOML has no way to unset a defaulted key).
fn month_or_empty<'de, D: serde::Deserializer<'de>>(
    deserializer: D,
) -> std::result::Result<Option<Month>, D::Error> {
    let s = String::deserialize(deserializer)?;
    if s.is_empty() {
        Ok(None)
    } else {
        s.parse().map(Month).map(Some).map_err(serde::de::Error::custom)
    }
}

/// Whole experiment configuration. Every field defaults, so `RunConfig::default()`
/// is the canonical study setup and any TOML file only states deviations.
#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Root seed; every component stream is derived from it.
    pub seed: Seed,
    /// Directory all artifacts are written to (and read back from).
    pub out_dir: OutDir,
    pub simulation: SimulationBlock,
    pub grid: GridBlock,
    pub sampling: SamplingBlock,
    pub model: ModelBlock,
    pub evaluation: EvaluationBlock,
    pub attribution: AttributionBlock,
}

/// Newtype so the root seed can default without a custom `RunConfig` impl.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

impl Default for Seed {
    fn default() -> Self {
        Seed(42)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(transparent)]
pub struct OutDir(pub String);

impl Default for OutDir {
    fn default() -> Self {
        OutDir("out".into())
    }
}

/// Per-field overrides of one transition's log-odds loadings; anything left
/// out keeps the built-in default for that transition.
#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct TransitionOverrides {
    pub intercept: Option<f64>,
    pub repo_rate: Option<f64>,
    pub dti_level: Option<f64>,
    pub real_income_growth: Option<f64>,
    pub employment_growth: Option<f64>,
    pub prelim_perc: Option<f64>,
    pub rate_margin: Option<f64>,
    pub pay_cash: Option<f64>,
    pub frailty: Option<f64>,
    pub g0_escalation: Option<f64>,
}

impl TransitionOverrides {
    fn apply(&self, mut base: TransitionParams) -> TransitionParams {
        if let Some(v) = self.intercept {
            base.intercept = v;
        }
        if let Some(v) = self.repo_rate {
            base.repo_rate = v;
        }
        if let Some(v) = self.dti_level {
            base.dti_level = v;
        }
        if let Some(v) = self.real_income_growth {
            base.real_income_growth = v;
        }
        if let Some(v) = self.employment_growth {
            base.employment_growth = v;
        }
        if let Some(v) = self.prelim_perc {
            base.prelim_perc = v;
        }
        if let Some(v) = self.rate_margin {
            base.rate_margin = v;
        }
        if let Some(v) = self.pay_cash {
            base.pay_cash = v;
        }
        if let Some(v) = self.frailty {
            base.frailty = v;
        }
        if let Some(v) = self.g0_escalation {
            base.g0_escalation = v;
        }
        base
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationBlock {
    pub n_loans: u32,
    pub window_start: Month,
    pub window_end: Month,
    /// Crisis regime months; set both or neither, `""` clears the default.
    #[serde(deserialize_with = "month_or_empty")]
    pub crisis_start: Option<Month>,
    #[serde(deserialize_with = "month_or_empty")]
    pub crisis_end: Option<Month>,
    pub cure_after_default_probability: f64,
    pub writeoff_probability: f64,
    pub settle_probability: f64,
    pub origination_lead_months: u32,
    pub max_g0: u32,
    pub worsen: TransitionOverrides,
    pub cure: TransitionOverrides,
}

impl Default for SimulationBlock {
    fn default() -> Self {
        let base = SimConfig::default();
        SimulationBlock {
            n_loans: base.n_loans,
            window_start: Month(base.window.start),
            window_end: Month(base.window.end),
            crisis_start: base.crisis_window.map(|w| Month(w.start)),
            crisis_end: base.crisis_window.map(|w| Month(w.end)),
            cure_after_default_probability: base.cure_after_default_probability,
            writeoff_probability: base.writeoff_probability,
            settle_probability: base.settle_probability,
            origination_lead_months: base.origination_lead_months,
            max_g0: base.max_g0,
            worsen: TransitionOverrides::default(),
            cure: TransitionOverrides::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct GridBlock {
    /// Delinquency thresholds `d`.
    pub d: Vec<u32>,
    /// Persistence values `s`.
    pub s: Vec<u32>,
    /// Outcome look-aheads `k`.
    pub k: Vec<u32>,
    /// Extra `[d, s, k]` definitions outside the cartesian product.
    pub extensions: Vec<(u32, u32, u32)>,
}

impl Default for GridBlock {
    /// The canonical 24-definition grid plus the extended look-aheads of the
    /// least strict class.
    fn default() -> Self {
        GridBlock {
            d: vec![1, 2],
            s: vec![1, 2, 3],
            k: vec![3, 6, 9, 12],
            extensions: vec![(1, 1, 18), (1, 1, 24), (1, 1, 36)],
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingBlock {
    /// Target subsample size; panels smaller than this are used whole.
    pub target_rows: usize,
    pub train_fraction: f64,
    /// `"observation"` or `"account"`.
    pub split_mode: String,
}

impl Default for SamplingBlock {
    fn default() -> Self {
        SamplingBlock { target_rows: 50_000, train_fraction: 0.7, split_mode: "observation".into() }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ModelBlock {
    pub ridge: f64,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub loglik_tolerance: f64,
}

impl Default for ModelBlock {
    fn default() -> Self {
        let base = FitOptions::default();
        ModelBlock {
            ridge: base.ridge,
            max_iterations: base.max_iterations,
            gradient_tolerance: base.gradient_tolerance,
            loglik_tolerance: base.loglik_tolerance,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluationBlock {
    /// False-negative to false-positive cost ratio `a`.
    pub cost_ratio: f64,
    pub bootstrap_replicates: usize,
    pub post_crisis_start: Month,
    /// Also render SVG line charts next to the plot-data CSVs.
    pub emit_plots: bool,
}

impl Default for EvaluationBlock {
    fn default() -> Self {
        let base = EvalOptions::default();
        EvaluationBlock {
            cost_ratio: base.cost_ratio,
            bootstrap_replicates: base.replicates,
            post_crisis_start: Month(base.post_crisis_start),
            emit_plots: false,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct AttributionBlock {
    /// `"exact"` or `"monte-carlo"`.
    pub method: String,
    /// Permutation samples per row for the Monte Carlo method.
    pub mc_samples: usize,
}

impl Default for AttributionBlock {
    fn default() -> Self {
        AttributionBlock { method: "exact".into(), mc_samples: 500 }
    }
}

impl RunConfig {
    /// Parse a TOML string; every key optional, unknown keys rejected.
    pub fn from_toml(text: &str) -> Result<RunConfig> {
        let config: RunConfig = toml::from_str(text)
            .map_err(|e| Error::InvalidParameter { what: format!("config: {e}") })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidParameter {
            what: format!("config {}: {e}", path.display()),
        })?;
        RunConfig::from_toml(&text)
    }

    fn validate(&self) -> Result<()> {
        if self.simulation.window_start.0 > self.simulation.window_end.0 {
            return Err(Error::InvalidParameter {
                what: format!(
                    "simulation window starts {} after it ends {}",
                    self.simulation.window_start, self.simulation.window_end
                ),
            });
        }
        match (self.simulation.crisis_start, self.simulation.crisis_end) {
            (None, None) => {}
            (Some(a), Some(b)) if a.0 <= b.0 => {}
            (Some(a), Some(b)) => {
                return Err(Error::InvalidParameter {
                    what: format!("crisis window starts {a} after it ends {b}"),
                });
            }
            _ => {
                return Err(Error::InvalidParameter {
                    what: "crisis_start and crisis_end must be set together".into(),
                });
            }
        }
        if self.grid.d.is_empty() || self.grid.s.is_empty() || self.grid.k.is_empty() {
            return Err(Error::InvalidParameter {
                what: "grid value sets d, s, k must be non-empty".into(),
            });
        }
        for &v in self.grid.d.iter().chain(&self.grid.s).chain(&self.grid.k) {
            if v == 0 {
                return Err(Error::InvalidParameter { what: "grid values must be >= 1".into() });
            }
        }
        for &(d, s, k) in &self.grid.extensions {
            if d == 0 || s == 0 || k == 0 {
                return Err(Error::InvalidParameter {
                    what: format!("grid extension ({d}, {s}, {k}) has a zero component"),
                });
            }
        }
        self.split_mode()?;
        if !(self.sampling.train_fraction > 0.0 && self.sampling.train_fraction < 1.0) {
            return Err(Error::InvalidParameter {
                what: format!(
                    "sampling.train_fraction must lie in (0, 1), got {}",
                    self.sampling.train_fraction
                ),
            });
        }
        match self.attribution.method.as_str() {
            "exact" | "monte-carlo" => {}
            other => {
                return Err(Error::InvalidParameter {
                    what: format!("attribution.method must be `exact` or `monte-carlo`, got `{other}`"),
                });
            }
        }
        Ok(())
    }

    /// The simulation setup this config describes. The generator's own seed
    /// is derived from the root seed, so `--seed` shifts the portfolio too.
    pub fn sim_config(&self) -> SimConfig {
        let s = &self.simulation;
        let defaults = SimConfig::default();
        SimConfig {
            n_loans: s.n_loans,
            window: MonthRange::new(s.window_start.0, s.window_end.0),
            crisis_window: s
                .crisis_start
                .zip(s.crisis_end)
                .map(|(a, b)| MonthRange::new(a.0, b.0)),
            worsen: s.worsen.apply(defaults.worsen),
            cure: s.cure.apply(defaults.cure),
            cure_after_default_probability: s.cure_after_default_probability,
            writeoff_probability: s.writeoff_probability,
            settle_probability: s.settle_probability,
            origination_lead_months: s.origination_lead_months,
            max_g0: s.max_g0,
            seed: sicr_core::seed::derive_str(self.seed.0, "portfolio"),
        }
    }

    /// The labelled definition grid, in report order.
    pub fn grid_entries(&self) -> Vec<GridEntry> {
        sicr_core::event::grid_with_extensions(
            &self.grid.d,
            &self.grid.s,
            &self.grid.k,
            &self.grid.extensions,
        )
    }

    pub fn split_mode(&self) -> Result<SplitMode> {
        SplitMode::parse(&self.sampling.split_mode).ok_or_else(|| Error::InvalidParameter {
            what: format!(
                "sampling.split_mode must be `observation` or `account`, got `{}`",
                self.sampling.split_mode
            ),
        })
    }

    pub fn fit_options(&self) -> FitOptions {
        FitOptions {
            ridge: self.model.ridge,
            max_iterations: self.model.max_iterations,
            gradient_tolerance: self.model.gradient_tolerance,
            loglik_tolerance: self.model.loglik_tolerance,
        }
    }

    /// Evaluation knobs for one definition, keyed by that definition's seed.
    pub fn eval_options(&self, definition_seed: u64) -> EvalOptions {
        EvalOptions {
            cost_ratio: self.evaluation.cost_ratio,
            replicates: self.evaluation.bootstrap_replicates,
            post_crisis_start: self.evaluation.post_crisis_start.0,
            seed: definition_seed,
            fit: self.fit_options(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_toml_is_the_canonical_setup() {
        let config = RunConfig::from_toml("").unwrap();
        assert_eq!(config, RunConfig::default());
        assert_eq!(config.seed.0, 42);
        assert_eq!(config.out_dir.0, "out");
        assert_eq!(config.grid_entries().len(), 27);
        assert_eq!(config.sampling.target_rows, 50_000);
        assert_eq!(config.split_mode().unwrap(), SplitMode::Observation);
        assert_eq!(config.evaluation.cost_ratio, 6.0);
        assert!(!config.evaluation.emit_plots);

        // The derived simulation differs from the bare default only in its
        // seed, which is a sub-stream of the root seed.
        let sim = config.sim_config();
        let base = SimConfig::default();
        assert_eq!(SimConfig { seed: base.seed, ..sim.clone() }, base);
        assert_ne!(sim.seed, base.seed);
    }

    #[test]
    fn fields_override_and_nest() {
        let config = RunConfig::from_toml(
            r#"
            seed = 7
            out_dir = "elsewhere"

            [simulation]
            n_loans = 250
            window_start = "2006-06"
            window_end = "2012-06"

            [simulation.worsen]
            intercept = -3.0

            [grid]
            d = [1]
            s = [1]
            k = [3, 6, 9, 12]
            extensions = [[1, 1, 18]]

            [sampling]
            target_rows = 500
            split_mode = "account"

            [evaluation]
            bootstrap_replicates = 150
            "#,
        )
        .unwrap();
        assert_eq!(config.seed.0, 7);
        assert_eq!(config.out_dir.0, "elsewhere");
        let sim = config.sim_config();
        assert_eq!(sim.n_loans, 250);
        assert_eq!(sim.window.start, CalMonth::new(2006, 6));
        assert_eq!(sim.worsen.intercept, -3.0);
        // Untouched loadings keep their defaults.
        assert_eq!(sim.worsen.repo_rate, SimConfig::default().worsen.repo_rate);
        assert_eq!(sim.cure, SimConfig::default().cure);

        let labels: Vec<_> = config.grid_entries().iter().map(|e| e.label.clone()).collect();
        assert_eq!(labels, ["1a(i)", "1a(ii)", "1a(iii)", "1a(iv)", "1a(v)"]);
        assert_eq!(config.split_mode().unwrap(), SplitMode::Account);
        assert_eq!(config.eval_options(1).replicates, 150);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        for text in [
            "sede = 7",
            "[simulation]\nloans = 10",
            "[grid]\nthresholds = [1]",
            "[sampling]\ntrain_frac = 0.7",
            "[evaluation]\nplots = true",
            "[simulation.worsen]\nslope = 1.0",
        ] {
            let err = RunConfig::from_toml(text).unwrap_err();
            assert_eq!(err.tag(), "invalid-parameter", "accepted: {text}");
        }
    }

    #[test]
    fn malformed_values_are_rejected() {
        // Month syntax.
        assert!(RunConfig::from_toml("[simulation]\nwindow_start = \"2005-13\"").is_err());
        // Window order.
        assert!(RunConfig::from_toml(
            "[simulation]\nwindow_start = \"2010-01\"\nwindow_end = \"2005-01\""
        )
        .is_err());
        // Half a crisis window.
        assert!(RunConfig::from_toml("[simulation]\ncrisis_start = \"2008-01\"\ncrisis_end = \"\"").is_err());
        let half = RunConfig::from_toml(
            "[simulation]\ncrisis_end = \"2009-12\"\ncrisis_start = \"2010-01\"",
        );
        assert!(half.is_err());
        // Empty grid axis.
        assert!(RunConfig::from_toml("[grid]\nd = []").is_err());
        assert!(RunConfig::from_toml("[grid]\nk = [0]").is_err());
        assert!(RunConfig::from_toml("[grid]\nextensions = [[1, 0, 3]]").is_err());
        // Bad enums and fractions.
        assert!(RunConfig::from_toml("[sampling]\nsplit_mode = \"rowwise\"").is_err());
        assert!(RunConfig::from_toml("[sampling]\ntrain_fraction = 1.0").is_err());
        assert!(RunConfig::from_toml("[attribution]\nmethod = \"kernel\"").is_err());
    }

    #[test]
    fn crisis_window_can_be_moved_or_cleared() {
        let config = RunConfig::from_toml(
            "[simulation]\ncrisis_start = \"2007-06\"\ncrisis_end = \"2009-06\"",
        )
        .unwrap();
        let window = config.sim_config().crisis_window.unwrap();
        assert_eq!(window.start, CalMonth::new(2007, 6));
        assert_eq!(window.end, CalMonth::new(2009, 6));

        // Defaults carry a crisis; empty strings switch it off.
        let cleared =
            RunConfig::from_toml("[simulation]\ncrisis_start = \"\"\ncrisis_end = \"\"").unwrap();
        assert!(cleared.sim_config().crisis_window.is_none());
        // Clearing only one side leaves a half-open window: rejected.
        assert!(RunConfig::from_toml("[simulation]\ncrisis_start = \"\"").is_err());
    }
}
