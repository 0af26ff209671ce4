//! Binary logistic regression: design assembly, penalised maximum-likelihood
//! fitting via iteratively reweighted least squares, prediction, and Wald
//! inference.
//!
//! Numeric columns are standardised internally for conditioning; reported
//! coefficients and standard errors are on the original feature scale. A
//! small ridge penalty (on the standardised scale, never the intercept)
//! keeps fits defined when rare events quasi-separate the data.

mod design;
mod irls;

pub use design::{ColumnKind, Design, DesignColumn};
pub use irls::{penalised_gradient, penalised_log_likelihood};

use crate::dataset::LabeledPanel;
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::scalar::Scalar;
use crate::Real;

/// Fitting controls. The defaults match the documented configuration
/// defaults of the command-line front end.
#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    /// Ridge strength applied to standardised slopes; ≥ 0.
    pub ridge: Real,
    pub max_iterations: usize,
    /// Converged when the penalised gradient's max-abs entry drops below this…
    pub gradient_tolerance: Real,
    /// …or when the relative penalised log-likelihood gain drops below this.
    pub loglik_tolerance: Real,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            ridge: 1e-6,
            max_iterations: 100,
            gradient_tolerance: 1e-8,
            loglik_tolerance: 1e-10,
        }
    }
}

impl FitOptions {
    fn validate(&self) -> Result<()> {
        if !(self.ridge.is_finite() && self.ridge >= 0.0) {
            return Err(Error::InvalidParameter {
                what: format!("ridge must be finite and >= 0, got {}", self.ridge),
            });
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter { what: "max_iterations must be >= 1".into() });
        }
        // Written to also reject NaN, which fails every comparison.
        let positive = |t: Real| t > 0.0;
        if !positive(self.gradient_tolerance) || !positive(self.loglik_tolerance) {
            return Err(Error::InvalidParameter {
                what: "convergence tolerances must be > 0".into(),
            });
        }
        Ok(())
    }
}

/// A fitted logistic model. Coefficients are on the original feature scale,
/// aligned to `design.columns`; the intercept is held separately.
#[derive(Debug, Clone)]
pub struct LogitModel {
    pub design: Design,
    pub intercept: Real,
    pub coefficients: Vec<Real>,
    /// Wald standard error of the intercept (NaN when the information
    /// matrix was not invertible at the optimum).
    pub intercept_se: Real,
    /// Wald standard errors aligned to `coefficients` (NaN as above).
    pub standard_errors: Vec<Real>,
    /// Unpenalised log-likelihood at the optimum.
    pub log_likelihood: Real,
    pub iterations: usize,
    pub converged: bool,
    /// Present whenever `converged` is false.
    pub warning: Option<String>,
}

impl LogitModel {
    pub fn schema_hash(&self) -> u64 {
        self.design.schema_hash
    }
}

/// One row of a Wald inference table.
#[derive(Debug, Clone, PartialEq)]
pub struct WaldRow {
    pub name: String,
    pub estimate: Real,
    pub std_error: Real,
    pub z: Real,
    pub p_value: Real,
}

/// σ(w) = 1/(1+e^{−w}), evaluated without overflow and clamped to the open
/// interval (0, 1) so downstream log-odds and ranking code never sees an
/// exact 0 or 1.
pub fn sigmoid<S: Scalar>(w: S) -> S {
    let raw = if w >= S::zero() {
        S::one() / (S::one() + (-w).exp())
    } else {
        let e = w.exp();
        e / (S::one() + e)
    };
    let lo = S::min_positive_value();
    let hi = S::one() - S::epsilon() / S::c(2.0);
    raw.max(lo).min(hi)
}

/// Standard normal CDF via a rational approximation of erf (Abramowitz &
/// Stegun 7.1.26, |error| < 1.5e−7) — ample for Wald p-values.
pub fn normal_cdf(z: Real) -> Real {
    let x = z / std::f64::consts::SQRT_2;
    let t = 1.0 / (1.0 + 0.3275911 * x.abs());
    let poly = t
        * (0.254829592
            + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    let erf = 1.0 - poly * (-x * x).exp();
    0.5 * (1.0 + erf.copysign(x))
}

/// Standardised design matrix plus everything needed to undo the transform.
struct Prepared {
    design: Design,
    /// n × (columns + 1); column 0 is the intercept.
    x: Mat<Real>,
    y: Vec<Real>,
    /// Per design column: (mean, sd) used for standardisation; (0, 1) for
    /// dummy columns.
    transforms: Vec<(Real, Real)>,
}

fn prepare(panel: &LabeledPanel, options: &FitOptions) -> Result<Prepared> {
    options.validate()?;
    let n = panel.rows.len();
    if n == 0 {
        return Err(Error::EmptyPanel { what: "model fitting panel".into() });
    }
    let positives = panel.rows.iter().filter(|r| r.y).count();
    if positives == 0 || positives == n {
        return Err(Error::DegenerateOutcome { n, value: (positives > 0) as u8 });
    }
    let design = Design::from_panel(panel)?;
    let p = design.columns.len();
    let mut x = Mat::zeros(n, p + 1);
    for (i, row) in panel.rows.iter().enumerate() {
        x.set(i, 0, 1.0);
        for (j, v) in design.expand_row(&row.values)?.into_iter().enumerate() {
            x.set(i, j + 1, v);
        }
    }
    let mut transforms = Vec::with_capacity(p);
    for j in 0..p {
        let standardise = matches!(design.columns[j].kind, ColumnKind::Numeric { .. });
        if !standardise {
            transforms.push((0.0, 1.0));
            continue;
        }
        let mut mean = 0.0;
        for i in 0..n {
            mean += x.get(i, j + 1);
        }
        mean /= n as Real;
        let mut var = 0.0;
        for i in 0..n {
            var += (x.get(i, j + 1) - mean).powi(2);
        }
        let sd = (var / n as Real).sqrt();
        let sd = if sd.is_finite() && sd > 0.0 { sd } else { 1.0 };
        for i in 0..n {
            let v = (x.get(i, j + 1) - mean) / sd;
            x.set(i, j + 1, v);
        }
        transforms.push((mean, sd));
    }
    let y = panel.rows.iter().map(|r| r.y as u8 as Real).collect();
    Ok(Prepared { design, x, y, transforms })
}

impl Prepared {
    fn irls_options(&self, options: &FitOptions) -> irls::IrlsOptions<Real> {
        irls::IrlsOptions {
            ridge: options.ridge,
            max_iterations: options.max_iterations,
            gradient_tolerance: options.gradient_tolerance,
            loglik_tolerance: options.loglik_tolerance,
        }
    }
}

/// Fit a logistic model by penalised maximum likelihood.
///
/// The panel must contain both outcome classes. Non-convergence (typically
/// separation) is not an error: the model comes back with
/// `converged = false` and a warning.
pub fn fit(panel: &LabeledPanel, options: &FitOptions) -> Result<LogitModel> {
    let prepared = prepare(panel, options)?;
    let sol = irls::solve(&prepared.x, &prepared.y, &prepared.irls_options(options))?;
    let p = prepared.design.columns.len();

    // Undo standardisation: β_j = β_std_j / sd_j, and the intercept absorbs
    // the centring shifts.
    let mut coefficients = Vec::with_capacity(p);
    let mut intercept = sol.beta[0];
    for j in 0..p {
        let (mean, sd) = prepared.transforms[j];
        coefficients.push(sol.beta[j + 1] / sd);
        intercept -= sol.beta[j + 1] * mean / sd;
    }

    // Delta-method transfer of the covariance: var(aᵀβ_std) = aᵀ C a with
    // a the row of the unstandardising map for each reported coefficient.
    let (intercept_se, standard_errors) = match &sol.covariance {
        Some(cov) => {
            let mut a0 = vec![0.0; p + 1];
            a0[0] = 1.0;
            for j in 0..p {
                let (mean, sd) = prepared.transforms[j];
                a0[j + 1] = -mean / sd;
            }
            let mut quad = 0.0;
            for r in 0..=p {
                for c in 0..=p {
                    quad += a0[r] * cov.get(r, c) * a0[c];
                }
            }
            let ses = (0..p)
                .map(|j| (cov.get(j + 1, j + 1).max(0.0)).sqrt() / prepared.transforms[j].1)
                .collect();
            (quad.max(0.0).sqrt(), ses)
        }
        None => (Real::NAN, vec![Real::NAN; p]),
    };

    let warning = (!sol.converged).then(|| {
        format!(
            "no convergence after {} iterations; coefficients drifted on the \
             standardised scale, which usually means (quasi-)separated data",
            sol.iterations
        )
    });
    Ok(LogitModel {
        design: prepared.design,
        intercept,
        coefficients,
        intercept_se,
        standard_errors,
        log_likelihood: sol.log_likelihood,
        iterations: sol.iterations,
        converged: sol.converged,
        warning,
    })
}

/// Predicted event probability for one schema-ordered feature vector.
pub fn predict(model: &LogitModel, values: &[Real]) -> Result<Real> {
    let row = model.design.expand_row(values)?;
    let w = model.intercept + crate::matrix::dot(&row, &model.coefficients);
    if !w.is_finite() {
        return Err(Error::NonFiniteInput { what: "linear predictor".into() });
    }
    Ok(sigmoid(w))
}

/// Score every row of a panel, refusing panels built under another schema.
pub fn score_panel(model: &LogitModel, panel: &LabeledPanel) -> Result<Vec<Real>> {
    let panel_hash = panel.schema.hash();
    if panel_hash != model.design.schema_hash {
        return Err(Error::SchemaMismatch { model: model.design.schema_hash, panel: panel_hash });
    }
    panel.rows.iter().map(|r| predict(model, &r.values)).collect()
}

/// Wald table: estimate, standard error, z, and two-sided normal p-value
/// for the intercept (first row) and every coefficient.
pub fn wald_inference(model: &LogitModel) -> Result<Vec<WaldRow>> {
    if !model.converged {
        return Err(Error::NotConverged { iterations: model.iterations });
    }
    if !model.intercept_se.is_finite() || model.standard_errors.iter().any(|s| !s.is_finite()) {
        return Err(Error::SingularInformation);
    }
    let mut rows = Vec::with_capacity(model.coefficients.len() + 1);
    let mut push = |name: String, estimate: Real, se: Real| {
        let z = if se > 0.0 { estimate / se } else { Real::INFINITY * estimate.signum() };
        let p_value = (2.0 * (1.0 - normal_cdf(z.abs()))).clamp(0.0, 1.0);
        rows.push(WaldRow { name, estimate, std_error: se, z, p_value });
    };
    push("(intercept)".into(), model.intercept, model.intercept_se);
    for (j, col) in model.design.columns.iter().enumerate() {
        push(col.name.clone(), model.coefficients[j], model.standard_errors[j]);
    }
    Ok(rows)
}

/// Fit, then compare the analytic penalised gradient at the optimum against
/// central finite differences with the given step (on the standardised
/// scale). Returns the max-abs discrepancy across coordinates — a fitting
/// self-diagnostic.
pub fn gradient_check(panel: &LabeledPanel, options: &FitOptions, step: Real) -> Result<Real> {
    let prepared = prepare(panel, options)?;
    let sol = irls::solve(&prepared.x, &prepared.y, &prepared.irls_options(options))?;
    let analytic = penalised_gradient(&prepared.x, &prepared.y, &sol.beta, options.ridge);
    let mut worst: Real = 0.0;
    for j in 0..sol.beta.len() {
        let mut hi = sol.beta.clone();
        let mut lo = sol.beta.clone();
        hi[j] += step;
        lo[j] -= step;
        let fd = (penalised_log_likelihood(&prepared.x, &prepared.y, &hi, options.ridge)
            - penalised_log_likelihood(&prepared.x, &prepared.y, &lo, options.ridge))
            / (2.0 * step);
        worst = worst.max((analytic[j] - fd).abs());
    }
    Ok(worst)
}
