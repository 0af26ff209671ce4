//! Penalised logistic log-likelihood and its Newton (IRLS) maximiser.
//!
//! The kernel works on a raw design matrix whose first column is the
//! intercept; the ridge penalty applies to every other coefficient. Callers
//! are expected to hand in well-conditioned (standardised) columns.

use crate::error::Result;
use crate::matrix::{Cholesky, Mat};
use crate::scalar::Scalar;

/// Slope magnitude (on the caller's standardised scale) beyond which a fit
/// is treated as diverging: odds ratios of e^25 per standard deviation do
/// not occur in real data, but are exactly where quasi-separated likelihoods
/// wander while their gradient fades below any tolerance.
const DIVERGENCE_BOUND: f64 = 25.0;

#[derive(Debug, Clone, Copy)]
pub struct IrlsOptions<S> {
    pub ridge: S,
    pub max_iterations: usize,
    /// Stop when the gradient's max-absolute entry falls below this.
    pub gradient_tolerance: S,
    /// ... or when |ΔLL| / (|LL| + 1) falls below this.
    pub loglik_tolerance: S,
}

/// Raw fit on the caller's scale.
#[derive(Debug, Clone)]
pub struct IrlsFit<S> {
    /// Coefficients, intercept first.
    pub beta: Vec<S>,
    /// Inverse of the penalised observed information at `beta`, if it was
    /// invertible there.
    pub covariance: Option<Mat<S>>,
    /// Unpenalised log-likelihood at `beta`.
    pub log_likelihood: S,
    pub iterations: usize,
    pub converged: bool,
}

/// σ(w) without clamping; saturates to exactly 0/1 in the far tails.
fn raw_sigmoid<S: Scalar>(w: S) -> S {
    if w >= S::zero() {
        S::one() / (S::one() + (-w).exp())
    } else {
        let e = w.exp();
        e / (S::one() + e)
    }
}

/// ln(1 + e^w), stable for large |w|.
fn softplus<S: Scalar>(w: S) -> S {
    w.max(S::zero()) + (-w.abs()).exp().ln_1p()
}

/// Σᵢ [yᵢ·wᵢ − ln(1+e^{wᵢ})] − (ridge/2)·Σ_{j≥1} βⱼ², with wᵢ the i-th
/// linear predictor. Set `ridge` to zero for the plain log-likelihood.
pub fn penalised_log_likelihood<S: Scalar>(x: &Mat<S>, y: &[S], beta: &[S], ridge: S) -> S {
    let mut ll = S::zero();
    for (i, &yi) in y.iter().enumerate() {
        let w = crate::matrix::dot(x.row(i), beta);
        ll += yi * w - softplus(w);
    }
    let mut penalty = S::zero();
    for &b in &beta[1..] {
        penalty += b * b;
    }
    ll - S::c(0.5) * ridge * penalty
}

/// Gradient of [`penalised_log_likelihood`] in β: Xᵀ(y − π) − ridge·(0, β₁…).
pub fn penalised_gradient<S: Scalar>(x: &Mat<S>, y: &[S], beta: &[S], ridge: S) -> Vec<S> {
    let mut residuals = Vec::with_capacity(y.len());
    for (i, &yi) in y.iter().enumerate() {
        let w = crate::matrix::dot(x.row(i), beta);
        residuals.push(yi - raw_sigmoid(w));
    }
    let mut g = x.t_mul_vec(&residuals);
    for (j, gj) in g.iter_mut().enumerate().skip(1) {
        *gj -= ridge * beta[j];
    }
    g
}

fn max_abs<S: Scalar>(v: &[S]) -> S {
    v.iter().fold(S::zero(), |m, &x| m.max(x.abs()))
}

/// Penalised observed information XᵀWX + ridge·diag(0,1,…,1) at `beta`.
fn information<S: Scalar>(x: &Mat<S>, beta: &[S], ridge: S) -> Mat<S> {
    let floor = S::c(1e-12);
    let weights: Vec<S> = (0..x.nrows())
        .map(|i| {
            let p = raw_sigmoid(crate::matrix::dot(x.row(i), beta));
            (p * (S::one() - p)).max(floor)
        })
        .collect();
    let mut info = x.weighted_gram(&weights);
    for j in 1..x.ncols() {
        let v = info.get(j, j) + ridge;
        info.set(j, j, v);
    }
    info
}

/// Maximise the penalised log-likelihood by Newton steps with step-halving.
///
/// Never panics on difficult data: separation and mid-iteration numeric
/// trouble surface as `converged = false` on the best iterate reached. Only
/// a structurally singular information matrix at the start is an error.
pub fn solve<S: Scalar>(x: &Mat<S>, y: &[S], options: &IrlsOptions<S>) -> Result<IrlsFit<S>> {
    let p = x.ncols();
    let mut beta = vec![S::zero(); p];
    let mut pll = penalised_log_likelihood(x, y, &beta, options.ridge);
    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=options.max_iterations {
        let gradient = penalised_gradient(x, y, &beta, options.ridge);
        if max_abs(&gradient) < options.gradient_tolerance {
            converged = true;
            break;
        }
        let info = information(x, &beta, options.ridge);
        let step = match Cholesky::new(&info) {
            Ok(chol) => chol.solve(&gradient),
            // A singular information matrix on the very first step means the
            // design itself is rank-deficient; later on it means the fit has
            // wandered into a flat region (separation), which is not an error.
            Err(e) => {
                if iter == 1 {
                    return Err(e);
                }
                break;
            }
        };
        let mut scale = S::one();
        let mut candidate = None;
        for _ in 0..40 {
            let trial: Vec<S> =
                beta.iter().zip(&step).map(|(&b, &d)| b + scale * d).collect();
            let trial_pll = penalised_log_likelihood(x, y, &trial, options.ridge);
            if trial_pll.is_finite() && trial_pll >= pll {
                candidate = Some((trial, trial_pll));
                break;
            }
            scale /= S::c(2.0);
        }
        let Some((next, next_pll)) = candidate else {
            // No step length improves the objective: numerically at a
            // stationary point the gradient test did not recognise.
            break;
        };
        iterations = iter;
        let gain = (next_pll - pll).abs() / (next_pll.abs() + S::one());
        beta = next;
        pll = next_pll;
        if gain < options.loglik_tolerance {
            converged = true;
            break;
        }
    }

    if max_abs(&beta[1..]) > S::c(DIVERGENCE_BOUND) || !pll.is_finite() {
        converged = false;
    }
    let covariance = Cholesky::new(&information(x, &beta, options.ridge))
        .ok()
        .map(|c| c.inverse());
    let log_likelihood = penalised_log_likelihood(x, y, &beta, S::zero());
    Ok(IrlsFit { beta, covariance, log_likelihood, iterations, converged })
}
