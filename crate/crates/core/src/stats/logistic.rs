//! Binary logistic regression by Newton–Raphson (IRLS) with optional ridge.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::dist::{chi2_sf, wald_p};

/// Ridge applied automatically when the data are (quasi-)separated.
pub const SEPARATION_RIDGE: f64 = 1e-4;

const MAX_ITER: usize = 200;
const SCORE_TOL: f64 = 1e-8;
const STEP_TOL: f64 = 1e-10;
/// Linear predictors beyond this magnitude mean fitted probabilities have
/// saturated, which only happens when the classes separate.
const SATURATED_ETA: f64 = 25.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticFit {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    /// Wald standard errors, intercept first.
    pub std_errors: Vec<f64>,
    /// Two-sided Wald p-values, intercept first.
    pub p_values: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Ridge strength actually used.
    pub ridge: f64,
    /// Set when the separation fallback kicked in.
    pub penalized: bool,
    /// Unpenalized log-likelihood at the solution.
    pub log_likelihood: f64,
}

impl LogisticFit {
    pub fn linear_predictor(&self, row: &[f64]) -> f64 {
        self.intercept
            + self
                .coefficients
                .iter()
                .zip(row)
                .map(|(b, x)| b * x)
                .sum::<f64>()
    }

    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        sigmoid(self.linear_predictor(row))
    }

    /// Likelihood-ratio p-value against the intercept-only model with the
    /// same labels (df = number of slopes).
    pub fn lrt_p_value(&self, y: &[u8]) -> f64 {
        let null = null_log_likelihood(y);
        let stat = 2.0 * (self.log_likelihood - null);
        chi2_sf(stat.max(0.0), self.coefficients.len().max(1) as f64)
    }
}

pub fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// log(1 + e^x) without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn log_likelihood(y: &[u8], eta: &DVector<f64>) -> f64 {
    y.iter()
        .zip(eta.iter())
        .map(|(&yi, &e)| f64::from(yi) * e - softplus(e))
        .sum()
}

fn null_log_likelihood(y: &[u8]) -> f64 {
    let n = y.len() as f64;
    let k = y.iter().filter(|&&v| v == 1).count() as f64;
    let mut ll = 0.0;
    if k > 0.0 {
        ll += k * (k / n).ln();
    }
    if n - k > 0.0 {
        ll += (n - k) * ((n - k) / n).ln();
    }
    ll
}

/// Fits `logit Pr(y = 1) = β₀ + Xβ`.
///
/// `x` holds predictors only (no intercept column). The ridge penalty
/// `½λ‖β‖²` applies to slopes, never to the intercept. When the unpenalized
/// problem separates, the fit is repeated with λ = 1e-4 and flagged.
pub fn fit_logistic(y: &[u8], x: &DMatrix<f64>, ridge: f64) -> Result<LogisticFit> {
    if y.len() != x.nrows() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            got: y.len(),
        });
    }
    if !(ridge >= 0.0) || !ridge.is_finite() {
        return Err(Error::InvalidInput(format!("ridge must be >= 0, got {ridge}")));
    }
    if y.iter().any(|&v| v > 1) {
        return Err(Error::InvalidInput("labels must be 0 or 1".into()));
    }
    let positives = y.iter().filter(|&&v| v == 1).count();
    if positives == 0 || positives == y.len() {
        return Err(Error::SingleClass);
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("logistic design".into()));
    }

    let design = with_intercept(x);
    if ridge < SEPARATION_RIDGE {
        match newton(y, &design, ridge) {
            Ok(fit) if fit.converged && !saturated(&design, &fit) => return Ok(fit),
            Ok(_) | Err(Error::Singular(_)) => {}
            Err(e) => return Err(e),
        }
        let mut fit = newton(y, &design, SEPARATION_RIDGE)?;
        fit.penalized = true;
        if !fit.converged {
            return Err(Error::NoConvergence(format!(
                "IRLS did not converge in {MAX_ITER} iterations even with ridge {SEPARATION_RIDGE}"
            )));
        }
        return Ok(fit);
    }
    let fit = newton(y, &design, ridge)?;
    if !fit.converged {
        return Err(Error::NoConvergence(format!(
            "IRLS did not converge in {MAX_ITER} iterations"
        )));
    }
    Ok(fit)
}

fn with_intercept(x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows();
    let mut d = DMatrix::from_element(n, x.ncols() + 1, 1.0);
    d.view_mut((0, 1), (n, x.ncols())).copy_from(x);
    d
}

fn saturated(design: &DMatrix<f64>, fit: &LogisticFit) -> bool {
    let beta = beta_vector(fit);
    (design * beta).iter().any(|e| e.abs() > SATURATED_ETA)
}

fn beta_vector(fit: &LogisticFit) -> DVector<f64> {
    let mut b = vec![fit.intercept];
    b.extend_from_slice(&fit.coefficients);
    DVector::from_vec(b)
}

fn penalized_ll(y: &[u8], design: &DMatrix<f64>, beta: &DVector<f64>, ridge: f64) -> f64 {
    let eta = design * beta;
    let pen: f64 = beta.iter().skip(1).map(|b| b * b).sum();
    log_likelihood(y, &eta) - 0.5 * ridge * pen
}

fn newton(y: &[u8], design: &DMatrix<f64>, ridge: f64) -> Result<LogisticFit> {
    let (n, k) = design.shape();
    let yv = DVector::from_iterator(n, y.iter().map(|&v| f64::from(v)));
    let mut beta = DVector::zeros(k);
    // start the intercept at the prevalence logit
    let prev = yv.mean();
    beta[0] = (prev / (1.0 - prev)).ln();

    let mut converged = false;
    let mut iterations = 0;
    let mut objective = penalized_ll(y, design, &beta, ridge);

    for it in 1..=MAX_ITER {
        iterations = it;
        let eta = design * &beta;
        let mu = eta.map(sigmoid);
        let mut grad = design.transpose() * (&yv - &mu);
        for j in 1..k {
            grad[j] -= ridge * beta[j];
        }
        let mut hessian = weighted_gram(design, &mu);
        for j in 1..k {
            hessian[(j, j)] += ridge;
        }
        if grad.amax() < SCORE_TOL {
            converged = true;
            break;
        }
        let chol = hessian
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Singular("logistic information matrix".into()))?;
        let step = chol.solve(&grad);

        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let candidate = &beta + &step * scale;
            let value = penalized_ll(y, design, &candidate, ridge);
            if value >= objective - 1e-12 * objective.abs().max(1.0) {
                beta = candidate;
                objective = value;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted || (&step * scale).amax() < STEP_TOL {
            converged = accepted || grad.amax() < 1e-6;
            break;
        }
    }

    let eta = design * &beta;
    let mu = eta.map(sigmoid);
    let mut info = weighted_gram(design, &mu);
    for j in 1..k {
        info[(j, j)] += ridge;
    }
    let cov = info
        .cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| Error::Singular("logistic information matrix".into()))?;
    let std_errors: Vec<f64> = (0..k).map(|j| cov[(j, j)].max(0.0).sqrt()).collect();
    let p_values = (0..k)
        .map(|j| {
            if std_errors[j] == 0.0 {
                1.0
            } else {
                wald_p(beta[j] / std_errors[j])
            }
        })
        .collect();

    Ok(LogisticFit {
        intercept: beta[0],
        coefficients: beta.iter().skip(1).copied().collect(),
        std_errors,
        p_values,
        converged,
        iterations,
        ridge,
        penalized: false,
        log_likelihood: log_likelihood(y, &eta),
    })
}

fn weighted_gram(design: &DMatrix<f64>, mu: &DVector<f64>) -> DMatrix<f64> {
    let mut scaled = design.clone();
    for (i, mut row) in scaled.row_iter_mut().enumerate() {
        let w = mu[i] * (1.0 - mu[i]);
        row *= w;
    }
    design.transpose() * scaled
}

/// Score vector ∂ℓ/∂β (intercept first) of the unpenalized likelihood.
pub fn score(y: &[u8], x: &DMatrix<f64>, fit: &LogisticFit) -> Vec<f64> {
    let design = with_intercept(x);
    let eta = &design * beta_vector(fit);
    let resid = DVector::from_iterator(
        y.len(),
        y.iter().zip(eta.iter()).map(|(&yi, &e)| f64::from(yi) - sigmoid(e)),
    );
    (design.transpose() * resid).iter().copied().collect()
}
