//! Ridge-penalized logistic regression fitted by IRLS.
//!
//! The objective is the mean negative log-likelihood plus an L2 penalty on
//! the non-intercept coefficients:
//!
//! ```text
//! J(b) = (1/n) sum[ softplus(eta_i) - y_i * eta_i ] + (lambda/2) * |b_1..|^2
//! ```
//!
//! with `eta_i = b_0 + b . z_i` clamped to `[-30, 30]`. Each iteration takes
//! a Newton step on the ridge-augmented Hessian and halves it until `J`
//! decreases.

use alloc::vec::Vec;

use crate::linalg::cholesky_solve;
use crate::{Error, Result};

/// Bound on the linear predictor inside the sigmoid.
pub const ETA_CLAMP: f64 = 30.0;

const MAX_HALVINGS: usize = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
    /// Columns whose sample sd was zero (their sd is reported as 1).
    pub constant: Vec<bool>,
}

impl Standardizer {
    /// Per-column sample mean and sd (denominator `n - 1`; sd is 1 for a
    /// single row or a constant column).
    pub fn fit<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let d = rows.first().map_or(0, |r| r.as_ref().len());
        let n = rows.len();
        let mut means = alloc::vec![0.0; d];
        let mut sds = alloc::vec![1.0; d];
        let mut constant = alloc::vec![false; d];
        if n == 0 {
            return Self { means, sds, constant };
        }
        for j in 0..d {
            let mean = rows.iter().map(|r| r.as_ref()[j]).sum::<f64>() / n as f64;
            means[j] = mean;
            if n == 1 {
                continue;
            }
            let first = rows[0].as_ref()[j];
            if rows.iter().all(|r| r.as_ref()[j] == first) {
                constant[j] = true;
                continue;
            }
            let ss: f64 = rows.iter().map(|r| (r.as_ref()[j] - mean) * (r.as_ref()[j] - mean)).sum();
            let sd = libm::sqrt(ss / (n - 1) as f64);
            if sd > 0.0 {
                sds[j] = sd;
            } else {
                constant[j] = true;
            }
        }
        Self { means, sds, constant }
    }

    pub fn dimension(&self) -> usize {
        self.means.len()
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.means.len() {
            return Err(Error::DimensionMismatch { expected: self.means.len(), got: x.len() });
        }
        Ok(x.iter().zip(&self.means).zip(&self.sds).map(|((v, m), s)| (v - m) / s).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub lambda: f64,
    pub max_iter: usize,
    /// Stop when the gradient infinity-norm falls to this value.
    pub tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { lambda: 1e-4, max_iter: 50, tol: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub intercept: f64,
    /// On the standardized scale.
    pub coefficients: Vec<f64>,
    pub ridge_lambda: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl LogisticModel {
    pub fn linear_predictor(&self, z: &[f64]) -> Result<f64> {
        if z.len() != self.coefficients.len() {
            return Err(Error::DimensionMismatch { expected: self.coefficients.len(), got: z.len() });
        }
        Ok(self.intercept + dot(&self.coefficients, z))
    }

    /// Probability of the positive class for an already standardized row.
    pub fn probability(&self, z: &[f64]) -> Result<f64> {
        self.linear_predictor(z).map(sigmoid)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Logistic function with the linear predictor clamped to `[-30, 30]`.
pub fn sigmoid(eta: f64) -> f64 {
    let eta = eta.clamp(-ETA_CLAMP, ETA_CLAMP);
    if eta >= 0.0 {
        1.0 / (1.0 + libm::exp(-eta))
    } else {
        let e = libm::exp(eta);
        e / (1.0 + e)
    }
}

/// `ln(1 + e^eta)` for clamped `eta`, computed without overflow.
fn softplus(eta: f64) -> f64 {
    let eta = eta.clamp(-ETA_CLAMP, ETA_CLAMP);
    if eta > 0.0 {
        eta + libm::log1p(libm::exp(-eta))
    } else {
        libm::log1p(libm::exp(eta))
    }
}

/// The penalized objective over a fixed design. Parameters are laid out as
/// `[intercept, coefficients...]`.
#[derive(Debug, Clone, Copy)]
pub struct RidgeObjective<'a, R> {
    rows: &'a [R],
    labels: &'a [bool],
    lambda: f64,
}

impl<'a, R: AsRef<[f64]>> RidgeObjective<'a, R> {
    pub fn new(rows: &'a [R], labels: &'a [bool], lambda: f64) -> Self {
        Self { rows, labels, lambda }
    }

    fn eta(&self, beta: &[f64], z: &[f64]) -> f64 {
        beta[0] + dot(&beta[1..], z)
    }

    pub fn value(&self, beta: &[f64]) -> f64 {
        let n = self.rows.len() as f64;
        let nll: f64 = self
            .rows
            .iter()
            .zip(self.labels)
            .map(|(z, &y)| {
                let eta = self.eta(beta, z.as_ref());
                softplus(eta) - if y { eta.clamp(-ETA_CLAMP, ETA_CLAMP) } else { 0.0 }
            })
            .sum();
        nll / n + 0.5 * self.lambda * beta[1..].iter().map(|b| b * b).sum::<f64>()
    }

    pub fn gradient(&self, beta: &[f64]) -> Vec<f64> {
        let n = self.rows.len() as f64;
        let mut g = alloc::vec![0.0; beta.len()];
        for (z, &y) in self.rows.iter().zip(self.labels) {
            let z = z.as_ref();
            let resid = sigmoid(self.eta(beta, z)) - if y { 1.0 } else { 0.0 };
            g[0] += resid;
            for (gj, zj) in g[1..].iter_mut().zip(z) {
                *gj += resid * zj;
            }
        }
        for gj in &mut g {
            *gj /= n;
        }
        for (gj, bj) in g[1..].iter_mut().zip(&beta[1..]) {
            *gj += self.lambda * bj;
        }
        g
    }

    /// Hessian (row-major). The intercept is not penalized.
    fn hessian(&self, beta: &[f64]) -> Vec<f64> {
        let p = beta.len();
        let n = self.rows.len() as f64;
        let mut h = alloc::vec![0.0; p * p];
        let mut x = alloc::vec![1.0; p];
        for z in self.rows {
            x[1..].copy_from_slice(z.as_ref());
            let mu = sigmoid(self.eta(beta, z.as_ref()));
            let w = mu * (1.0 - mu);
            for i in 0..p {
                let wi = w * x[i];
                for j in 0..=i {
                    h[i * p + j] += wi * x[j];
                }
            }
        }
        for i in 0..p {
            for j in 0..=i {
                h[i * p + j] /= n;
                h[j * p + i] = h[i * p + j];
            }
        }
        for i in 1..p {
            h[i * p + i] += self.lambda;
        }
        h
    }
}

/// Per-iteration record kept by [`fit_logistic_ridge_traced`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub objective: f64,
    pub gradient_norm: f64,
    pub halvings: usize,
}

/// Fits a ridge logistic regression to standardized rows.
pub fn fit_logistic_ridge<R: AsRef<[f64]>>(rows: &[R], labels: &[bool], opts: &FitOptions) -> Result<LogisticModel> {
    fit_logistic_ridge_traced(rows, labels, opts).map(|(m, _)| m)
}

/// Like [`fit_logistic_ridge`], also returning the objective and gradient
/// norm at every accepted iterate (starting point first).
pub fn fit_logistic_ridge_traced<R: AsRef<[f64]>>(
    rows: &[R],
    labels: &[bool],
    opts: &FitOptions,
) -> Result<(LogisticModel, Vec<IterationRecord>)> {
    if rows.len() != labels.len() {
        return Err(Error::LengthMismatch { left: rows.len(), right: labels.len() });
    }
    if rows.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: rows.len() });
    }
    let positives = labels.iter().filter(|&&l| l).count();
    if positives == 0 || positives == labels.len() {
        return Err(Error::SingleClass);
    }
    if !opts.lambda.is_finite() || opts.lambda <= 0.0 || opts.tol.is_nan() || opts.tol < 0.0 {
        return Err(Error::InvalidConfig(alloc::format!(
            "lambda must be positive and tol non-negative (lambda={}, tol={})",
            opts.lambda,
            opts.tol
        )));
    }
    let d = rows[0].as_ref().len();
    for r in rows {
        let r = r.as_ref();
        if r.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: r.len() });
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
    }

    let objective = RidgeObjective::new(rows, labels, opts.lambda);
    let q = positives as f64 / labels.len() as f64;
    let mut beta = alloc::vec![0.0; d + 1];
    beta[0] = libm::log(q / (1.0 - q));

    let mut value = objective.value(&beta);
    let mut grad = objective.gradient(&beta);
    let mut trace = Vec::new();
    trace.push(IterationRecord { objective: value, gradient_norm: inf_norm(&grad), halvings: 0 });

    let mut iterations = 0;
    let mut converged = inf_norm(&grad) <= opts.tol;
    while !converged && iterations < opts.max_iter {
        let hessian = objective.hessian(&beta);
        let Some(step) = solve_with_jitter(hessian, &grad) else { break };

        let mut scale = 1.0;
        let mut accepted = None;
        for halvings in 0..=MAX_HALVINGS {
            let candidate: Vec<f64> = beta.iter().zip(&step).map(|(b, s)| b - scale * s).collect();
            let cand_value = objective.value(&candidate);
            if cand_value <= value && cand_value.is_finite() {
                accepted = Some((candidate, cand_value, halvings));
                break;
            }
            scale *= 0.5;
        }
        let Some((candidate, cand_value, halvings)) = accepted else { break };

        iterations += 1;
        let stalled = cand_value == value && candidate == beta;
        beta = candidate;
        value = cand_value;
        grad = objective.gradient(&beta);
        trace.push(IterationRecord { objective: value, gradient_norm: inf_norm(&grad), halvings });
        converged = inf_norm(&grad) <= opts.tol;
        if stalled {
            break;
        }
    }

    if beta.iter().any(|b| !b.is_finite()) {
        return Err(Error::NonFinite);
    }
    let model = LogisticModel {
        intercept: beta[0],
        coefficients: beta[1..].to_vec(),
        ridge_lambda: opts.lambda,
        converged,
        iterations,
    };
    Ok((model, trace))
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(libm::fabs(*x)))
}

fn solve_with_jitter(mut h: Vec<f64>, g: &[f64]) -> Option<Vec<f64>> {
    let p = g.len();
    let mut jitter = 1e-12;
    for _ in 0..8 {
        if let Some(x) = cholesky_solve(&h, g) {
            return Some(x);
        }
        for i in 0..p {
            h[i * p + i] += jitter;
        }
        jitter *= 100.0;
    }
    None
}

/// `sigmoid(intercept + coefficients . standardize(x))`.
pub fn predict_probability(model: &LogisticModel, standardizer: &Standardizer, x: &[f64]) -> Result<f64> {
    let z = standardizer.apply(x)?;
    model.probability(&z)
}

/// Positive (defective) iff `p >= cutoff`.
#[inline]
pub fn decide(p: f64, cutoff: f64) -> bool {
    p >= cutoff
}
