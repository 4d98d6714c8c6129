//! L2-regularized logistic regression fitted by damped Newton iteration.
//!
//! The objective is the summed negative log-likelihood plus `reg/2 * |w|^2`
//! with the intercept unpenalized. Newton steps with Armijo backtracking are
//! deterministic from the zero start; near machine precision, where function
//! decrease is no longer resolvable, a unit step is still accepted when it
//! strictly shrinks the gradient norm, which carries the gradient norm well
//! below the default tolerance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::FeatureMatrix;

/// Fitted weights and intercept in scaled feature space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub reg_strength: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { reg_strength: 1.0, tol: 1e-8, max_iter: 500 }
    }
}

/// How the optimizer finished.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub iterations: usize,
    pub grad_norm: f64,
    pub objective: f64,
    /// Objective value before each iteration and after the last.
    pub objective_trace: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(-t))` without overflow on either tail.
fn log1p_exp_neg(t: f64) -> f64 {
    if t >= 0.0 {
        (-t).exp().ln_1p()
    } else {
        -t + t.exp().ln_1p()
    }
}

/// The regularized negative log-likelihood as a differentiable function of
/// `[w_0, .., w_{d-1}, intercept]`.
pub struct LogisticObjective<'a> {
    x: &'a FeatureMatrix,
    labels: &'a [u8],
    reg_strength: f64,
}

impl<'a> LogisticObjective<'a> {
    pub fn new(x: &'a FeatureMatrix, labels: &'a [u8], reg_strength: f64) -> Result<Self> {
        if labels.len() != x.n_rows() {
            return Err(Error::invalid(format!(
                "{} labels for {} rows",
                labels.len(),
                x.n_rows()
            )));
        }
        if x.n_rows() == 0 {
            return Err(Error::invalid("cannot fit on zero rows"));
        }
        if !(reg_strength >= 0.0 && reg_strength.is_finite()) {
            return Err(Error::invalid(format!("regularization strength {reg_strength} is invalid")));
        }
        Ok(LogisticObjective { x, labels, reg_strength })
    }

    pub fn dim(&self) -> usize {
        self.x.n_cols() + 1
    }

    fn margin(&self, params: &[f64], row: usize) -> f64 {
        let d = self.x.n_cols();
        let mut z = params[d];
        for (v, w) in self.x.row(row).iter().zip(&params[..d]) {
            z += v * w;
        }
        z
    }

    pub fn value(&self, params: &[f64]) -> f64 {
        let d = self.x.n_cols();
        let mut total = 0.0;
        for row in 0..self.x.n_rows() {
            let y = if self.labels[row] == 1 { 1.0 } else { -1.0 };
            total += log1p_exp_neg(y * self.margin(params, row));
        }
        total + 0.5 * self.reg_strength * params[..d].iter().map(|w| w * w).sum::<f64>()
    }

    pub fn gradient(&self, params: &[f64]) -> Vec<f64> {
        let d = self.x.n_cols();
        let mut grad = vec![0.0; d + 1];
        for row in 0..self.x.n_rows() {
            let y = if self.labels[row] == 1 { 1.0 } else { -1.0 };
            // d/dz log(1 + exp(-y z)) = -y * sigmoid(-y z)
            let coeff = -y * sigmoid(-y * self.margin(params, row));
            for (g, v) in grad[..d].iter_mut().zip(self.x.row(row)) {
                *g += coeff * v;
            }
            grad[d] += coeff;
        }
        for (g, w) in grad[..d].iter_mut().zip(&params[..d]) {
            *g += self.reg_strength * w;
        }
        grad
    }

    /// Dense Hessian in row-major order, `dim x dim`.
    pub fn hessian(&self, params: &[f64]) -> Vec<f64> {
        let d = self.x.n_cols();
        let dim = d + 1;
        let mut h = vec![0.0; dim * dim];
        for row in 0..self.x.n_rows() {
            let s = sigmoid(self.margin(params, row));
            let weight = s * (1.0 - s);
            let xr = self.x.row(row);
            for i in 0..d {
                let wi = weight * xr[i];
                for j in i..d {
                    h[i * dim + j] += wi * xr[j];
                }
                h[i * dim + d] += wi;
            }
            h[d * dim + d] += weight;
        }
        for i in 0..d {
            h[i * dim + i] += self.reg_strength;
        }
        for i in 0..dim {
            for j in 0..i {
                h[i * dim + j] = h[j * dim + i];
            }
        }
        h
    }
}

/// In-place Cholesky solve of `h x = rhs` for a symmetric positive-definite
/// `h`; returns `None` if the factorization hits a non-positive pivot.
fn cholesky_solve(h: &[f64], rhs: &[f64], dim: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..=i {
            let mut sum = h[i * dim + j];
            for k in 0..j {
                sum -= l[i * dim + k] * l[j * dim + k];
            }
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                l[i * dim + i] = sum.sqrt();
            } else {
                l[i * dim + j] = sum / l[j * dim + j];
            }
        }
    }
    let mut x = rhs.to_vec();
    for i in 0..dim {
        for k in 0..i {
            x[i] -= l[i * dim + k] * x[k];
        }
        x[i] /= l[i * dim + i];
    }
    for i in (0..dim).rev() {
        for k in i + 1..dim {
            x[i] -= l[k * dim + i] * x[k];
        }
        x[i] /= l[i * dim + i];
    }
    Some(x)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Fits from the zero start; see [`fit_logistic_from`].
pub fn fit_logistic(
    x: &FeatureMatrix,
    labels: &[u8],
    opts: &FitOptions,
) -> Result<(LogisticModel, ConvergenceReport)> {
    fit_logistic_from(&vec![0.0; x.n_cols() + 1], x, labels, opts)
}

/// Fits starting from the given `[weights.., intercept]` vector.
///
/// Errors if the labels hold a single class or the gradient norm does not
/// reach `opts.tol` within `opts.max_iter` Newton steps.
pub fn fit_logistic_from(
    init: &[f64],
    x: &FeatureMatrix,
    labels: &[u8],
    opts: &FitOptions,
) -> Result<(LogisticModel, ConvergenceReport)> {
    let objective = LogisticObjective::new(x, labels, opts.reg_strength)?;
    let dim = objective.dim();
    if init.len() != dim {
        return Err(Error::invalid(format!("init has {} entries, expected {dim}", init.len())));
    }
    if opts.max_iter == 0 || !(opts.tol > 0.0) {
        return Err(Error::invalid("max_iter must be positive and tol > 0"));
    }
    let positives = labels.iter().filter(|&&y| y == 1).count();
    if positives == 0 || positives == labels.len() {
        return Err(Error::SingleClass);
    }

    let mut params = init.to_vec();
    let mut f = objective.value(&params);
    let mut trace = vec![f];
    let mut grad = objective.gradient(&params);
    let mut grad_norm = norm(&grad);

    for iteration in 0..opts.max_iter {
        if grad_norm <= opts.tol {
            return Ok((
                finish(&params, dim),
                ConvergenceReport { iterations: iteration, grad_norm, objective: f, objective_trace: trace },
            ));
        }

        let hessian = objective.hessian(&params);
        let direction = solve_with_jitter(&hessian, &grad, dim)
            .ok_or_else(|| Error::invalid("hessian is not positive definite"))?;
        let slope: f64 = -direction.iter().zip(&grad).map(|(d, g)| d * g).sum::<f64>();

        let mut accepted = None;
        let mut step = 1.0;
        while step >= 1e-12 {
            let candidate: Vec<f64> =
                params.iter().zip(&direction).map(|(p, d)| p - step * d).collect();
            let fc = objective.value(&candidate);
            // Strict decrease: once the Armijo margin rounds below f64
            // resolution this rejects, handing over to the fallback below
            // instead of accepting a no-op micro step.
            if fc < f + 1e-4 * step * slope {
                accepted = Some((candidate, fc));
                break;
            }
            step *= 0.5;
        }
        // Below f64 resolution of the objective, fall back to gradient
        // contraction as the acceptance test.
        let (next, fc) = match accepted {
            Some(found) => found,
            None => {
                let candidate: Vec<f64> =
                    params.iter().zip(&direction).map(|(p, d)| p - d).collect();
                let g = objective.gradient(&candidate);
                if norm(&g) < grad_norm {
                    let fc = objective.value(&candidate);
                    (candidate, fc)
                } else {
                    break;
                }
            }
        };
        params = next;
        f = fc;
        trace.push(f);
        grad = objective.gradient(&params);
        grad_norm = norm(&grad);
    }

    if grad_norm <= opts.tol {
        let iterations = trace.len() - 1;
        return Ok((
            finish(&params, dim),
            ConvergenceReport { iterations, grad_norm, objective: f, objective_trace: trace },
        ));
    }
    Err(Error::NotConverged { iterations: trace.len() - 1, grad_norm })
}

fn solve_with_jitter(hessian: &[f64], grad: &[f64], dim: usize) -> Option<Vec<f64>> {
    if let Some(d) = cholesky_solve(hessian, grad, dim) {
        return Some(d);
    }
    let trace: f64 = (0..dim).map(|i| hessian[i * dim + i]).sum();
    let mut jitter = 1e-10 * (trace / dim as f64).max(1.0);
    for _ in 0..6 {
        let mut h = hessian.to_vec();
        for i in 0..dim {
            h[i * dim + i] += jitter;
        }
        if let Some(d) = cholesky_solve(&h, grad, dim) {
            return Some(d);
        }
        jitter *= 10.0;
    }
    None
}

fn finish(params: &[f64], dim: usize) -> LogisticModel {
    LogisticModel { weights: params[..dim - 1].to_vec(), intercept: params[dim - 1] }
}

/// Predicted probabilities `sigmoid(w . x + b)` per row.
pub fn predict_scores(model: &LogisticModel, x: &FeatureMatrix) -> Result<Vec<f64>> {
    if model.weights.len() != x.n_cols() {
        return Err(Error::invalid(format!(
            "model has {} weights, matrix has {} columns",
            model.weights.len(),
            x.n_cols()
        )));
    }
    Ok((0..x.n_rows())
        .map(|row| {
            let z = model.intercept
                + x.row(row).iter().zip(&model.weights).map(|(v, w)| v * w).sum::<f64>();
            sigmoid(z)
        })
        .collect())
}

/// Thresholds scores into binary verdicts; positive exactly when
/// `score >= threshold`.
pub fn predict_labels(scores: &[f64], threshold: f64) -> Vec<u8> {
    scores.iter().map(|&s| u8::from(s >= threshold)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn toy_matrix(rows: &[&[f64]]) -> FeatureMatrix {
        let n_cols = rows[0].len();
        let values: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        FeatureMatrix::new(rows.len(), n_cols, values)
    }

    fn random_problem(
        seed: u64,
        n: usize,
        d: usize,
    ) -> (FeatureMatrix, Vec<u8>) {
        let mut rng = crate::seed::stream(seed, "logistic-test", &[n as u64, d as u64]);
        let values: Vec<f64> = (0..n * d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let x = FeatureMatrix::new(n, d, values);
        let labels: Vec<u8> = (0..n)
            .map(|row| {
                let z: f64 = x.row(row).iter().enumerate().map(|(j, v)| v * (j as f64 - 1.0)).sum();
                u8::from(z + rng.gen_range(-1.0..1.0) > 0.0)
            })
            .collect();
        (x, labels)
    }

    #[test]
    fn separable_pair_stays_finite_and_correct() {
        let x = toy_matrix(&[&[-1.0], &[1.0]]);
        let (model, report) = fit_logistic(&x, &[0, 1], &FitOptions::default()).unwrap();
        assert!(model.weights[0].is_finite() && model.weights[0] > 0.0);
        assert!(report.grad_norm <= 1e-8);
        let scores = predict_scores(&model, &x).unwrap();
        assert_eq!(predict_labels(&scores, 0.5), vec![0, 1]);
    }

    #[test]
    fn zero_model_scores_half_and_predicts_positive() {
        let x = toy_matrix(&[&[0.3, -0.7]]);
        let model = LogisticModel { weights: vec![0.0, 0.0], intercept: 0.0 };
        let scores = predict_scores(&model, &x).unwrap();
        assert_eq!(scores, vec![0.5]);
        assert_eq!(predict_labels(&scores, 0.5), vec![1]);
    }

    #[test]
    fn scores_match_direct_dot_product() {
        let (x, _) = random_problem(3, 40, 4);
        let model = LogisticModel { weights: vec![0.4, -1.1, 0.05, 2.0], intercept: -0.3 };
        let scores = predict_scores(&model, &x).unwrap();
        for row in 0..x.n_rows() {
            let mut z = -0.3;
            for j in 0..4 {
                z += x.get(row, j) * model.weights[j];
            }
            assert_abs_diff_eq!(scores[row], 1.0 / (1.0 + (-z).exp()), epsilon = 1e-12);
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let (x, labels) = random_problem(5, 60, 3);
        let objective = LogisticObjective::new(&x, &labels, 1.0).unwrap();
        let mut rng = crate::seed::stream(6, "fd", &[]);
        for _ in 0..5 {
            let params: Vec<f64> = (0..4).map(|_| rng.gen_range(-0.8..0.8)).collect();
            let grad = objective.gradient(&params);
            let h = 1e-5;
            for i in 0..4 {
                let mut plus = params.clone();
                let mut minus = params.clone();
                plus[i] += h;
                minus[i] -= h;
                let fd = (objective.value(&plus) - objective.value(&minus)) / (2.0 * h);
                let rel = (grad[i] - fd).abs() / grad[i].abs().max(1.0);
                assert!(rel < 1e-6, "component {i}: analytic {} vs fd {fd}", grad[i]);
            }
        }
    }

    #[test]
    fn converges_to_tight_gradient_norm() {
        let (x, labels) = random_problem(8, 300, 5);
        let (_, report) = fit_logistic(&x, &labels, &FitOptions::default()).unwrap();
        assert!(report.grad_norm <= 1e-8, "grad norm {}", report.grad_norm);
        assert!(report.iterations < 50);
    }

    #[test]
    fn objective_trace_is_non_increasing() {
        let (x, labels) = random_problem(9, 250, 4);
        let (_, report) = fit_logistic(&x, &labels, &FitOptions::default()).unwrap();
        for pair in report.objective_trace.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-9 * pair[0].abs().max(1.0));
        }
    }

    #[test]
    fn restarts_reach_the_same_objective() {
        let (x, labels) = random_problem(10, 200, 4);
        let opts = FitOptions::default();
        let (_, base) = fit_logistic(&x, &labels, &opts).unwrap();
        let mut rng = crate::seed::stream(11, "restart", &[]);
        for _ in 0..5 {
            let init: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let (_, report) = fit_logistic_from(&init, &x, &labels, &opts).unwrap();
            let rel = (report.objective - base.objective).abs() / base.objective.abs().max(1.0);
            assert!(rel < 1e-6, "objective {} vs {}", report.objective, base.objective);
        }
    }

    #[test]
    fn fit_is_deterministic() {
        let (x, labels) = random_problem(12, 150, 4);
        let (a, _) = fit_logistic(&x, &labels, &FitOptions::default()).unwrap();
        let (b, _) = fit_logistic(&x, &labels, &FitOptions::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_class_is_rejected() {
        let x = toy_matrix(&[&[0.1], &[0.2]]);
        assert!(matches!(
            fit_logistic(&x, &[1, 1], &FitOptions::default()),
            Err(Error::SingleClass)
        ));
    }

    #[test]
    fn exhausted_iterations_report_not_converged() {
        let (x, labels) = random_problem(13, 200, 4);
        let opts = FitOptions { max_iter: 1, tol: 1e-14, ..FitOptions::default() };
        match fit_logistic(&x, &labels, &opts) {
            Err(Error::NotConverged { iterations, grad_norm }) => {
                assert_eq!(iterations, 1);
                assert!(grad_norm > 1e-14);
            }
            other => panic!("expected NotConverged, got {other:?}"),
        }
    }
}
