//! L2-regularized logistic regression trained with L-BFGS.
//!
//! Minimizes `0.5 * |w|^2 + C * sum_i ln(1 + exp(-y_i (w.x_i + b)))` with
//! `y` in {-1, +1} and an unregularized intercept, starting from zero.
//! Every accepted step satisfies the Armijo condition, so the objective never
//! increases between iterations.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::check_training_set;
use crate::corpus::Label;
use crate::error::Result;
use crate::sparse::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogRegConfig {
    pub c: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        LogRegConfig {
            c: 1.0,
            tol: 1e-4,
            max_iter: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticRegression {
    pub config: LogRegConfig,
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Infinity norm of the gradient at the returned point.
    pub gradient_norm: f64,
    /// Objective value after each iteration, starting with the initial point.
    #[serde(skip)]
    pub objective_history: Vec<f64>,
}

/// `ln(1 + exp(t))` without overflow.
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// Logistic function, stable on both tails.
fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Objective value at `theta = [w..., b]`.
pub fn objective(x: &FeatureMatrix, y: &[f64], theta: &[f64], c: f64) -> f64 {
    let d = x.dim();
    let (w, b) = (&theta[..d], theta[d]);
    let reg = 0.5 * w.iter().map(|v| v * v).sum::<f64>();
    let loss: f64 = x
        .rows()
        .zip(y)
        .map(|(row, &yi)| softplus(-yi * (row.dot_dense(w) + b)))
        .sum();
    reg + c * loss
}

/// Objective value and gradient with respect to `[w..., b]`.
pub fn objective_and_gradient(
    x: &FeatureMatrix,
    y: &[f64],
    theta: &[f64],
    c: f64,
) -> (f64, Vec<f64>) {
    let d = x.dim();
    let (w, b) = (&theta[..d], theta[d]);
    let mut grad: Vec<f64> = w.to_vec();
    grad.push(0.0);
    let mut f = 0.5 * w.iter().map(|v| v * v).sum::<f64>();
    let mut loss = 0.0;
    for (row, &yi) in x.rows().zip(y) {
        let margin = yi * (row.dot_dense(w) + b);
        loss += softplus(-margin);
        // d/dz ln(1 + exp(-y z)) = -y * sigmoid(-y z)
        let coef = -c * yi * sigmoid(-margin);
        row.for_each_nonzero(|j, v| grad[j] += coef * v);
        grad[d] += coef;
    }
    f += c * loss;
    (f, grad)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

const HISTORY: usize = 10;
const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;

impl LogisticRegression {
    pub fn fit(x: &FeatureMatrix, labels: &[Label], config: LogRegConfig) -> Result<Self> {
        check_training_set(x, labels)?;
        let y: Vec<f64> = labels.iter().map(|l| l.sign()).collect();
        let d = x.dim();
        let c = config.c;

        let mut theta = vec![0.0; d + 1];
        let (mut f, mut g) = objective_and_gradient(x, &y, &theta, c);
        let mut history = vec![f];
        let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
        let mut iterations = 0;
        let mut converged = inf_norm(&g) <= config.tol;

        while !converged && iterations < config.max_iter {
            // Two-loop recursion for the search direction.
            let mut q: Vec<f64> = g.iter().map(|v| -v).collect();
            let mut alphas = Vec::with_capacity(pairs.len());
            for (s, yv, rho) in pairs.iter().rev() {
                let a = rho * dot(s, &q);
                for (qi, yi) in q.iter_mut().zip(yv) {
                    *qi -= a * yi;
                }
                alphas.push(a);
            }
            if let Some((s, yv, _)) = pairs.back() {
                let gamma = dot(s, yv) / dot(yv, yv);
                q.iter_mut().for_each(|v| *v *= gamma);
            }
            for ((s, yv, rho), a) in pairs.iter().zip(alphas.iter().rev()) {
                let beta = rho * dot(yv, &q);
                for (qi, si) in q.iter_mut().zip(s) {
                    *qi += (a - beta) * si;
                }
            }
            let mut dir = q;
            let mut slope = dot(&g, &dir);
            if slope >= 0.0 {
                pairs.clear();
                dir = g.iter().map(|v| -v).collect();
                slope = dot(&g, &dir);
            }

            let mut step = if pairs.is_empty() {
                1.0 / inf_norm(&g).max(1.0)
            } else {
                1.0
            };
            let mut accepted = None;
            for _ in 0..MAX_BACKTRACKS {
                let trial: Vec<f64> = theta.iter().zip(&dir).map(|(t, d)| t + step * d).collect();
                let f_trial = objective(x, &y, &trial, c);
                if f_trial <= f + ARMIJO * step * slope {
                    accepted = Some((trial, f_trial));
                    break;
                }
                step *= 0.5;
            }
            let Some((next, _)) = accepted else {
                break;
            };
            let (f_next, g_next) = objective_and_gradient(x, &y, &next, c);
            let s: Vec<f64> = next.iter().zip(&theta).map(|(a, b)| a - b).collect();
            let yv: Vec<f64> = g_next.iter().zip(&g).map(|(a, b)| a - b).collect();
            let sy = dot(&s, &yv);
            if sy > 1e-10 * dot(&yv, &yv).max(f64::MIN_POSITIVE) {
                if pairs.len() == HISTORY {
                    pairs.pop_front();
                }
                pairs.push_back((s, yv, 1.0 / sy));
            }
            theta = next;
            f = f_next;
            g = g_next;
            history.push(f);
            iterations += 1;
            converged = inf_norm(&g) <= config.tol;
        }

        let intercept = theta.pop().unwrap();
        Ok(LogisticRegression {
            config,
            weights: theta,
            intercept,
            iterations,
            converged,
            gradient_norm: inf_norm(&g),
            objective_history: history,
        })
    }

    pub fn decision_function(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        x.check_dim(self.weights.len())?;
        Ok(x.rows()
            .map(|r| r.dot_dense(&self.weights) + self.intercept)
            .collect())
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<Label>> {
        Ok(self
            .decision_function(x)?
            .into_iter()
            .map(Label::from_sign)
            .collect())
    }
}
