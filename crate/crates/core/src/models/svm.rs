//! Soft-margin kernel SVM trained by sequential minimal optimization.
//!
//! Solves `min 0.5 a'Qa - e'a` subject to `0 <= a_i <= C` and `y'a = 0`,
//! where `Q_ij = y_i y_j K(x_i, x_j)` and `K(u, v) = exp(-gamma |u - v|^2)`.
//! Each step picks the maximal violating pair
//!
//! ```text
//! i = argmax { -y_t G_t : t in I_up },   j = argmin { -y_t G_t : t in I_low }
//! ```
//!
//! and solves the two-variable subproblem analytically. Training stops once
//! `(-y_i G_i) - (-y_j G_j) <= tol`.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::check_training_set;
use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::sparse::{squared_distance, FeatureMatrix, RowView};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gamma {
    /// `1 / (d * Var(X))` over all entries of the training matrix.
    Scale,
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmConfig {
    pub c: f64,
    pub gamma: Gamma,
    pub tol: f64,
    pub max_iter: usize,
    /// Kernel row cache budget in megabytes.
    pub cache_mb: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            c: 1.0,
            gamma: Gamma::Scale,
            tol: 1e-3,
            max_iter: 10_000_000,
            cache_mb: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSvm {
    pub config: SvmConfig,
    /// Resolved kernel width.
    pub gamma: f64,
    pub support_vectors: FeatureMatrix,
    /// `alpha_i * y_i` for each support vector.
    pub dual_coef: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Maximal KKT violation at exit.
    pub max_violation: f64,
}

/// Full dual solution, exposed for inspection and tests.
#[derive(Debug, Clone)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub gamma: f64,
    pub iterations: usize,
    pub max_violation: f64,
    pub converged: bool,
}

pub fn rbf(gamma: f64, a: RowView<'_>, b: RowView<'_>) -> f64 {
    (-gamma * squared_distance(a, b)).exp()
}

/// `1 / (d * Var(X))`, or 1 when the variance is zero.
pub fn scale_gamma(x: &FeatureMatrix) -> f64 {
    let count = (x.n_rows() * x.dim()) as f64;
    if count == 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    for r in x.rows() {
        r.for_each_nonzero(|_, v| sum += v);
    }
    let mean = sum / count;
    let mut sq = 0.0;
    let mut nonzero = 0usize;
    for r in x.rows() {
        r.for_each_nonzero(|_, v| {
            sq += (v - mean) * (v - mean);
            nonzero += 1;
        });
    }
    sq += (count - nonzero as f64) * mean * mean;
    let var = sq / count;
    if var > 0.0 {
        1.0 / (x.dim() as f64 * var)
    } else {
        1.0
    }
}

struct KernelCache<'a> {
    x: &'a FeatureMatrix,
    gamma: f64,
    capacity: usize,
    rows: HashMap<usize, (u64, Arc<Vec<f64>>)>,
    clock: u64,
}

impl<'a> KernelCache<'a> {
    fn new(x: &'a FeatureMatrix, gamma: f64, cache_mb: usize) -> Self {
        let per_row = (x.n_rows() * 8).max(1);
        let capacity = ((cache_mb << 20) / per_row).max(2);
        KernelCache {
            x,
            gamma,
            capacity,
            rows: HashMap::new(),
            clock: 0,
        }
    }

    fn row(&mut self, i: usize) -> Arc<Vec<f64>> {
        self.clock += 1;
        if let Some(entry) = self.rows.get_mut(&i) {
            entry.0 = self.clock;
            return entry.1.clone();
        }
        if self.rows.len() >= self.capacity {
            let oldest = self
                .rows
                .iter()
                .min_by_key(|(_, (stamp, _))| *stamp)
                .map(|(&k, _)| k)
                .unwrap();
            self.rows.remove(&oldest);
        }
        let xi = self.x.row(i);
        let row: Vec<f64> = self.x.rows().map(|xj| rbf(self.gamma, xi, xj)).collect();
        let row = Arc::new(row);
        self.rows.insert(i, (self.clock, row.clone()));
        row
    }
}

fn in_up(y: f64, a: f64, c: f64) -> bool {
    (y > 0.0 && a < c) || (y < 0.0 && a > 0.0)
}

fn in_low(y: f64, a: f64, c: f64) -> bool {
    (y > 0.0 && a > 0.0) || (y < 0.0 && a < c)
}

const TAU: f64 = 1e-12;

pub fn solve_dual(x: &FeatureMatrix, labels: &[Label], config: &SvmConfig) -> Result<DualSolution> {
    check_training_set(x, labels)?;
    if !x.all_finite() {
        return Err(Error::InvalidData("non-finite feature value".into()));
    }
    if config.c.is_nan() || config.c <= 0.0 || config.tol.is_nan() || config.tol <= 0.0 {
        return Err(Error::Config("C and tol must be positive".into()));
    }
    let gamma = match config.gamma {
        Gamma::Scale => scale_gamma(x),
        Gamma::Value(g) if g > 0.0 => g,
        Gamma::Value(g) => return Err(Error::Config(format!("gamma must be positive, got {g}"))),
    };
    let n = labels.len();
    let c = config.c;
    let y: Vec<f64> = labels.iter().map(|l| l.sign()).collect();
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let mut cache = KernelCache::new(x, gamma, config.cache_mb);
    let diag: Vec<f64> = vec![1.0; n]; // K(x, x) = 1 for RBF

    let mut iterations = 0;
    let mut violation;
    loop {
        let mut i = usize::MAX;
        let mut m_up = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut m_low = f64::INFINITY;
        for t in 0..n {
            let v = -y[t] * grad[t];
            if in_up(y[t], alpha[t], c) && v > m_up {
                m_up = v;
                i = t;
            }
            if in_low(y[t], alpha[t], c) && v < m_low {
                m_low = v;
                j = t;
            }
        }
        violation = if i == usize::MAX || j == usize::MAX {
            0.0
        } else {
            m_up - m_low
        };
        if violation <= config.tol || iterations >= config.max_iter {
            break;
        }
        iterations += 1;

        let ki = cache.row(i);
        let kj = cache.row(j);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let qij = y[i] * y[j] * ki[j];
        if y[i] != y[j] {
            let quad = (diag[i] + diag[j] + 2.0 * qij).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (diag[i] + diag[j] - 2.0 * qij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += y[t] * (y[i] * ki[t] * di + y[j] * kj[t] * dj);
        }
    }

    // Bias from free vectors, else the midpoint of the feasible interval.
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free_sum, mut free_n) = (0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free_sum += yg;
            free_n += 1;
        }
    }
    let rho = if free_n > 0 {
        free_sum / free_n as f64
    } else {
        (ub + lb) / 2.0
    };
    Ok(DualSolution {
        alpha,
        bias: -rho,
        gamma,
        iterations,
        max_violation: violation,
        converged: violation <= config.tol,
    })
}

impl KernelSvm {
    pub fn fit(x: &FeatureMatrix, labels: &[Label], config: SvmConfig) -> Result<Self> {
        let sol = solve_dual(x, labels, &config)?;
        let sv: Vec<usize> = (0..labels.len()).filter(|&i| sol.alpha[i] > 0.0).collect();
        let dual_coef = sv
            .iter()
            .map(|&i| sol.alpha[i] * labels[i].sign())
            .collect();
        Ok(KernelSvm {
            config,
            gamma: sol.gamma,
            support_vectors: x.subset(&sv),
            dual_coef,
            bias: sol.bias,
            iterations: sol.iterations,
            converged: sol.converged,
            max_violation: sol.max_violation,
        })
    }

    pub fn decision_row(&self, row: RowView<'_>) -> f64 {
        let mut f = self.bias;
        for (k, coef) in self.dual_coef.iter().enumerate() {
            f += coef * rbf(self.gamma, self.support_vectors.row(k), row);
        }
        f
    }

    pub fn decision_function(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        x.check_dim(self.support_vectors.dim())?;
        if !x.all_finite() {
            return Err(Error::InvalidData("non-finite feature value".into()));
        }
        Ok(x.rows().map(|r| self.decision_row(r)).collect())
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<Label>> {
        Ok(self
            .decision_function(x)?
            .into_iter()
            .map(Label::from_sign)
            .collect())
    }
}
