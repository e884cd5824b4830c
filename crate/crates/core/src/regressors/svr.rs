//! Epsilon-insensitive support vector regression with an RBF kernel, solved
//! by sequential minimal optimization on the dual.
//!
//! The dual is posed over `2n` variables: `alpha` (first half, sign +1) and
//! `alpha*` (second half, sign -1), minimizing
//! `1/2 a^T Q a + p^T a` subject to `sum(sign * a) = 0` and `0 <= a <= C`,
//! with `Q[s][t] = sign_s * sign_t * K(s mod n, t mod n)`. Working pairs are
//! chosen by maximal violation with second-order gain.

use ndarray::{Array2, ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::forest::check_inputs;
use crate::error::{Error, Result};

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvrParams {
    /// Penalty on points outside the tube.
    pub c: f64,
    /// RBF width: `K(a, b) = exp(-gamma * |a - b|^2)`.
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvrConfig {
    /// One `(C, gamma)` pair per subjective attribute, canonical order.
    pub per_target: Vec<SvrParams>,
    pub epsilon: f64,
    /// Stop when the maximal KKT violation drops below this.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SvrConfig {
    fn default() -> Self {
        Self {
            per_target: vec![SvrParams { c: 1.0, gamma: 0.1 }; crate::subjective::N_ATTRIBUTES],
            epsilon: 0.1,
            tolerance: 1e-3,
            max_iterations: 200_000,
        }
    }
}

impl SvrConfig {
    pub fn uniform(params: SvrParams, n_targets: usize) -> Self {
        Self {
            per_target: vec![params; n_targets],
            ..Default::default()
        }
    }

    pub fn validate(&self, n_targets: usize) -> Result<()> {
        if self.per_target.len() != n_targets {
            return Err(Error::invalid(
                "per_target",
                format!("{} (C, gamma) pairs for {n_targets} targets", self.per_target.len()),
            ));
        }
        for p in &self.per_target {
            if !(p.c > 0.0) {
                return Err(Error::invalid("c", format!("{} must be > 0", p.c)));
            }
            if !(p.gamma > 0.0) {
                return Err(Error::invalid("gamma", format!("{} must be > 0", p.gamma)));
            }
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::invalid("epsilon", "must be >= 0"));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::invalid("tolerance", "must be > 0"));
        }
        Ok(())
    }
}

/// Raw dual solution of one epsilon-SVR problem.
#[derive(Debug, Clone)]
pub struct SmoSolution {
    pub alpha: Vec<f64>,
    pub alpha_star: Vec<f64>,
    pub rho: f64,
    pub converged: bool,
    pub iterations: usize,
    /// `m(a) - M(a)` at exit; below the tolerance when converged.
    pub max_violation: f64,
    /// Gradient of the dual objective over all `2n` variables.
    pub gradient: Vec<f64>,
}

impl SmoSolution {
    /// Signed coefficients `alpha - alpha*`.
    pub fn coefficients(&self) -> Vec<f64> {
        self.alpha
            .iter()
            .zip(&self.alpha_star)
            .map(|(a, b)| a - b)
            .collect()
    }

    /// Largest `|sign_t * G_t - rho|` over free variables.
    pub fn free_kkt_residual(&self, c: f64) -> f64 {
        let n = self.alpha.len();
        (0..2 * n)
            .filter_map(|t| {
                let (a, sign) = if t < n {
                    (self.alpha[t], 1.0)
                } else {
                    (self.alpha_star[t - n], -1.0)
                };
                (a > 0.0 && a < c).then(|| (sign * self.gradient[t] - self.rho).abs())
            })
            .fold(0.0, f64::max)
    }
}

/// Squared Euclidean distances between rows of `a` and rows of `b`.
pub fn squared_distances(a: ArrayView2<f64>, b: ArrayView2<f64>) -> Array2<f64> {
    let na = a.map_axis(Axis(1), |r| r.dot(&r));
    let nb = b.map_axis(Axis(1), |r| r.dot(&r));
    let mut d = a.dot(&b.t());
    for ((i, j), v) in d.indexed_iter_mut() {
        *v = (na[i] + nb[j] - 2.0 * *v).max(0.0);
    }
    d
}

pub fn rbf_from_distances(sq: &Array2<f64>, gamma: f64) -> Array2<f64> {
    sq.mapv(|d| (-gamma * d).exp())
}

/// Solves the epsilon-SVR dual for targets `z` given the training kernel.
pub fn solve_epsilon_svr(
    kernel: ArrayView2<f64>,
    z: &[f64],
    c: f64,
    epsilon: f64,
    tolerance: f64,
    max_iterations: usize,
) -> SmoSolution {
    let n = z.len();
    let l = 2 * n;
    let sign = |t: usize| if t < n { 1.0 } else { -1.0 };
    let k = |s: usize, t: usize| kernel[[s % n, t % n]];

    let mut a = vec![0.0; l];
    let mut grad: Vec<f64> = (0..l)
        .map(|t| if t < n { epsilon - z[t] } else { epsilon + z[t - n] })
        .collect();

    let mut iterations = 0;
    let mut converged = false;
    let mut violation = f64::INFINITY;
    while iterations < max_iterations {
        // First index: maximal violator in I_up.
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..l {
            let v = if sign(t) > 0.0 {
                (a[t] < c).then(|| -grad[t])
            } else {
                (a[t] > 0.0).then(|| grad[t])
            };
            if let Some(v) = v {
                if v >= gmax {
                    gmax = v;
                    i_sel = Some(t);
                }
            }
        }
        let Some(i) = i_sel else {
            violation = 0.0;
            converged = true;
            break;
        };

        // Second index: best second-order gain in I_low.
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j_sel = None;
        let mut best_obj = f64::INFINITY;
        for t in 0..l {
            let v = if sign(t) > 0.0 {
                (a[t] > 0.0).then(|| grad[t])
            } else {
                (a[t] < c).then(|| -grad[t])
            };
            let Some(v) = v else { continue };
            if v >= gmax2 {
                gmax2 = v;
            }
            let grad_diff = gmax + v;
            if grad_diff > 0.0 {
                let quad = k(i, i) + k(t, t) - 2.0 * k(i, t);
                let obj = -(grad_diff * grad_diff) / if quad > 0.0 { quad } else { TAU };
                if obj <= best_obj {
                    best_obj = obj;
                    j_sel = Some(t);
                }
            }
        }
        violation = gmax + gmax2;
        if violation < tolerance {
            converged = true;
            break;
        }
        let Some(j) = j_sel else {
            converged = true;
            break;
        };
        iterations += 1;

        let (old_ai, old_aj) = (a[i], a[j]);
        let kij = k(i, j);
        if sign(i) != sign(j) {
            let quad = (k(i, i) + k(j, j) - 2.0 * kij).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = a[i] - a[j];
            a[i] += delta;
            a[j] += delta;
            if diff > 0.0 {
                if a[j] < 0.0 {
                    a[j] = 0.0;
                    a[i] = diff;
                }
            } else if a[i] < 0.0 {
                a[i] = 0.0;
                a[j] = -diff;
            }
            if diff > 0.0 {
                if a[i] > c {
                    a[i] = c;
                    a[j] = c - diff;
                }
            } else if a[j] > c {
                a[j] = c;
                a[i] = c + diff;
            }
        } else {
            let quad = (k(i, i) + k(j, j) - 2.0 * kij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = a[i] + a[j];
            a[i] -= delta;
            a[j] += delta;
            if sum > c {
                if a[i] > c {
                    a[i] = c;
                    a[j] = sum - c;
                }
            } else if a[j] < 0.0 {
                a[j] = 0.0;
                a[i] = sum;
            }
            if sum > c {
                if a[j] > c {
                    a[j] = c;
                    a[i] = sum - c;
                }
            } else if a[i] < 0.0 {
                a[i] = 0.0;
                a[j] = sum;
            }
        }

        let dai = (a[i] - old_ai) * sign(i);
        let daj = (a[j] - old_aj) * sign(j);
        let (ri, rj) = (i % n, j % n);
        for (t, g) in grad.iter_mut().enumerate() {
            let st = sign(t);
            let tn = t % n;
            *g += st * (dai * kernel[[ri, tn]] + daj * kernel[[rj, tn]]);
        }
    }

    let rho = compute_rho(&a, &grad, c, n);
    SmoSolution {
        alpha: a[..n].to_vec(),
        alpha_star: a[n..].to_vec(),
        rho,
        converged,
        iterations,
        max_violation: violation,
        gradient: grad,
    }
}

fn compute_rho(a: &[f64], grad: &[f64], c: f64, n: usize) -> f64 {
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut free_sum = 0.0;
    let mut free = 0usize;
    for t in 0..2 * n {
        let s = if t < n { 1.0 } else { -1.0 };
        let yg = s * grad[t];
        if a[t] >= c {
            if s < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if a[t] <= 0.0 {
            if s > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    if free > 0 {
        free_sum / free as f64
    } else {
        (ub + lb) / 2.0
    }
}

/// One fitted single-target SVR: `f(x) = sum_i coef_i K(sv_i, x) - rho`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    pub params: SvrParams,
    pub epsilon: f64,
    pub support_vectors: Vec<Vec<f64>>,
    pub coefficients: Vec<f64>,
    pub rho: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl SvrModel {
    pub(crate) fn from_solution(x: ArrayView2<f64>, sol: &SmoSolution, params: SvrParams, epsilon: f64) -> Self {
        let mut support_vectors = Vec::new();
        let mut coefficients = Vec::new();
        for (i, coef) in sol.coefficients().into_iter().enumerate() {
            if coef != 0.0 {
                support_vectors.push(x.row(i).to_vec());
                coefficients.push(coef);
            }
        }
        Self {
            params,
            epsilon,
            support_vectors,
            coefficients,
            rho: sol.rho,
            converged: sol.converged,
            iterations: sol.iterations,
        }
    }

    pub fn predict_row(&self, x: &[f64]) -> f64 {
        let g = self.params.gamma;
        self.support_vectors
            .iter()
            .zip(&self.coefficients)
            .map(|(sv, c)| {
                let d: f64 = sv.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
                c * (-g * d).exp()
            })
            .sum::<f64>()
            - self.rho
    }
}

/// Independent per-attribute SVR models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrEnsemble {
    pub models: Vec<SvrModel>,
    pub n_features: usize,
}

impl SvrEnsemble {
    pub fn all_converged(&self) -> bool {
        self.models.iter().all(|m| m.converged)
    }

    pub fn predict_raw(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut out = Array2::zeros((x.nrows(), self.models.len()));
        for (i, row) in x.rows().into_iter().enumerate() {
            let row = row.to_vec();
            for (j, m) in self.models.iter().enumerate() {
                out[[i, j]] = m.predict_row(&row);
            }
        }
        out
    }
}

pub fn fit_svr(x: ArrayView2<f64>, y: ArrayView2<f64>, cfg: &SvrConfig) -> Result<SvrEnsemble> {
    check_inputs(x, y)?;
    cfg.validate(y.ncols())?;
    let sq = squared_distances(x, x);
    let models = (0..y.ncols())
        .into_par_iter()
        .map(|j| {
            let params = cfg.per_target[j];
            let kernel = rbf_from_distances(&sq, params.gamma);
            let z = y.column(j).to_vec();
            let sol = solve_epsilon_svr(kernel.view(), &z, params.c, cfg.epsilon, cfg.tolerance, cfg.max_iterations);
            if !sol.converged {
                tracing::warn!(
                    target = j,
                    iterations = sol.iterations,
                    violation = sol.max_violation,
                    "SMO stopped before reaching the tolerance"
                );
            }
            SvrModel::from_solution(x, &sol, params, cfg.epsilon)
        })
        .collect();
    Ok(SvrEnsemble {
        models,
        n_features: x.ncols(),
    })
}
