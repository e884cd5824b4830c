//! Hyperparameter search: random search for the network, per-attribute grid
//! search for the SVR.

use ndarray::{Array2, Axis};
use rand::seq::IndexedRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mlp::MlpConfig;
use super::model::RegressorConfig;
use super::svr::{rbf_from_distances, solve_epsilon_svr, squared_distances, SvrConfig, SvrParams};
use crate::dataset::{subjective_matrix, CoffeeRecord, Encoder};
use crate::error::{Error, Result};
use crate::evaluation::{cross_validate, fold_assignment};
use crate::rng;
use crate::subjective::N_ATTRIBUTES;

/// Discrete choices for each searched network hyperparameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlpSearchSpace {
    pub widths: Vec<usize>,
    pub depths: Vec<usize>,
    pub dropout_rates: Vec<f64>,
    pub learning_rates: Vec<f64>,
    pub batch_sizes: Vec<usize>,
    /// Shared by every sampled configuration.
    pub epochs: usize,
}

impl Default for MlpSearchSpace {
    fn default() -> Self {
        Self {
            widths: vec![16, 64, 128, 256],
            depths: vec![1, 2, 3],
            dropout_rates: vec![0.0, 0.1, 0.2, 0.3],
            learning_rates: vec![1e-4, 3e-4, 1e-3, 3e-3],
            batch_sizes: vec![16, 32, 64],
            epochs: 200,
        }
    }
}

impl MlpSearchSpace {
    /// A space holding exactly one configuration.
    pub fn single(cfg: &MlpConfig) -> Result<Self> {
        let width = *cfg.hidden_layers.first().ok_or_else(|| Error::invalid("hidden_layers", "empty"))?;
        if cfg.hidden_layers.iter().any(|&w| w != width) {
            return Err(Error::invalid("hidden_layers", "search space only covers uniform widths"));
        }
        Ok(Self {
            widths: vec![width],
            depths: vec![cfg.hidden_layers.len()],
            dropout_rates: vec![cfg.dropout_rate],
            learning_rates: vec![cfg.adam.learning_rate],
            batch_sizes: vec![cfg.batch_size],
            epochs: cfg.epochs,
        })
    }

    fn is_empty(&self) -> bool {
        self.widths.is_empty()
            || self.depths.is_empty()
            || self.dropout_rates.is_empty()
            || self.learning_rates.is_empty()
            || self.batch_sizes.is_empty()
    }

    fn sample(&self, rng: &mut rng::Rng, seed: u64) -> MlpConfig {
        let width = *self.widths.choose(rng).unwrap();
        let depth = *self.depths.choose(rng).unwrap();
        let mut cfg = MlpConfig {
            hidden_layers: vec![width; depth],
            dropout_rate: *self.dropout_rates.choose(rng).unwrap(),
            batch_size: *self.batch_sizes.choose(rng).unwrap(),
            epochs: self.epochs,
            seed,
            ..MlpConfig::default()
        };
        cfg.adam.learning_rate = *self.learning_rates.choose(rng).unwrap();
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchTrial<C> {
    pub config: C,
    pub average_rmse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpSearchResult {
    pub best: MlpConfig,
    pub best_rmse: f64,
    pub trials: Vec<SearchTrial<MlpConfig>>,
}

/// Samples `budget` configurations and keeps the lowest cross-validated RMSE.
/// Earlier samples win ties.
pub fn random_search_mlp(
    records: &[CoffeeRecord],
    space: &MlpSearchSpace,
    budget: usize,
    folds: usize,
    seed: u64,
) -> Result<MlpSearchResult> {
    if space.is_empty() {
        return Err(Error::invalid("search_space", "every dimension needs at least one value"));
    }
    if budget == 0 {
        return Err(Error::invalid("budget", "must be at least 1"));
    }
    let mut rng = rng::stream(seed, &[0x7365_6172_6368]);
    let mut trials = Vec::with_capacity(budget);
    for i in 0..budget {
        let cfg = space.sample(&mut rng, seed);
        cfg.validate()?;
        let report = cross_validate(records, &RegressorConfig::Mlp(cfg.clone()), folds, seed)?;
        tracing::info!(trial = i, rmse = report.average_rmse, layers = ?cfg.hidden_layers, "search trial");
        trials.push(SearchTrial {
            config: cfg,
            average_rmse: report.average_rmse,
        });
    }
    let mut best = 0;
    for (i, t) in trials.iter().enumerate() {
        if t.average_rmse < trials[best].average_rmse {
            best = i;
        }
    }
    Ok(MlpSearchResult {
        best: trials[best].config.clone(),
        best_rmse: trials[best].average_rmse,
        trials,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvrGrid {
    pub c: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl Default for SvrGrid {
    fn default() -> Self {
        Self {
            c: vec![1.0, 10.0, 100.0],
            gamma: vec![0.01, 0.1, 1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrGridResult {
    /// Chosen configuration, one pair per attribute.
    pub config: SvrConfig,
    /// `cv_rmse[attribute][gamma_index * |C| + c_index]`.
    pub cv_rmse: Vec<Vec<f64>>,
    pub grid: SvrGrid,
}

/// Picks `(C, gamma)` per attribute by k-fold CV RMSE. Ties go to the earlier
/// grid point (gamma-major).
pub fn grid_search_svr(
    records: &[CoffeeRecord],
    grid: &SvrGrid,
    base: &SvrConfig,
    folds: usize,
    seed: u64,
) -> Result<SvrGridResult> {
    if grid.c.is_empty() || grid.gamma.is_empty() {
        return Err(Error::invalid("grid", "needs at least one C and one gamma"));
    }
    for &c in &grid.c {
        if !(c > 0.0) {
            return Err(Error::invalid("c", format!("{c} must be > 0")));
        }
    }
    for &g in &grid.gamma {
        if !(g > 0.0) {
            return Err(Error::invalid("gamma", format!("{g} must be > 0")));
        }
    }
    let assignment = fold_assignment(records.len(), folds, seed)?;
    let n_points = grid.c.len() * grid.gamma.len();

    // Squared sums of residuals per (fold, attribute, grid point).
    let per_fold: Vec<Result<Array2<f64>>> = (0..folds)
        .into_par_iter()
        .map(|f| {
            let train: Vec<CoffeeRecord> = records
                .iter()
                .zip(&assignment)
                .filter(|(_, &a)| a != f)
                .map(|(r, _)| r.clone())
                .collect();
            let valid: Vec<CoffeeRecord> = records
                .iter()
                .zip(&assignment)
                .filter(|(_, &a)| a == f)
                .map(|(r, _)| r.clone())
                .collect();
            let encoder = Encoder::fit_records(&train)?;
            let (xt, _) = encoder.transform_records(&train);
            let (xv, _) = encoder.transform_records(&valid);
            let yt = subjective_matrix(&train);
            let yv = subjective_matrix(&valid);
            let sq_tt = squared_distances(xt.values.view(), xt.values.view());
            let sq_vt = squared_distances(xv.values.view(), xt.values.view());
            let mut sse = Array2::zeros((N_ATTRIBUTES, n_points));
            for (gi, &gamma) in grid.gamma.iter().enumerate() {
                let k_tt = rbf_from_distances(&sq_tt, gamma);
                let k_vt = rbf_from_distances(&sq_vt, gamma);
                let cells: Vec<(usize, usize, f64)> = (0..N_ATTRIBUTES)
                    .flat_map(|j| grid.c.iter().enumerate().map(move |(ci, &c)| (j, ci, c)))
                    .collect();
                let results: Vec<(usize, usize, f64)> = cells
                    .into_par_iter()
                    .map(|(j, ci, c)| {
                        let z = yt.column(j).to_vec();
                        let sol = solve_epsilon_svr(k_tt.view(), &z, c, base.epsilon, base.tolerance, base.max_iterations);
                        let coef = sol.coefficients();
                        let pred = k_vt.dot(&ndarray::Array1::from(coef)) - sol.rho;
                        let err: f64 = pred
                            .iter()
                            .zip(yv.column(j))
                            .map(|(p, t)| {
                                let d = crate::subjective::clamp_score(*p) - t;
                                d * d
                            })
                            .sum();
                        (j, ci, err)
                    })
                    .collect();
                for (j, ci, err) in results {
                    sse[[j, gi * grid.c.len() + ci]] = err;
                }
            }
            Ok(sse)
        })
        .collect();

    // Per-fold RMSE averaged over folds, matching cross_validate.
    let mut counts = vec![0usize; folds];
    for &a in &assignment {
        counts[a] += 1;
    }
    let mut cv = Array2::<f64>::zeros((N_ATTRIBUTES, n_points));
    for (f, sse) in per_fold.into_iter().enumerate() {
        let sse = sse?;
        cv += &sse.mapv(|s| (s / counts[f] as f64).sqrt());
    }
    cv /= folds as f64;

    let mut per_target = Vec::with_capacity(N_ATTRIBUTES);
    for row in cv.axis_iter(Axis(0)) {
        let mut best = 0;
        for (p, &v) in row.iter().enumerate() {
            if v < row[best] {
                best = p;
            }
        }
        per_target.push(SvrParams {
            gamma: grid.gamma[best / grid.c.len()],
            c: grid.c[best % grid.c.len()],
        });
    }
    Ok(SvrGridResult {
        config: SvrConfig {
            per_target,
            ..base.clone()
        },
        cv_rmse: cv.outer_iter().map(|r| r.to_vec()).collect(),
        grid: grid.clone(),
    })
}
