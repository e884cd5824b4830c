//! Random forest of multi-output regression trees.

use ndarray::{Array2, ArrayView2};
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{Design, FeatureSubset, RegressionTree, TreeBuilder, TreeParams};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub features_per_split: FeatureSubset,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 20,
            max_depth: None,
            min_samples_leaf: 1,
            features_per_split: FeatureSubset::All,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::invalid("n_trees", "must be at least 1"));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::invalid("min_samples_leaf", "must be at least 1"));
        }
        if let FeatureSubset::Fraction(f) = self.features_per_split {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::invalid("features_per_split", format!("fraction {f} not in (0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<RegressionTree>,
    pub n_features: usize,
    pub n_outputs: usize,
}

/// A fitted forest with its impurity-based column importances.
pub struct ForestFit {
    pub forest: RandomForest,
    /// Mean of per-tree normalized impurity decrease; sums to 1 unless every
    /// tree is a single leaf, in which case all entries are 0.
    pub importances: Vec<f64>,
}

pub(crate) fn check_inputs(x: ArrayView2<f64>, y: ArrayView2<f64>) -> Result<()> {
    if x.nrows() != y.nrows() {
        return Err(Error::Shape(format!("X has {} rows, Y has {}", x.nrows(), y.nrows())));
    }
    if x.nrows() < 2 {
        return Err(Error::invalid("X", "at least two rows are required"));
    }
    if x.iter().any(|v| v.is_nan()) {
        return Err(Error::NaN("X"));
    }
    if y.iter().any(|v| v.is_nan()) {
        return Err(Error::NaN("Y"));
    }
    Ok(())
}

pub fn fit_forest(x: ArrayView2<f64>, y: ArrayView2<f64>, cfg: &ForestConfig) -> Result<ForestFit> {
    check_inputs(x, y)?;
    cfg.validate()?;
    let design = Design::new(x, y);
    let n = x.nrows();
    let params = TreeParams {
        max_depth: cfg.max_depth,
        min_samples_leaf: cfg.min_samples_leaf,
        features_per_split: cfg.features_per_split,
    };

    let fitted: Vec<(RegressionTree, Vec<f64>)> = (0..cfg.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut r = rng::stream(cfg.seed, &[0x7472_6565, t as u64]);
            let samples: Vec<usize> = if cfg.bootstrap {
                (0..n).map(|_| r.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let mut builder = TreeBuilder::new(&design, params);
            let tree = builder.build(samples, &mut r);
            (tree, builder.importance)
        })
        .collect();

    let p = x.ncols();
    let mut importances = vec![0.0; p];
    let mut contributing = 0usize;
    for (_, imp) in &fitted {
        let total: f64 = imp.iter().sum();
        if total > 0.0 {
            contributing += 1;
            for (acc, v) in importances.iter_mut().zip(imp) {
                *acc += v / total;
            }
        }
    }
    if contributing > 0 {
        let total: f64 = importances.iter().sum();
        importances.iter_mut().for_each(|v| *v /= total);
    }

    Ok(ForestFit {
        forest: RandomForest {
            trees: fitted.into_iter().map(|(t, _)| t).collect(),
            n_features: p,
            n_outputs: y.ncols(),
        },
        importances,
    })
}

impl RandomForest {
    /// Mean of the tree predictions (unclamped).
    pub fn predict_raw(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut out = Array2::zeros((x.nrows(), self.n_outputs));
        for (i, row) in x.rows().into_iter().enumerate() {
            for tree in &self.trees {
                for (acc, v) in out.row_mut(i).iter_mut().zip(tree.predict_row(row)) {
                    *acc += v;
                }
            }
        }
        out /= self.trees.len() as f64;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    #[test]
    fn constant_targets() {
        let x = array![[0.0, 1.0], [1.0, 0.0], [0.5, 0.5], [0.2, 0.9]];
        let y = Array2::from_elem((4, 3), 7.25);
        let fit = fit_forest(x.view(), y.view(), &ForestConfig::default()).unwrap();
        assert!(fit.forest.predict_raw(x.view()).iter().all(|&v| v == 7.25));
        assert!(fit.importances.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_bad_input() {
        let x = array![[0.0]];
        let y = array![[1.0]];
        assert!(fit_forest(x.view(), y.view(), &ForestConfig::default()).is_err());
        let x = array![[0.0], [f64::NAN]];
        let y = array![[1.0], [2.0]];
        assert!(matches!(
            fit_forest(x.view(), y.view(), &ForestConfig::default()),
            Err(Error::NaN("X"))
        ));
        let cfg = ForestConfig {
            n_trees: 0,
            ..Default::default()
        };
        let x = array![[0.0], [1.0]];
        assert!(fit_forest(x.view(), y.view(), &cfg).is_err());
    }

    #[test]
    fn importances_normalized() {
        let x = array![[0.0, 5.0], [1.0, 5.0], [2.0, 5.0], [3.0, 5.0], [4.0, 5.0]];
        let y = array![[1.0], [1.5], [3.0], [4.2], [5.0]];
        let fit = fit_forest(x.view(), y.view(), &ForestConfig::default()).unwrap();
        assert!((fit.importances.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert_eq!(fit.importances[1], 0.0);
    }
}
