//! K-fold cross-validation of a regressor family.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{mean, rmse};
use crate::dataset::{dataset_fingerprint, subjective_matrix, CoffeeRecord};
use crate::error::{Error, Result};
use crate::regressors::{Family, RegressorConfig, TrainedRegressor};
use crate::rng;
use crate::subjective::Attribute;

/// Shuffled fold index for each of `n` rows; fold sizes differ by at most one.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::invalid("folds", format!("{folds} must be at least 2")));
    }
    if n < folds {
        return Err(Error::invalid("folds", format!("{folds} folds need at least {folds} rows, got {n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::stream(seed, &[0x666f_6c64]));
    let mut out = vec![0; n];
    for (pos, &row) in order.iter().enumerate() {
        out[row] = pos % folds;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub n_train: usize,
    pub n_valid: usize,
    pub rmse: Vec<f64>,
    /// Hash of the rows the model was trained on.
    pub train_fingerprint: String,
    pub encoder_fingerprint: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub family: Family,
    pub folds: usize,
    pub seed: u64,
    pub attributes: Vec<String>,
    /// Mean over folds, one per attribute.
    pub per_attribute: Vec<f64>,
    /// Mean of `per_attribute`.
    pub average_rmse: f64,
    pub per_fold: Vec<FoldResult>,
}

/// Splits `records` into the training rows and validation rows of `fold`.
pub fn fold_split(records: &[CoffeeRecord], assignment: &[usize], fold: usize) -> (Vec<CoffeeRecord>, Vec<CoffeeRecord>) {
    let mut train = Vec::new();
    let mut valid = Vec::new();
    for (r, &a) in records.iter().zip(assignment) {
        if a == fold {
            valid.push(r.clone());
        } else {
            train.push(r.clone());
        }
    }
    (train, valid)
}

/// Fits the encoder and model on each training fold and scores the held-out
/// fold. Folds run in parallel.
pub fn cross_validate(records: &[CoffeeRecord], config: &RegressorConfig, folds: usize, seed: u64) -> Result<CvReport> {
    let assignment = fold_assignment(records.len(), folds, seed)?;
    let per_fold: Vec<FoldResult> = (0..folds)
        .into_par_iter()
        .map(|f| -> Result<FoldResult> {
            let (train, valid) = fold_split(records, &assignment, f);
            let model = TrainedRegressor::train(&train, config)?;
            let pred = model.predict_records(&valid);
            let truth = subjective_matrix(&valid);
            Ok(FoldResult {
                fold: f,
                n_train: train.len(),
                n_valid: valid.len(),
                rmse: rmse(pred.view(), truth.view())?,
                train_fingerprint: dataset_fingerprint(&train),
                encoder_fingerprint: model.encoder.fingerprint(),
            })
        })
        .collect::<Result<_>>()?;

    let n_attr = Attribute::ALL.len();
    let per_attribute: Vec<f64> = (0..n_attr)
        .map(|j| per_fold.iter().map(|f| f.rmse[j]).sum::<f64>() / folds as f64)
        .collect();
    Ok(CvReport {
        family: config.family(),
        folds,
        seed,
        attributes: Attribute::ALL.iter().map(|a| a.name().to_string()).collect(),
        average_rmse: mean(&per_attribute),
        per_attribute,
        per_fold,
    })
}
