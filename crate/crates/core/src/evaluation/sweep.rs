//! Recommendation-accuracy sweep over prediction sizes: hide a fraction of
//! the reviews, impute their scores, and compare kNN answers for simulated
//! users against the answers on the full ground truth.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kde::{fit_kde, sample_users_from};
use super::metrics::{mean, std_dev};
use crate::dataset::{partition, subjective_matrix, CoffeeRecord};
use crate::error::{Error, Result};
use crate::recommender::{build_space, nearest_ids, rec_acc, PredictedBean, RecommendationSpace};
use crate::regressors::{RegressorConfig, TrainedRegressor};
use crate::rng::{self, derive_seed, fraction_key};
use crate::subjective::SubjectiveVector;

const USERS: u64 = 0x7573_6572;
const PARTITION: u64 = 0x7061_7274;
const MODEL: u64 = 0x6d6f_6465;

/// Fills in subjective scores for hidden records.
pub trait Imputer: Sync {
    fn name(&self) -> String;
    fn impute(&self, reviewed: &[CoffeeRecord], hidden: &[CoffeeRecord], seed: u64) -> Result<Vec<SubjectiveVector>>;
}

/// Trains a regressor on the reviewed records.
pub struct ModelImputer {
    pub config: RegressorConfig,
}

impl Imputer for ModelImputer {
    fn name(&self) -> String {
        self.config.family().short().to_string()
    }

    fn impute(&self, reviewed: &[CoffeeRecord], hidden: &[CoffeeRecord], seed: u64) -> Result<Vec<SubjectiveVector>> {
        if hidden.is_empty() {
            return Ok(Vec::new());
        }
        if reviewed.len() < 2 {
            return Err(Error::invalid("m", "fewer than two reviewed records remain for training"));
        }
        let model = TrainedRegressor::train(reviewed, &self.config.with_seed(seed))?;
        let pred = model.predict_records(hidden);
        Ok(pred
            .rows()
            .into_iter()
            .map(|r| {
                let mut a = [0.0; crate::subjective::N_ATTRIBUTES];
                a.iter_mut().zip(r).for_each(|(o, v)| *o = *v);
                SubjectiveVector::from_array(a)
            })
            .collect())
    }
}

/// Returns the true scores; the sweep must then report perfect accuracy.
pub struct OracleImputer;

impl Imputer for OracleImputer {
    fn name(&self) -> String {
        "oracle".into()
    }

    fn impute(&self, _: &[CoffeeRecord], hidden: &[CoffeeRecord], _: u64) -> Result<Vec<SubjectiveVector>> {
        Ok(hidden.iter().map(|r| r.subjective).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub k: usize,
    pub m_values: Vec<f64>,
    pub n_users: usize,
    pub repetitions: usize,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            k: 5,
            m_values: vec![0.10, 0.20, 0.33, 0.50],
            n_users: 100,
            repetitions: 10,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub m: f64,
    pub hidden: usize,
    /// Over users and repetitions.
    pub mean: f64,
    pub std: f64,
    /// Mean accuracy of each repetition.
    pub per_repetition: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub imputer: String,
    pub k: usize,
    pub n_users: usize,
    pub repetitions: usize,
    pub seed: u64,
    pub rows: Vec<AccuracyRow>,
}

impl AccuracyReport {
    pub fn row(&self, m: f64) -> Option<&AccuracyRow> {
        self.rows.iter().find(|r| r.m == m)
    }
}

pub fn accuracy_sweep(records: &[CoffeeRecord], config: &RegressorConfig, sweep: &SweepConfig) -> Result<AccuracyReport> {
    accuracy_sweep_with(
        records,
        &ModelImputer {
            config: config.clone(),
        },
        sweep,
    )
}

struct Cell {
    m_index: usize,
    repetition: usize,
    hidden: usize,
    accuracies: Vec<f64>,
}

/// Runs every (m, repetition) cell in parallel. Users for repetition `r` come
/// from the stream `(seed, r)` and are shared across m values; partitions and
/// model seeds come from `(seed, m, r)`.
pub fn accuracy_sweep_with(records: &[CoffeeRecord], imputer: &dyn Imputer, sweep: &SweepConfig) -> Result<AccuracyReport> {
    if sweep.k == 0 {
        return Err(Error::invalid("k", "must be at least 1"));
    }
    if sweep.k > records.len() {
        return Err(Error::invalid("k", format!("{} exceeds the {} records", sweep.k, records.len())));
    }
    if sweep.n_users == 0 {
        return Err(Error::invalid("n_users", "must be at least 1"));
    }
    if sweep.repetitions == 0 {
        return Err(Error::invalid("repetitions", "must be at least 1"));
    }
    if let Some(m) = sweep.m_values.iter().find(|m| !(0.0..=1.0).contains(*m)) {
        return Err(Error::invalid("m", format!("{m} not in [0, 1]")));
    }

    let kde = fit_kde(subjective_matrix(records).view(), sweep.seed)?;
    let users: Vec<Vec<SubjectiveVector>> = (0..sweep.repetitions)
        .map(|r| sample_users_from(&kde, sweep.n_users, &mut rng::stream(sweep.seed, &[USERS, r as u64])))
        .collect::<Result<_>>()?;
    let ground = build_space(records, &[], None)?;
    let ground_ids: Vec<Vec<Vec<usize>>> = users
        .iter()
        .map(|us| {
            us.iter()
                .map(|u| top_ids(&ground, u, sweep.k))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let cells: Vec<(usize, usize)> = (0..sweep.m_values.len())
        .flat_map(|mi| (0..sweep.repetitions).map(move |r| (mi, r)))
        .collect();
    let mut done: Vec<Cell> = cells
        .into_par_iter()
        .map(|(mi, r)| -> Result<Cell> {
            let m = sweep.m_values[mi];
            let key = [fraction_key(m), r as u64];
            let part = partition(records, m, derive_seed(sweep.seed, &[PARTITION, key[0], key[1]]))?;
            let hidden_set: std::collections::BTreeSet<usize> = part.hidden_ids.iter().copied().collect();
            let (hidden, reviewed): (Vec<CoffeeRecord>, Vec<CoffeeRecord>) =
                records.iter().cloned().partition(|rec| hidden_set.contains(&rec.id));
            let imputed = imputer.impute(&reviewed, &hidden, derive_seed(sweep.seed, &[MODEL, key[0], key[1]]))?;
            if imputed.len() != hidden.len() {
                return Err(Error::Shape(format!(
                    "imputer returned {} rows for {} hidden records",
                    imputed.len(),
                    hidden.len()
                )));
            }
            let predicted: Vec<PredictedBean> = hidden
                .iter()
                .zip(imputed)
                .map(|(rec, s)| PredictedBean {
                    id: rec.id,
                    objective: rec.objective.clone(),
                    subjective: s,
                })
                .collect();
            let space = build_space(&reviewed, &predicted, None)?;
            let accuracies = users[r]
                .iter()
                .zip(&ground_ids[r])
                .map(|(u, g)| rec_acc(g, &top_ids(&space, u, sweep.k)?))
                .collect::<Result<Vec<f64>>>()?;
            Ok(Cell {
                m_index: mi,
                repetition: r,
                hidden: hidden.len(),
                accuracies,
            })
        })
        .collect::<Result<_>>()?;
    done.sort_by_key(|c| (c.m_index, c.repetition));

    let rows = sweep
        .m_values
        .iter()
        .enumerate()
        .map(|(mi, &m)| {
            let cells: Vec<&Cell> = done.iter().filter(|c| c.m_index == mi).collect();
            let all: Vec<f64> = cells.iter().flat_map(|c| c.accuracies.iter().copied()).collect();
            AccuracyRow {
                m,
                hidden: cells[0].hidden,
                mean: mean(&all),
                std: std_dev(&all),
                per_repetition: cells.iter().map(|c| mean(&c.accuracies)).collect(),
            }
        })
        .collect();

    Ok(AccuracyReport {
        imputer: imputer.name(),
        k: sweep.k,
        n_users: sweep.n_users,
        repetitions: sweep.repetitions,
        seed: sweep.seed,
        rows,
    })
}

fn top_ids(space: &RecommendationSpace, u: &SubjectiveVector, k: usize) -> Result<Vec<usize>> {
    Ok(nearest_ids(space, u, k)?.into_iter().map(|(id, _)| id).collect())
}
