use std::collections::BTreeSet;
use std::sync::{Arc, RwLock};

use beanrec_core::dataset::{clean, clean_unreviewed, load_csv, partition, CoffeeRecord};
use beanrec_core::recommender::{build_space, PredictedBean, Provenance, RecommendationSpace};
use beanrec_core::regressors::TrainedRegressor;
use beanrec_core::subjective::{SubjectiveVector, N_ATTRIBUTES};

use crate::config::ServiceConfig;
use crate::error::ServiceError;

/// Everything a request reads: the space and values derived from it.
#[derive(Debug)]
pub struct LoadedSpace {
    pub space: RecommendationSpace,
    pub medians: SubjectiveVector,
    pub reviewed: usize,
    pub predicted: usize,
}

impl LoadedSpace {
    pub fn new(space: RecommendationSpace) -> Result<Self, ServiceError> {
        let medians = space
            .medians()
            .ok_or_else(|| ServiceError::Config("recommendation space is empty".into()))?;
        Ok(Self {
            reviewed: space.count(Provenance::Reviewed),
            predicted: space.count(Provenance::Predicted),
            medians,
            space,
        })
    }
}

fn predict(model: &TrainedRegressor, ids: &[usize], objectives: Vec<&beanrec_core::dataset::ObjectiveProperties>) -> Vec<PredictedBean> {
    let pred = model.predict_objectives(objectives.iter().copied());
    ids.iter()
        .zip(objectives)
        .zip(pred.rows())
        .map(|((&id, o), row)| {
            let mut a = [0.0; N_ATTRIBUTES];
            a.iter_mut().zip(row).for_each(|(d, v)| *d = *v);
            PredictedBean {
                id,
                objective: o.clone(),
                subjective: SubjectiveVector::from_array(a),
            }
        })
        .collect()
}

/// Reads the configured files and builds a fresh space. Blocking.
pub fn load_space(cfg: &ServiceConfig) -> Result<LoadedSpace, ServiceError> {
    let (records, log) = clean(&load_csv(&cfg.dataset)?);
    tracing::info!(retained = log.retained, dropped = log.total_dropped(), "dataset loaded");
    let model = TrainedRegressor::load(&cfg.model)?;
    tracing::info!(family = %model.family, "model loaded");

    let (reviewed, mut predicted): (Vec<CoffeeRecord>, Vec<PredictedBean>) = match cfg.hidden_fraction {
        Some(m) if m > 0.0 => {
            let part = partition(&records, m, cfg.seed)?;
            let hidden: BTreeSet<usize> = part.hidden_ids.iter().copied().collect();
            let (h, r): (Vec<_>, Vec<_>) = records.into_iter().partition(|rec| hidden.contains(&rec.id));
            let ids: Vec<usize> = h.iter().map(|x| x.id).collect();
            let p = predict(&model, &ids, h.iter().map(|x| &x.objective).collect());
            (r, p)
        }
        _ => (records, Vec::new()),
    };

    if let Some(path) = &cfg.unreviewed {
        let first_id = reviewed
            .iter()
            .map(|r| r.id)
            .chain(predicted.iter().map(|p| p.id))
            .max()
            .map_or(0, |m| m + 1);
        let (beans, log) = clean_unreviewed(&load_csv(path)?, first_id);
        tracing::info!(retained = log.retained, dropped = log.total_dropped(), "unreviewed beans loaded");
        let ids: Vec<usize> = beans.iter().map(|b| b.id).collect();
        predicted.extend(predict(&model, &ids, beans.iter().map(|b| &b.objective).collect()));
    }

    let space = build_space(&reviewed, &predicted, Some(&model.fingerprint()))?;
    LoadedSpace::new(space)
}

/// Shared service state. Readers clone the current `Arc`; a reload swaps it.
#[derive(Clone)]
pub struct AppState {
    current: Arc<RwLock<Arc<LoadedSpace>>>,
    pub default_k: usize,
    config: Option<Arc<ServiceConfig>>,
}

impl AppState {
    pub fn from_space(space: RecommendationSpace, default_k: usize) -> Result<Self, ServiceError> {
        if default_k == 0 {
            return Err(ServiceError::Config("default_k must be at least 1".into()));
        }
        Ok(Self {
            current: Arc::new(RwLock::new(Arc::new(LoadedSpace::new(space)?))),
            default_k,
            config: None,
        })
    }

    pub fn load(cfg: ServiceConfig) -> Result<Self, ServiceError> {
        cfg.validate()?;
        let loaded = load_space(&cfg)?;
        Ok(Self {
            current: Arc::new(RwLock::new(Arc::new(loaded))),
            default_k: cfg.default_k,
            config: Some(Arc::new(cfg)),
        })
    }

    pub fn current(&self) -> Arc<LoadedSpace> {
        self.current.read().expect("state lock poisoned").clone()
    }

    /// Replaces the space in one step; in-flight requests keep the old one.
    pub fn swap(&self, next: LoadedSpace) {
        *self.current.write().expect("state lock poisoned") = Arc::new(next);
    }

    /// Rebuilds from the configured files and swaps. Returns the new
    /// fingerprint. The old space stays in place if loading fails.
    pub async fn reload(&self) -> Result<String, ServiceError> {
        let cfg = self
            .config
            .clone()
            .ok_or_else(|| ServiceError::Config("state was not built from a config".into()))?;
        let next = tokio::task::spawn_blocking(move || load_space(&cfg))
            .await
            .map_err(|e| ServiceError::Task(e.to_string()))??;
        let fp = next.space.fingerprint.clone();
        self.swap(next);
        Ok(fp)
    }
}
