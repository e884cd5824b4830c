//! Fitted multi-target regressors and their persisted form.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use super::forest::{fit_forest, ForestConfig, RandomForest};
use super::mlp::{fit_mlp, Mlp, MlpConfig};
use super::svr::{fit_svr, SvrConfig, SvrEnsemble};
use crate::dataset::{dataset_fingerprint, subjective_matrix, CoffeeRecord, EncodedMatrix, Encoder, ObjectiveProperties};
use crate::error::{Error, Result};
use crate::subjective::{clamp_score, N_ATTRIBUTES};

pub const MODEL_FORMAT: &str = "beanrec-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Forest,
    Svr,
    Mlp,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Forest, Family::Mlp, Family::Svr];

    pub fn name(self) -> &'static str {
        match self {
            Family::Forest => "forest",
            Family::Svr => "svr",
            Family::Mlp => "mlp",
        }
    }

    /// Short label used in report tables.
    pub fn short(self) -> &'static str {
        match self {
            Family::Forest => "rf",
            Family::Svr => "svr",
            Family::Mlp => "mlp",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rf" | "forest" | "random_forest" => Ok(Family::Forest),
            "svr" | "svm" => Ok(Family::Svr),
            "mlp" | "nn" => Ok(Family::Mlp),
            other => Err(Error::invalid("family", format!("unknown model family `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum RegressorConfig {
    Forest(ForestConfig),
    Svr(SvrConfig),
    Mlp(MlpConfig),
}

impl RegressorConfig {
    pub fn default_for(family: Family) -> Self {
        match family {
            Family::Forest => RegressorConfig::Forest(ForestConfig::default()),
            Family::Svr => RegressorConfig::Svr(SvrConfig::default()),
            Family::Mlp => RegressorConfig::Mlp(MlpConfig::default()),
        }
    }

    pub fn family(&self) -> Family {
        match self {
            RegressorConfig::Forest(_) => Family::Forest,
            RegressorConfig::Svr(_) => Family::Svr,
            RegressorConfig::Mlp(_) => Family::Mlp,
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            RegressorConfig::Forest(c) => c.seed,
            RegressorConfig::Svr(_) => 0,
            RegressorConfig::Mlp(c) => c.seed,
        }
    }

    /// Same configuration with a different RNG seed (SVR has none).
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut c = self.clone();
        match &mut c {
            RegressorConfig::Forest(f) => f.seed = seed,
            RegressorConfig::Svr(_) => {}
            RegressorConfig::Mlp(m) => m.seed = seed,
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FittedParams {
    Forest(RandomForest),
    Svr(SvrEnsemble),
    Mlp(Mlp),
}

impl FittedParams {
    /// Unclamped outputs.
    pub fn predict_raw(&self, x: ArrayView2<f64>) -> Array2<f64> {
        match self {
            FittedParams::Forest(f) => f.predict_raw(x),
            FittedParams::Svr(s) => s.predict_raw(x),
            FittedParams::Mlp(m) => m.predict_raw(x),
        }
    }
}

/// Fits the configured family on an encoded design matrix.
pub fn fit_params(x: ArrayView2<f64>, y: ArrayView2<f64>, config: &RegressorConfig) -> Result<(FittedParams, TrainingNotes)> {
    let mut notes = TrainingNotes::default();
    let params = match config {
        RegressorConfig::Forest(cfg) => FittedParams::Forest(fit_forest(x, y, cfg)?.forest),
        RegressorConfig::Svr(cfg) => {
            let svr = fit_svr(x, y, cfg)?;
            notes.converged = svr.all_converged();
            if !notes.converged {
                notes.warnings.push("SMO hit the iteration cap for at least one attribute".into());
            }
            FittedParams::Svr(svr)
        }
        RegressorConfig::Mlp(cfg) => {
            let fit = fit_mlp(x, y, cfg)?;
            notes.loss_curve = fit.loss_curve;
            FittedParams::Mlp(fit.mlp)
        }
    };
    Ok((params, notes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingNotes {
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub loss_curve: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl Default for TrainingNotes {
    fn default() -> Self {
        Self {
            converged: true,
            loss_curve: Vec::new(),
            warnings: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMetadata {
    pub seed: u64,
    pub dataset_fingerprint: String,
    pub n_train: usize,
    pub notes: TrainingNotes,
}

/// A fitted model mapping objective properties to the eight subjective scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedRegressor {
    pub format: String,
    pub version: u32,
    pub family: Family,
    pub config: RegressorConfig,
    pub encoder: Encoder,
    pub params: FittedParams,
    pub metadata: TrainingMetadata,
}

impl TrainedRegressor {
    /// Fits the encoder and the model on `records`.
    pub fn train(records: &[CoffeeRecord], config: &RegressorConfig) -> Result<Self> {
        let encoder = Encoder::fit_records(records)?;
        let (x, _) = encoder.transform_records(records);
        let y = subjective_matrix(records);
        let (params, notes) = fit_params(x.values.view(), y.view(), config)?;
        Ok(Self {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            family: config.family(),
            config: config.clone(),
            encoder,
            params,
            metadata: TrainingMetadata {
                seed: config.seed(),
                dataset_fingerprint: dataset_fingerprint(records),
                n_train: records.len(),
                notes,
            },
        })
    }

    /// Predictions clamped into (0, 10]; `x` must come from this model's encoder.
    pub fn predict(&self, x: &EncodedMatrix) -> Result<Array2<f64>> {
        if x.encoder_fingerprint != self.encoder.fingerprint() {
            return Err(Error::SchemaMismatch(format!(
                "matrix encoded by {}, model expects {}",
                &x.encoder_fingerprint[..12.min(x.encoder_fingerprint.len())],
                &self.encoder.fingerprint()[..12]
            )));
        }
        if x.columns != self.encoder.columns() {
            return Err(Error::SchemaMismatch("column metadata differs".into()));
        }
        Ok(self.predict_unchecked(x.values.view()))
    }

    fn predict_unchecked(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut out = self.params.predict_raw(x);
        debug_assert_eq!(out.ncols(), N_ATTRIBUTES);
        out.mapv_inplace(clamp_score);
        out
    }

    /// Encodes with the stored encoder, then predicts.
    pub fn predict_objectives<'a, I>(&self, objectives: I) -> Array2<f64>
    where
        I: IntoIterator<Item = &'a ObjectiveProperties>,
    {
        let (x, log) = self.encoder.transform(objectives);
        if log.total_unseen() > 0 {
            tracing::debug!(unseen = ?log.unseen, "unseen categories encoded as zero blocks");
        }
        self.predict_unchecked(x.values.view())
    }

    pub fn predict_records(&self, records: &[CoffeeRecord]) -> Array2<f64> {
        self.predict_objectives(records.iter().map(|r| &r.objective))
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(s)?;
        if model.format != MODEL_FORMAT {
            return Err(Error::Model(format!("unexpected format tag `{}`", model.format)));
        }
        if model.version != MODEL_VERSION {
            return Err(Error::Model(format!(
                "unsupported version {} (expected {MODEL_VERSION})",
                model.version
            )));
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }

    /// Hash of the serialized model.
    pub fn fingerprint(&self) -> String {
        let mut fp = crate::fingerprint::Fingerprinter::new("beanrec.model.v1");
        fp.str(&self.to_json().unwrap_or_default());
        fp.finish()
    }
}
