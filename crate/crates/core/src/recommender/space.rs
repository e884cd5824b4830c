//! The recommendation space: reviewed and predicted beans side by side.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{CoffeeRecord, ObjectiveProperties};
use crate::error::{Error, Result};
use crate::fingerprint::Fingerprinter;
use crate::subjective::{Attribute, SubjectiveVector, SCORE_MAX};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Reviewed,
    Predicted,
}

impl Provenance {
    pub fn name(self) -> &'static str {
        match self {
            Provenance::Reviewed => "reviewed",
            Provenance::Predicted => "predicted",
        }
    }
}

/// Descriptive fields shown next to a recommendation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisplayMeta {
    pub species: String,
    pub country_of_origin: String,
    pub region: String,
    pub variety: String,
    pub processing_method: String,
}

impl From<&ObjectiveProperties> for DisplayMeta {
    fn from(o: &ObjectiveProperties) -> Self {
        Self {
            species: o.species.name().to_string(),
            country_of_origin: o.country_of_origin.clone(),
            region: o.region.clone(),
            variety: o.variety.clone(),
            processing_method: o.processing_method.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceEntry {
    pub bean_id: usize,
    pub subjective: SubjectiveVector,
    pub provenance: Provenance,
    pub meta: DisplayMeta,
}

/// A bean whose subjective scores came from a regressor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictedBean {
    pub id: usize,
    pub objective: ObjectiveProperties,
    pub subjective: SubjectiveVector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Euclidean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendationSpace {
    /// Ascending by `bean_id`.
    pub entries: Vec<SpaceEntry>,
    pub metric: Metric,
    pub fingerprint: String,
}

/// Merges reviewed records and predicted beans. Fails on a shared id or on
/// scores outside (0, 10].
pub fn build_space(
    reviewed: &[CoffeeRecord],
    predicted: &[PredictedBean],
    model_fingerprint: Option<&str>,
) -> Result<RecommendationSpace> {
    let mut by_id: BTreeMap<usize, SpaceEntry> = BTreeMap::new();
    let reviewed = reviewed.iter().map(|r| (r.id, &r.objective, r.subjective, Provenance::Reviewed));
    let predicted = predicted.iter().map(|p| (p.id, &p.objective, p.subjective, Provenance::Predicted));
    for (id, objective, subjective, provenance) in reviewed.chain(predicted) {
        if let Some((attr, v)) = subjective.out_of_range(f64::MIN_POSITIVE, SCORE_MAX) {
            return Err(Error::invalid(
                "subjective",
                format!("bean {id}: {} = {v} outside (0, 10]", attr.name()),
            ));
        }
        let entry = SpaceEntry {
            bean_id: id,
            subjective,
            provenance,
            meta: objective.into(),
        };
        if by_id.insert(id, entry).is_some() {
            return Err(Error::DuplicateId(id));
        }
    }
    let entries: Vec<SpaceEntry> = by_id.into_values().collect();

    let mut fp = Fingerprinter::new("beanrec.space.v1");
    fp.str(model_fingerprint.unwrap_or("")).u64(entries.len() as u64);
    for e in &entries {
        fp.u64(e.bean_id as u64).str(e.provenance.name());
        for v in e.subjective.to_array() {
            fp.f64(v);
        }
    }
    Ok(RecommendationSpace {
        entries,
        metric: Metric::Euclidean,
        fingerprint: fp.finish(),
    })
}

impl RecommendationSpace {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, bean_id: usize) -> Option<&SpaceEntry> {
        self.entries
            .binary_search_by_key(&bean_id, |e| e.bean_id)
            .ok()
            .map(|i| &self.entries[i])
    }

    pub fn count(&self, provenance: Provenance) -> usize {
        self.entries.iter().filter(|e| e.provenance == provenance).count()
    }

    /// Per-attribute median of the space, a neutral starting query.
    pub fn medians(&self) -> Option<SubjectiveVector> {
        if self.entries.is_empty() {
            return None;
        }
        let mut out = [0.0; crate::subjective::N_ATTRIBUTES];
        for attr in Attribute::ALL {
            let mut col: Vec<f64> = self.entries.iter().map(|e| e.subjective.get(attr)).collect();
            col.sort_by(f64::total_cmp);
            let n = col.len();
            out[attr.index()] = if n % 2 == 1 {
                col[n / 2]
            } else {
                (col[n / 2 - 1] + col[n / 2]) / 2.0
            };
        }
        Some(SubjectiveVector::from_array(out))
    }

    pub fn write_tsv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().delimiter(b'\t').from_writer(w);
        let mut header = vec!["bean_id".to_string(), "provenance".to_string()];
        header.extend(Attribute::ALL.iter().map(|a| a.name().to_string()));
        header.extend(
            ["species", "country_of_origin", "region", "variety", "processing_method"].map(String::from),
        );
        out.write_record(&header)?;
        for e in &self.entries {
            let mut row = vec![e.bean_id.to_string(), e.provenance.name().to_string()];
            row.extend(e.subjective.to_array().iter().map(|v| v.to_string()));
            row.extend([
                e.meta.species.clone(),
                e.meta.country_of_origin.clone(),
                e.meta.region.clone(),
                e.meta.variety.clone(),
                e.meta.processing_method.clone(),
            ]);
            out.write_record(&row)?;
        }
        out.flush().map_err(|e| Error::io("<space tsv>", e))?;
        Ok(())
    }

    pub fn write_tsv_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_tsv(std::io::BufWriter::new(file))
    }
}
