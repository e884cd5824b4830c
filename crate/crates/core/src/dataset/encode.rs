//! One-hot encoding of categorical properties and standardization of numeric ones.

use std::collections::BTreeMap;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::clean::{CoffeeRecord, ObjectiveProperties, Species};
use crate::error::{Error, Result};
use crate::fingerprint::Fingerprinter;

/// The nine objective properties, in table order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveFeature {
    Species,
    CountryOfOrigin,
    Region,
    Variety,
    Color,
    CategoryOneDefects,
    CategoryTwoDefects,
    ProcessingMethod,
    Moisture,
}

impl ObjectiveFeature {
    pub const ALL: [ObjectiveFeature; 9] = [
        ObjectiveFeature::Species,
        ObjectiveFeature::CountryOfOrigin,
        ObjectiveFeature::Region,
        ObjectiveFeature::Variety,
        ObjectiveFeature::Color,
        ObjectiveFeature::CategoryOneDefects,
        ObjectiveFeature::CategoryTwoDefects,
        ObjectiveFeature::ProcessingMethod,
        ObjectiveFeature::Moisture,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ObjectiveFeature::Species => "species",
            ObjectiveFeature::CountryOfOrigin => "country_of_origin",
            ObjectiveFeature::Region => "region",
            ObjectiveFeature::Variety => "variety",
            ObjectiveFeature::Color => "color",
            ObjectiveFeature::CategoryOneDefects => "category_one_defects",
            ObjectiveFeature::CategoryTwoDefects => "category_two_defects",
            ObjectiveFeature::ProcessingMethod => "processing_method",
            ObjectiveFeature::Moisture => "moisture",
        }
    }

    pub fn is_categorical(self) -> bool {
        !matches!(
            self,
            ObjectiveFeature::CategoryOneDefects
                | ObjectiveFeature::CategoryTwoDefects
                | ObjectiveFeature::Moisture
        )
    }

    /// Label of a categorical property.
    pub fn label(self, o: &ObjectiveProperties) -> &str {
        match self {
            ObjectiveFeature::Species => o.species.name(),
            ObjectiveFeature::CountryOfOrigin => &o.country_of_origin,
            ObjectiveFeature::Region => &o.region,
            ObjectiveFeature::Variety => &o.variety,
            ObjectiveFeature::Color => &o.color,
            ObjectiveFeature::ProcessingMethod => &o.processing_method,
            _ => panic!("{} is numeric", self.name()),
        }
    }

    /// Value of a numeric property.
    pub fn value(self, o: &ObjectiveProperties) -> f64 {
        match self {
            ObjectiveFeature::CategoryOneDefects => o.category_one_defects as f64,
            ObjectiveFeature::CategoryTwoDefects => o.category_two_defects as f64,
            ObjectiveFeature::Moisture => o.moisture,
            _ => panic!("{} is categorical", self.name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodingKind {
    OneHot,
    Standardized,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMeta {
    pub source: ObjectiveFeature,
    pub kind: EncodingKind,
    pub label: Option<String>,
}

impl ColumnMeta {
    pub fn name(&self) -> String {
        match &self.label {
            Some(l) => format!("{}:{}", self.source.name(), l),
            None => self.source.name().to_string(),
        }
    }
}

/// Numeric design matrix with per-column provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedMatrix {
    pub columns: Vec<ColumnMeta>,
    pub values: Array2<f64>,
    /// Fingerprint of the encoder that produced the matrix.
    pub encoder_fingerprint: String,
}

impl EncodedMatrix {
    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn width(&self) -> usize {
        self.values.ncols()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericStats {
    pub mean: f64,
    /// Sample standard deviation; 1 when the column is constant.
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FeatureEncoding {
    OneHot {
        feature: ObjectiveFeature,
        vocabulary: Vec<String>,
    },
    Standardized {
        feature: ObjectiveFeature,
        stats: NumericStats,
    },
}

/// Counts of categories seen at transform time but absent from the fitted vocabulary.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TransformLog {
    pub unseen: BTreeMap<String, usize>,
}

impl TransformLog {
    pub fn total_unseen(&self) -> usize {
        self.unseen.values().sum()
    }
}

/// Fitted encoding statistics. Transforming is a pure function of the
/// encoder and the input, so a persisted encoder reproduces its columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encoder {
    pub features: Vec<FeatureEncoding>,
}

impl Encoder {
    pub fn fit<'a, I>(objectives: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a ObjectiveProperties>,
    {
        let rows: Vec<&ObjectiveProperties> = objectives.into_iter().collect();
        if rows.is_empty() {
            return Err(Error::invalid("records", "cannot fit an encoder on zero records"));
        }
        let features = ObjectiveFeature::ALL
            .iter()
            .map(|&feature| {
                if feature == ObjectiveFeature::Species {
                    FeatureEncoding::OneHot {
                        feature,
                        vocabulary: Species::ALL.iter().map(|s| s.name().to_string()).collect(),
                    }
                } else if feature.is_categorical() {
                    let mut vocabulary: Vec<String> =
                        rows.iter().map(|o| feature.label(o).to_string()).collect();
                    vocabulary.sort();
                    vocabulary.dedup();
                    FeatureEncoding::OneHot {
                        feature,
                        vocabulary,
                    }
                } else {
                    let values: Vec<f64> = rows.iter().map(|o| feature.value(o)).collect();
                    FeatureEncoding::Standardized {
                        feature,
                        stats: numeric_stats(&values),
                    }
                }
            })
            .collect();
        Ok(Self { features })
    }

    pub fn fit_records(records: &[CoffeeRecord]) -> Result<Self> {
        Self::fit(records.iter().map(|r| &r.objective))
    }

    pub fn columns(&self) -> Vec<ColumnMeta> {
        let mut cols = Vec::new();
        for f in &self.features {
            match f {
                FeatureEncoding::OneHot {
                    feature,
                    vocabulary,
                } => cols.extend(vocabulary.iter().map(|l| ColumnMeta {
                    source: *feature,
                    kind: EncodingKind::OneHot,
                    label: Some(l.clone()),
                })),
                FeatureEncoding::Standardized { feature, .. } => cols.push(ColumnMeta {
                    source: *feature,
                    kind: EncodingKind::Standardized,
                    label: None,
                }),
            }
        }
        cols
    }

    pub fn width(&self) -> usize {
        self.features
            .iter()
            .map(|f| match f {
                FeatureEncoding::OneHot { vocabulary, .. } => vocabulary.len(),
                FeatureEncoding::Standardized { .. } => 1,
            })
            .sum()
    }

    pub fn fingerprint(&self) -> String {
        let mut fp = Fingerprinter::new("beanrec.encoder.v1");
        for f in &self.features {
            match f {
                FeatureEncoding::OneHot {
                    feature,
                    vocabulary,
                } => {
                    fp.str(feature.name()).u64(vocabulary.len() as u64);
                    for l in vocabulary {
                        fp.str(l);
                    }
                }
                FeatureEncoding::Standardized { feature, stats } => {
                    fp.str(feature.name()).f64(stats.mean).f64(stats.scale);
                }
            }
        }
        fp.finish()
    }

    /// Encodes rows; unseen categories become an all-zero block and are counted.
    pub fn transform<'a, I>(&self, objectives: I) -> (EncodedMatrix, TransformLog)
    where
        I: IntoIterator<Item = &'a ObjectiveProperties>,
    {
        let rows: Vec<&ObjectiveProperties> = objectives.into_iter().collect();
        let width = self.width();
        let mut values = Array2::zeros((rows.len(), width));
        let mut log = TransformLog::default();
        for (i, o) in rows.iter().enumerate() {
            let mut offset = 0;
            for f in &self.features {
                match f {
                    FeatureEncoding::OneHot {
                        feature,
                        vocabulary,
                    } => {
                        let label = feature.label(o);
                        match vocabulary.binary_search_by(|v| v.as_str().cmp(label)) {
                            Ok(j) => values[[i, offset + j]] = 1.0,
                            Err(_) => {
                                *log.unseen.entry(feature.name().to_string()).or_default() += 1
                            }
                        }
                        offset += vocabulary.len();
                    }
                    FeatureEncoding::Standardized { feature, stats } => {
                        values[[i, offset]] = (feature.value(o) - stats.mean) / stats.scale;
                        offset += 1;
                    }
                }
            }
        }
        let matrix = EncodedMatrix {
            columns: self.columns(),
            values,
            encoder_fingerprint: self.fingerprint(),
        };
        (matrix, log)
    }

    pub fn transform_records(&self, records: &[CoffeeRecord]) -> (EncodedMatrix, TransformLog) {
        self.transform(records.iter().map(|r| &r.objective))
    }
}

fn numeric_stats(values: &[f64]) -> NumericStats {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let sd = var.sqrt();
    NumericStats {
        mean,
        scale: if sd > 0.0 { sd } else { 1.0 },
    }
}

/// Fits an encoder on `records` and encodes them.
pub fn encode(records: &[CoffeeRecord]) -> Result<(Encoder, EncodedMatrix)> {
    let encoder = Encoder::fit_records(records)?;
    let (matrix, _) = encoder.transform_records(records);
    Ok((encoder, matrix))
}
