//! Pearson correlation over the 17 retained attributes.
//!
//! Categorical attributes enter through ordinal codes (rank of the label in
//! its sorted vocabulary); this encoding is only meant for the diagnostic.

use serde::{Deserialize, Serialize};

use super::clean::CoffeeRecord;
use super::encode::ObjectiveFeature;
use crate::subjective::Attribute;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub names: Vec<String>,
    /// Row-major, `names.len()` squared.
    pub values: Vec<Vec<f64>>,
    /// Attributes with zero variance; their off-diagonal entries are 0.
    pub zero_variance: Vec<String>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.names.iter().position(|n| n == a)?;
        let j = self.names.iter().position(|n| n == b)?;
        Some(self.values[i][j])
    }

    /// Tab-separated matrix with a header row of attribute names.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("attribute");
        for n in &self.names {
            out.push('\t');
            out.push_str(n);
        }
        out.push('\n');
        for (name, row) in self.names.iter().zip(&self.values) {
            out.push_str(name);
            for v in row {
                out.push_str(&format!("\t{v:.6}"));
            }
            out.push('\n');
        }
        out
    }
}

fn attribute_columns(records: &[CoffeeRecord]) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut names = Vec::new();
    let mut cols = Vec::new();
    for feature in ObjectiveFeature::ALL {
        names.push(feature.name().to_string());
        if feature.is_categorical() {
            let mut vocab: Vec<&str> = records.iter().map(|r| feature.label(&r.objective)).collect();
            vocab.sort_unstable();
            vocab.dedup();
            cols.push(
                records
                    .iter()
                    .map(|r| {
                        let l = feature.label(&r.objective);
                        vocab.binary_search(&l).expect("label in vocabulary") as f64
                    })
                    .collect(),
            );
        } else {
            cols.push(records.iter().map(|r| feature.value(&r.objective)).collect());
        }
    }
    for attr in Attribute::ALL {
        names.push(attr.name().to_string());
        cols.push(records.iter().map(|r| r.subjective.get(attr)).collect());
    }
    (names, cols)
}

pub fn pearson_matrix(records: &[CoffeeRecord]) -> CorrelationMatrix {
    let (names, cols) = attribute_columns(records);
    let n = records.len() as f64;
    let centered: Vec<Vec<f64>> = cols
        .iter()
        .map(|c| {
            let mean = c.iter().sum::<f64>() / n;
            c.iter().map(|v| v - mean).collect()
        })
        .collect();
    let norms: Vec<f64> = centered
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();

    let d = names.len();
    let mut values = vec![vec![0.0; d]; d];
    let mut zero_variance = Vec::new();
    for i in 0..d {
        if norms[i] == 0.0 {
            zero_variance.push(names[i].clone());
        }
        values[i][i] = 1.0;
        for j in 0..i {
            let r = if norms[i] == 0.0 || norms[j] == 0.0 {
                0.0
            } else {
                let dot: f64 = centered[i].iter().zip(&centered[j]).map(|(a, b)| a * b).sum();
                (dot / (norms[i] * norms[j])).clamp(-1.0, 1.0)
            };
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    CorrelationMatrix {
        names,
        values,
        zero_variance,
    }
}
