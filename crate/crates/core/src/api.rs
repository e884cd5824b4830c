//! JSON bodies exchanged between the recommendation service and its clients.

use serde::{Deserialize, Serialize};

use crate::recommender::Recommendation;
use crate::subjective::{Attribute, SubjectiveVector, SCORE_MAX};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecommendRequest {
    pub preferences: SubjectiveVector,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendResponse {
    pub k: usize,
    pub recommendations: Vec<Recommendation>,
    pub space_fingerprint: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub space_fingerprint: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeRange {
    pub name: String,
    pub min: f64,
    pub max: f64,
}

impl AttributeRange {
    pub fn all() -> Vec<Self> {
        Attribute::ALL
            .iter()
            .map(|a| Self {
                name: a.name().to_string(),
                min: 0.0,
                max: SCORE_MAX,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub attributes: Vec<AttributeRange>,
    pub default_k: usize,
    pub max_k: usize,
    /// Per-attribute medians of the space, a starting point for sliders.
    pub medians: SubjectiveVector,
    pub reviewed: usize,
    pub predicted: usize,
    pub space_fingerprint: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: ErrorDetail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorDetail {
    pub code: String,
    /// Offending request field, dotted, when one can be named.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    pub message: String,
}
