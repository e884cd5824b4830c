//! The eight subjective quality scores and their canonical order.

use std::fmt;

use serde::{Deserialize, Serialize};

pub const N_ATTRIBUTES: usize = 8;

/// Smallest score a prediction may take; the valid range is (0, 10].
pub const SCORE_FLOOR: f64 = 0.01;
pub const SCORE_MAX: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Attribute {
    Aroma,
    Flavour,
    Body,
    Sweetness,
    Acidity,
    Balance,
    Uniformity,
    Aftertaste,
}

impl Attribute {
    /// Canonical order used by every matrix, distance and wire format.
    pub const ALL: [Attribute; N_ATTRIBUTES] = [
        Attribute::Aroma,
        Attribute::Flavour,
        Attribute::Body,
        Attribute::Sweetness,
        Attribute::Acidity,
        Attribute::Balance,
        Attribute::Uniformity,
        Attribute::Aftertaste,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Attribute::Aroma => "aroma",
            Attribute::Flavour => "flavour",
            Attribute::Body => "body",
            Attribute::Sweetness => "sweetness",
            Attribute::Acidity => "acidity",
            Attribute::Balance => "balance",
            Attribute::Uniformity => "uniformity",
            Attribute::Aftertaste => "aftertaste",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Clamps a raw model output into (0, 10].
pub fn clamp_score(v: f64) -> f64 {
    if v.is_nan() || v <= 0.0 {
        SCORE_FLOOR
    } else if v > SCORE_MAX {
        SCORE_MAX
    } else {
        v.max(SCORE_FLOOR)
    }
}

/// Scores for the eight subjective qualities, serialized with their attribute names.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubjectiveVector {
    pub aroma: f64,
    pub flavour: f64,
    pub body: f64,
    pub sweetness: f64,
    pub acidity: f64,
    pub balance: f64,
    pub uniformity: f64,
    pub aftertaste: f64,
}

impl SubjectiveVector {
    pub fn from_array(v: [f64; N_ATTRIBUTES]) -> Self {
        let [aroma, flavour, body, sweetness, acidity, balance, uniformity, aftertaste] = v;
        Self {
            aroma,
            flavour,
            body,
            sweetness,
            acidity,
            balance,
            uniformity,
            aftertaste,
        }
    }

    pub fn to_array(&self) -> [f64; N_ATTRIBUTES] {
        [
            self.aroma,
            self.flavour,
            self.body,
            self.sweetness,
            self.acidity,
            self.balance,
            self.uniformity,
            self.aftertaste,
        ]
    }

    pub fn get(&self, attr: Attribute) -> f64 {
        self.to_array()[attr.index()]
    }

    pub fn splat(v: f64) -> Self {
        Self::from_array([v; N_ATTRIBUTES])
    }

    pub fn clamped(&self) -> Self {
        Self::from_array(self.to_array().map(clamp_score))
    }

    /// True when every score lies in (0, 10].
    pub fn is_valid_score(&self) -> bool {
        self.to_array().iter().all(|&v| v > 0.0 && v <= SCORE_MAX)
    }

    /// First attribute outside `[lo, hi]` (or not finite), if any.
    pub fn out_of_range(&self, lo: f64, hi: f64) -> Option<(Attribute, f64)> {
        Attribute::ALL
            .iter()
            .map(|&a| (a, self.get(a)))
            .find(|&(_, v)| !v.is_finite() || v < lo || v > hi)
    }

    pub fn squared_distance(&self, other: &Self) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.squared_distance(other).sqrt()
    }
}
