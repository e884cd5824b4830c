//! Gaussian product-kernel density estimate with Scott bandwidths, used to
//! simulate user preference vectors.

use ndarray::{Array2, ArrayView2};
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::subjective::{clamp_score, SubjectiveVector, N_ATTRIBUTES};

pub const BANDWIDTH_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdeModel {
    pub data: Array2<f64>,
    /// Per-dimension kernel standard deviation.
    pub bandwidths: Vec<f64>,
    pub seed: u64,
    /// Dimensions whose bandwidth was raised to the floor.
    pub floored: Vec<usize>,
}

impl KdeModel {
    /// Scott's rule per dimension: `n^(-1/(d+4)) * std`.
    pub fn fit(data: ArrayView2<f64>, seed: u64) -> Result<Self> {
        let (n, d) = data.dim();
        if n < 2 {
            return Err(Error::invalid("data", "at least two rows are required"));
        }
        if d == 0 {
            return Err(Error::invalid("data", "no columns"));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NaN("kde data"));
        }
        let factor = (n as f64).powf(-1.0 / (d as f64 + 4.0));
        let mut bandwidths = Vec::with_capacity(d);
        let mut floored = Vec::new();
        for (j, col) in data.columns().into_iter().enumerate() {
            let m = col.sum() / n as f64;
            let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64;
            let h = factor * var.sqrt();
            if h < BANDWIDTH_FLOOR {
                tracing::warn!(dimension = j, "zero-variance dimension, bandwidth raised to the floor");
                floored.push(j);
                bandwidths.push(BANDWIDTH_FLOOR);
            } else {
                bandwidths.push(h);
            }
        }
        Ok(Self {
            data: data.to_owned(),
            bandwidths,
            seed,
            floored,
        })
    }

    /// Same data, explicit bandwidths.
    pub fn with_bandwidths(mut self, bandwidths: Vec<f64>) -> Result<Self> {
        if bandwidths.len() != self.data.ncols() {
            return Err(Error::Shape(format!(
                "{} bandwidths for {} dimensions",
                bandwidths.len(),
                self.data.ncols()
            )));
        }
        if bandwidths.iter().any(|h| !(*h > 0.0)) {
            return Err(Error::invalid("bandwidths", "must be > 0"));
        }
        self.bandwidths = bandwidths;
        self.floored.clear();
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    pub fn density(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim(), "query width");
        let norm: f64 = self
            .bandwidths
            .iter()
            .map(|h| h * (2.0 * std::f64::consts::PI).sqrt())
            .product();
        let sum: f64 = self
            .data
            .rows()
            .into_iter()
            .map(|row| {
                let q: f64 = row
                    .iter()
                    .zip(x)
                    .zip(&self.bandwidths)
                    .map(|((c, v), h)| ((v - c) / h).powi(2))
                    .sum();
                (-0.5 * q).exp()
            })
            .sum();
        sum / (self.data.nrows() as f64 * norm)
    }

    /// Mixture draws: a uniformly chosen row plus Gaussian kernel noise.
    /// Not clamped.
    pub fn sample_raw(&self, n: usize, rng: &mut rng::Rng) -> Array2<f64> {
        let mut out = Array2::zeros((n, self.dim()));
        for mut row in out.rows_mut() {
            let src = self.data.row(rng.random_range(0..self.data.nrows()));
            for ((o, c), h) in row.iter_mut().zip(src).zip(&self.bandwidths) {
                let z: f64 = StandardNormal.sample(rng);
                *o = c + h * z;
            }
        }
        out
    }
}

/// Fits the estimator on an `n x 8` subjective matrix.
pub fn fit_kde(y: ArrayView2<f64>, seed: u64) -> Result<KdeModel> {
    if y.ncols() != N_ATTRIBUTES {
        return Err(Error::Shape(format!("expected {N_ATTRIBUTES} columns, got {}", y.ncols())));
    }
    KdeModel::fit(y, seed)
}

/// `n` simulated users from the model's own seed, clamped into (0, 10].
pub fn sample_users(kde: &KdeModel, n: usize) -> Result<Vec<SubjectiveVector>> {
    sample_users_from(kde, n, &mut rng::stream(kde.seed, &[0x7573_6572]))
}

pub fn sample_users_from(kde: &KdeModel, n: usize, rng: &mut rng::Rng) -> Result<Vec<SubjectiveVector>> {
    if n == 0 {
        return Err(Error::invalid("n_users", "must be at least 1"));
    }
    if kde.dim() != N_ATTRIBUTES {
        return Err(Error::Shape(format!("users need {N_ATTRIBUTES} dimensions, model has {}", kde.dim())));
    }
    let raw = kde.sample_raw(n, rng);
    Ok(raw
        .rows()
        .into_iter()
        .map(|r| {
            let mut a = [0.0; N_ATTRIBUTES];
            for (o, v) in a.iter_mut().zip(r) {
                *o = clamp_score(*v);
            }
            SubjectiveVector::from_array(a)
        })
        .collect())
}
