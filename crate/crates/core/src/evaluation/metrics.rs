use ndarray::ArrayView2;

use crate::error::{Error, Result};

/// Column-wise root mean squared error.
pub fn rmse(pred: ArrayView2<f64>, truth: ArrayView2<f64>) -> Result<Vec<f64>> {
    if pred.dim() != truth.dim() {
        return Err(Error::Shape(format!(
            "prediction is {:?}, truth is {:?}",
            pred.dim(),
            truth.dim()
        )));
    }
    if pred.nrows() == 0 {
        return Err(Error::invalid("pred", "no rows"));
    }
    let n = pred.nrows() as f64;
    Ok(pred
        .columns()
        .into_iter()
        .zip(truth.columns())
        .map(|(p, t)| (p.iter().zip(t).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / n).sqrt())
        .collect())
}

pub(crate) fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Population standard deviation.
pub(crate) fn std_dev(v: &[f64]) -> f64 {
    let m = mean(v);
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64).sqrt()
}
