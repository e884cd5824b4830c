//! Feature-selection diagnostics: univariate F-scores and forest importances,
//! plus a per-feature report that also scores the discarded altitude column.

use std::collections::BTreeSet;

use ndarray::{concatenate, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::clean::{clean, CoffeeRecord};
use super::encode::Encoder;
use super::raw::RawReview;
use super::subjective_matrix;
use crate::error::{Error, Result};
use crate::regressors::{fit_forest, ForestConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnivariateScores {
    /// Mean F-statistic over the targets, one per column.
    pub scores: Vec<f64>,
    /// Columns with zero variance (scored 0).
    pub zero_variance: Vec<usize>,
}

fn centered(v: ArrayView1<f64>) -> (Vec<f64>, f64) {
    let n = v.len() as f64;
    let mean = v.sum() / n;
    let c: Vec<f64> = v.iter().map(|x| x - mean).collect();
    let ss = c.iter().map(|x| x * x).sum();
    (c, ss)
}

/// F-statistic of a one-regressor linear fit, `r^2 / (1 - r^2) * (n - 2)`,
/// averaged over the columns of `y`.
pub fn univariate_scores(x: ArrayView2<f64>, y: ArrayView2<f64>) -> Result<UnivariateScores> {
    if x.nrows() != y.nrows() {
        return Err(Error::Shape(format!("X has {} rows, Y has {}", x.nrows(), y.nrows())));
    }
    if x.nrows() < 3 {
        return Err(Error::invalid("X", "at least three rows are required"));
    }
    let dof = (x.nrows() - 2) as f64;
    let targets: Vec<(Vec<f64>, f64)> = y.columns().into_iter().map(centered).collect();
    let mut scores = Vec::with_capacity(x.ncols());
    let mut zero_variance = Vec::new();
    for (j, col) in x.columns().into_iter().enumerate() {
        let (cx, ssx) = centered(col);
        if ssx <= 0.0 {
            zero_variance.push(j);
            scores.push(0.0);
            continue;
        }
        let mut total = 0.0;
        for (cy, ssy) in &targets {
            if *ssy <= 0.0 {
                continue;
            }
            let sxy: f64 = cx.iter().zip(cy).map(|(a, b)| a * b).sum();
            let r2 = (sxy * sxy / (ssx * ssy)).min(1.0);
            total += if r2 >= 1.0 { f64::INFINITY } else { r2 / (1.0 - r2) * dof };
        }
        scores.push(total / targets.len() as f64);
    }
    Ok(UnivariateScores { scores, zero_variance })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeImportance {
    pub importances: Vec<f64>,
    /// Set when every target row is identical; importances are then all 0.
    pub degenerate: bool,
}

pub fn tree_importance(x: ArrayView2<f64>, y: ArrayView2<f64>, cfg: &ForestConfig) -> Result<TreeImportance> {
    let degenerate = y.nrows() > 0 && y.rows().into_iter().all(|r| r == y.row(0));
    if degenerate {
        if x.nrows() != y.nrows() {
            return Err(Error::Shape(format!("X has {} rows, Y has {}", x.nrows(), y.nrows())));
        }
        return Ok(TreeImportance {
            importances: vec![0.0; x.ncols()],
            degenerate,
        });
    }
    let fit = fit_forest(x, y, cfg)?;
    Ok(TreeImportance {
        importances: fit.importances,
        degenerate,
    })
}

/// Scores of one source feature: the best F-score among its encoded columns
/// and the summed forest importance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScore {
    pub feature: String,
    pub univariate: f64,
    pub importance: f64,
    pub retained: bool,
}

pub const ALTITUDE: &str = "altitude_mean_meters";

/// Cleans `raw`, encodes the retained rows together with their altitude
/// (median-imputed) and scores every source feature against the subjective
/// targets. Sorted by descending importance.
pub fn feature_selection_report(raw: &[RawReview], cfg: &ForestConfig) -> Result<(Vec<FeatureScore>, Vec<CoffeeRecord>)> {
    let (records, log) = clean(raw);
    let dropped: BTreeSet<usize> = log.dropped_rows.iter().map(|(i, _)| *i).collect();
    let altitude: Vec<Option<f64>> = raw
        .iter()
        .filter(|r| !dropped.contains(&r.row_index))
        .map(|r| r.altitude_mean_meters.filter(|v| v.is_finite()))
        .collect();
    debug_assert_eq!(altitude.len(), records.len());

    let mut present: Vec<f64> = altitude.iter().flatten().copied().collect();
    present.sort_by(f64::total_cmp);
    let median = if present.is_empty() {
        0.0
    } else {
        present[present.len() / 2]
    };
    let filled: Vec<f64> = altitude.iter().map(|a| a.unwrap_or(median)).collect();
    let mean = filled.iter().sum::<f64>() / filled.len().max(1) as f64;
    let var = filled.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (filled.len().max(2) - 1) as f64;
    let scale = if var > 0.0 { var.sqrt() } else { 1.0 };
    let alt_col = Array2::from_shape_fn((filled.len(), 1), |(i, _)| (filled[i] - mean) / scale);

    let encoder = Encoder::fit_records(&records)?;
    let (x, _) = encoder.transform_records(&records);
    let design = concatenate(Axis(1), &[x.values.view(), alt_col.view()])
        .map_err(|e| Error::Shape(e.to_string()))?;
    let y = subjective_matrix(&records);

    let uni = univariate_scores(design.view(), y.view())?;
    let imp = tree_importance(design.view(), y.view(), cfg)?;

    let mut sources: Vec<String> = x.columns.iter().map(|c| c.source.name().to_string()).collect();
    sources.push(ALTITUDE.to_string());
    let mut out: Vec<FeatureScore> = Vec::new();
    for (j, source) in sources.iter().enumerate() {
        match out.iter_mut().find(|f| &f.feature == source) {
            Some(f) => {
                f.univariate = f.univariate.max(uni.scores[j]);
                f.importance += imp.importances[j];
            }
            None => out.push(FeatureScore {
                feature: source.clone(),
                univariate: uni.scores[j],
                importance: imp.importances[j],
                retained: source != ALTITUDE,
            }),
        }
    }
    out.sort_by(|a, b| b.importance.total_cmp(&a.importance).then_with(|| a.feature.cmp(&b.feature)));
    Ok((out, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::synthetic::{synthetic_raw, SyntheticConfig};
    use ndarray::{array, Array2};

    #[test]
    fn affine_copy_scores_highest() {
        let y = array![[1.0], [2.0], [4.0], [3.0], [7.0]];
        let x = array![
            [3.0, 1.0, 5.0],
            [5.0, 0.0, 5.0],
            [9.0, 1.0, 5.0],
            [7.0, 1.0, 5.0],
            [15.0, 0.0, 5.0]
        ];
        let s = univariate_scores(x.view(), y.view()).unwrap();
        assert!(s.scores[0].is_infinite());
        assert!(s.scores[1].is_finite());
        assert_eq!(s.scores[2], 0.0);
        assert_eq!(s.zero_variance, vec![2]);
    }

    #[test]
    fn f_statistic_matches_hand_value() {
        // r = 0.8 on five points gives F = 0.64 / 0.36 * 3.
        let x = array![[-2.0], [-1.0], [0.0], [1.0], [2.0]];
        let e = array![1.0, -1.0, 0.0, -1.0, 1.0];
        // y = x + c * e with e orthogonal to x; pick c for r^2 = 0.64.
        let c = (10.0_f64 * (1.0 / 0.64 - 1.0) / 4.0).sqrt();
        let y = Array2::from_shape_fn((5, 1), |(i, _)| x[[i, 0]] + c * e[i]);
        let s = univariate_scores(x.view(), y.view()).unwrap();
        assert!((s.scores[0] - 0.64 / 0.36 * 3.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_targets_flagged() {
        let x = array![[0.0], [1.0], [2.0]];
        let y = Array2::from_elem((3, 8), 7.5);
        let t = tree_importance(x.view(), y.view(), &ForestConfig::default()).unwrap();
        assert!(t.degenerate);
        assert_eq!(t.importances, vec![0.0]);
    }

    #[test]
    fn report_covers_altitude() {
        let raw = synthetic_raw(&SyntheticConfig {
            rows: 200,
            seed: 4,
            ..Default::default()
        });
        let (report, records) = feature_selection_report(&raw, &ForestConfig::default()).unwrap();
        assert!(!records.is_empty());
        assert_eq!(report.len(), 10);
        assert!(report.iter().any(|f| f.feature == ALTITUDE && !f.retained));
        let total: f64 = report.iter().map(|f| f.importance).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }
}
