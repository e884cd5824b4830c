//! Cross-validated RMSE, KDE user simulation and the recommendation-accuracy
//! sweep.

mod cv;
mod kde;
mod metrics;
mod report;
mod sweep;

pub use cv::{cross_validate, fold_assignment, fold_split, CvReport, FoldResult};
pub use kde::{fit_kde, sample_users, sample_users_from, KdeModel, BANDWIDTH_FLOOR};
pub use metrics::rmse;
pub use report::{percent_label, to_json, write_accuracy_tsv, write_cv_attribute_tsv, write_cv_tsv};
pub use sweep::{
    accuracy_sweep, accuracy_sweep_with, AccuracyReport, AccuracyRow, Imputer, ModelImputer,
    OracleImputer, SweepConfig,
};
