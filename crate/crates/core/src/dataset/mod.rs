//! Loading, cleaning, encoding and partitioning of coffee reviews, plus the
//! feature-selection diagnostics.

mod clean;
mod correlation;
mod encode;
mod io;
mod partition;
mod raw;
mod selection;
pub mod synthetic;

use ndarray::Array2;

pub use clean::{
    clean, clean_unreviewed, CleaningLog, CoffeeRecord, DropReason, ObjectiveProperties, Species,
    UnreviewedBean, UNKNOWN,
};
pub use correlation::{pearson_matrix, CorrelationMatrix};
pub use encode::{
    encode, ColumnMeta, EncodedMatrix, Encoder, EncodingKind, FeatureEncoding, NumericStats,
    ObjectiveFeature, TransformLog,
};
pub use io::{cleaned_header, write_cleaned, write_cleaned_file};
pub use partition::{hidden_count, partition, DatasetPartition};
pub use raw::{load_csv, read_reviews, RawReview};
pub use selection::{
    feature_selection_report, tree_importance, univariate_scores, FeatureScore, TreeImportance,
    UnivariateScores,
};

use crate::fingerprint::Fingerprinter;
use crate::subjective::N_ATTRIBUTES;

/// `n x 8` matrix of subjective scores in canonical attribute order.
pub fn subjective_matrix(records: &[CoffeeRecord]) -> Array2<f64> {
    let mut y = Array2::zeros((records.len(), N_ATTRIBUTES));
    for (i, r) in records.iter().enumerate() {
        for (j, v) in r.subjective.to_array().iter().enumerate() {
            y[[i, j]] = *v;
        }
    }
    y
}

/// Content hash of a record set (ids, properties and scores).
pub fn dataset_fingerprint(records: &[CoffeeRecord]) -> String {
    let mut fp = Fingerprinter::new("beanrec.dataset.v1");
    fp.u64(records.len() as u64);
    for r in records {
        let o = &r.objective;
        fp.u64(r.id as u64)
            .str(o.species.name())
            .str(&o.country_of_origin)
            .str(&o.region)
            .str(&o.variety)
            .str(&o.color)
            .u64(o.category_one_defects as u64)
            .u64(o.category_two_defects as u64)
            .str(&o.processing_method)
            .f64(o.moisture);
        for v in r.subjective.to_array() {
            fp.f64(v);
        }
    }
    fp.finish()
}
