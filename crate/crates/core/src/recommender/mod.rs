//! Recommendation space and k-nearest-neighbour preference matching.

mod knn;
mod space;

pub use knn::{nearest_ids, rec_acc, recommend, Recommendation};
pub use space::{
    build_space, DisplayMeta, Metric, PredictedBean, Provenance, RecommendationSpace, SpaceEntry,
};
