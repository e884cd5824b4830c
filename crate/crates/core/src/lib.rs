//! Coffee bean recommendation from objective bean properties.
//!
//! Reviews are cleaned and encoded ([`dataset`]), regressors predict the
//! eight subjective cupping scores of unreviewed beans ([`regressors`]), and
//! users are matched to beans by nearest neighbours in score space
//! ([`recommender`]). [`evaluation`] holds the cross-validation and
//! recommendation-accuracy experiments.

pub mod api;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod fingerprint;
pub mod recommender;
pub mod regressors;
pub mod rng;
pub mod subjective;

pub use error::{Error, Result};
pub use subjective::{Attribute, SubjectiveVector};
