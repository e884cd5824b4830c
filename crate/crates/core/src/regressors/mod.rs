//! Regressors mapping encoded objective properties to the eight subjective
//! scores: a random forest, per-attribute RBF SVRs and a dropout MLP.

mod adam;
mod forest;
mod mlp;
mod model;
mod search;
mod svr;
mod tree;

pub use adam::{Adam, AdamParams};
pub use forest::{fit_forest, ForestConfig, ForestFit, RandomForest};
pub use mlp::{fit_mlp, Dense, DenseGrad, Mlp, MlpConfig, MlpFit};
pub use model::{
    fit_params, Family, FittedParams, RegressorConfig, TrainedRegressor, TrainingMetadata,
    TrainingNotes, MODEL_FORMAT, MODEL_VERSION,
};
pub use search::{
    grid_search_svr, random_search_mlp, MlpSearchResult, MlpSearchSpace, SearchTrial, SvrGrid,
    SvrGridResult,
};
pub use svr::{
    fit_svr, rbf_from_distances, solve_epsilon_svr, squared_distances, SmoSolution, SvrConfig,
    SvrEnsemble, SvrModel, SvrParams,
};
pub use tree::{FeatureSubset, Node, RegressionTree, TreeParams};
