//! DirectLiNGAM: causal ordering by pairwise non-Gaussian likelihood ratios,
//! then adaptive-lasso estimation of the direct effects.

mod adjacency;
mod entropy;
mod model;
mod order;
mod prior;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use adjacency::{estimate_adjacency, Regression, LAMBDA_GRID, LAMBDA_RATIO};
pub use entropy::{entropy_approx, independence_score, residual, EntropyConstants};
pub use model::{reachability, residual_normality_audit, topological_order, CausalModel, ResidualNormality};
pub use order::{search_causal_order, TIE_TOLERANCE};
pub use prior::{PriorKnowledge, SinkEdges, FORBIDDEN, REQUIRED, UNKNOWN};

use crate::dataset::{standardize, DataMatrix, DatasetError};
use crate::stats::StatsError;

#[derive(Debug, Error)]
pub enum LingamError {
    #[error(transparent)]
    Data(#[from] DatasetError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("need at least 2 variables, got {0}")]
    TooFewVariables(usize),
    #[error("need more observations than variables (n = {n}, p = {p})")]
    TooFewObservations { n: usize, p: usize },
    #[error("prior knowledge is {got}×{got} but the data has {expected} columns")]
    PriorSize { expected: usize, got: usize },
    #[error("invalid prior knowledge: {0}")]
    InvalidPrior(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("prior knowledge admits no next variable among {remaining:?}")]
    Unsatisfiable { remaining: Vec<String> },
    #[error("singular predecessor design for `{0}`")]
    SingularDesign(String),
    #[error("regressor has zero variance")]
    ZeroVariance,
    #[error("residual of `{0}` collapsed to a constant")]
    Degenerate(String),
    #[error("causal order is not a permutation of the variables")]
    InvalidOrder,
    #[error("adjacency is not strictly lower triangular under the causal order")]
    NotAcyclic,
    #[error("non-finite value in input")]
    NonFinite,
    #[error("{0}")]
    Shape(String),
}

pub type Result<T> = std::result::Result<T, LingamError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LingamOptions {
    /// z-score every column before fitting.
    pub standardize: bool,
    pub regression: Regression,
    pub constants: EntropyConstants,
}

impl Default for LingamOptions {
    fn default() -> Self {
        LingamOptions { standardize: true, regression: Regression::default(), constants: EntropyConstants::default() }
    }
}

/// Causal order, then direct effects.
pub fn fit(m: &DataMatrix, pk: &PriorKnowledge, options: &LingamOptions) -> Result<CausalModel> {
    order::check_shape(m.nrows(), m.ncols(), pk)?;
    let z;
    let data = if options.standardize {
        z = standardize(m)?;
        &z
    } else {
        m
    };
    let order = search_causal_order(data, pk, &options.constants)?;
    let mut model = estimate_adjacency(data, &order, pk, options.regression)?;
    model.standardized = options.standardize;
    Ok(model)
}
