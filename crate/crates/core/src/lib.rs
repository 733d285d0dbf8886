//! DirectLiNGAM causal discovery for per-trial experiment data, with bootstrap
//! edge reliability, total effects, SEM fit indices and a nonparametric
//! condition-comparison battery.

pub mod bootstrap;
pub mod cli;
pub mod dataset;
pub mod dot;
pub mod fit;
pub mod lingam;
mod linalg;
pub mod report;
pub mod stats;
pub mod synth;

pub use dataset::{DataMatrix, TrialRecord};
pub use lingam::{CausalModel, PriorKnowledge};
