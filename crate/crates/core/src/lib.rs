//! Utility-based link recommendation for temporal social networks.
//!
//! The crate computes value, cost and proximity features of candidate links,
//! learns a Bayesian network with a continuous latent linkage-likelihood
//! factor by closed-form EM, ranks candidates by recommendation probability
//! and evaluates against proximity and naive Bayes baselines.

pub mod baselines;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod graph;
pub mod inference;
pub mod io;
pub mod model;
pub mod numeric;
pub mod oracle;
pub mod parallel;
pub mod proximity;
pub mod sampling;
pub mod synth;
pub mod training;

pub use error::{Error, ErrorCategory, Result};
pub use features::FeatureRecord;
pub use graph::{GraphSnapshot, TemporalGraph, UserId};
pub use model::Theta;
