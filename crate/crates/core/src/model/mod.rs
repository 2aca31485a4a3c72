//! The Bayesian network over `(R, V, C, S, N, L)` and its EM learner.

pub mod density;
pub mod em;
pub mod theta;

pub use density::{posterior_density, PosteriorDensity, RecordTerms};
pub use em::{
    estep, fit, init_theta, loglik, mstep, EStepCache, EmConfig, FitResult, RecordGammas,
};
pub use theta::{ClassParams, Theta, THETA_NAMES};
