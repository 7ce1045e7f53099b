//! Closed-form Gaussian machinery: multivariate normal conditioning,
//! Gaussian-process priors and posteriors (recursive and batch), additive
//! white observation noise, and weight-space models with their pushforward
//! processes.

mod functions;
mod gp;
mod normal;
mod parametric;

pub use functions::{BasisFn, CovFn, MeanFn};
pub use gp::{GpState, Observation, SolveInfo};
pub use normal::{condition, validate_covariance, Gaussian};
pub use parametric::ParametricModel;
