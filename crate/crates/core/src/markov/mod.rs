//! Markov transformations over finite time chains, hidden-Markov filtering
//! built on Bayesian inversion, and the linear-Gaussian (Kalman) instance
//! of the same filter loop.

mod chain;
mod hmm;
mod kalman;

pub use chain::{natural_transformation_commutes, MarkovChain};
pub use hmm::{filter_step, HmmSpec};
pub use kalman::{kalman_step, run_filter, LinearGaussianModel};
