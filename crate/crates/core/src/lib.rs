//! kernelcat: a categorical Bayesian inference engine.
//!
//! Probability distributions are arrows out of a one-point space and
//! conditional probabilities are Markov kernels; composition is
//! marginalization over the intermediate space. On finite spaces the whole
//! calculus — composition, joint construction, Bayesian inversion — runs in
//! exact rational arithmetic. Gaussian processes, parametric linear models
//! and Kalman filtering get the same treatment in closed form over floats.
//!
//! ```
//! use kernelcat::finite::{rat, Dist, FiniteSpace, Kernel};
//! use kernelcat::bayes::{infer, BayesModel};
//!
//! let urns = FiniteSpace::new_plain("U", ["u1", "u2"]).unwrap();
//! let colors = FiniteSpace::new_plain("B", ["b", "r"]).unwrap();
//! let prior = Dist::new(urns.clone(), vec![rat(1, 2), rat(1, 2)]).unwrap();
//! let sampling = Kernel::from_rows(
//!     urns,
//!     colors,
//!     vec![vec![rat(2, 5), rat(3, 5)], vec![rat(3, 4), rat(1, 4)]],
//! )
//! .unwrap();
//!
//! let model = BayesModel::new(prior, sampling).unwrap();
//! let result = infer(&model);
//! assert_eq!(result.inference.value("u1", "b").unwrap(), rat(8, 23));
//! ```

pub mod bayes;
pub mod error;
pub mod finite;
pub mod funcspace;
pub mod gauss;
pub mod markov;

pub use error::{Error, Result};

#[cfg(test)]
mod thread_safety {
    fn is_shareable<T: Send + Sync>() {}

    #[test]
    fn engine_values_cross_threads() {
        is_shareable::<crate::finite::FiniteSpace>();
        is_shareable::<crate::finite::Dist>();
        is_shareable::<crate::finite::Kernel>();
        is_shareable::<crate::finite::Joint>();
        is_shareable::<crate::gauss::Gaussian>();
        is_shareable::<crate::gauss::GpState>();
        is_shareable::<crate::markov::MarkovChain>();
        is_shareable::<crate::markov::LinearGaussianModel>();
    }
}
