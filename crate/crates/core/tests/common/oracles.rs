//! Independent reference implementations used to cross-check the engine.
//! Everything here is deliberately written against raw vectors and
//! matrices rather than the library's own composition paths.

use kernelcat::finite::{Dist, Kernel};
use kernelcat::markov::LinearGaussianModel;
use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;
use num_traits::Zero;

/// Exhaustive hidden-Markov oracle: enumerate every state sequence,
/// weight it by the initial law, transitions, and sensor likelihoods of
/// the observed symbols, and marginalize onto the final state. Returns
/// `None` when the observed sequence has probability zero.
pub fn exhaustive_posterior(
    initial: &Dist,
    transitions: &[&Kernel],
    sensors: &[&Kernel],
    observed: &[usize],
) -> Option<Vec<BigRational>> {
    let steps = observed.len();
    let state_counts: Vec<usize> = (0..steps).map(|i| sensors[i].domain().len()).collect();
    let last_n = *state_counts.last()?;
    let mut posterior = vec![BigRational::zero(); last_n];
    let mut total = BigRational::zero();

    let mut sequence = vec![0usize; steps];
    loop {
        let mut weight = initial.weight(sequence[0]).clone();
        for i in 0..steps {
            weight *= sensors[i].row(sequence[i]).weight(observed[i]);
            if i + 1 < steps {
                weight *= transitions[i].row(sequence[i]).weight(sequence[i + 1]);
            }
        }
        posterior[sequence[steps - 1]] += &weight;
        total += weight;

        // Odometer increment over state sequences.
        let mut pos = steps;
        loop {
            if pos == 0 {
                if total.is_zero() {
                    return None;
                }
                return Some(posterior.into_iter().map(|w| w / &total).collect());
            }
            pos -= 1;
            sequence[pos] += 1;
            if sequence[pos] < state_counts[pos] {
                break;
            }
            sequence[pos] = 0;
        }
    }
}

/// Textbook Kalman recursion in gain form, independent of the engine's
/// joint-conditioning implementation.
pub fn textbook_kalman(
    model: &LinearGaussianModel,
    measurements: &[Vec<f64>],
) -> Vec<(DVector<f64>, DMatrix<f64>)> {
    let a = model.transition();
    let q = model.process_noise();
    let h = model.observation();
    let r = model.observation_noise();
    let mut mean = model.initial().mean().clone();
    let mut cov = model.initial().cov().clone();
    let mut out = Vec::new();
    for y in measurements {
        let mp = a * &mean;
        let pp = a * &cov * a.transpose() + q;
        let innovation = DVector::from_row_slice(y) - h * &mp;
        let s = h * &pp * h.transpose() + r;
        let gain =
            &pp * h.transpose() * s.try_inverse().expect("innovation covariance invertible");
        mean = mp + &gain * innovation;
        let eye = DMatrix::identity(pp.nrows(), pp.ncols());
        cov = (&eye - &gain * h) * &pp;
        cov = (&cov + cov.transpose()) * 0.5;
        out.push((mean.clone(), cov.clone()));
    }
    out
}
