use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gauss::functions::{BasisFn, CovFn, MeanFn};
use crate::gauss::gp::{GpState, Observation};
use crate::gauss::normal::{cholesky_with_jitter, symmetrize, Gaussian};

/// Smallest relative singular value at which the basis still counts as
/// independent on the probe grid.
const RANK_TOL: f64 = 1e-8;
const PIVOT_FLOOR: f64 = 1e-12;

/// A weight-space model: `f(x) = Σ_j a_j f_j(x)` with a Gaussian prior on
/// the weights and white observation noise. The basis must be linearly
/// independent so the weights are identifiable.
#[derive(Debug, Clone, PartialEq)]
pub struct ParametricModel {
    input_dim: usize,
    basis: Vec<BasisFn>,
    prior: Gaussian,
    noise_var: f64,
}

impl ParametricModel {
    pub fn new(
        input_dim: usize,
        basis: Vec<BasisFn>,
        prior: Gaussian,
        noise_var: f64,
    ) -> Result<Self> {
        if basis.is_empty() {
            return Err(Error::DegenerateBasis);
        }
        if let Some(max) = basis.iter().filter_map(BasisFn::max_index).max() {
            if max >= input_dim {
                return Err(Error::DimensionMismatch {
                    what: "basis".to_owned(),
                    detail: format!("coordinate {max} used but input dimension is {input_dim}"),
                });
            }
        }
        if prior.dim() != basis.len() {
            return Err(Error::DimensionMismatch {
                what: "weight prior".to_owned(),
                detail: format!(
                    "prior is {}-dimensional but the basis has {} functions",
                    prior.dim(),
                    basis.len()
                ),
            });
        }
        if noise_var < 0.0 {
            return Err(Error::BadVariance { value: noise_var });
        }
        let model = Self {
            input_dim,
            basis,
            prior,
            noise_var,
        };
        model.check_independent()?;
        Ok(model)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn basis(&self) -> &[BasisFn] {
        &self.basis
    }

    pub fn prior(&self) -> &Gaussian {
        &self.prior
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    /// Feature vector `φ(x) = (f_1(x), …, f_p(x))`.
    pub fn features(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.basis.len(), self.basis.iter().map(|b| b.eval(x)))
    }

    /// Design matrix with one feature row per input.
    pub fn design_matrix(&self, xs: &[Vec<f64>]) -> DMatrix<f64> {
        let p = self.basis.len();
        DMatrix::from_fn(xs.len(), p, |i, j| self.basis[j].eval(&xs[i]))
    }

    fn check_input_dims<'a, I>(&self, points: I) -> Result<()>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        for point in points {
            if point.len() != self.input_dim {
                return Err(Error::DimensionMismatch {
                    what: "input point".to_owned(),
                    detail: format!(
                        "{}-dimensional point for an input dimension of {}",
                        point.len(),
                        self.input_dim
                    ),
                });
            }
        }
        Ok(())
    }

    /// Rank check on a fixed quasi-random probe grid.
    fn check_independent(&self) -> Result<()> {
        let points = probe_points(2 * self.basis.len() + 5, self.input_dim);
        let design = self.design_matrix(&points);
        let svd = design.svd(false, false);
        let max = svd.singular_values.max();
        let min = svd.singular_values.min();
        if max <= 0.0 || min <= RANK_TOL * max {
            return Err(Error::DegenerateBasis);
        }
        Ok(())
    }

    /// Push the weight prior forward to a process: mean `Σ_j m_j f_j`,
    /// covariance `k(x,z) = φ(x)ᵀ Σ₀ φ(z)`, noise variance copied.
    pub fn pushforward(&self) -> GpState {
        let p = self.basis.len();
        let weight_cov = (0..p)
            .map(|i| (0..p).map(|j| self.prior.cov()[(i, j)]).collect())
            .collect();
        let mean = MeanFn::BasisCombination {
            basis: self.basis.clone(),
            coefficients: self.prior.mean().iter().copied().collect(),
        };
        let cov = CovFn::DotProduct {
            basis: self.basis.clone(),
            weight_cov,
        };
        GpState::new(mean, cov, self.noise_var).expect("noise validated on construction")
    }

    /// Posterior over the weights given a batch of measurements, computed
    /// through one positive-definite solve against
    /// `Φ Σ₀ Φᵀ + σ² I`. Equal to the conjugate normal-prior posterior.
    pub fn posterior(&self, data: &[Observation]) -> Result<Gaussian> {
        self.check_input_dims(data.iter().map(|d| d.x.as_slice()))?;
        if data.is_empty() {
            return Ok(self.prior.clone());
        }
        let p = self.basis.len();
        let n = data.len();
        if nalgebra::Cholesky::new(symmetrize(self.prior.cov())).is_none() {
            return Err(Error::SingularPrior);
        }
        if self.noise_var == 0.0 && (n > p || has_repeated_inputs(data)) {
            return Err(Error::DegenerateUpdate { variance: 0.0 });
        }
        let xs: Vec<Vec<f64>> = data.iter().map(|d| d.x.clone()).collect();
        let design = self.design_matrix(&xs);
        let cross = self.prior.cov() * design.transpose(); // Σ₀ Φᵀ, p×n
        let gram = &design * &cross + DMatrix::identity(n, n) * self.noise_var;
        let solve = match cholesky_with_jitter(&gram) {
            Some(s) if self.noise_var > 0.0 || !s.jitter_applied => s,
            _ if self.noise_var == 0.0 => {
                // Jitter would silently soften an exact-interpolation solve.
                return Err(Error::DegenerateUpdate { variance: 0.0 });
            }
            _ => return Err(Error::DegenerateGram),
        };
        let residual = DVector::from_iterator(
            n,
            data.iter()
                .enumerate()
                .map(|(i, d)| d.y - design.row(i).transpose().dot(self.prior.mean())),
        );
        let mean = self.prior.mean() + &cross * solve.refined_solve_vec(&residual);
        let cov = symmetrize(
            &(self.prior.cov() - &cross * solve.refined_solve(&cross.transpose())),
        );
        Gaussian::new(mean, cov)
    }

    /// Posterior over the weights by folding the single-measurement update
    /// over the data: for each `(x, y)`, with `s = φᵀΣφ + σ²`,
    /// `m ← m + Σφ (y − φᵀm)/s` and `Σ ← Σ − (Σφ)(Σφ)ᵀ/s`.
    pub fn posterior_sequential(&self, data: &[Observation]) -> Result<Gaussian> {
        self.check_input_dims(data.iter().map(|d| d.x.as_slice()))?;
        let mut mean = self.prior.mean().clone();
        let mut cov = self.prior.cov().clone();
        for d in data {
            let phi = self.features(&d.x);
            let cov_phi = &cov * &phi;
            let s = phi.dot(&cov_phi) + self.noise_var;
            if s <= PIVOT_FLOOR {
                return Err(Error::DegenerateUpdate { variance: s });
            }
            let gain = (d.y - phi.dot(&mean)) / s;
            mean += &cov_phi * gain;
            cov = symmetrize(&(&cov - &cov_phi * cov_phi.transpose() / s));
        }
        for i in 0..cov.nrows() {
            if cov[(i, i)] < 0.0 && cov[(i, i)] > -PIVOT_FLOOR {
                cov[(i, i)] = 0.0;
            }
        }
        Gaussian::new(mean, cov)
    }

    /// Function-value posterior at the query points implied by a weight
    /// posterior: mean `Φ m`, covariance `Φ Σ Φᵀ`.
    pub fn predictive(&self, weights: &Gaussian, query: &[Vec<f64>]) -> Result<Gaussian> {
        self.check_input_dims(query.iter().map(Vec::as_slice))?;
        if weights.dim() != self.basis.len() {
            return Err(Error::DimensionMismatch {
                what: "weight posterior".to_owned(),
                detail: format!(
                    "{}-dimensional posterior for {} basis functions",
                    weights.dim(),
                    self.basis.len()
                ),
            });
        }
        let design = self.design_matrix(query);
        let mean = &design * weights.mean();
        let cov = symmetrize(&(&design * weights.cov() * design.transpose()));
        Gaussian::new(mean, cov)
    }
}

fn has_repeated_inputs(data: &[Observation]) -> bool {
    for i in 0..data.len() {
        for j in (i + 1)..data.len() {
            if data[i].x.len() == data[j].x.len()
                && data[i]
                    .x
                    .iter()
                    .zip(&data[j].x)
                    .all(|(a, b)| (a - b).abs() <= PIVOT_FLOOR)
            {
                return true;
            }
        }
    }
    false
}

/// Fixed quasi-random probe grid on `[-3, 3]^dim`, built from the
/// fractional parts of multiples of square roots of primes.
fn probe_points(count: usize, dim: usize) -> Vec<Vec<f64>> {
    const PRIMES: [f64; 8] = [2.0, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0];
    (0..count)
        .map(|t| {
            (0..dim.max(1))
                .map(|d| {
                    let alpha = PRIMES[d % PRIMES.len()].sqrt();
                    let frac = ((t + 1) as f64 * alpha).fract();
                    6.0 * frac - 3.0
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_line_model() -> ParametricModel {
        // f(x) = a·x with prior a ~ N(0, 1) and unit noise.
        ParametricModel::new(
            1,
            vec![BasisFn::Coord { index: 0 }],
            Gaussian::from_parts(vec![0.0], vec![vec![1.0]]).unwrap(),
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn empty_data_returns_the_prior() {
        let model = scalar_line_model();
        assert_eq!(model.posterior(&[]).unwrap(), *model.prior());
    }

    #[test]
    fn one_datum_conjugate_update() {
        let model = scalar_line_model();
        let post = model
            .posterior(&[Observation::new(vec![1.0], 2.0)])
            .unwrap();
        assert!((post.mean()[0] - 1.0).abs() < 1e-12);
        assert!((post.variance(0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sequential_matches_batch() {
        let model = ParametricModel::new(
            1,
            BasisFn::affine(1),
            Gaussian::from_parts(vec![0.0, 0.0], vec![vec![2.0, 0.3], vec![0.3, 1.0]]).unwrap(),
            0.5,
        )
        .unwrap();
        let data = vec![
            Observation::new(vec![0.0], 1.0),
            Observation::new(vec![1.0], 2.2),
            Observation::new(vec![2.0], 2.9),
            Observation::new(vec![-1.5], -0.4),
        ];
        let batch = model.posterior(&data).unwrap();
        let seq = model.posterior_sequential(&data).unwrap();
        for i in 0..2 {
            assert!((batch.mean()[i] - seq.mean()[i]).abs() < 1e-10);
            for j in 0..2 {
                assert!((batch.cov()[(i, j)] - seq.cov()[(i, j)]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn pushforward_affine_identity_prior_is_the_dot_kernel() {
        let model = ParametricModel::new(
            1,
            BasisFn::affine(1),
            Gaussian::from_parts(vec![0.0, 0.0], vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap(),
            0.0,
        )
        .unwrap();
        let gp = model.pushforward();
        assert_eq!(gp.cov_fn().eval(&[2.0], &[3.0]), 7.0); // xz + 1
        assert_eq!(gp.mean_fn().eval(&[5.0]), 0.0);
    }

    #[test]
    fn zero_prior_covariance_pushes_to_a_deterministic_process() {
        let model = ParametricModel::new(
            1,
            BasisFn::affine(1),
            Gaussian::from_parts(vec![1.5, -0.5], vec![vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap(),
            0.0,
        )
        .unwrap();
        let gp = model.pushforward();
        assert_eq!(gp.cov_fn().eval(&[1.0], &[4.0]), 0.0);
        assert_eq!(gp.mean_fn().eval(&[2.0]), 2.5); // 1.5·2 − 0.5
    }

    #[test]
    fn dependent_basis_is_rejected() {
        let err = ParametricModel::new(
            1,
            vec![
                BasisFn::Coord { index: 0 },
                BasisFn::Coord { index: 0 },
            ],
            Gaussian::from_parts(vec![0.0, 0.0], vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap(),
            1.0,
        )
        .unwrap_err();
        assert!(matches!(err, Error::DegenerateBasis));
    }

    #[test]
    fn noise_free_overdetermined_data_degenerates() {
        let model = ParametricModel::new(
            1,
            vec![BasisFn::Coord { index: 0 }],
            Gaussian::from_parts(vec![0.0], vec![vec![1.0]]).unwrap(),
            0.0,
        )
        .unwrap();
        let data = vec![
            Observation::new(vec![1.0], 1.0),
            Observation::new(vec![2.0], 2.5),
        ];
        assert!(matches!(
            model.posterior(&data).unwrap_err(),
            Error::DegenerateUpdate { .. }
        ));
    }

    #[test]
    fn noise_free_interpolation_pins_the_weight() {
        let model = ParametricModel::new(
            1,
            vec![BasisFn::Coord { index: 0 }],
            Gaussian::from_parts(vec![0.0], vec![vec![4.0]]).unwrap(),
            0.0,
        )
        .unwrap();
        let post = model
            .posterior(&[Observation::new(vec![2.0], 6.0)])
            .unwrap();
        assert!((post.mean()[0] - 3.0).abs() < 1e-10);
        assert!(post.variance(0).abs() < 1e-10);
    }

    #[test]
    fn wrong_input_dimension_is_rejected() {
        let model = scalar_line_model();
        assert!(matches!(
            model
                .posterior(&[Observation::new(vec![1.0, 2.0], 0.5)])
                .unwrap_err(),
            Error::DimensionMismatch { .. }
        ));
    }

    #[test]
    fn singular_prior_is_reported() {
        let model = ParametricModel::new(
            1,
            BasisFn::affine(1),
            Gaussian::from_parts(vec![0.0, 0.0], vec![vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap(),
            1.0,
        )
        .unwrap();
        assert!(matches!(
            model
                .posterior(&[Observation::new(vec![1.0], 1.0)])
                .unwrap_err(),
            Error::SingularPrior
        ));
    }
}
