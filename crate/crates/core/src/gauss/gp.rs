use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauss::functions::{CovFn, MeanFn};
use crate::gauss::normal::{cholesky_with_jitter, symmetrize, Gaussian};

/// Inputs closer than this are treated as the same point.
const POINT_TOL: f64 = 1e-12;
/// Floor for effective variances used as pivots.
const PIVOT_FLOOR: f64 = 1e-12;

/// One measurement: an input point and the observed output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub x: Vec<f64>,
    pub y: f64,
}

impl Observation {
    pub fn new(x: Vec<f64>, y: f64) -> Self {
        Self { x, y }
    }
}

/// Whether a posterior solve needed the diagonal jitter.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveInfo {
    pub jitter_applied: bool,
}

/// A Gaussian-process regression state: prior mean and covariance
/// descriptors, white observation-noise variance, and the list of absorbed
/// measurements. States are immutable; absorbing a measurement returns a
/// new state.
///
/// Posterior marginals can be queried two ways: `posterior_batch` solves
/// the full Gram system by Cholesky factorization, while
/// `posterior_recursive` folds the one-measurement update equations over
/// the data. The two must agree.
#[derive(Debug, Clone, PartialEq)]
pub struct GpState {
    mean: MeanFn,
    cov: CovFn,
    noise_var: f64,
    data: Vec<Observation>,
}

impl GpState {
    pub fn new(mean: MeanFn, cov: CovFn, noise_var: f64) -> Result<Self> {
        if noise_var < 0.0 {
            return Err(Error::BadVariance { value: noise_var });
        }
        Ok(Self {
            mean,
            cov,
            noise_var,
            data: Vec::new(),
        })
    }

    pub fn mean_fn(&self) -> &MeanFn {
        &self.mean
    }

    pub fn cov_fn(&self) -> &CovFn {
        &self.cov
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    pub fn data(&self) -> &[Observation] {
        &self.data
    }

    pub fn with_data(mut self, data: Vec<Observation>) -> Self {
        self.data = data;
        self
    }

    /// All inputs must share one dimension; the first absorbed point (or
    /// the first query point) fixes it.
    fn check_dims<'a, I>(&self, points: I) -> Result<()>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut expected = self.data.first().map(|d| d.x.len());
        for point in points {
            match expected {
                None => expected = Some(point.len()),
                Some(dim) if point.len() == dim => {}
                Some(dim) => {
                    return Err(Error::DimensionMismatch {
                        what: "input point".to_owned(),
                        detail: format!("{}-dimensional point among {dim}-dimensional inputs", point.len()),
                    })
                }
            }
        }
        Ok(())
    }

    /// Prior marginal at the given points: mean `m(x_i)` and covariance
    /// `k(x_i,x_j) + σ²·[i==j]`.
    pub fn prior_marginal(&self, points: &[Vec<f64>]) -> Result<Gaussian> {
        self.check_dims(points.iter().map(Vec::as_slice))?;
        if self.noise_var == 0.0 {
            for i in 0..points.len() {
                for j in (i + 1)..points.len() {
                    if distance(&points[i], &points[j]) <= POINT_TOL {
                        return Err(Error::DegenerateGram);
                    }
                }
            }
        }
        let mean = DVector::from_iterator(
            points.len(),
            points.iter().map(|p| self.mean.eval(p)),
        );
        let mut cov = DMatrix::zeros(points.len(), points.len());
        for i in 0..points.len() {
            for j in i..points.len() {
                let mut v = self.cov.eval(&points[i], &points[j]);
                if i == j {
                    v += self.noise_var;
                }
                cov[(i, j)] = v;
                cov[(j, i)] = v;
            }
        }
        Gaussian::new(mean, cov)
    }

    /// Absorb one measurement. The effective variance `k(x,x) + σ²` must be
    /// positive, and so must the running pivot once earlier measurements
    /// are taken into account.
    pub fn update_one(&self, x: &[f64], y: f64) -> Result<GpState> {
        self.check_dims(std::iter::once(x))?;
        let eff = self.cov.eval(x, x) + self.noise_var;
        if eff <= PIVOT_FLOOR {
            return Err(Error::DegenerateUpdate { variance: eff });
        }
        if !self.data.is_empty() {
            // The pivot the new point will see after the existing data has
            // been folded in.
            let (_, cov) = self.eliminate(std::slice::from_ref(&x.to_vec()))?;
            let running = cov[(0, 0)] + self.noise_var;
            if running <= PIVOT_FLOOR {
                return Err(Error::DegenerateUpdate { variance: running });
            }
        }
        let mut next = self.clone();
        next.data.push(Observation::new(x.to_vec(), y));
        Ok(next)
    }

    /// Batch posterior at the query points: one symmetric positive-definite
    /// solve against `K(X₀,X₀) + σ²I`.
    pub fn posterior_batch(&self, query: &[Vec<f64>]) -> Result<Gaussian> {
        Ok(self.posterior_batch_with_info(query)?.0)
    }

    pub fn posterior_batch_with_info(&self, query: &[Vec<f64>]) -> Result<(Gaussian, SolveInfo)> {
        self.check_dims(query.iter().map(Vec::as_slice))?;
        if self.data.is_empty() {
            return Ok((self.prior_marginal(query)?, SolveInfo::default()));
        }
        let n = self.data.len();
        let mut gram = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut v = self.cov.eval(&self.data[i].x, &self.data[j].x);
                if i == j {
                    v += self.noise_var;
                }
                gram[(i, j)] = v;
                gram[(j, i)] = v;
            }
        }
        let solve = cholesky_with_jitter(&gram).ok_or(Error::DegenerateGram)?;
        let info = SolveInfo {
            jitter_applied: solve.jitter_applied,
        };

        let centered = DVector::from_iterator(
            n,
            self.data.iter().map(|d| d.y - self.mean.eval(&d.x)),
        );
        let alpha = solve.refined_solve_vec(&centered);

        let nq = query.len();
        let mut cross = DMatrix::zeros(nq, n);
        for (qi, q) in query.iter().enumerate() {
            for (di, d) in self.data.iter().enumerate() {
                cross[(qi, di)] = self.cov.eval(q, &d.x);
            }
        }
        let mean = DVector::from_iterator(nq, query.iter().map(|q| self.mean.eval(q)))
            + &cross * alpha;

        let mut prior_qq = DMatrix::zeros(nq, nq);
        for i in 0..nq {
            for j in i..nq {
                let v = self.cov.eval(&query[i], &query[j]);
                prior_qq[(i, j)] = v;
                prior_qq[(j, i)] = v;
            }
        }
        let v = solve.refined_solve(&cross.transpose());
        let cov = symmetrize(&(prior_qq - &cross * v));
        Ok((Gaussian::new(mean, cov)?, info))
    }

    /// Recursive posterior at the query points: folds the single-
    /// measurement mean and covariance updates over the data, tracking the
    /// effective covariance restricted to data-plus-query points.
    pub fn posterior_recursive(&self, query: &[Vec<f64>]) -> Result<Gaussian> {
        self.check_dims(query.iter().map(Vec::as_slice))?;
        if self.data.is_empty() {
            return self.prior_marginal(query);
        }
        let (mean, cov) = self.eliminate(query)?;
        Gaussian::new(mean, cov)
    }

    /// Run the rank-one update sweep over the data, returning the posterior
    /// mean and covariance on the query block. Noise from `noise_var`
    /// enters on the data diagonal: each measurement carries its own
    /// independent noise draw.
    fn eliminate(&self, query: &[Vec<f64>]) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let nd = self.data.len();
        let nq = query.len();
        let total = nd + nq;
        let point = |i: usize| -> &[f64] {
            if i < nd {
                &self.data[i].x
            } else {
                &query[i - nd]
            }
        };
        let mut c = DMatrix::zeros(total, total);
        for i in 0..total {
            for j in i..total {
                let mut v = self.cov.eval(point(i), point(j));
                if i == j && i < nd {
                    v += self.noise_var;
                }
                c[(i, j)] = v;
                c[(j, i)] = v;
            }
        }
        let mut m = DVector::from_iterator(total, (0..total).map(|i| self.mean.eval(point(i))));

        for i in 0..nd {
            let pivot = c[(i, i)];
            if pivot <= PIVOT_FLOOR {
                return Err(Error::DegenerateUpdate { variance: pivot });
            }
            let col = c.column(i).into_owned();
            let gain = (self.data[i].y - m[i]) / pivot;
            m += &col * gain;
            c -= &col * col.transpose() / pivot;
        }

        let mean = m.rows(nd, nq).into_owned();
        let mut cov = c.view((nd, nd), (nq, nq)).into_owned();
        cov = symmetrize(&cov);
        // The query diagonal reports the function posterior, so clamp the
        // tiny negatives that the sweep can leave behind.
        for i in 0..nq {
            if cov[(i, i)] < 0.0 && cov[(i, i)] > -PIVOT_FLOOR {
                cov[(i, i)] = 0.0;
            }
        }
        Ok((mean, cov))
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn se_state(noise: f64) -> GpState {
        GpState::new(
            MeanFn::Zero,
            CovFn::squared_exponential(1.0, 1.0).unwrap(),
            noise,
        )
        .unwrap()
    }

    #[test]
    fn single_point_prior_marginal() {
        let gp = se_state(0.25);
        let marginal = gp.prior_marginal(&[vec![3.0]]).unwrap();
        assert_eq!(marginal.mean()[0], 0.0);
        assert_eq!(marginal.variance(0), 1.25);
    }

    #[test]
    fn prior_marginal_rejects_noise_free_duplicates() {
        let gp = se_state(0.0);
        assert!(matches!(
            gp.prior_marginal(&[vec![1.0], vec![1.0]]).unwrap_err(),
            Error::DegenerateGram
        ));
    }

    #[test]
    fn observing_the_prior_mean_changes_nothing_at_the_point() {
        let gp = se_state(0.0);
        let updated = gp.update_one(&[2.0], 0.0).unwrap();
        let post = updated.posterior_batch(&[vec![2.0]]).unwrap();
        assert!(post.mean()[0].abs() < 1e-12);
        assert!(post.variance(0).abs() < 1e-10);
    }

    #[test]
    fn far_away_queries_keep_the_prior() {
        let gp = se_state(0.0).update_one(&[0.0], 1.0).unwrap();
        let post = gp.posterior_batch(&[vec![50.0]]).unwrap();
        assert!(post.mean()[0].abs() < 1e-8);
        assert!((post.variance(0) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn recursive_and_batch_agree_on_two_updates() {
        let gp = se_state(0.1)
            .update_one(&[1.0], 0.7)
            .unwrap()
            .update_one(&[2.5], -0.2)
            .unwrap();
        let query = vec![vec![0.5], vec![1.7], vec![3.0]];
        let batch = gp.posterior_batch(&query).unwrap();
        let recursive = gp.posterior_recursive(&query).unwrap();
        for i in 0..query.len() {
            assert!((batch.mean()[i] - recursive.mean()[i]).abs() < 1e-10);
            for j in 0..query.len() {
                assert!((batch.cov()[(i, j)] - recursive.cov()[(i, j)]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn no_data_posterior_is_the_prior_marginal() {
        let gp = se_state(0.3);
        let points = vec![vec![0.0], vec![1.0]];
        assert_eq!(
            gp.posterior_batch(&points).unwrap(),
            gp.prior_marginal(&points).unwrap()
        );
    }

    #[test]
    fn noise_via_covariance_sum_equals_noise_via_state() {
        // κ = k + white(σ²) with no state noise gives the same marginal as
        // k with state noise σ², at distinct points.
        let kappa = CovFn::squared_exponential(1.0, 1.0)
            .unwrap()
            .with_noise(0.25)
            .unwrap();
        let via_cov = GpState::new(MeanFn::Zero, kappa, 0.0).unwrap();
        let via_state = se_state(0.25);
        let points = vec![vec![0.0], vec![1.0], vec![3.5]];
        assert_eq!(
            via_cov.prior_marginal(&points).unwrap(),
            via_state.prior_marginal(&points).unwrap()
        );
    }

    #[test]
    fn degenerate_update_is_reported() {
        let gp = GpState::new(MeanFn::Zero, CovFn::Constant { value: 0.0 }, 0.0).unwrap();
        assert!(matches!(
            gp.update_one(&[0.0], 1.0).unwrap_err(),
            Error::DegenerateUpdate { .. }
        ));
    }

    #[test]
    fn mismatched_input_dimensions_are_rejected() {
        let gp = se_state(0.1).update_one(&[1.0], 0.5).unwrap();
        assert!(matches!(
            gp.posterior_batch(&[vec![1.0, 2.0]]).unwrap_err(),
            Error::DimensionMismatch { .. }
        ));
        assert!(matches!(
            gp.update_one(&[1.0, 2.0], 0.1).unwrap_err(),
            Error::DimensionMismatch { .. }
        ));
    }

    #[test]
    fn repeated_noise_free_input_degenerates() {
        let gp = se_state(0.0).update_one(&[1.0], 0.5).unwrap();
        assert!(matches!(
            gp.update_one(&[1.0], 0.6).unwrap_err(),
            Error::DegenerateUpdate { .. }
        ));
    }
}
