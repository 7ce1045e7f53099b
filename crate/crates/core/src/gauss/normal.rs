use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative tolerance for symmetry of covariance matrices.
const SYMMETRY_TOL: f64 = 1e-12;
/// Eigenvalues may dip this far below zero, relative to the spectral norm.
const PSD_SLACK: f64 = 1e-10;
/// Absolute slack on top of the relative one, so the all-but-zero
/// covariances produced by exact interpolation pass the check.
const PSD_ABS_SLACK: f64 = 1e-12;
/// Condition-number ceiling for observed blocks.
const MAX_CONDITION: f64 = 1e12;
/// Diagonal jitter factor: `JITTER_FACTOR · trace / n`, applied once.
const JITTER_FACTOR: f64 = 1e-10;

/// A multivariate normal distribution: mean vector plus symmetric positive
/// semidefinite covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct Gaussian {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl Gaussian {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        if cov.nrows() != mean.len() || cov.ncols() != mean.len() {
            return Err(Error::DimensionMismatch {
                what: "Gaussian".to_owned(),
                detail: format!(
                    "mean has {} entries but covariance is {}×{}",
                    mean.len(),
                    cov.nrows(),
                    cov.ncols()
                ),
            });
        }
        validate_covariance(&cov)?;
        Ok(Self { mean, cov })
    }

    pub fn from_parts(mean: Vec<f64>, cov: Vec<Vec<f64>>) -> Result<Self> {
        let n = mean.len();
        let rows_ok = cov.len() == n && cov.iter().all(|r| r.len() == n);
        if !rows_ok {
            return Err(Error::DimensionMismatch {
                what: "Gaussian".to_owned(),
                detail: "covariance rows do not match the mean length".to_owned(),
            });
        }
        let cov = DMatrix::from_fn(n, n, |i, j| cov[i][j]);
        Self::new(DVector::from_vec(mean), cov)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn variance(&self, i: usize) -> f64 {
        self.cov[(i, i)]
    }
}

/// Check symmetry (relative 1e-12) and positive semidefiniteness
/// (eigenvalues above `-1e-10 · spectral norm`).
pub fn validate_covariance(cov: &DMatrix<f64>) -> Result<()> {
    if cov.is_empty() {
        return Ok(());
    }
    let scale = 1.0 + cov.amax();
    for i in 0..cov.nrows() {
        for j in (i + 1)..cov.ncols() {
            if (cov[(i, j)] - cov[(j, i)]).abs() > SYMMETRY_TOL * scale {
                return Err(Error::NotSymmetric);
            }
        }
    }
    let eigen = symmetrize(cov).symmetric_eigenvalues();
    let spectral = eigen.iter().fold(0.0_f64, |m, &e| m.max(e.abs()));
    let min = eigen.iter().fold(f64::INFINITY, |m, &e| m.min(e));
    if min < -(PSD_SLACK * spectral + PSD_ABS_SLACK) {
        return Err(Error::NotPositiveSemidefinite { eigenvalue: min });
    }
    Ok(())
}

pub(crate) fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Result of a positive-definite solve, noting whether the jitter policy
/// had to fire. Keeps the factored matrix so solves can run one step of
/// iterative refinement.
pub(crate) struct PdSolve {
    pub chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    pub matrix: DMatrix<f64>,
    pub jitter_applied: bool,
}

impl PdSolve {
    /// Solve with one residual-correction pass.
    pub fn refined_solve(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        let mut x = self.chol.solve(rhs);
        let residual = rhs - &self.matrix * &x;
        x += self.chol.solve(&residual);
        x
    }

    pub fn refined_solve_vec(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let mut x = self.chol.solve(rhs);
        let residual = rhs - &self.matrix * &x;
        x += self.chol.solve(&residual);
        x
    }
}

/// Cholesky factorization with the jitter policy: if the matrix fails to
/// factor, add `1e-10 · trace/n` to the diagonal once and retry.
pub(crate) fn cholesky_with_jitter(m: &DMatrix<f64>) -> Option<PdSolve> {
    let sym = symmetrize(m);
    if let Some(chol) = nalgebra::Cholesky::new(sym.clone()) {
        return Some(PdSolve {
            chol,
            matrix: sym,
            jitter_applied: false,
        });
    }
    let n = sym.nrows();
    let jitter = JITTER_FACTOR * sym.trace() / n as f64;
    let bumped = &sym + DMatrix::identity(n, n) * jitter;
    nalgebra::Cholesky::new(bumped.clone()).map(|chol| PdSolve {
        chol,
        matrix: bumped,
        jitter_applied: true,
    })
}

/// Condition the joint on the leading block: with blocks
/// `(1, 2)` and an observation `x` for block 1, returns
/// `N(μ₂ + Σ₂₁Σ₁₁⁻¹(x−μ₁), Σ₂₂ − Σ₂₁Σ₁₁⁻¹Σ₁₂)`.
///
/// The conditional covariance does not depend on the observed value; only
/// the mean shifts.
pub fn condition(joint: &Gaussian, observed: &[f64]) -> Result<Gaussian> {
    let n1 = observed.len();
    let n = joint.dim();
    if n1 == 0 || n1 >= n {
        return Err(Error::DimensionMismatch {
            what: "conditioning".to_owned(),
            detail: format!("observed block of length {n1} inside a {n}-dimensional joint"),
        });
    }
    let n2 = n - n1;
    let sigma11 = joint.cov.view((0, 0), (n1, n1)).into_owned();
    let sigma12 = joint.cov.view((0, n1), (n1, n2)).into_owned();
    let sigma22 = joint.cov.view((n1, n1), (n2, n2)).into_owned();

    let solve = well_conditioned(&sigma11).ok_or(Error::SingularBlock)?;
    // W = Σ₁₁⁻¹ Σ₁₂, so Σ₂₁ Σ₁₁⁻¹ = Wᵀ.
    let w = solve.refined_solve(&sigma12);

    let residual = DVector::from_row_slice(observed) - joint.mean.rows(0, n1);
    let mean = joint.mean.rows(n1, n2).into_owned() + w.transpose() * residual;
    let cov = symmetrize(&(sigma22 - w.transpose() * sigma12));
    Gaussian::new(mean, cov)
}

/// Jittered factorization that also enforces the condition-number ceiling.
fn well_conditioned(m: &DMatrix<f64>) -> Option<PdSolve> {
    let attempt = |mat: &DMatrix<f64>, jittered: bool| -> Option<PdSolve> {
        let eigen = symmetrize(mat).symmetric_eigenvalues();
        let max = eigen.iter().fold(0.0_f64, |a, &e| a.max(e));
        let min = eigen.iter().fold(f64::INFINITY, |a, &e| a.min(e));
        if min <= 0.0 || max / min >= MAX_CONDITION {
            return None;
        }
        let sym = symmetrize(mat);
        nalgebra::Cholesky::new(sym.clone()).map(|chol| PdSolve {
            chol,
            matrix: sym,
            jitter_applied: jittered,
        })
    };
    attempt(m, false).or_else(|| {
        let n = m.nrows();
        let jitter = JITTER_FACTOR * m.trace() / n as f64;
        let bumped = m + DMatrix::identity(n, n) * jitter;
        attempt(&bumped, true)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn two_dim_conditioning_matches_hand_algebra() {
        let joint = Gaussian::from_parts(
            vec![0.0, 0.0],
            vec![vec![1.0, 0.5], vec![0.5, 1.0]],
        )
        .unwrap();
        let cond = condition(&joint, &[1.0]).unwrap();
        assert!(close(cond.mean()[0], 0.5, 1e-12));
        assert!(close(cond.variance(0), 0.75, 1e-12));
    }

    #[test]
    fn independent_blocks_leave_the_marginal_unchanged() {
        let joint = Gaussian::from_parts(
            vec![1.0, -2.0, 3.0],
            vec![
                vec![2.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.3],
                vec![0.0, 0.3, 1.0],
            ],
        )
        .unwrap();
        let cond = condition(&joint, &[5.0]).unwrap();
        assert!(close(cond.mean()[0], -2.0, 1e-12));
        assert!(close(cond.mean()[1], 3.0, 1e-12));
        assert!(close(cond.cov()[(0, 1)], 0.3, 1e-12));
    }

    #[test]
    fn observing_the_mean_keeps_the_mean() {
        let joint = Gaussian::from_parts(
            vec![2.0, 7.0],
            vec![vec![1.0, 0.9], vec![0.9, 2.0]],
        )
        .unwrap();
        let cond = condition(&joint, &[2.0]).unwrap();
        assert!(close(cond.mean()[0], 7.0, 1e-12));
    }

    #[test]
    fn conditional_covariance_ignores_the_observation() {
        let joint = Gaussian::from_parts(
            vec![0.0, 0.0],
            vec![vec![1.0, 0.5], vec![0.5, 1.0]],
        )
        .unwrap();
        let a = condition(&joint, &[-3.0]).unwrap();
        let b = condition(&joint, &[11.0]).unwrap();
        assert_eq!(a.cov(), b.cov());
    }

    #[test]
    fn asymmetric_covariance_is_rejected() {
        let err = Gaussian::from_parts(
            vec![0.0, 0.0],
            vec![vec![1.0, 0.2], vec![0.4, 1.0]],
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotSymmetric));
    }

    #[test]
    fn indefinite_covariance_is_rejected() {
        let err = Gaussian::from_parts(
            vec![0.0, 0.0],
            vec![vec![1.0, 2.0], vec![2.0, 1.0]],
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotPositiveSemidefinite { .. }));
    }

    #[test]
    fn singular_block_is_reported() {
        let joint = Gaussian::from_parts(
            vec![0.0, 0.0],
            vec![vec![0.0, 0.0], vec![0.0, 1.0]],
        )
        .unwrap();
        assert!(matches!(
            condition(&joint, &[1.0]).unwrap_err(),
            Error::SingularBlock
        ));
    }
}
