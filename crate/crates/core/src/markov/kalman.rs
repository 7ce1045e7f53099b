use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gauss::{condition, validate_covariance, Gaussian};

/// Linear-Gaussian state-space model: `x' = A x + w`, `y = H x + v` with
/// `w ~ N(0, Q)` and `v ~ N(0, R)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearGaussianModel {
    transition: DMatrix<f64>,
    process_noise: DMatrix<f64>,
    observation: DMatrix<f64>,
    observation_noise: DMatrix<f64>,
    initial: Gaussian,
}

impl LinearGaussianModel {
    pub fn new(
        transition: DMatrix<f64>,
        process_noise: DMatrix<f64>,
        observation: DMatrix<f64>,
        observation_noise: DMatrix<f64>,
        initial: Gaussian,
    ) -> Result<Self> {
        let n = initial.dim();
        let m = observation.nrows();
        let square = |mat: &DMatrix<f64>, size: usize| mat.nrows() == size && mat.ncols() == size;
        if !square(&transition, n)
            || !square(&process_noise, n)
            || observation.ncols() != n
            || !square(&observation_noise, m)
        {
            return Err(Error::DimensionMismatch {
                what: "linear-Gaussian model".to_owned(),
                detail: format!(
                    "state dimension {n}, observation dimension {m}, A {}×{}, Q {}×{}, H {}×{}, R {}×{}",
                    transition.nrows(),
                    transition.ncols(),
                    process_noise.nrows(),
                    process_noise.ncols(),
                    observation.nrows(),
                    observation.ncols(),
                    observation_noise.nrows(),
                    observation_noise.ncols(),
                ),
            });
        }
        validate_covariance(&process_noise)?;
        validate_covariance(&observation_noise)?;
        Ok(Self {
            transition,
            process_noise,
            observation,
            observation_noise,
            initial,
        })
    }

    pub fn state_dim(&self) -> usize {
        self.initial.dim()
    }

    pub fn observation_dim(&self) -> usize {
        self.observation.nrows()
    }

    pub fn transition(&self) -> &DMatrix<f64> {
        &self.transition
    }

    pub fn process_noise(&self) -> &DMatrix<f64> {
        &self.process_noise
    }

    pub fn observation(&self) -> &DMatrix<f64> {
        &self.observation
    }

    pub fn observation_noise(&self) -> &DMatrix<f64> {
        &self.observation_noise
    }

    pub fn initial(&self) -> &Gaussian {
        &self.initial
    }

    /// Time update only: `N(A m, A P Aᵀ + Q)`.
    pub fn predict(&self, state: &Gaussian) -> Result<Gaussian> {
        let mean = &self.transition * state.mean();
        let cov = &self.transition * state.cov() * self.transition.transpose()
            + &self.process_noise;
        Gaussian::new(mean, (cov.clone() + cov.transpose()) * 0.5)
    }

    /// Assemble the joint of (observation, predicted state):
    /// mean `(H m, m)`, covariance `[[H P Hᵀ + R, H P], [P Hᵀ, P]]`.
    pub fn observation_joint(&self, predicted: &Gaussian) -> Result<Gaussian> {
        let m = self.observation_dim();
        let n = self.state_dim();
        let hp = &self.observation * predicted.cov();
        let obs_cov = &hp * self.observation.transpose() + &self.observation_noise;

        let mut mean = DVector::zeros(m + n);
        mean.rows_mut(0, m)
            .copy_from(&(&self.observation * predicted.mean()));
        mean.rows_mut(m, n).copy_from(predicted.mean());

        let mut cov = DMatrix::zeros(m + n, m + n);
        cov.view_mut((0, 0), (m, m)).copy_from(&obs_cov);
        cov.view_mut((0, m), (m, n)).copy_from(&hp);
        cov.view_mut((m, 0), (n, m)).copy_from(&hp.transpose());
        cov.view_mut((m, m), (n, n)).copy_from(predicted.cov());
        Gaussian::new(mean, (cov.clone() + cov.transpose()) * 0.5)
    }
}

/// One predict-update cycle: push the state through the dynamics, then
/// condition the joint of (observation, state) on the measurement.
pub fn kalman_step(
    state: &Gaussian,
    model: &LinearGaussianModel,
    measurement: &[f64],
) -> Result<Gaussian> {
    if measurement.len() != model.observation_dim() {
        return Err(Error::DimensionMismatch {
            what: "measurement".to_owned(),
            detail: format!(
                "{} entries for observation dimension {}",
                measurement.len(),
                model.observation_dim()
            ),
        });
    }
    let predicted = model.predict(state)?;
    let joint = model.observation_joint(&predicted)?;
    condition(&joint, measurement)
}

/// Fold [`kalman_step`] over a measurement sequence, starting from the
/// model's initial state; returns the posterior after each measurement.
pub fn run_filter(
    model: &LinearGaussianModel,
    measurements: &[Vec<f64>],
) -> Result<Vec<Gaussian>> {
    let mut state = model.initial().clone();
    let mut out = Vec::with_capacity(measurements.len());
    for y in measurements {
        state = kalman_step(&state, model, y)?;
        out.push(state.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_model(q: f64, r: f64) -> LinearGaussianModel {
        LinearGaussianModel::new(
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, q),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, r),
            Gaussian::from_parts(vec![0.0], vec![vec![1.0]]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn scalar_conjugate_update() {
        let model = scalar_model(0.0, 1.0);
        let post = kalman_step(model.initial(), &model, &[1.0]).unwrap();
        assert!((post.mean()[0] - 0.5).abs() < 1e-12);
        assert!((post.variance(0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn exact_observation_pins_the_state() {
        let model = scalar_model(0.0, 0.0);
        let post = kalman_step(model.initial(), &model, &[0.7]).unwrap();
        assert!((post.mean()[0] - 0.7).abs() < 1e-10);
        assert!(post.variance(0).abs() < 1e-10);
    }

    #[test]
    fn uninformative_observation_keeps_the_prediction() {
        let model = scalar_model(0.5, 1e8);
        let predicted = model.predict(model.initial()).unwrap();
        let post = kalman_step(model.initial(), &model, &[100.0]).unwrap();
        assert!((post.mean()[0] - predicted.mean()[0]).abs() < 1e-4);
        assert!(
            (post.variance(0) - predicted.variance(0)).abs()
                <= 1e-4 * predicted.variance(0)
        );
    }

    #[test]
    fn empty_trace_for_no_measurements() {
        let model = scalar_model(0.1, 1.0);
        assert!(run_filter(&model, &[]).unwrap().is_empty());
    }

    #[test]
    fn dimensions_are_validated() {
        let model = scalar_model(0.1, 1.0);
        assert!(kalman_step(model.initial(), &model, &[1.0, 2.0]).is_err());
    }
}
