use crate::bayes::{infer, posterior, BayesModel};
use crate::error::{Error, Result};
use crate::finite::{pushforward, Dist, Kernel};
use crate::markov::chain::MarkovChain;

/// A hidden Markov model over a finite chain: one sensor kernel per time,
/// plus an initial state distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct HmmSpec {
    chain: MarkovChain,
    sensors: Vec<Kernel>,
    initial: Dist,
}

impl HmmSpec {
    pub fn new(chain: MarkovChain, sensors: Vec<Kernel>, initial: Dist) -> Result<Self> {
        if sensors.len() != chain.len() {
            return Err(Error::DimensionMismatch {
                what: "HMM".to_owned(),
                detail: format!(
                    "{} sensors for a chain with {} times",
                    sensors.len(),
                    chain.len()
                ),
            });
        }
        for (i, sensor) in sensors.iter().enumerate() {
            sensor.domain().expect_same(chain.space(i)?)?;
        }
        initial.space().expect_same(chain.space(0)?)?;
        Ok(Self {
            chain,
            sensors,
            initial,
        })
    }

    pub fn chain(&self) -> &MarkovChain {
        &self.chain
    }

    pub fn sensors(&self) -> &[Kernel] {
        &self.sensors
    }

    pub fn initial(&self) -> &Dist {
        &self.initial
    }

    /// Fold [`filter_step`] over a sequence of measurements, one per time,
    /// returning the posterior state distribution after each measurement.
    pub fn run_filter(&self, measurements: &[Dist]) -> Result<Vec<Dist>> {
        if measurements.len() > self.chain.len() {
            return Err(Error::DimensionMismatch {
                what: "filter".to_owned(),
                detail: format!(
                    "{} measurements for a chain with {} times",
                    measurements.len(),
                    self.chain.len()
                ),
            });
        }
        let mut prior = self.initial.clone();
        let mut posteriors = Vec::with_capacity(measurements.len());
        for (i, measurement) in measurements.iter().enumerate() {
            let transition = if i + 1 < measurements.len() {
                self.chain.transition(i)
            } else {
                None
            };
            let (post, next) = filter_step(&prior, &self.sensors[i], measurement, transition)?;
            posteriors.push(post);
            if let Some(next) = next {
                prior = next;
            }
        }
        Ok(posteriors)
    }
}

/// One filter step: invert the sensor against the current prior, condition
/// on the measurement, then push the posterior through the transition to
/// get the next prior (when a transition is given).
pub fn filter_step(
    prior: &Dist,
    sensor: &Kernel,
    measurement: &Dist,
    transition: Option<&Kernel>,
) -> Result<(Dist, Option<Dist>)> {
    let model = BayesModel::new(prior.clone(), sensor.clone())?;
    let result = infer(&model);
    let post = posterior(&result, measurement)?;
    let next = transition
        .map(|t| pushforward(&post, t))
        .transpose()?;
    Ok((post, next))
}
