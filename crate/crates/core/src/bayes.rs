//! Bayesian inversion on finite spaces: build the inference map from a
//! prior and a sampling distribution, compute posteriors, and answer
//! prediction queries on iterated joints.

use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::finite::{pushforward, Dist, FiniteSpace, Kernel};

/// A prior on a hypothesis space together with a sampling distribution
/// into a data space.
#[derive(Debug, Clone, PartialEq)]
pub struct BayesModel {
    prior: Dist,
    sampling: Kernel,
}

impl BayesModel {
    pub fn new(prior: Dist, sampling: Kernel) -> Result<Self> {
        prior.space().expect_same(sampling.domain())?;
        Ok(Self { prior, sampling })
    }

    pub fn hypothesis(&self) -> &FiniteSpace {
        self.sampling.domain()
    }

    pub fn data(&self) -> &FiniteSpace {
        self.sampling.codomain()
    }

    pub fn prior(&self) -> &Dist {
        &self.prior
    }

    pub fn sampling(&self) -> &Kernel {
        &self.sampling
    }

    /// Evidence on the data space: the pushforward of the prior through the
    /// sampling distribution.
    pub fn evidence(&self) -> Dist {
        pushforward(&self.prior, &self.sampling).expect("model validated on construction")
    }
}

/// The inference map is unique only up to sets of zero evidence; this picks
/// the rows at zero-evidence data atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZeroMassPolicy {
    /// Uniform distribution over hypotheses.
    #[default]
    Uniform,
    /// Copy the prior.
    CopyPrior,
}

/// Output of [`infer`]: the inference kernel, the evidence, and the data
/// atoms whose rows were filled in by the fallback policy.
#[derive(Debug, Clone, PartialEq)]
pub struct InferenceResult {
    pub inference: Kernel,
    pub evidence: Dist,
    pub zero_mass_atoms: Vec<String>,
}

/// Bayesian inversion with the default zero-mass policy.
pub fn infer(model: &BayesModel) -> InferenceResult {
    infer_with_policy(model, ZeroMassPolicy::default())
}

/// Bayesian inversion: the returned kernel `I : D → H` satisfies
/// `I(a|b) · P_D(b) = S(b|a) · P_H(a)` exactly at every atom pair with
/// positive evidence. Rows at zero-evidence atoms follow `policy` and are
/// reported in `zero_mass_atoms`.
pub fn infer_with_policy(model: &BayesModel, policy: ZeroMassPolicy) -> InferenceResult {
    let evidence = model.evidence();
    let hypothesis = model.hypothesis();
    let data = model.data();
    let mut zero_mass_atoms = Vec::new();
    let mut rows = Vec::with_capacity(data.len());
    for (b, mass) in evidence.weights().iter().enumerate() {
        if mass.is_zero() {
            zero_mass_atoms.push(data.atom(b).to_owned());
            rows.push(match policy {
                ZeroMassPolicy::Uniform => Dist::uniform(hypothesis.clone()),
                ZeroMassPolicy::CopyPrior => model.prior().clone(),
            });
            continue;
        }
        let weights = model
            .prior()
            .weights()
            .iter()
            .enumerate()
            .map(|(a, p)| model.sampling.row(a).weight(b) * p / mass)
            .collect();
        rows.push(Dist::new(hypothesis.clone(), weights).expect("Bayes rows are stochastic"));
    }
    let inference = Kernel::new(data.clone(), hypothesis.clone(), rows)
        .expect("inference kernel shape follows the model");
    InferenceResult {
        inference,
        evidence,
        zero_mass_atoms,
    }
}

/// Posterior given a measurement distribution on the data space: the
/// pushforward of the measurement through the inference map.
///
/// The measurement must be absolutely continuous with respect to the
/// evidence; mass on a zero-evidence atom would expose the arbitrary
/// fallback rows.
pub fn posterior(result: &InferenceResult, measurement: &Dist) -> Result<Dist> {
    measurement
        .space()
        .expect_same(result.inference.domain())?;
    let offending: Vec<String> = result
        .zero_mass_atoms
        .iter()
        .filter(|atom| {
            !measurement
                .weight_of(atom)
                .expect("zero-mass atoms come from the data space")
                .is_zero()
        })
        .cloned()
        .collect();
    if !offending.is_empty() {
        return Err(Error::NotAbsolutelyContinuous { atoms: offending });
    }
    pushforward(measurement, &result.inference)
}

/// Largest violation of `I(a|b) · P_D(b) = S(b|a) · P_H(a)` over all atom
/// pairs; zero exactly when `inference` inverts the model.
pub fn product_rule_residual(model: &BayesModel, inference: &Kernel) -> Result<BigRational> {
    inference.domain().expect_same(model.data())?;
    inference.codomain().expect_same(model.hypothesis())?;
    let evidence = model.evidence();
    let mut worst = BigRational::zero();
    for a in 0..model.hypothesis().len() {
        for b in 0..model.data().len() {
            let lhs = inference.row(b).weight(a) * evidence.weight(b);
            let rhs = model.sampling.row(a).weight(b) * model.prior.weight(a);
            let gap = if lhs >= rhs { lhs - rhs } else { rhs - lhs };
            if gap > worst {
                worst = gap;
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite::rat;

    fn urn_model() -> BayesModel {
        let u = FiniteSpace::new_plain("U", ["u1", "u2"]).unwrap();
        let b = FiniteSpace::new_plain("B", ["b", "r"]).unwrap();
        let prior = Dist::new(u.clone(), vec![rat(1, 2), rat(1, 2)]).unwrap();
        let sampling = Kernel::from_rows(
            u,
            b,
            vec![vec![rat(2, 5), rat(3, 5)], vec![rat(3, 4), rat(1, 4)]],
        )
        .unwrap();
        BayesModel::new(prior, sampling).unwrap()
    }

    fn cards_model() -> BayesModel {
        let c = FiniteSpace::new_plain("C", ["1", "2", "3"]).unwrap();
        let f = FiniteSpace::new_plain("F", ["r", "g"]).unwrap();
        let prior = Dist::uniform(c.clone());
        let sampling = Kernel::from_rows(
            c,
            f,
            vec![
                vec![rat(1, 1), rat(0, 1)],
                vec![rat(1, 2), rat(1, 2)],
                vec![rat(0, 1), rat(1, 1)],
            ],
        )
        .unwrap();
        BayesModel::new(prior, sampling).unwrap()
    }

    #[test]
    fn urn_inference_values() {
        let result = infer(&urn_model());
        let i = &result.inference;
        assert_eq!(i.value("u1", "b").unwrap(), rat(8, 23));
        assert_eq!(i.value("u2", "b").unwrap(), rat(15, 23));
        assert_eq!(i.value("u1", "r").unwrap(), rat(12, 17));
        assert_eq!(i.value("u2", "r").unwrap(), rat(5, 17));
        assert!(result.zero_mass_atoms.is_empty());
    }

    #[test]
    fn urn_posterior_after_blue() {
        let result = infer(&urn_model());
        let measurement = Dist::dirac(result.evidence.space().clone(), "b").unwrap();
        let post = posterior(&result, &measurement).unwrap();
        assert_eq!(post.weights(), &[rat(8, 23), rat(15, 23)]);
    }

    #[test]
    fn evidence_measurement_recovers_prior() {
        let model = urn_model();
        let result = infer(&model);
        let post = posterior(&result, &result.evidence.clone()).unwrap();
        assert_eq!(&post, model.prior());
    }

    #[test]
    fn cards_inference_by_exact_division() {
        let result = infer(&cards_model());
        let i = &result.inference;
        assert_eq!(i.value("1", "r").unwrap(), rat(2, 3));
        assert_eq!(i.value("2", "r").unwrap(), rat(1, 3));
        assert_eq!(i.value("3", "r").unwrap(), rat(0, 1));
    }

    #[test]
    fn deterministic_bijection_inverts_to_the_inverse_map() {
        let x = FiniteSpace::new_plain("X", ["x1", "x2", "x3"]).unwrap();
        let y = FiniteSpace::new_plain("Y", ["y1", "y2", "y3"]).unwrap();
        // x1 -> y2, x2 -> y3, x3 -> y1
        let sampling = Kernel::deterministic_with(x.clone(), y.clone(), |a| match a {
            "x1" => "y2".to_owned(),
            "x2" => "y3".to_owned(),
            _ => "y1".to_owned(),
        })
        .unwrap();
        let model = BayesModel::new(Dist::uniform(x.clone()), sampling).unwrap();
        let result = infer(&model);
        let expected = Kernel::deterministic_with(y, x, |b| match b {
            "y1" => "x3".to_owned(),
            "y2" => "x1".to_owned(),
            _ => "x2".to_owned(),
        })
        .unwrap();
        assert_eq!(result.inference, expected);
    }

    #[test]
    fn zero_evidence_rows_follow_policy_and_are_reported() {
        // Only card 1 is possible, so a green face has zero evidence.
        let c = FiniteSpace::new_plain("C", ["1", "2", "3"]).unwrap();
        let prior = Dist::dirac(c.clone(), "1").unwrap();
        let model = BayesModel::new(prior.clone(), cards_model().sampling().clone()).unwrap();

        let uniform = infer_with_policy(&model, ZeroMassPolicy::Uniform);
        assert_eq!(uniform.zero_mass_atoms, vec!["g".to_owned()]);
        assert_eq!(uniform.inference.row_of("g").unwrap(), &Dist::uniform(c));

        let copied = infer_with_policy(&model, ZeroMassPolicy::CopyPrior);
        assert_eq!(copied.inference.row_of("g").unwrap(), &prior);

        // Positive-evidence queries agree regardless of the policy.
        let red = Dist::dirac(model.data().clone(), "r").unwrap();
        assert_eq!(
            posterior(&uniform, &red).unwrap(),
            posterior(&copied, &red).unwrap()
        );
    }

    #[test]
    fn measurement_on_zero_evidence_atom_is_rejected() {
        let c = FiniteSpace::new_plain("C", ["1", "2", "3"]).unwrap();
        let prior = Dist::dirac(c, "1").unwrap();
        let model = BayesModel::new(prior, cards_model().sampling().clone()).unwrap();
        let result = infer(&model);
        let green = Dist::dirac(model.data().clone(), "g").unwrap();
        match posterior(&result, &green) {
            Err(Error::NotAbsolutelyContinuous { atoms }) => {
                assert_eq!(atoms, vec!["g".to_owned()])
            }
            other => panic!("expected NotAbsolutelyContinuous, got {other:?}"),
        }
    }

    #[test]
    fn residual_vanishes_for_infer_output_only() {
        let model = urn_model();
        let result = infer(&model);
        assert!(product_rule_residual(&model, &result.inference)
            .unwrap()
            .is_zero());

        let sloppy = Kernel::from_rows(
            model.data().clone(),
            model.hypothesis().clone(),
            vec![
                vec![rat(1, 2), rat(1, 2)],
                vec![rat(1, 2), rat(1, 2)],
            ],
        )
        .unwrap();
        assert!(product_rule_residual(&model, &sloppy).unwrap() > BigRational::zero());
    }

    #[test]
    fn identity_model_has_identity_inference() {
        let x = FiniteSpace::new_plain("X", ["x1", "x2"]).unwrap();
        let model =
            BayesModel::new(Dist::uniform(x.clone()), Kernel::identity(x.clone())).unwrap();
        assert!(
            product_rule_residual(&model, &Kernel::identity(x))
                .unwrap()
                .is_zero()
        );
    }
}
