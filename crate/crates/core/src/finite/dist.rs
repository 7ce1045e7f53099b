use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::finite::space::FiniteSpace;

/// Exact probability distribution on a [`FiniteSpace`].
///
/// Weights are arbitrary-precision rationals; they must be nonnegative and
/// sum to exactly one, so every derived quantity reproduces with equality
/// rather than tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct Dist {
    space: FiniteSpace,
    weights: Vec<BigRational>,
}

impl Dist {
    pub fn new(space: FiniteSpace, weights: Vec<BigRational>) -> Result<Self> {
        if weights.len() != space.len() {
            return Err(Error::InvalidDistribution {
                reason: format!(
                    "{} weights for {} atoms of `{}`",
                    weights.len(),
                    space.len(),
                    space.name()
                ),
            });
        }
        let mut total = BigRational::zero();
        for (i, w) in weights.iter().enumerate() {
            if w < &BigRational::zero() {
                return Err(Error::InvalidDistribution {
                    reason: format!("negative weight {} on atom `{}`", w, space.atom(i)),
                });
            }
            total += w;
        }
        if !total.is_one() {
            return Err(Error::InvalidDistribution {
                reason: format!("weights sum to {}, not 1", total),
            });
        }
        Ok(Self { space, weights })
    }

    /// Point mass on a single atom.
    pub fn dirac(space: FiniteSpace, atom: &str) -> Result<Self> {
        let hit = space.require(atom)?;
        let weights = (0..space.len())
            .map(|i| {
                if i == hit {
                    BigRational::one()
                } else {
                    BigRational::zero()
                }
            })
            .collect();
        Ok(Self { space, weights })
    }

    /// Uniform distribution over all atoms.
    pub fn uniform(space: FiniteSpace) -> Self {
        let n = space.len();
        let w = BigRational::new(1.into(), (n as i64).into());
        Self {
            space,
            weights: vec![w; n],
        }
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn weights(&self) -> &[BigRational] {
        &self.weights
    }

    pub fn weight(&self, index: usize) -> &BigRational {
        &self.weights[index]
    }

    pub fn weight_of(&self, atom: &str) -> Result<&BigRational> {
        Ok(&self.weights[self.space.require(atom)?])
    }

    /// Total mass on a set of atom indices.
    pub fn mass<I: IntoIterator<Item = usize>>(&self, atoms: I) -> BigRational {
        atoms
            .into_iter()
            .map(|i| self.weights[i].clone())
            .sum()
    }

    /// Expectation of a function given by its value on each atom.
    pub fn expectation(&self, values: &[BigRational]) -> BigRational {
        self.weights
            .iter()
            .zip(values)
            .map(|(w, v)| w * v)
            .sum()
    }

    /// Atoms carrying zero weight.
    pub fn null_atoms(&self) -> Vec<String> {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| w.is_zero())
            .map(|(i, _)| self.space.atom(i).to_owned())
            .collect()
    }
}

/// Shorthand for building an exact rational from an integer pair.
pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(num.into(), den.into())
}
