use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::finite::dist::Dist;
use crate::finite::space::FiniteSpace;

/// A Markov kernel between finite spaces: one exact distribution over the
/// codomain per domain atom (a row-stochastic rational matrix).
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    domain: FiniteSpace,
    codomain: FiniteSpace,
    rows: Vec<Dist>,
}

impl Kernel {
    pub fn new(domain: FiniteSpace, codomain: FiniteSpace, rows: Vec<Dist>) -> Result<Self> {
        if rows.len() != domain.len() {
            return Err(Error::InvalidDistribution {
                reason: format!(
                    "{} rows for {} atoms of `{}`",
                    rows.len(),
                    domain.len(),
                    domain.name()
                ),
            });
        }
        for row in &rows {
            row.space().expect_same(&codomain)?;
        }
        Ok(Self {
            domain,
            codomain,
            rows,
        })
    }

    /// Build from raw rational rows, validating each as a distribution.
    pub fn from_rows(
        domain: FiniteSpace,
        codomain: FiniteSpace,
        rows: Vec<Vec<BigRational>>,
    ) -> Result<Self> {
        let rows = rows
            .into_iter()
            .map(|w| Dist::new(codomain.clone(), w))
            .collect::<Result<Vec<_>>>()?;
        Self::new(domain, codomain, rows)
    }

    /// The identity kernel, a Dirac mass at each atom.
    pub fn identity(space: FiniteSpace) -> Self {
        let rows = space
            .atoms()
            .iter()
            .map(|a| Dist::dirac(space.clone(), a).expect("atom of own space"))
            .collect();
        Self {
            domain: space.clone(),
            codomain: space,
            rows,
        }
    }

    /// Deterministic kernel induced by an atom-to-atom table. The table must
    /// be total on the domain; values must name codomain atoms.
    pub fn deterministic(
        domain: FiniteSpace,
        codomain: FiniteSpace,
        table: &HashMap<String, String>,
    ) -> Result<Self> {
        let mut rows = Vec::with_capacity(domain.len());
        for atom in domain.atoms() {
            let target = table.get(atom).ok_or_else(|| Error::IncompleteMap {
                space: domain.name().to_owned(),
                atom: atom.clone(),
            })?;
            rows.push(Dist::dirac(codomain.clone(), target)?);
        }
        Self::new(domain, codomain, rows)
    }

    /// Deterministic kernel induced by a function on atom labels.
    pub fn deterministic_with<F>(
        domain: FiniteSpace,
        codomain: FiniteSpace,
        f: F,
    ) -> Result<Self>
    where
        F: Fn(&str) -> String,
    {
        let mut rows = Vec::with_capacity(domain.len());
        for atom in domain.atoms() {
            rows.push(Dist::dirac(codomain.clone(), &f(atom))?);
        }
        Self::new(domain, codomain, rows)
    }

    pub fn domain(&self) -> &FiniteSpace {
        &self.domain
    }

    pub fn codomain(&self) -> &FiniteSpace {
        &self.codomain
    }

    pub fn rows(&self) -> &[Dist] {
        &self.rows
    }

    pub fn row(&self, index: usize) -> &Dist {
        &self.rows[index]
    }

    pub fn row_of(&self, atom: &str) -> Result<&Dist> {
        Ok(&self.rows[self.domain.require(atom)?])
    }

    /// The entry `T(target | given)`.
    pub fn value(&self, target: &str, given: &str) -> Result<BigRational> {
        let row = self.row_of(given)?;
        Ok(row.weight(self.codomain.require(target)?).clone())
    }

    /// Diagrammatic composition: `self` followed by `next`.
    pub fn then(&self, next: &Kernel) -> Result<Kernel> {
        compose(next, self)
    }
}

/// Chapman–Kolmogorov composition `second ∘ first`, marginalizing over the
/// intermediate space: row x of the result is `Σ_y first(y|x) · second(·|y)`.
pub fn compose(second: &Kernel, first: &Kernel) -> Result<Kernel> {
    first.codomain.expect_same(&second.domain)?;
    let rows = first
        .rows
        .iter()
        .map(|row| mix(row, second))
        .collect::<Vec<_>>();
    Kernel::new(first.domain.clone(), second.codomain.clone(), rows)
}

/// Pushforward of a distribution through a kernel: `(k ∘ p)(B) = Σ_x k(B|x)·p(x)`.
pub fn pushforward(dist: &Dist, kernel: &Kernel) -> Result<Dist> {
    dist.space().expect_same(kernel.domain())?;
    Ok(mix(dist, kernel))
}

/// Mixture Σ_x weights(x) · kernel.row(x); the weights are a distribution,
/// so the result is again a distribution.
fn mix(weights: &Dist, kernel: &Kernel) -> Dist {
    let n = kernel.codomain.len();
    let mut out = vec![BigRational::zero(); n];
    for (x, w) in weights.weights().iter().enumerate() {
        if w.is_zero() {
            continue;
        }
        for (y, v) in kernel.rows[x].weights().iter().enumerate() {
            out[y] += w * v;
        }
    }
    Dist::new(kernel.codomain.clone(), out).expect("mixture of rows is stochastic")
}
