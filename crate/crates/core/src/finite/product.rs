use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::finite::dist::Dist;
use crate::finite::kernel::{pushforward, Kernel};
use crate::finite::space::{FiniteSpace, TUPLE_SEPARATOR};

/// Product of finite spaces. Atoms are tuples, enumerated lexicographically
/// with the first factor most significant, and serialized as labels joined
/// by `|`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductSpace {
    space: FiniteSpace,
    factors: Vec<FiniteSpace>,
}

impl ProductSpace {
    pub fn new(factors: &[FiniteSpace]) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::EmptySpace {
                space: "product of no factors".to_owned(),
            });
        }
        let name = factors
            .iter()
            .map(FiniteSpace::name)
            .collect::<Vec<_>>()
            .join("×");
        let mut labels = vec![String::new()];
        for factor in factors {
            let mut next = Vec::with_capacity(labels.len() * factor.len());
            for prefix in &labels {
                for atom in factor.atoms() {
                    if prefix.is_empty() {
                        next.push(atom.clone());
                    } else {
                        next.push(format!("{prefix}{TUPLE_SEPARATOR}{atom}"));
                    }
                }
            }
            labels = next;
        }
        Ok(Self {
            space: FiniteSpace::new(name, labels)?,
            factors: factors.to_vec(),
        })
    }

    /// The product as a plain finite space (atoms are the joined labels).
    pub fn as_space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn factors(&self) -> &[FiniteSpace] {
        &self.factors
    }

    pub fn factor(&self, index: usize) -> Result<&FiniteSpace> {
        self.factors.get(index).ok_or(Error::BadFactor {
            index,
            factors: self.factors.len(),
        })
    }

    /// Coordinates of a product atom, one factor index per factor.
    pub fn coordinates(&self, mut atom: usize) -> Vec<usize> {
        let mut coords = vec![0; self.factors.len()];
        for (i, factor) in self.factors.iter().enumerate().rev() {
            coords[i] = atom % factor.len();
            atom /= factor.len();
        }
        coords
    }

    pub fn atom_of(&self, coords: &[usize]) -> usize {
        debug_assert_eq!(coords.len(), self.factors.len());
        let mut atom = 0;
        for (factor, &c) in self.factors.iter().zip(coords) {
            atom = atom * factor.len() + c;
        }
        atom
    }

    /// Deterministic projection kernel onto one factor.
    pub fn projection(&self, index: usize) -> Result<Kernel> {
        let target = self.factor(index)?.clone();
        Kernel::deterministic_with(self.space.clone(), target.clone(), |label| {
            label
                .split(TUPLE_SEPARATOR)
                .nth(index)
                .expect("product label has one part per factor")
                .to_owned()
        })
    }

    /// Product extended by one more factor on the right.
    pub fn extend(&self, next: &FiniteSpace) -> Result<ProductSpace> {
        let mut factors = self.factors.clone();
        factors.push(next.clone());
        ProductSpace::new(&factors)
    }

    /// Event fixing factor `index` to lie in `atoms`.
    pub fn factor_event<'a, I>(&self, index: usize, atoms: I) -> Result<Event>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let factor = self.factor(index)?;
        let mut allowed = vec![false; factor.len()];
        for atom in atoms {
            allowed[factor.require(atom)?] = true;
        }
        let members = (0..self.space.len())
            .map(|a| allowed[self.coordinates(a)[index]])
            .collect();
        Ok(Event {
            space: self.space.clone(),
            members,
        })
    }
}

/// A measurable event: an explicit subset of a space's atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    space: FiniteSpace,
    members: Vec<bool>,
}

impl Event {
    pub fn from_atoms<'a, I>(space: FiniteSpace, atoms: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut members = vec![false; space.len()];
        for atom in atoms {
            members[space.require(atom)?] = true;
        }
        Ok(Self { space, members })
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn contains(&self, index: usize) -> bool {
        self.members[index]
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.members
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| i)
    }

    pub fn union(&self, other: &Event) -> Result<Event> {
        self.space.expect_same(&other.space)?;
        Ok(Event {
            space: self.space.clone(),
            members: self
                .members
                .iter()
                .zip(&other.members)
                .map(|(a, b)| a | b)
                .collect(),
        })
    }

    pub fn intersect(&self, other: &Event) -> Result<Event> {
        self.space.expect_same(&other.space)?;
        Ok(Event {
            space: self.space.clone(),
            members: self
                .members
                .iter()
                .zip(&other.members)
                .map(|(a, b)| a & b)
                .collect(),
        })
    }

    pub fn complement(&self) -> Event {
        Event {
            space: self.space.clone(),
            members: self.members.iter().map(|m| !m).collect(),
        }
    }
}

/// A joint distribution carried together with the product structure of the
/// space it lives on.
#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    space: ProductSpace,
    dist: Dist,
}

impl Joint {
    pub fn new(space: ProductSpace, dist: Dist) -> Result<Self> {
        dist.space().expect_same(space.as_space())?;
        Ok(Self { space, dist })
    }

    /// Joint determined by a prior on X and a conditional X → Y:
    /// `J(x,y) = prior(x) · h(y|x)`.
    pub fn from_prior_and_kernel(prior: &Dist, h: &Kernel) -> Result<Self> {
        prior.space().expect_same(h.domain())?;
        let space = ProductSpace::new(&[prior.space().clone(), h.codomain().clone()])?;
        let mut weights = Vec::with_capacity(space.as_space().len());
        for (x, w) in prior.weights().iter().enumerate() {
            for v in h.row(x).weights() {
                weights.push(w * v);
            }
        }
        let dist = Dist::new(space.as_space().clone(), weights)?;
        Ok(Self { space, dist })
    }

    /// Tensor product of independent marginals: `(p ⊗ q)(A×B) = p(A)·q(B)`.
    pub fn independent(p: &Dist, q: &Dist) -> Result<Self> {
        let space = ProductSpace::new(&[p.space().clone(), q.space().clone()])?;
        let mut weights = Vec::with_capacity(space.as_space().len());
        for w in p.weights() {
            for v in q.weights() {
                weights.push(w * v);
            }
        }
        let dist = Dist::new(space.as_space().clone(), weights)?;
        Ok(Self { space, dist })
    }

    pub fn space(&self) -> &ProductSpace {
        &self.space
    }

    pub fn dist(&self) -> &Dist {
        &self.dist
    }

    /// Weight of one product atom given by its per-factor labels.
    pub fn weight_of(&self, labels: &[&str]) -> Result<BigRational> {
        let mut coords = Vec::with_capacity(labels.len());
        for (factor, label) in self.space.factors().iter().zip(labels) {
            coords.push(factor.require(label)?);
        }
        Ok(self.dist.weight(self.space.atom_of(&coords)).clone())
    }

    /// Marginal onto one factor: sums weights over all atoms sharing that
    /// factor coordinate.
    pub fn marginal(&self, index: usize) -> Result<Dist> {
        let factor = self.space.factor(index)?.clone();
        let mut weights = vec![BigRational::zero(); factor.len()];
        for (atom, w) in self.dist.weights().iter().enumerate() {
            weights[self.space.coordinates(atom)[index]] += w;
        }
        Dist::new(factor, weights)
    }

    /// Extend by a conditional on the whole current product:
    /// `K(w,z) = J(w) · next(z|w)`.
    pub fn extend(&self, next: &Kernel) -> Result<Joint> {
        self.space.as_space().expect_same(next.domain())?;
        let space = self.space.extend(next.codomain())?;
        let mut weights = Vec::with_capacity(space.as_space().len());
        for (w_atom, w) in self.dist.weights().iter().enumerate() {
            for v in next.row(w_atom).weights() {
                weights.push(w * v);
            }
        }
        let dist = Dist::new(space.as_space().clone(), weights)?;
        Ok(Joint { space, dist })
    }

    pub fn mass(&self, event: &Event) -> Result<BigRational> {
        event.space().expect_same(self.space.as_space())?;
        Ok(self.dist.mass(event.indices()))
    }

    /// Conditional probability `Pr(target | given) = J(given ∧ target) / J(given)`.
    pub fn conditional(&self, given: &Event, target: &Event) -> Result<BigRational> {
        let given_mass = self.mass(given)?;
        if given_mass.is_zero() {
            return Err(Error::ZeroMassEvent);
        }
        let both = self.mass(&given.intersect(target)?)?;
        Ok(both / given_mass)
    }
}

/// Graph of a conditional `q : X → Y`: the kernel `X → X×Y` whose row at x
/// puts `q(y|x)` on the pair `(x,y)`. Projecting back onto X recovers the
/// identity; projecting onto Y recovers `q`.
pub fn graph(q: &Kernel) -> Result<(ProductSpace, Kernel)> {
    let product = ProductSpace::new(&[q.domain().clone(), q.codomain().clone()])?;
    let n = product.as_space().len();
    let mut rows = Vec::with_capacity(q.domain().len());
    for (x, row) in q.rows().iter().enumerate() {
        let mut weights = vec![BigRational::zero(); n];
        for (y, v) in row.weights().iter().enumerate() {
            weights[product.atom_of(&[x, y])] = v.clone();
        }
        rows.push(Dist::new(product.as_space().clone(), weights)?);
    }
    let kernel = Kernel::new(q.domain().clone(), product.as_space().clone(), rows)?;
    Ok((product, kernel))
}

/// Pushforward of a joint through the projection onto a factor; equal to
/// [`Joint::marginal`] but computed through kernel composition.
pub fn marginal_via_projection(joint: &Joint, index: usize) -> Result<Dist> {
    let projection = joint.space().projection(index)?;
    pushforward(joint.dist(), &projection)
}

/// Tensor of the identity on `carried` with a conditional `p : Z → Y`:
/// the kernel `carried×Z → carried×Y` whose row at `(x,z)` puts `p(y|z)`
/// on `(x,y)`. The carried coordinate rides along untouched.
pub fn identity_tensor(carried: &FiniteSpace, p: &Kernel) -> Result<(ProductSpace, ProductSpace, Kernel)> {
    let domain = ProductSpace::new(&[carried.clone(), p.domain().clone()])?;
    let codomain = ProductSpace::new(&[carried.clone(), p.codomain().clone()])?;
    let n = codomain.as_space().len();
    let mut rows = Vec::with_capacity(domain.as_space().len());
    for atom in 0..domain.as_space().len() {
        let coords = domain.coordinates(atom);
        let (x, z) = (coords[0], coords[1]);
        let mut weights = vec![BigRational::zero(); n];
        for (y, v) in p.row(z).weights().iter().enumerate() {
            weights[codomain.atom_of(&[x, y])] = v.clone();
        }
        rows.push(Dist::new(codomain.as_space().clone(), weights)?);
    }
    let kernel = Kernel::new(
        domain.as_space().clone(),
        codomain.as_space().clone(),
        rows,
    )?;
    Ok((domain, codomain, kernel))
}
