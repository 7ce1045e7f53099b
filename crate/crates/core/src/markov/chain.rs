use crate::error::{Error, Result};
use crate::finite::{compose, FiniteSpace, Kernel};

/// A finite Markov transformation: ordered time labels, a (possibly
/// different) finite space at each time, and a transition kernel for each
/// adjacent pair. Long-range maps are derived by composition and satisfy
/// the Chapman–Kolmogorov relation by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovChain {
    times: Vec<String>,
    spaces: Vec<FiniteSpace>,
    transitions: Vec<Kernel>,
}

impl MarkovChain {
    pub fn new(
        times: Vec<String>,
        spaces: Vec<FiniteSpace>,
        transitions: Vec<Kernel>,
    ) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::EmptySpace {
                space: "chain with no times".to_owned(),
            });
        }
        if times.len() != spaces.len() || transitions.len() + 1 != spaces.len() {
            return Err(Error::DimensionMismatch {
                what: "Markov chain".to_owned(),
                detail: format!(
                    "{} times, {} spaces, {} transitions",
                    times.len(),
                    spaces.len(),
                    transitions.len()
                ),
            });
        }
        for (i, t) in transitions.iter().enumerate() {
            t.domain().expect_same(&spaces[i])?;
            t.codomain().expect_same(&spaces[i + 1])?;
        }
        Ok(Self {
            times,
            spaces,
            transitions,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn times(&self) -> &[String] {
        &self.times
    }

    pub fn space(&self, index: usize) -> Result<&FiniteSpace> {
        self.spaces.get(index).ok_or(Error::BadTimeIndex {
            index,
            len: self.len(),
        })
    }

    /// The stored one-step transition out of time `index`.
    pub fn transition(&self, index: usize) -> Option<&Kernel> {
        self.transitions.get(index)
    }

    /// Derived map from time `from` to time `to`: the identity when they
    /// coincide, otherwise the fold of the stored one-step transitions.
    /// Any bracketing of the fold gives the same kernel exactly.
    pub fn compose_range(&self, from: usize, to: usize) -> Result<Kernel> {
        if from > to {
            return Err(Error::BadInterval { from, to });
        }
        if to >= self.len() {
            return Err(Error::BadTimeIndex {
                index: to,
                len: self.len(),
            });
        }
        let mut acc = Kernel::identity(self.spaces[from].clone());
        for step in from..to {
            acc = compose(&self.transitions[step], &acc)?;
        }
        Ok(acc)
    }
}

/// Check that per-time kernels form a natural transformation between two
/// chains over the same times: every square
/// `components[i+1] ∘ f.transition(i) == g.transition(i) ∘ components[i]`
/// must commute exactly.
pub fn natural_transformation_commutes(
    f: &MarkovChain,
    g: &MarkovChain,
    components: &[Kernel],
) -> Result<bool> {
    if f.len() != g.len() || components.len() != f.len() {
        return Err(Error::DimensionMismatch {
            what: "natural transformation".to_owned(),
            detail: format!(
                "{} components between chains of lengths {} and {}",
                components.len(),
                f.len(),
                g.len()
            ),
        });
    }
    for (i, component) in components.iter().enumerate() {
        component.domain().expect_same(f.space(i)?)?;
        component.codomain().expect_same(g.space(i)?)?;
    }
    for i in 0..f.len() - 1 {
        let down_then_across = compose(&g.transitions[i], &components[i])?;
        let across_then_down = compose(&components[i + 1], &f.transitions[i])?;
        if down_then_across != across_then_down {
            return Ok(false);
        }
    }
    Ok(true)
}
