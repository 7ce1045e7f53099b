//! Finite function spaces Y^X with the evaluation machinery made concrete:
//! every function is enumerated as an atom, point evaluations are
//! deterministic kernels, and measures on the function space collapse to
//! conditionals X → Y. Distinct measures can collapse to the same
//! conditional, which is why the collapse has no general inverse; the
//! independent product construction recovers one canonical preimage.

use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};
use crate::finite::{pushforward, Dist, FiniteSpace, Kernel, TUPLE_SEPARATOR};

/// Default cap on the number of enumerated functions.
pub const DEFAULT_ATOM_CAP: usize = 1_000_000;

/// The space of all functions from a finite base space to a finite target
/// space. Atoms are total function tables serialized as target labels in
/// base-atom order, joined by `|`, and enumerated lexicographically.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionSpace {
    base: FiniteSpace,
    target: FiniteSpace,
    space: FiniteSpace,
}

impl FunctionSpace {
    pub fn new(base: FiniteSpace, target: FiniteSpace) -> Result<Self> {
        Self::with_cap(base, target, DEFAULT_ATOM_CAP)
    }

    pub fn with_cap(base: FiniteSpace, target: FiniteSpace, cap: usize) -> Result<Self> {
        let count = (target.len() as u128)
            .checked_pow(base.len() as u32)
            .unwrap_or(u128::MAX);
        if count > cap as u128 {
            return Err(Error::SpaceTooLarge {
                base: base.name().to_owned(),
                target: target.name().to_owned(),
                atoms: count,
                cap,
            });
        }
        let mut labels = vec![String::new()];
        for _ in 0..base.len() {
            let mut next = Vec::with_capacity(labels.len() * target.len());
            for prefix in &labels {
                for atom in target.atoms() {
                    if prefix.is_empty() {
                        next.push(atom.clone());
                    } else {
                        next.push(format!("{prefix}{TUPLE_SEPARATOR}{atom}"));
                    }
                }
            }
            labels = next;
        }
        let name = format!("{}^{}", target.name(), base.name());
        let space = FiniteSpace::new(name, labels)?;
        Ok(Self {
            base,
            target,
            space,
        })
    }

    pub fn base(&self) -> &FiniteSpace {
        &self.base
    }

    pub fn target(&self) -> &FiniteSpace {
        &self.target
    }

    /// The function space as a plain finite space of function atoms.
    pub fn as_space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Function table of atom `f`: the target index at each base index.
    pub fn table(&self, mut f: usize) -> Vec<usize> {
        let m = self.target.len();
        let mut out = vec![0; self.base.len()];
        for slot in out.iter_mut().rev() {
            *slot = f % m;
            f /= m;
        }
        out
    }

    /// Atom index of a function table.
    pub fn atom_of(&self, table: &[usize]) -> usize {
        debug_assert_eq!(table.len(), self.base.len());
        table.iter().fold(0, |acc, &t| acc * self.target.len() + t)
    }

    /// Atom index of the function given by target labels in base order.
    pub fn atom_of_labels(&self, labels: &[&str]) -> Result<usize> {
        let mut table = Vec::with_capacity(labels.len());
        for label in labels {
            table.push(self.target.require(label)?);
        }
        Ok(self.atom_of(&table))
    }

    /// Point evaluation at a base atom as a deterministic kernel
    /// `Y^X → Y`, sending each function atom `f` to `f(x)`.
    pub fn eval_kernel(&self, x: &str) -> Result<Kernel> {
        let slot = self.base.require(x)?;
        let rows = (0..self.len())
            .map(|f| {
                let t = self.table(f)[slot];
                Dist::dirac(self.target.clone(), self.target.atom(t))
                    .expect("table entries index the target")
            })
            .collect();
        Kernel::new(self.space.clone(), self.target.clone(), rows)
    }

    /// Collapse a measure on the function space to a conditional `X → Y`:
    /// row x is the pushforward through the evaluation at x.
    pub fn to_conditional(&self, p: &Dist) -> Result<Kernel> {
        p.space().expect_same(&self.space)?;
        let rows = self
            .base
            .atoms()
            .iter()
            .map(|x| pushforward(p, &self.eval_kernel(x)?))
            .collect::<Result<Vec<_>>>()?;
        Kernel::new(self.base.clone(), self.target.clone(), rows)
    }

    /// The independent process with the given conditional: the product
    /// measure `P(f) = Π_x c(f(x)|x)`. Collapsing it recovers `c` exactly.
    pub fn from_conditional(c: &Kernel) -> Result<(FunctionSpace, Dist)> {
        let fs = FunctionSpace::new(c.domain().clone(), c.codomain().clone())?;
        let weights = (0..fs.len())
            .map(|f| {
                fs.table(f)
                    .iter()
                    .enumerate()
                    .map(|(x, &y)| c.row(x).weight(y).clone())
                    .fold(BigRational::one(), |acc, w| acc * w)
            })
            .collect();
        let dist = Dist::new(fs.space.clone(), weights)?;
        Ok((fs, dist))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite::rat;

    fn two_to_three() -> FunctionSpace {
        let x = FiniteSpace::new_plain("X", ["1", "2"]).unwrap();
        let y = FiniteSpace::new_plain("Y", ["a", "b", "c"]).unwrap();
        FunctionSpace::new(x, y).unwrap()
    }

    #[test]
    fn enumerates_all_nine_functions() {
        let fs = two_to_three();
        assert_eq!(fs.len(), 9);
        assert_eq!(fs.as_space().atom(0), "a|a");
        assert_eq!(fs.as_space().atom(8), "c|c");
    }

    #[test]
    fn singleton_base_is_the_target() {
        let x = FiniteSpace::new_plain("X", ["*"]).unwrap();
        let y = FiniteSpace::new_plain("Y", ["a", "b"]).unwrap();
        let fs = FunctionSpace::new(x, y.clone()).unwrap();
        assert_eq!(fs.len(), y.len());
        assert_eq!(fs.as_space().atoms(), y.atoms());
    }

    #[test]
    fn singleton_target_leaves_one_constant() {
        let x = FiniteSpace::new_plain("X", ["1", "2", "3"]).unwrap();
        let y = FiniteSpace::new_plain("Y", ["c"]).unwrap();
        assert_eq!(FunctionSpace::new(x, y).unwrap().len(), 1);
    }

    #[test]
    fn cap_is_enforced() {
        let x = FiniteSpace::new_plain("X", (0..8).map(|i| i.to_string())).unwrap();
        let y = FiniteSpace::new_plain("Y", (0..12).map(|i| i.to_string())).unwrap();
        assert!(matches!(
            FunctionSpace::new(x, y).unwrap_err(),
            Error::SpaceTooLarge { .. }
        ));
    }

    #[test]
    fn evaluation_reads_the_table() {
        let fs = two_to_three();
        let ev1 = fs.eval_kernel("1").unwrap();
        let f_bc = fs.atom_of_labels(&["b", "c"]).unwrap();
        assert_eq!(
            ev1.row(f_bc),
            &Dist::dirac(fs.target().clone(), "b").unwrap()
        );
        let ev2 = fs.eval_kernel("2").unwrap();
        assert_eq!(
            ev2.row(f_bc),
            &Dist::dirac(fs.target().clone(), "c").unwrap()
        );
    }

    #[test]
    fn eval_of_dirac_is_dirac_at_the_value() {
        let fs = two_to_three();
        let f_cb = fs.atom_of_labels(&["c", "b"]).unwrap();
        let point = Dist::dirac(fs.as_space().clone(), fs.as_space().atom(f_cb)).unwrap();
        for (x, want) in [("1", "c"), ("2", "b")] {
            let pushed = pushforward(&point, &fs.eval_kernel(x).unwrap()).unwrap();
            assert_eq!(pushed, Dist::dirac(fs.target().clone(), want).unwrap());
        }
    }

    /// Two distinct measures with the same collapse: the half/half measures
    /// on {(b,c),(c,b)} and on {(b,b),(c,c)}.
    #[test]
    fn distinct_measures_share_a_conditional() {
        let fs = two_to_three();
        let mut p_weights = vec![rat(0, 1); 9];
        p_weights[fs.atom_of_labels(&["b", "c"]).unwrap()] = rat(1, 2);
        p_weights[fs.atom_of_labels(&["c", "b"]).unwrap()] = rat(1, 2);
        let p = Dist::new(fs.as_space().clone(), p_weights).unwrap();

        let mut q_weights = vec![rat(0, 1); 9];
        q_weights[fs.atom_of_labels(&["b", "b"]).unwrap()] = rat(1, 2);
        q_weights[fs.atom_of_labels(&["c", "c"]).unwrap()] = rat(1, 2);
        let q = Dist::new(fs.as_space().clone(), q_weights).unwrap();

        assert_ne!(p, q);
        let p_bar = fs.to_conditional(&p).unwrap();
        let q_bar = fs.to_conditional(&q).unwrap();
        assert_eq!(p_bar, q_bar);
        for row in p_bar.rows() {
            assert_eq!(row.weights(), &[rat(0, 1), rat(1, 2), rat(1, 2)]);
        }
    }

    #[test]
    fn independent_process_is_the_product_measure() {
        let fs = two_to_three();
        let c = Kernel::from_rows(
            fs.base().clone(),
            fs.target().clone(),
            vec![
                vec![rat(0, 1), rat(1, 2), rat(1, 2)],
                vec![rat(0, 1), rat(1, 2), rat(1, 2)],
            ],
        )
        .unwrap();
        let (fs2, product) = FunctionSpace::from_conditional(&c).unwrap();
        for labels in [["b", "b"], ["b", "c"], ["c", "b"], ["c", "c"]] {
            let f = fs2.atom_of_labels(&[labels[0], labels[1]]).unwrap();
            assert_eq!(product.weight(f), &rat(1, 4));
        }
        assert_eq!(fs2.to_conditional(&product).unwrap(), c);
    }

    #[test]
    fn deterministic_conditional_round_trips_to_a_dirac() {
        let x = FiniteSpace::new_plain("X", ["1", "2"]).unwrap();
        let y = FiniteSpace::new_plain("Y", ["a", "b"]).unwrap();
        let c = Kernel::deterministic_with(x, y, |a| {
            if a == "1" {
                "b".to_owned()
            } else {
                "a".to_owned()
            }
        })
        .unwrap();
        let (fs, p) = FunctionSpace::from_conditional(&c).unwrap();
        let f = fs.atom_of_labels(&["b", "a"]).unwrap();
        assert_eq!(p.weight(f), &rat(1, 1));
    }
}
