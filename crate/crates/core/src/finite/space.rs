use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Separator used when atoms of a product space are serialized as one label.
/// Plain atom labels may not contain it.
pub const TUPLE_SEPARATOR: char = '|';

#[derive(Debug)]
struct SpaceData {
    name: String,
    atoms: Vec<String>,
    index: HashMap<String, usize>,
}

/// A named finite measurable space with the powerset σ-algebra.
///
/// Atom order is fixed at construction and defines the indexing used by
/// every distribution and kernel over the space. Spaces are immutable and
/// cheap to clone.
#[derive(Debug, Clone)]
pub struct FiniteSpace {
    data: Arc<SpaceData>,
}

impl FiniteSpace {
    pub fn new<N, I, A>(name: N, atoms: I) -> Result<Self>
    where
        N: Into<String>,
        I: IntoIterator<Item = A>,
        A: Into<String>,
    {
        let name = name.into();
        let atoms: Vec<String> = atoms.into_iter().map(Into::into).collect();
        if atoms.is_empty() {
            return Err(Error::EmptySpace { space: name });
        }
        let mut index = HashMap::with_capacity(atoms.len());
        for (i, atom) in atoms.iter().enumerate() {
            if index.insert(atom.clone(), i).is_some() {
                return Err(Error::DuplicateAtom {
                    space: name,
                    atom: atom.clone(),
                });
            }
        }
        Ok(Self {
            data: Arc::new(SpaceData { name, atoms, index }),
        })
    }

    /// Like [`FiniteSpace::new`] but also rejects labels containing the
    /// tuple separator. Product spaces skip this check since their labels
    /// are built from the separator.
    pub fn new_plain<N, I, A>(name: N, atoms: I) -> Result<Self>
    where
        N: Into<String>,
        I: IntoIterator<Item = A>,
        A: Into<String>,
    {
        let space = Self::new(name, atoms)?;
        for atom in space.atoms() {
            if atom.contains(TUPLE_SEPARATOR) {
                return Err(Error::ReservedSeparator { atom: atom.clone() });
            }
        }
        Ok(space)
    }

    pub fn name(&self) -> &str {
        &self.data.name
    }

    pub fn atoms(&self) -> &[String] {
        &self.data.atoms
    }

    pub fn len(&self) -> usize {
        self.data.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction forbids empty spaces
    }

    pub fn atom(&self, index: usize) -> &str {
        &self.data.atoms[index]
    }

    pub fn index_of(&self, atom: &str) -> Option<usize> {
        self.data.index.get(atom).copied()
    }

    pub fn contains(&self, atom: &str) -> bool {
        self.data.index.contains_key(atom)
    }

    /// Index lookup that reports the space name on failure.
    pub fn require(&self, atom: &str) -> Result<usize> {
        self.index_of(atom).ok_or_else(|| Error::UnknownAtom {
            space: self.data.name.clone(),
            atom: atom.to_owned(),
        })
    }

    /// Two references to the same allocation are trivially the same space.
    pub(crate) fn same(&self, other: &FiniteSpace) -> bool {
        Arc::ptr_eq(&self.data, &other.data) || self == other
    }

    pub(crate) fn expect_same(&self, other: &FiniteSpace) -> Result<()> {
        if self.same(other) {
            Ok(())
        } else {
            Err(Error::DomainMismatch {
                left: self.name().to_owned(),
                right: other.name().to_owned(),
            })
        }
    }
}

impl PartialEq for FiniteSpace {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.data, &other.data)
            || (self.data.name == other.data.name && self.data.atoms == other.data.atoms)
    }
}

impl Eq for FiniteSpace {}

impl fmt::Display for FiniteSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{{{}}}", self.name(), self.atoms().join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builds_two_atom_space() {
        let u = FiniteSpace::new_plain("U", ["u1", "u2"]).unwrap();
        assert_eq!(u.len(), 2);
        assert_eq!(u.atom(0), "u1");
        assert_eq!(u.index_of("u2"), Some(1));
        assert!(!u.contains("u3"));
    }

    #[test]
    fn rejects_duplicate_atoms() {
        let err = FiniteSpace::new_plain("S", ["s", "s"]).unwrap_err();
        assert!(matches!(err, Error::DuplicateAtom { .. }));
    }

    #[test]
    fn rejects_empty_space() {
        let err = FiniteSpace::new_plain("E", Vec::<String>::new()).unwrap_err();
        assert!(matches!(err, Error::EmptySpace { .. }));
    }

    #[test]
    fn rejects_reserved_separator() {
        let err = FiniteSpace::new_plain("S", ["a|b"]).unwrap_err();
        assert!(matches!(err, Error::ReservedSeparator { .. }));
    }

    #[test]
    fn equality_is_structural() {
        let a = FiniteSpace::new_plain("B", ["b", "r"]).unwrap();
        let b = FiniteSpace::new_plain("B", ["b", "r"]).unwrap();
        let c = FiniteSpace::new_plain("B", ["r", "b"]).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
