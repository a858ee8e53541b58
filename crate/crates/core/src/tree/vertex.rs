use std::fmt;

use serde::{Deserialize, Serialize};

/// A vertex of the Ulam–Harris universe: a finite word of positive integers.
///
/// The empty word is the root. The derived `Ord` on the underlying vector is
/// the lexicographic order on words, in which a prefix precedes all of its
/// extensions, so sorting vertices yields depth-first preorder.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vertex(Vec<u32>);

impl Vertex {
    pub fn root() -> Self {
        Vertex(Vec::new())
    }

    /// Builds a vertex from a word. Every letter must be at least 1.
    pub fn new(word: Vec<u32>) -> Self {
        assert!(word.iter().all(|&i| i >= 1), "vertex labels start at 1");
        Vertex(word)
    }

    pub fn word(&self) -> &[u32] {
        &self.0
    }

    pub fn generation(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    /// `self ⪯ other`: `self` is a (not necessarily strict) ancestor of `other`.
    pub fn is_ancestor_of(&self, other: &Vertex) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn is_strict_ancestor_of(&self, other: &Vertex) -> bool {
        self.0.len() < other.0.len() && self.is_ancestor_of(other)
    }

    pub fn comparable(&self, other: &Vertex) -> bool {
        self.is_ancestor_of(other) || other.is_ancestor_of(self)
    }

    /// Most recent common ancestor (longest common prefix).
    pub fn mrca(&self, other: &Vertex) -> Vertex {
        let len = self.0.iter().zip(&other.0).take_while(|(a, b)| a == b).count();
        Vertex(self.0[..len].to_vec())
    }

    /// Length of the longest common prefix, without allocating.
    pub fn mrca_generation(&self, other: &Vertex) -> usize {
        self.0.iter().zip(&other.0).take_while(|(a, b)| a == b).count()
    }

    pub fn parent(&self) -> Option<Vertex> {
        if self.0.is_empty() {
            None
        } else {
            Some(Vertex(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    /// The ancestor of `self` at generation `g` (`g <= generation`).
    pub fn ancestor_at(&self, g: usize) -> Vertex {
        Vertex(self.0[..g].to_vec())
    }

    pub fn child(&self, i: u32) -> Vertex {
        assert!(i >= 1);
        let mut w = self.0.clone();
        w.push(i);
        Vertex(w)
    }

    /// Concatenation `self · suffix`.
    pub fn concat(&self, suffix: &Vertex) -> Vertex {
        let mut w = self.0.clone();
        w.extend_from_slice(&suffix.0);
        Vertex(w)
    }

    /// If `prefix ⪯ self`, returns the word `v` with `self = prefix · v`.
    pub fn strip_prefix(&self, prefix: &Vertex) -> Option<Vertex> {
        self.0.strip_prefix(prefix.0.as_slice()).map(|s| Vertex(s.to_vec()))
    }
}

impl From<Vec<u32>> for Vertex {
    fn from(word: Vec<u32>) -> Self {
        Vertex::new(word)
    }
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("∅");
        }
        f.write_str("(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str(")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(w: &[u32]) -> Vertex {
        Vertex::new(w.to_vec())
    }

    #[test]
    fn lexicographic_order_puts_prefixes_first() {
        let mut xs = vec![v(&[2]), v(&[1, 1]), v(&[]), v(&[1]), v(&[1, 2]), v(&[2, 1])];
        xs.sort();
        assert_eq!(xs, vec![v(&[]), v(&[1]), v(&[1, 1]), v(&[1, 2]), v(&[2]), v(&[2, 1])]);
    }

    #[test]
    fn ancestry_and_mrca() {
        let a = v(&[1, 2, 3]);
        let b = v(&[1, 2, 1, 1]);
        assert!(v(&[1, 2]).is_ancestor_of(&a));
        assert!(a.is_ancestor_of(&a));
        assert!(!a.is_strict_ancestor_of(&a));
        assert!(!a.comparable(&b));
        assert_eq!(a.mrca(&b), v(&[1, 2]));
        assert_eq!(a.mrca_generation(&b), 2);
        assert_eq!(Vertex::root().mrca(&a), Vertex::root());
        assert_eq!(b.strip_prefix(&v(&[1, 2])), Some(v(&[1, 1])));
        assert_eq!(b.strip_prefix(&v(&[2])), None);
    }
}
