//! Functionals of marked trees with `k` leaves.

use std::fmt;
use std::sync::Arc;

use crate::process::MarkedTree;
use crate::tree::{encode_heights, DiscreteShape};

/// A functional that reads a marked tree only through its shape, its leaf
/// types and the types of its branch points.
///
/// `branch_types[i]` is the type of `v_i ∧ v_{i+1}`.
pub trait ShapeFunctional: Send + Sync {
    fn eval(&self, shape: &DiscreteShape, leaf_types: &[usize], branch_types: &[usize]) -> f64;
}

impl<F> ShapeFunctional for F
where
    F: Fn(&DiscreteShape, &[usize], &[usize]) -> f64 + Send + Sync,
{
    fn eval(&self, shape: &DiscreteShape, leaf_types: &[usize], branch_types: &[usize]) -> f64 {
        self(shape, leaf_types, branch_types)
    }
}

type MarkedFn = dyn Fn(&MarkedTree) -> f64 + Send + Sync;

/// A functional `F` on marked trees with `k` leaves.
#[derive(Clone)]
pub enum Functional {
    Shape(Arc<dyn ShapeFunctional>),
    /// May read every mark, including interior ones. Only the brute-force
    /// path can evaluate it.
    Marked(Arc<MarkedFn>),
}

impl Functional {
    pub fn shape(f: impl Fn(&DiscreteShape, &[usize], &[usize]) -> f64 + Send + Sync + 'static) -> Self {
        Functional::Shape(Arc::new(f))
    }

    pub fn marked(f: impl Fn(&MarkedTree) -> f64 + Send + Sync + 'static) -> Self {
        Functional::Marked(Arc::new(f))
    }

    /// The zero functional.
    pub fn zero() -> Self {
        Functional::shape(|_, _, _| 0.0)
    }

    /// `1{height ≤ radius}`.
    pub fn height_at_most(radius: u32) -> Self {
        Functional::shape(move |s, _, _| f64::from(s.height() <= radius))
    }

    /// Evaluates on a spanned marked tree. The tree must have exactly as
    /// many leaves as the functional's order.
    pub fn eval_marked(&self, tree: &MarkedTree) -> f64 {
        match self {
            Functional::Shape(f) => {
                let shape = encode_heights(&tree.tree);
                let (leaf_types, branch_types) = shape_marks(tree);
                f.eval(&shape, &leaf_types, &branch_types)
            }
            Functional::Marked(f) => f(tree),
        }
    }
}

impl fmt::Debug for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Functional::Shape(_) => f.write_str("Functional::Shape(..)"),
            Functional::Marked(_) => f.write_str("Functional::Marked(..)"),
        }
    }
}

/// Leaf types and consecutive-leaf branch types of a marked tree.
pub fn shape_marks(tree: &MarkedTree) -> (Vec<usize>, Vec<usize>) {
    let t = &tree.tree;
    let leaves = t.leaves();
    let leaf_types = leaves.iter().map(|&i| tree.marks[i]).collect();
    let branch_types = leaves
        .windows(2)
        .map(|w| {
            let v = t.vertex(w[0]).mrca(t.vertex(w[1]));
            tree.marks[t.index_of(&v).expect("mrca lies in the tree")]
        })
        .collect();
    (leaf_types, branch_types)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{decode_heights, TreeShape};

    #[test]
    fn shape_marks_on_three_leaves() {
        let shape = TreeShape::new(vec![2, 1, 1], vec![0, 0]).unwrap();
        let tree = decode_heights(&shape).unwrap();
        // Vertices: ∅, (1), (1,1), (2), (3).
        let marked = MarkedTree::new(tree, vec![4, 3, 2, 1, 0]).unwrap();
        let (leaves, branches) = shape_marks(&marked);
        assert_eq!(leaves, vec![2, 1, 0]);
        assert_eq!(branches, vec![4, 4]);
        let f = Functional::shape(|s, l, b| (s.k() + l[0] + b[1]) as f64);
        assert_eq!(f.eval_marked(&marked), 9.0);
    }
}
