//! Enumeration of discrete shapes and counting of deficient vertex tuples.

use super::{DiscreteShape, PlanarTree, TreeShape};

/// Streams every discrete shape with `k` leaves and all leaf heights in
/// `0..=max_height`, in lexicographic order of `(ℓ, b)`.
///
/// The stream can be split between workers by restricting the first leaf
/// height with [`ShapeIter::with_first_leaf`].
#[derive(Clone, Debug)]
pub struct ShapeIter {
    k: usize,
    max_height: u32,
    first_leaf: std::ops::RangeInclusive<u32>,
    leaves: Vec<u32>,
    branches: Vec<u32>,
    started: bool,
    done: bool,
}

pub fn enumerate_shapes(k: usize, max_height: u32) -> ShapeIter {
    ShapeIter::with_first_leaf(k, max_height, 0..=max_height)
}

/// Ultrametric shapes with `k` leaves at height `n`: one per
/// `b ∈ {0, …, n−1}^{k−1}`.
pub fn ultrametric_shapes(k: usize, n: u32) -> impl Iterator<Item = DiscreteShape> {
    let total = if k == 1 { 1u64 } else { u64::from(n).pow(k as u32 - 1) };
    (0..total).map(move |mut code| {
        let mut b = vec![0u32; k - 1];
        for slot in b.iter_mut().rev() {
            *slot = (code % u64::from(n)) as u32;
            code /= u64::from(n);
        }
        TreeShape::new_unchecked(vec![n; k], b)
    })
}

impl ShapeIter {
    pub fn with_first_leaf(k: usize, max_height: u32, first_leaf: std::ops::RangeInclusive<u32>) -> Self {
        assert!(k >= 1, "shapes have at least one leaf");
        let mut leaves = vec![0; k];
        leaves[0] = *first_leaf.start();
        let done = first_leaf.is_empty() || *first_leaf.end() > max_height;
        ShapeIter {
            k,
            max_height,
            first_leaf,
            leaves,
            branches: vec![0; k - 1],
            started: false,
            done,
        }
    }

    fn branches_admissible(&self) -> bool {
        (0..self.k - 1).all(|i| self.branches[i] < self.leaves[i].min(self.leaves[i + 1]))
    }

    fn advance_branches(&mut self) -> bool {
        for i in (0..self.k - 1).rev() {
            let cap = self.leaves[i].min(self.leaves[i + 1]);
            if self.branches[i] + 1 < cap {
                self.branches[i] += 1;
                for b in &mut self.branches[i + 1..] {
                    *b = 0;
                }
                return true;
            }
        }
        false
    }

    fn advance_leaves(&mut self) -> bool {
        for i in (0..self.k).rev() {
            let cap = if i == 0 {
                *self.first_leaf.end()
            } else {
                self.max_height
            };
            if self.leaves[i] < cap {
                self.leaves[i] += 1;
                for l in &mut self.leaves[i + 1..] {
                    *l = 0;
                }
                for b in &mut self.branches {
                    *b = 0;
                }
                return true;
            }
        }
        false
    }
}

impl Iterator for ShapeIter {
    type Item = DiscreteShape;

    fn next(&mut self) -> Option<DiscreteShape> {
        if self.done {
            return None;
        }
        if self.started && !self.advance_branches() && !self.advance_leaves() {
            self.done = true;
            return None;
        }
        self.started = true;
        while !self.branches_admissible() {
            if !self.advance_leaves() {
                self.done = true;
                return None;
            }
        }
        Some(TreeShape::new_unchecked(self.leaves.clone(), self.branches.clone()))
    }
}

/// Number of shapes produced by `enumerate_shapes(k, max_height)`:
/// `Σ_ℓ Π_i min(ℓ_i, ℓ_{i+1})`, computed by a transfer-matrix sum.
pub fn shape_count(k: usize, max_height: u32) -> u128 {
    let r = max_height as usize;
    let mut acc = vec![1u128; r + 1];
    for _ in 1..k {
        let mut next = vec![0u128; r + 1];
        for (l_next, slot) in next.iter_mut().enumerate() {
            *slot = acc.iter().enumerate().map(|(l, &a)| a * l.min(l_next) as u128).sum();
        }
        acc = next;
    }
    acc.iter().sum()
}

/// Number of `k`-tuples of vertices (with repetition, in any order) whose
/// spanned subtree has fewer than `k` leaves.
///
/// A tuple spans `k` leaves exactly when its entries are distinct and
/// pairwise incomparable for the ancestor order, so this counts the
/// complement of those tuples by direct enumeration.
pub fn count_deficient_tuples(tree: &PlanarTree, k: usize) -> u128 {
    let n = tree.len();
    let total = (n as u128).pow(k as u32);
    total - count_antichain_tuples(tree, k)
}

fn count_antichain_tuples(tree: &PlanarTree, k: usize) -> u128 {
    fn rec(tree: &PlanarTree, chosen: &mut Vec<usize>, k: usize) -> u128 {
        if chosen.len() == k {
            return 1;
        }
        let mut count = 0;
        for j in 0..tree.len() {
            let vj = tree.vertex(j);
            if chosen.iter().all(|&i| !tree.vertex(i).comparable(vj)) {
                chosen.push(j);
                count += rec(tree, chosen, k);
                chosen.pop();
            }
        }
        count
    }
    rec(tree, &mut Vec::with_capacity(k), k)
}

/// The bound `k! · |T|^{k−1} · (height + 1)` on deficient tuples.
pub fn deficient_tuple_bound(tree: &PlanarTree, k: usize) -> u128 {
    let fact: u128 = (1..=k as u128).product();
    fact * (tree.len() as u128).pow(k as u32 - 1) * (tree.height() as u128 + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::Vertex;
    use std::collections::HashSet;

    #[test]
    fn one_leaf_shapes_are_heights() {
        let got: Vec<_> = enumerate_shapes(1, 2).map(|s| s.leaves()[0]).collect();
        assert_eq!(got, vec![0, 1, 2]);
    }

    #[test]
    fn two_leaf_count_matches_double_loop() {
        let mut expected = 0u128;
        for l1 in 0..=2u32 {
            for l2 in 0..=2u32 {
                expected += u128::from(l1.min(l2));
            }
        }
        assert_eq!(expected, 5);
        assert_eq!(enumerate_shapes(2, 2).count() as u128, expected);
        assert_eq!(shape_count(2, 2), expected);
    }

    #[test]
    fn enumeration_has_no_duplicates_and_all_valid() {
        for k in 1..=4 {
            for r in 0..=4 {
                let shapes: Vec<_> = enumerate_shapes(k, r).collect();
                assert_eq!(shapes.len() as u128, shape_count(k, r), "k={k} r={r}");
                let set: HashSet<_> = shapes
                    .iter()
                    .map(|s| (s.leaves().to_vec(), s.branches().to_vec()))
                    .collect();
                assert_eq!(set.len(), shapes.len());
                assert!(shapes.iter().all(|s| s.validate().is_ok()));
            }
        }
    }

    #[test]
    fn split_by_first_leaf_covers_everything() {
        let whole: Vec<_> = enumerate_shapes(3, 3).collect();
        let mut parts: Vec<_> = (0..=3).flat_map(|l| ShapeIter::with_first_leaf(3, 3, l..=l)).collect();
        parts.sort_by(|a, b| {
            (a.leaves(), a.branches())
                .partial_cmp(&(b.leaves(), b.branches()))
                .unwrap()
        });
        assert_eq!(whole, parts);
    }

    #[test]
    fn ultrametric_shapes_count() {
        assert_eq!(ultrametric_shapes(3, 4).count(), 16);
        assert_eq!(ultrametric_shapes(1, 4).count(), 1);
        assert!(ultrametric_shapes(2, 3).all(|s| s.validate().is_ok()));
    }

    #[test]
    fn deficient_tuples_on_small_trees() {
        // Path with 3 vertices: every ordered pair is comparable.
        assert_eq!(count_deficient_tuples(&PlanarTree::path(2), 2), 9);
        // Cherry: only ((1),(2)) and ((2),(1)) span two leaves.
        let cherry = PlanarTree::from_vertices([Vertex::root(), Vertex::new(vec![1]), Vertex::new(vec![2])]).unwrap();
        assert_eq!(count_deficient_tuples(&cherry, 2), 7);
        assert_eq!(count_deficient_tuples(&cherry, 1), 0);
        assert_eq!(count_deficient_tuples(&PlanarTree::path(5), 1), 0);
    }
}
