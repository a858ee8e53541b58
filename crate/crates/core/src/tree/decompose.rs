//! Decomposition of a planar tree at its first branch point.

use std::ops::Range;

use super::{PlanarTree, Vertex};
use crate::error::{Error, Result};

/// A tree cut at its first branch point `w = v_1 ∧ … ∧ v_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FirstBranch {
    /// `|w|`.
    pub stem: usize,
    /// Leaf-index ranges (0-based) of the partition blocks, in order.
    pub blocks: Vec<Range<usize>>,
    /// `S_i(τ) = {v : (w, i, v) ∈ τ}` for `i ≤ d_w`.
    pub subtrees: Vec<PlanarTree>,
}

impl FirstBranch {
    /// Block sizes, a composition of `k`.
    pub fn composition(&self) -> Vec<usize> {
        self.blocks.iter().map(|r| r.len()).collect()
    }
}

pub fn decompose_first_branch(tree: &PlanarTree) -> Result<FirstBranch> {
    let leaves = tree.leaves();
    if leaves.len() < 2 {
        return Err(Error::NoBranchPoint);
    }
    let first = tree.vertex(leaves[0]);
    let last = tree.vertex(*leaves.last().unwrap());
    let w = first.mrca(last);
    let wi = tree.index_of(&w).expect("mrca of tree vertices is in the tree");

    let mut subtrees = Vec::new();
    let mut blocks = Vec::new();
    let mut leaf_pos = 0;
    for child in tree.children(wi) {
        let root = tree.vertex(child);
        let end = tree.subtree_end(child);
        let vertices: Vec<Vertex> = (child..end)
            .map(|j| tree.vertex(j).strip_prefix(root).unwrap())
            .collect();
        subtrees.push(PlanarTree::from_sorted_unchecked(vertices));
        let start = leaf_pos;
        while leaf_pos < leaves.len() && leaves[leaf_pos] < end {
            leaf_pos += 1;
        }
        blocks.push(start..leaf_pos);
    }
    Ok(FirstBranch {
        stem: w.generation(),
        blocks,
        subtrees,
    })
}

/// Inverse of [`decompose_first_branch`]: hangs `subtrees` below a stem of
/// length `stem`.
pub fn compose_first_branch(stem: usize, subtrees: &[PlanarTree]) -> Result<PlanarTree> {
    if subtrees.len() < 2 {
        return Err(Error::InvalidTree(
            "a first branch point needs at least two subtrees".into(),
        ));
    }
    let w = Vertex::new(vec![1; stem]);
    let mut vertices: Vec<Vertex> = (0..=stem).map(|g| w.ancestor_at(g)).collect();
    for (i, s) in subtrees.iter().enumerate() {
        let root = w.child(i as u32 + 1);
        vertices.extend(s.vertices().iter().map(|v| root.concat(v)));
    }
    Ok(PlanarTree::from_sorted_unchecked(vertices))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{decode_heights, TreeShape};

    fn decode(l: &[u32], b: &[u32]) -> PlanarTree {
        decode_heights(&TreeShape::new(l.to_vec(), b.to_vec()).unwrap()).unwrap()
    }

    #[test]
    fn cherry_splits_into_two_unit_paths() {
        let t = decode(&[2, 2], &[0]);
        let fb = decompose_first_branch(&t).unwrap();
        assert_eq!(fb.stem, 0);
        assert_eq!(fb.composition(), vec![1, 1]);
        assert_eq!(fb.subtrees, vec![PlanarTree::path(1), PlanarTree::path(1)]);
        assert_eq!(compose_first_branch(fb.stem, &fb.subtrees).unwrap(), t);
    }

    #[test]
    fn star_splits_into_singletons() {
        let t = decode(&[1, 1, 1], &[0, 0]);
        let fb = decompose_first_branch(&t).unwrap();
        assert_eq!(fb.stem, 0);
        assert_eq!(fb.blocks, vec![0..1, 1..2, 2..3]);
        assert!(fb.subtrees.iter().all(|s| *s == PlanarTree::singleton()));
    }

    #[test]
    fn nested_blocks() {
        let t = decode(&[3, 4, 2], &[2, 1]);
        let fb = decompose_first_branch(&t).unwrap();
        assert_eq!(fb.stem, 1);
        assert_eq!(fb.composition(), vec![2, 1]);
        assert_eq!(fb.subtrees[1], PlanarTree::singleton());
        assert_eq!(compose_first_branch(1, &fb.subtrees).unwrap(), t);
    }

    #[test]
    fn single_leaf_has_no_branch_point() {
        assert_eq!(decompose_first_branch(&PlanarTree::path(3)), Err(Error::NoBranchPoint));
        assert!(compose_first_branch(0, &[PlanarTree::singleton()]).is_err());
    }
}
