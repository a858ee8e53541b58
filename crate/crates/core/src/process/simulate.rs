use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Model;
use crate::error::{Error, Result};
use crate::tree::{PlanarTree, Vertex};

/// A planar tree with a mark on every vertex, indexed like
/// [`PlanarTree::vertices`].
#[derive(Clone, Debug, PartialEq)]
pub struct MarkedTree<M = usize> {
    pub tree: PlanarTree,
    pub marks: Vec<M>,
}

impl<M> MarkedTree<M> {
    pub fn new(tree: PlanarTree, marks: Vec<M>) -> Result<Self> {
        if marks.len() != tree.len() {
            return Err(Error::InvalidTree(format!(
                "{} marks for {} vertices",
                marks.len(),
                tree.len()
            )));
        }
        Ok(MarkedTree { tree, marks })
    }

    pub fn mark_of(&self, v: &Vertex) -> Option<&M> {
        self.tree.index_of(v).map(|i| &self.marks[i])
    }

    /// Number of vertices at generation `g`.
    pub fn generation_size(&self, g: usize) -> usize {
        (0..self.tree.len()).filter(|&i| self.tree.generation(i) == g).count()
    }

    /// Builds a marked tree from `(vertex, mark)` pairs in any order.
    pub(crate) fn from_pairs(mut pairs: Vec<(Vertex, M)>) -> Self {
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        let (vertices, marks): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        MarkedTree {
            tree: PlanarTree::from_sorted_unchecked(vertices),
            marks,
        }
    }
}

/// Source of offspring for simulation over an arbitrary type space.
pub trait OffspringSampler {
    type Type: Clone;

    fn sample<R: Rng + ?Sized>(&self, parent: &Self::Type, rng: &mut R) -> Vec<Self::Type>;
}

impl OffspringSampler for Model {
    type Type = usize;

    fn sample<R: Rng + ?Sized>(&self, parent: &usize, rng: &mut R) -> Vec<usize> {
        self.atom_for(*parent, rng.random::<f64>()).children.clone()
    }
}

/// The generator for replica `replica` of a run seeded with `seed`.
///
/// Replicas use disjoint ChaCha streams, so results do not depend on how
/// replicas are scheduled across threads.
pub fn replica_rng(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    rng
}

/// Grows the tree from a root of type `root`, stopping after generation
/// `generations`.
pub fn simulate_with<S, R>(sampler: &S, root: S::Type, generations: usize, rng: &mut R) -> MarkedTree<S::Type>
where
    S: OffspringSampler,
    R: Rng + ?Sized,
{
    let mut pairs = vec![(Vertex::root(), root.clone())];
    let mut frontier = vec![(Vertex::root(), root)];
    for _ in 0..generations {
        let mut next = Vec::new();
        for (v, ty) in &frontier {
            for (i, child) in sampler.sample(ty, rng).into_iter().enumerate() {
                next.push((v.child(i as u32 + 1), child));
            }
        }
        if next.is_empty() {
            break;
        }
        pairs.extend(next.iter().cloned());
        frontier = next;
    }
    MarkedTree::from_pairs(pairs)
}

/// Simulates the model from type `x0` up to generation `generations`.
pub fn simulate(model: &Model, x0: usize, generations: usize, seed: u64) -> MarkedTree {
    simulate_with(model, x0, generations, &mut ChaCha8Rng::seed_from_u64(seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_laws() {
        let line = Model::from_named(&["A"], &[&[(1.0, &["A"])]]).unwrap();
        let t = simulate(&line, 0, 5, 1);
        assert_eq!(t.tree, PlanarTree::path(5));
        let dead = Model::from_named(&["A"], &[&[(1.0, &[])]]).unwrap();
        assert_eq!(simulate(&dead, 0, 5, 1).tree, PlanarTree::singleton());
    }

    #[test]
    fn seeded_runs_repeat() {
        let m = Model::symmetric_two_type();
        assert_eq!(simulate(&m, 0, 8, 42), simulate(&m, 0, 8, 42));
        let mut a = replica_rng(3, 0);
        let mut b = replica_rng(3, 1);
        assert_ne!(a.random::<u64>(), b.random::<u64>());
    }

    #[test]
    fn marks_follow_broods() {
        let m = Model::symmetric_two_type();
        let t = simulate(&m, 1, 6, 9);
        assert_eq!(t.marks[0], 1);
        for i in 0..t.tree.len() {
            let kids: Vec<usize> = t.tree.children(i).map(|c| t.marks[c]).collect();
            assert!(kids.is_empty() || kids == vec![0, 1]);
        }
    }

    #[test]
    fn generic_sampler_over_opaque_types() {
        struct Countdown;
        impl OffspringSampler for Countdown {
            type Type = u8;
            fn sample<R: Rng + ?Sized>(&self, parent: &u8, _: &mut R) -> Vec<u8> {
                if *parent == 0 {
                    vec![]
                } else {
                    vec![parent - 1; 2]
                }
            }
        }
        let t = simulate_with(&Countdown, 2u8, 10, &mut replica_rng(0, 0));
        assert_eq!(t.tree.len(), 7);
        assert_eq!(t.tree.leaf_count(), 4);
    }
}
