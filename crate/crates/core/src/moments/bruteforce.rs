//! Planar factorial moments by summing over enumerated realizations.

use rayon::prelude::*;

use super::MomentQuery;
use crate::error::Result;
use crate::process::{enumerate_population, MarkedTree, Model, DEFAULT_OUTCOME_CAP};
use crate::spine::Functional;
use crate::tree::{PlanarTree, TreeShape, Vertex};

/// Calls `visit` with every increasing tuple of pairwise incomparable
/// vertex indices of length `k`, i.e. every tuple spanning `k` leaves.
pub fn for_each_leaf_tuple(tree: &PlanarTree, k: usize, visit: &mut impl FnMut(&[usize])) {
    fn rec(tree: &PlanarTree, k: usize, from: usize, chosen: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
        if chosen.len() == k {
            visit(chosen);
            return;
        }
        for i in from..tree.len() {
            chosen.push(i);
            // Indices past the subtree of `i` are neither its ancestors nor
            // its descendants.
            rec(tree, k, tree.subtree_end(i), chosen, visit);
            chosen.pop();
        }
    }
    rec(tree, k, 0, &mut Vec::with_capacity(k), visit);
}

/// `Σ_{v_1 < … < v_k} F(τ*_v)` on one realization; tuples spanning fewer
/// than `k` leaves contribute nothing.
pub fn planar_tuple_sum(tree: &MarkedTree, k: usize, f: &Functional) -> f64 {
    let t = &tree.tree;
    let mut total = 0.0;
    match f {
        Functional::Shape(g) => {
            let mut leaves = vec![0u32; k];
            let mut branches = vec![0u32; k - 1];
            let mut leaf_types = vec![0usize; k];
            let mut branch_types = vec![0usize; k - 1];
            for_each_leaf_tuple(t, k, &mut |idx| {
                for (j, &i) in idx.iter().enumerate() {
                    leaves[j] = t.generation(i) as u32;
                    leaf_types[j] = tree.marks[i];
                }
                for j in 0..k - 1 {
                    let (a, b) = (t.vertex(idx[j]), t.vertex(idx[j + 1]));
                    let w = a.mrca_generation(b);
                    branches[j] = w as u32;
                    branch_types[j] = tree.marks[ancestor_index(t, idx[j], w)];
                }
                let shape = TreeShape::new_unchecked(leaves.clone(), branches.clone());
                total += g.eval(&shape, &leaf_types, &branch_types);
            });
        }
        Functional::Marked(g) => {
            for_each_leaf_tuple(t, k, &mut |idx| {
                let vertices: Vec<Vertex> = idx.iter().map(|&i| t.vertex(i).clone()).collect();
                let spanned = t.subtree_spanned(&vertices).expect("tuple vertices lie in the tree");
                let marks = spanned.origin.iter().map(|&i| tree.marks[i]).collect();
                let marked = MarkedTree {
                    tree: spanned.tree,
                    marks,
                };
                total += g(&marked);
            });
        }
    }
    total
}

fn ancestor_index(tree: &PlanarTree, mut i: usize, generation: usize) -> usize {
    while tree.generation(i) > generation {
        i = tree.parent(i).expect("non-root vertex has a parent");
    }
    i
}

/// `M^k_x[F]` by exhaustive enumeration of the first `horizon` generations.
///
/// Exact as long as `F` vanishes on trees taller than `horizon`.
pub fn moment_bruteforce(model: &Model, query: &MomentQuery, horizon: usize) -> Result<f64> {
    moment_bruteforce_capped(model, query, horizon, DEFAULT_OUTCOME_CAP)
}

pub fn moment_bruteforce_capped(model: &Model, query: &MomentQuery, horizon: usize, cap: u64) -> Result<f64> {
    let outcomes = enumerate_population(model, query.x0, horizon, cap)?;
    let terms: Vec<f64> = outcomes
        .par_iter()
        .map(|(p, tree)| p * planar_tuple_sum(tree, query.k, &query.functional))
        .collect();
    Ok(terms.iter().sum())
}

/// `E_x[Σ_{|v| = n} F(X_{v|0}, …, X_v)]` by enumeration: the left side of the
/// many-to-one formula for a path functional.
pub fn path_sum_bruteforce(model: &Model, x0: usize, n: usize, f: impl Fn(&[usize]) -> f64) -> Result<f64> {
    let outcomes = enumerate_population(model, x0, n, DEFAULT_OUTCOME_CAP)?;
    let mut total = 0.0;
    let mut history = Vec::with_capacity(n + 1);
    for (p, tree) in &outcomes {
        let t = &tree.tree;
        for i in t.generation_indices(n) {
            history.clear();
            let mut j = Some(i);
            while let Some(v) = j {
                history.push(tree.marks[v]);
                j = t.parent(v);
            }
            history.reverse();
            total += p * f(&history);
        }
    }
    Ok(total)
}
