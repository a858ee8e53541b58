//! Exact enumeration of every realization of the first generations.

use std::collections::HashMap;
use std::ops::Mul;
use std::rc::Rc;

use num_rational::BigRational;
use num_traits::One;

use super::{MarkedTree, Model};
use crate::error::{Error, Result};
use crate::tree::Vertex;

/// Default refusal threshold for [`enumerate_population`].
pub const DEFAULT_OUTCOME_CAP: u64 = 2_000_000;

/// Number of distinct realizations of the tree truncated at `generations`.
///
/// Returned as a float because it overflows integers quickly; it is only
/// used to decide whether enumeration is affordable.
pub fn population_outcome_count(model: &Model, x0: usize, generations: usize) -> f64 {
    let mut counts = vec![1.0f64; model.type_count()];
    for _ in 0..generations {
        counts = (0..model.type_count())
            .map(|x| {
                model
                    .planar_atoms(x)
                    .iter()
                    .map(|a| a.children.iter().map(|&c| counts[c]).product::<f64>())
                    .sum()
            })
            .collect();
    }
    counts[x0]
}

/// Every realization of the construction from type `x0` up to generation
/// `generations`, each exactly once, with its probability.
pub fn enumerate_population(model: &Model, x0: usize, generations: usize, cap: u64) -> Result<Vec<(f64, MarkedTree)>> {
    enumerate_with(model, x0, generations, cap, |p| p)
}

/// Same as [`enumerate_population`] with exact rational probabilities.
///
/// Each atom probability is converted from its binary floating-point value
/// without rounding, so products are exact.
pub fn enumerate_population_exact(
    model: &Model,
    x0: usize,
    generations: usize,
    cap: u64,
) -> Result<Vec<(BigRational, MarkedTree)>> {
    enumerate_with(model, x0, generations, cap, |p| {
        BigRational::from_float(p).expect("probabilities are finite")
    })
}

/// Shared realization node; subtrees are reused across outcomes.
struct Node {
    ty: usize,
    children: Vec<Rc<Node>>,
}

fn enumerate_with<P, F>(
    model: &Model,
    x0: usize,
    generations: usize,
    cap: u64,
    convert: F,
) -> Result<Vec<(P, MarkedTree)>>
where
    P: Clone + One + Mul<Output = P>,
    F: Fn(f64) -> P,
{
    let estimate = population_outcome_count(model, x0, generations);
    if estimate > cap as f64 {
        return Err(Error::EnumerationCap { estimate, cap });
    }
    let mut memo = HashMap::new();
    let outcomes = outcomes(model, x0, generations, &convert, &mut memo);
    Ok(outcomes
        .iter()
        .map(|(p, node)| (p.clone(), to_marked_tree(node)))
        .collect())
}

type Outcomes<P> = Rc<Vec<(P, Rc<Node>)>>;

fn outcomes<P, F>(
    model: &Model,
    ty: usize,
    depth: usize,
    convert: &F,
    memo: &mut HashMap<(usize, usize), Outcomes<P>>,
) -> Outcomes<P>
where
    P: Clone + One + Mul<Output = P>,
    F: Fn(f64) -> P,
{
    if let Some(hit) = memo.get(&(ty, depth)) {
        return hit.clone();
    }
    let result = if depth == 0 {
        vec![(
            P::one(),
            Rc::new(Node {
                ty,
                children: Vec::new(),
            }),
        )]
    } else {
        let mut out = Vec::new();
        for atom in model.planar_atoms(ty) {
            // Cartesian product of the children's outcome lists.
            let mut partial: Vec<(P, Vec<Rc<Node>>)> = vec![(convert(atom.prob), Vec::new())];
            for &c in &atom.children {
                let sub = outcomes(model, c, depth - 1, convert, memo);
                let mut next = Vec::with_capacity(partial.len() * sub.len());
                for (p, kids) in &partial {
                    for (q, node) in sub.iter() {
                        let mut k = kids.clone();
                        k.push(node.clone());
                        next.push((p.clone() * q.clone(), k));
                    }
                }
                partial = next;
            }
            out.extend(
                partial
                    .into_iter()
                    .map(|(p, children)| (p, Rc::new(Node { ty, children }))),
            );
        }
        out
    };
    let result = Rc::new(result);
    memo.insert((ty, depth), result.clone());
    result
}

fn to_marked_tree(root: &Node) -> MarkedTree {
    let mut pairs = Vec::new();
    let mut stack = vec![(Vertex::root(), root)];
    while let Some((v, node)) = stack.pop() {
        for (i, child) in node.children.iter().enumerate() {
            stack.push((v.child(i as u32 + 1), child));
        }
        pairs.push((v, node.ty));
    }
    MarkedTree::from_pairs(pairs)
}
