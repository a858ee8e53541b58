//! Monomials `Φ(X) = ∫ φ(d(u), e) μ^{⊗k}` and the split of a tree's
//! monomial into spanning and deficient tuples.

use rand::Rng;
use rayon::prelude::*;

use super::{tree_to_mmm, FiniteMmmSpace};
use crate::estimate::{Accumulator, Estimate};
use crate::moments::for_each_leaf_tuple;
use crate::process::{next_permutation, replica_rng, MarkedTree};
use crate::tree::{deficient_tuple_bound, DistanceMatrix};

/// A test function of the distance matrix (root at index 0) and the marks
/// of `k` sampled points.
pub trait DistanceFunctional: Send + Sync {
    fn eval(&self, d: &DistanceMatrix, marks: &[usize]) -> f64;
}

impl<F> DistanceFunctional for F
where
    F: Fn(&DistanceMatrix, &[usize]) -> f64 + Send + Sync,
{
    fn eval(&self, d: &DistanceMatrix, marks: &[usize]) -> f64 {
        self(d, marks)
    }
}

/// All permutations of `1..=k`, in lexicographic order.
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut p: Vec<usize> = (1..=k).collect();
    let mut out = vec![p.clone()];
    while next_permutation(&mut p) {
        out.push(p.clone());
    }
    out
}

/// `Σ_σ φ_σ(d, e)`: `φ` summed over all relabelings of the points.
pub fn symmetrized(phi: &dyn DistanceFunctional, d: &DistanceMatrix, marks: &[usize], perms: &[Vec<usize>]) -> f64 {
    perms
        .iter()
        .map(|sigma| {
            let relabeled: Vec<usize> = sigma.iter().map(|&s| marks[s - 1]).collect();
            phi.eval(&d.permuted(sigma), &relabeled)
        })
        .sum()
}

/// Tuning for [`monomial`].
#[derive(Clone, Copy, Debug)]
pub struct MonomialOptions {
    /// Largest number of tuples summed exhaustively.
    pub tuple_cap: u64,
    /// Tails sampled per leading point above the cap.
    pub samples_per_stratum: usize,
    pub seed: u64,
}

impl Default for MonomialOptions {
    fn default() -> Self {
        MonomialOptions {
            tuple_cap: 10_000_000,
            samples_per_stratum: 64,
            seed: 0,
        }
    }
}

fn tuple_term(space: &FiniteMmmSpace, tuple: &[usize], phi: &dyn DistanceFunctional) -> f64 {
    let weight: f64 = tuple.iter().map(|&i| space.mass(i)).product();
    if weight == 0.0 {
        return 0.0;
    }
    let marks: Vec<usize> = tuple.iter().map(|&i| space.mark(i)).collect();
    weight * phi.eval(&space.distance_matrix(tuple), &marks)
}

/// Exact monomial: the sum over all `k`-tuples of support points, with
/// repetition.
pub fn monomial_exact(space: &FiniteMmmSpace, k: usize, phi: &dyn DistanceFunctional) -> f64 {
    let support = space.support();
    let m = support.len();
    if m == 0 {
        return 0.0;
    }
    let per_lead: Vec<f64> = support
        .par_iter()
        .map(|&lead| {
            let mut tuple = vec![lead; k];
            let mut digits = vec![0usize; k.saturating_sub(1)];
            let mut total = 0.0;
            loop {
                for (slot, &d) in tuple[1..].iter_mut().zip(&digits) {
                    *slot = support[d];
                }
                total += tuple_term(space, &tuple, phi);
                // Odometer over the tail.
                let Some(pos) = digits.iter().rposition(|&d| d + 1 < m) else {
                    break;
                };
                digits[pos] += 1;
                digits[pos + 1..].iter_mut().for_each(|d| *d = 0);
            }
            total
        })
        .collect();
    per_lead.iter().sum()
}

/// Monomial, exact when the support has at most `tuple_cap` tuples and
/// otherwise estimated by sampling tails from the normalized measure within
/// each stratum of leading point.
pub fn monomial(space: &FiniteMmmSpace, k: usize, phi: &dyn DistanceFunctional, opts: &MonomialOptions) -> Estimate {
    let support = space.support();
    let m = support.len() as u64;
    if m.checked_pow(k as u32).is_some_and(|t| t <= opts.tuple_cap) {
        return Estimate::exact(monomial_exact(space, k, phi));
    }
    let total = space.total_mass();
    let cumulative: Vec<f64> = support
        .iter()
        .scan(0.0, |acc, &i| {
            *acc += space.mass(i);
            Some(*acc)
        })
        .collect();
    let draw = |u: f64| {
        let target = u * total;
        support[cumulative.partition_point(|&c| c <= target).min(support.len() - 1)]
    };
    let strata: Vec<Estimate> = support
        .par_iter()
        .enumerate()
        .map(|(s, &lead)| {
            let mut rng = replica_rng(opts.seed, s as u64);
            let mut acc = Accumulator::default();
            let mut tuple = vec![lead; k];
            for _ in 0..opts.samples_per_stratum {
                for slot in tuple[1..].iter_mut() {
                    *slot = draw(rng.random::<f64>());
                }
                let marks: Vec<usize> = tuple.iter().map(|&i| space.mark(i)).collect();
                acc.push(phi.eval(&space.distance_matrix(&tuple), &marks));
            }
            acc.estimate().scaled(space.mass(lead) * total.powi(k as i32 - 1))
        })
        .collect();
    Estimate::sum(strata)
}

/// The monomial of a rescaled tree split by whether a tuple spans `k`
/// leaves.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TupleDecomposition {
    /// `Φ(T)` over all tuples.
    pub total: f64,
    /// Increasing antichain tuples with `φ` summed over relabelings: the
    /// rescaled planar moment integrand.
    pub spanning: f64,
    /// Tuples with a repeated or comparable pair.
    pub deficient: f64,
    /// `sup|φ| · k! · |T|^{k−1} · (height + 1) · mass_scale^k`.
    pub bound: f64,
}

/// Splits `Φ(T)` for the space of [`tree_to_mmm`] into its spanning and
/// deficient parts, both summed directly. `sup_norm` bounds `|φ|`.
pub fn deficient_decomposition(
    tree: &MarkedTree,
    k: usize,
    phi: &dyn DistanceFunctional,
    edge_scale: f64,
    mass_scale: f64,
    sup_norm: f64,
) -> TupleDecomposition {
    let space = tree_to_mmm(tree, edge_scale, mass_scale);
    let total = monomial_exact(&space, k, phi);
    let perms = permutations(k);
    let weight = mass_scale.powi(k as i32);

    let mut spanning = 0.0;
    for_each_leaf_tuple(&tree.tree, k, &mut |idx| {
        let marks: Vec<usize> = idx.iter().map(|&i| tree.marks[i]).collect();
        spanning += weight * symmetrized(phi, &space.distance_matrix(idx), &marks, &perms);
    });

    let t = &tree.tree;
    let n = t.len();
    let spans = |tuple: &[usize]| {
        tuple
            .iter()
            .enumerate()
            .all(|(a, &i)| tuple[a + 1..].iter().all(|&j| !t.vertex(i).comparable(t.vertex(j))))
    };
    let mut deficient = 0.0;
    let mut tuple = vec![0usize; k];
    loop {
        if !spans(&tuple) {
            deficient += tuple_term(&space, &tuple, phi);
        }
        let Some(pos) = tuple.iter().rposition(|&d| d + 1 < n) else {
            break;
        };
        tuple[pos] += 1;
        tuple[pos + 1..].iter_mut().for_each(|d| *d = 0);
    }

    TupleDecomposition {
        total,
        spanning,
        deficient,
        bound: sup_norm * deficient_tuple_bound(t, k) as f64 * weight,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::{simulate, Model};

    fn one_point() -> FiniteMmmSpace {
        FiniteMmmSpace::from_dense(vec![0.0, 1.0, 1.0, 0.0], 0, vec![0.0, 2.0], vec![0, 0]).unwrap()
    }

    #[test]
    fn hand_examples() {
        let root_distance = |d: &DistanceMatrix, _: &[usize]| d.get(0, 1);
        assert_eq!(monomial_exact(&one_point(), 1, &root_distance), 2.0);

        // Two points at distance 1, masses 1 and 2, both at distance 1 from
        // a massless root. Terms: (1,1)→0, (1,2)→2, (2,1)→2, (2,2)→0.
        let s = FiniteMmmSpace::from_dense(
            vec![0.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0],
            0,
            vec![0.0, 1.0, 2.0],
            vec![0, 0, 0],
        )
        .unwrap();
        let pair = |d: &DistanceMatrix, _: &[usize]| d.get(1, 2);
        assert_eq!(monomial_exact(&s, 2, &pair), 4.0);
        let one = |_: &DistanceMatrix, _: &[usize]| 1.0;
        assert_eq!(monomial_exact(&s, 2, &one), 9.0);
    }

    #[test]
    fn permutations_of_three() {
        let p = permutations(3);
        assert_eq!(p.len(), 6);
        assert_eq!(p[0], vec![1, 2, 3]);
        assert_eq!(p[5], vec![3, 2, 1]);
    }

    #[test]
    fn tree_monomial_is_direct_tuple_sum() {
        let m = Model::symmetric_two_type();
        let phi = |d: &DistanceMatrix, e: &[usize]| (d.get(1, 2) + 0.5 * d.get(0, 1)) * (1.0 + e[0] as f64);
        for seed in 0..5 {
            let t = simulate(&m, 0, 5, seed);
            let s = tree_to_mmm(&t, 0.25, 1.0 / 16.0);
            let mut direct = 0.0;
            for i in 0..t.tree.len() {
                for j in 0..t.tree.len() {
                    let d = DistanceMatrix::from_fn(2, |a, b| {
                        let at = |x: usize| [0, i, j][x];
                        0.25 * t.tree.graph_distance(at(a), at(b)) as f64
                    });
                    direct += phi(&d, &[t.marks[i], t.marks[j]]) / 256.0;
                }
            }
            assert!((monomial_exact(&s, 2, &phi) - direct).abs() < 1e-12 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn sampling_agrees_with_exact_sum() {
        let t = (0..)
            .map(|seed| simulate(&Model::binary_galton_watson(), 0, 12, seed))
            .find(|t| t.tree.len() > 60)
            .unwrap();
        let s = tree_to_mmm(&t, 0.1, 0.01);
        let phi = |d: &DistanceMatrix, _: &[usize]| f64::from(d.get(1, 2) < 0.6);
        let exact = monomial_exact(&s, 2, &phi);
        let opts = MonomialOptions {
            tuple_cap: 0,
            samples_per_stratum: 200,
            seed: 9,
        };
        let est = monomial(&s, 2, &phi, &opts);
        assert!(est.stderr > 0.0);
        assert!(est.agrees_with(exact, 4.0), "{est:?} vs {exact}");
    }

    #[test]
    fn decomposition_adds_up_and_respects_bound() {
        let m = Model::binary_galton_watson();
        let phi = |d: &DistanceMatrix, _: &[usize]| f64::from(d.get(0, 1) <= 1.0 && d.get(0, 2) <= 1.0);
        for seed in 0..10 {
            let t = simulate(&m, 0, 4, seed);
            let dec = deficient_decomposition(&t, 2, &phi, 0.25, 1.0 / 16.0, 1.0);
            assert!((dec.total - dec.spanning - dec.deficient).abs() < 1e-12);
            assert!(dec.deficient.abs() <= dec.bound);
        }
    }
}
