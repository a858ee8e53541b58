//! Moments of product functionals by recursion on the first branch point.

use std::fmt;
use std::sync::Arc;

use super::MomentQuery;
use crate::error::{Error, Result};
use crate::process::Model;
use crate::spine::{Functional, SegmentPowers, SpineKernel};
use crate::tree::DiscreteShape;

type HeightTypeFn = dyn Fn(u32, usize) -> f64 + Send + Sync;

/// A functional that factorizes over the first-branch decomposition.
///
/// `Leaf(f)` has order 1 and reads the leaf height and type. `Split` fixes
/// the leaf partition at the first branch point to consecutive blocks of the
/// sizes of its children, reads the stem length and the type of the branch
/// point through `stem`, and multiplies the functionals of the subtrees,
/// whose heights are measured from their own roots.
#[derive(Clone)]
pub enum ProductFunctional {
    Leaf(Arc<HeightTypeFn>),
    Split {
        stem: Arc<HeightTypeFn>,
        blocks: Vec<ProductFunctional>,
    },
}

impl fmt::Debug for ProductFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProductFunctional::Leaf(_) => f.write_str("Leaf"),
            ProductFunctional::Split { blocks, .. } => f.debug_struct("Split").field("blocks", blocks).finish(),
        }
    }
}

impl ProductFunctional {
    pub fn leaf(f: impl Fn(u32, usize) -> f64 + Send + Sync + 'static) -> Self {
        ProductFunctional::Leaf(Arc::new(f))
    }

    pub fn split(
        stem: impl Fn(u32, usize) -> f64 + Send + Sync + 'static,
        blocks: Vec<ProductFunctional>,
    ) -> Result<Self> {
        if blocks.len() < 2 {
            return Err(Error::NotProduct("a first branch point has at least two blocks".into()));
        }
        Ok(ProductFunctional::Split {
            stem: Arc::new(stem),
            blocks,
        })
    }

    /// Number of leaves.
    pub fn order(&self) -> usize {
        match self {
            ProductFunctional::Leaf(_) => 1,
            ProductFunctional::Split { blocks, .. } => blocks.iter().map(|b| b.order()).sum(),
        }
    }

    /// Value on a shape with leaf and branch types; zero when the shape's
    /// first-branch partition differs from the functional's.
    pub fn eval_shape(&self, shape: &DiscreteShape, leaf_types: &[usize], branch_types: &[usize]) -> f64 {
        if shape.k() != self.order() {
            return 0.0;
        }
        match self {
            ProductFunctional::Leaf(f) => f(shape.leaves()[0], leaf_types[0]),
            ProductFunctional::Split { stem, blocks } => {
                let split = shape
                    .split_first_branch(1)
                    .expect("order at least 2 has a branch point");
                if split.blocks.len() != blocks.len()
                    || split.blocks.iter().zip(blocks).any(|(r, b)| r.len() != b.order())
                {
                    return 0.0;
                }
                let mut value = stem(split.stem, branch_types[split.first_branch_index]);
                for ((range, sub), block) in split.blocks.iter().zip(&split.subshapes).zip(blocks) {
                    if value == 0.0 {
                        break;
                    }
                    value *= block.eval_shape(
                        sub,
                        &leaf_types[range.clone()],
                        &branch_types[range.start..range.end - 1],
                    );
                }
                value
            }
        }
    }

    /// The same functional seen through the generic interface.
    pub fn to_functional(&self) -> Functional {
        let me = self.clone();
        Functional::shape(move |s, l, b| me.eval_shape(s, l, b))
    }
}

/// `M^k_{x0}[F]` for a product functional, through the factorized
/// recursion: a spine runs to the first branch point, where the inner sum
/// enumerates the offspring atoms and contracts lower-order moments.
///
/// Only leaves of height at most `query.radius` are counted, as in the
/// shape sum.
pub fn moment_recursive(model: &Model, query: &MomentQuery, f: &ProductFunctional) -> Result<f64> {
    if f.order() != query.k {
        return Err(Error::NotProduct(format!(
            "functional has order {} but the query asks for k = {}",
            f.order(),
            query.k
        )));
    }
    let kernel = SpineKernel::build(model, &query.psi)?;
    let powers = SegmentPowers::new(&kernel.segment_matrix(), query.radius);
    let rec = Recursion {
        model,
        kernel: &kernel,
        powers: &powers,
    };
    Ok(rec.biased_moment(f, query.radius)[query.x0])
}

struct Recursion<'a> {
    model: &'a Model,
    kernel: &'a SpineKernel,
    powers: &'a SegmentPowers,
}

impl Recursion<'_> {
    /// `y ↦ M^{k,ψ}_y[F / Π_leaves ψ]` with leaves at relative height at most
    /// `budget`. Dividing the leaf factors by ψ turns the ψ-biased moment
    /// back into the plain one.
    fn biased_moment(&self, f: &ProductFunctional, budget: u32) -> Vec<f64> {
        let n = self.kernel.type_count();
        let psi = self.kernel.psi();
        match f {
            ProductFunctional::Leaf(g) => (0..n)
                .map(|y| {
                    let mut s = 0.0;
                    for m in 0..=budget {
                        let b = self.powers.get(m);
                        for z in 0..n {
                            s += b[(y, z)] * g(m, z) / psi[z];
                        }
                    }
                    psi[y] * s
                })
                .collect(),
            ProductFunctional::Split { stem, blocks } => {
                let mut out = vec![0.0; n];
                for stem_len in 0..budget {
                    let inner_budget = budget - stem_len - 1;
                    let block_moments: Vec<Vec<f64>> =
                        blocks.iter().map(|b| self.biased_moment(b, inner_budget)).collect();
                    let inner: Vec<f64> = (0..n).map(|z| self.inner_sum(z, &block_moments)).collect();
                    let b = self.powers.get(stem_len);
                    for (x, slot) in out.iter_mut().enumerate() {
                        for z in 0..n {
                            let w = b[(x, z)];
                            if w != 0.0 {
                                *slot += psi[x] * w * stem(stem_len, z) / psi[z] * inner[z];
                            }
                        }
                    }
                }
                out
            }
        }
    }

    /// `E_z[Σ_{r_1 < … < r_p} Π_i M_{ξ_{r_i}}[F_i]]` over labelled broods.
    fn inner_sum(&self, z: usize, block_moments: &[Vec<f64>]) -> f64 {
        let p = block_moments.len();
        let mut total = 0.0;
        for atom in self.model.planar_atoms(z) {
            let kids = &atom.children;
            if kids.len() < p {
                continue;
            }
            // DP over children: ways[j] sums products for the first j blocks.
            let mut ways = vec![0.0; p + 1];
            ways[0] = 1.0;
            for &c in kids {
                for j in (1..=p).rev() {
                    ways[j] += ways[j - 1] * block_moments[j - 1][c];
                }
            }
            total += atom.prob * ways[p];
        }
        total
    }
}
