//! Finite marked metric measure spaces: monomials, restriction, height,
//! lower mass, and the spaces attached to a marked tree.

mod convert;
mod monomial;
mod space;

pub use convert::{contour_space, generation_slice, tree_to_mmm};
pub use monomial::{
    deficient_decomposition, monomial, monomial_exact, permutations, symmetrized, DistanceFunctional, MonomialOptions,
    TupleDecomposition,
};
pub use space::{ContourMetric, FiniteMmmSpace, Metric};
