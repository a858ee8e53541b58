//! ψ-biased spine quantities and exact expectations under the
//! tree-indexed spine chain.

mod functional;
mod kernel;
mod shape_sum;

pub use functional::{shape_marks, Functional, ShapeFunctional};
pub use kernel::{build_kernel, delta_k, elementary_symmetric, Psi, SpineKernel};
pub use shape_sum::{many_to_one, q_expectation, spine_path_sum, SegmentPowers, ShapeSum};
