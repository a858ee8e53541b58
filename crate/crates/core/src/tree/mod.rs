//! Planar trees, their height encodings and the combinatorics built on them.

mod decompose;
mod enumerate;
mod planar;
mod shape;
mod vertex;

pub use decompose::{compose_first_branch, decompose_first_branch, FirstBranch};
pub use enumerate::{
    count_deficient_tuples, deficient_tuple_bound, enumerate_shapes, shape_count, ultrametric_shapes, ShapeIter,
};
pub use planar::{PlanarTree, SpannedSubtree};
pub use shape::{
    decode_heights, encode_heights, leaf_words, ContinuousShape, DiscreteShape, DistanceConvention, DistanceMatrix,
    Height, ShapeSplit, TreeShape,
};
pub use vertex::Vertex;
