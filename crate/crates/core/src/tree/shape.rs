//! Leaf-height / branch-height encoding of planar trees.
//!
//! A tree with leaves `v_1 < … < v_k` is encoded by `ℓ_i = |v_i|` and
//! `b_i = |v_i ∧ v_{i+1}|`. Valid encodings are exactly the pairs with
//! `b_i < min(ℓ_i, ℓ_{i+1})`, and the same constraint defines continuous
//! trees when the heights are real.

use std::fmt::Debug;

use serde::{Deserialize, Serialize};

use super::{PlanarTree, Vertex};
use crate::error::{Error, Result};

/// Scalar type for tree heights: `u32` for discrete trees, `f64` for
/// continuous ones.
pub trait Height: Copy + PartialOrd + Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn to_f64(self) -> f64;
}

impl Height for u32 {
    fn zero() -> Self {
        0
    }
    fn to_f64(self) -> f64 {
        f64::from(self)
    }
}

impl Height for f64 {
    fn zero() -> Self {
        0.0
    }
    fn to_f64(self) -> f64 {
        self
    }
}

/// Heights of the `k` leaves and of the `k − 1` most recent common ancestors
/// of consecutive leaves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawShape<T>", bound(deserialize = "T: Height + Deserialize<'de>"))]
pub struct TreeShape<T> {
    #[serde(rename = "l")]
    leaves: Vec<T>,
    #[serde(rename = "b")]
    branches: Vec<T>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawShape<T> {
    l: Vec<T>,
    b: Vec<T>,
}

impl<T: Height> TryFrom<RawShape<T>> for TreeShape<T> {
    type Error = Error;

    fn try_from(raw: RawShape<T>) -> Result<Self> {
        TreeShape::new(raw.l, raw.b)
    }
}

pub type DiscreteShape = TreeShape<u32>;
pub type ContinuousShape = TreeShape<f64>;

impl<T: Height> TreeShape<T> {
    pub fn new(leaves: Vec<T>, branches: Vec<T>) -> Result<Self> {
        let s = TreeShape { leaves, branches };
        s.validate()?;
        Ok(s)
    }

    pub(crate) fn new_unchecked(leaves: Vec<T>, branches: Vec<T>) -> Self {
        TreeShape { leaves, branches }
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.leaves.len();
        if k == 0 {
            return Err(Error::InvalidShape("a shape needs at least one leaf".into()));
        }
        if self.branches.len() != k - 1 {
            return Err(Error::InvalidShape(format!(
                "{k} leaves need {} branch heights, got {}",
                k - 1,
                self.branches.len()
            )));
        }
        for &x in self.leaves.iter().chain(&self.branches) {
            // Also rejects NaN.
            if x.partial_cmp(&T::zero()).is_none_or(|o| o.is_lt()) {
                return Err(Error::InvalidShape(format!("negative height {x:?}")));
            }
        }
        for i in 0..k - 1 {
            let b = self.branches[i];
            if !(b < self.leaves[i] && b < self.leaves[i + 1]) {
                return Err(Error::InvalidShape(format!(
                    "b_{} = {b:?} is not below min(ℓ_{}, ℓ_{}) = min({:?}, {:?})",
                    i + 1,
                    i + 1,
                    i + 2,
                    self.leaves[i],
                    self.leaves[i + 1]
                )));
            }
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.leaves.len()
    }

    pub fn leaves(&self) -> &[T] {
        &self.leaves
    }

    pub fn branches(&self) -> &[T] {
        &self.branches
    }

    pub fn height(&self) -> T {
        let mut h = self.leaves[0];
        for &l in &self.leaves[1..] {
            if l > h {
                h = l;
            }
        }
        h
    }

    /// `min{b_i, …, b_{j−1}}` for leaf indices `i < j` (0-based).
    pub fn min_branch_between(&self, i: usize, j: usize) -> T {
        debug_assert!(i < j);
        let mut m = self.branches[i];
        for &b in &self.branches[i + 1..j] {
            if b < m {
                m = b;
            }
        }
        m
    }

    /// Whether all leaves sit at the same height.
    pub fn is_ultrametric(&self) -> bool {
        self.leaves.iter().all(|&l| l == self.leaves[0])
    }

    /// Distance matrix between the root (row 0) and the leaves.
    pub fn distance_matrix(&self, convention: DistanceConvention) -> DistanceMatrix {
        let k = self.k();
        let mut d = DistanceMatrix::zeros(k);
        for j in 1..=k {
            d.set(0, j, self.leaves[j - 1].to_f64());
        }
        let factor = match convention {
            DistanceConvention::Graph => 2.0,
            DistanceConvention::Printed => 1.0,
        };
        for i in 1..=k {
            for j in i + 1..=k {
                let m = self.min_branch_between(i - 1, j - 1).to_f64();
                d.set(
                    i,
                    j,
                    self.leaves[i - 1].to_f64() + self.leaves[j - 1].to_f64() - factor * m,
                );
            }
        }
        d
    }

    /// Splits the shape at its first branch point.
    ///
    /// Returns the height of the first branch point, the block sizes of the
    /// leaf partition, and the shape of each subtree hanging from it, with
    /// heights measured from the subtree roots (one generation below the
    /// branch point). Subtree heights are `height − stem − unit`, where `unit`
    /// is one generation in the discrete case.
    pub fn split_first_branch(&self, unit: T) -> Result<ShapeSplit<T>>
    where
        T: std::ops::Sub<Output = T>,
    {
        let k = self.k();
        if k < 2 {
            return Err(Error::NoBranchPoint);
        }
        let stem = self.min_branch_between(0, k - 1);
        let mut blocks = Vec::new();
        let mut start = 0;
        for i in 0..k - 1 {
            if self.branches[i] == stem {
                blocks.push(start..i + 1);
                start = i + 1;
            }
        }
        blocks.push(start..k);
        let subshapes = blocks
            .iter()
            .map(|r| {
                let leaves = self.leaves[r.clone()].iter().map(|&l| l - stem - unit).collect();
                let branches = self.branches[r.start..r.end - 1]
                    .iter()
                    .map(|&b| b - stem - unit)
                    .collect();
                TreeShape::new_unchecked(leaves, branches)
            })
            .collect();
        let first_branch_index = self.branches.iter().position(|&b| b == stem).unwrap();
        Ok(ShapeSplit {
            stem,
            first_branch_index,
            blocks,
            subshapes,
        })
    }

    pub fn map<U: Height>(&self, f: impl Fn(T) -> U) -> TreeShape<U> {
        TreeShape {
            leaves: self.leaves.iter().map(|&x| f(x)).collect(),
            branches: self.branches.iter().map(|&x| f(x)).collect(),
        }
    }
}

impl DiscreteShape {
    /// Rescales a discrete shape into a continuous one.
    pub fn scaled(&self, factor: f64) -> ContinuousShape {
        self.map(|x| f64::from(x) * factor)
    }
}

/// Output of [`TreeShape::split_first_branch`].
#[derive(Clone, Debug, PartialEq)]
pub struct ShapeSplit<T> {
    pub stem: T,
    /// Index `i` of the first `b_i` attaining the stem height; the branch point
    /// is `v_i ∧ v_{i+1}`.
    pub first_branch_index: usize,
    pub blocks: Vec<std::ops::Range<usize>>,
    pub subshapes: Vec<TreeShape<T>>,
}

/// Which formula to use for leaf-to-leaf distances.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceConvention {
    /// `ℓ_i + ℓ_j − 2 min{b_i, …, b_{j−1}}`, the graph distance in the tree.
    #[default]
    Graph,
    /// `ℓ_i + ℓ_j − min{b_i, …, b_{j−1}}`.
    Printed,
}

/// A `(k+1) × (k+1)` symmetric matrix of distances; index 0 is the root.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    size: usize,
    entries: Vec<f64>,
}

impl DistanceMatrix {
    /// All-zero matrix for `k` points plus the root.
    pub fn zeros(k: usize) -> Self {
        let size = k + 1;
        DistanceMatrix {
            size,
            entries: vec![0.0; size * size],
        }
    }

    pub fn from_fn(k: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut d = Self::zeros(k);
        for i in 0..=k {
            for j in i + 1..=k {
                d.set(i, j, f(i, j));
            }
        }
        d
    }

    /// Number of non-root points.
    pub fn k(&self) -> usize {
        self.size - 1
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.size + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.entries[i * self.size + j] = value;
        self.entries[j * self.size + i] = value;
    }

    pub fn row_major(&self) -> &[f64] {
        &self.entries
    }

    /// Relabels the points: entry `(i, j)` of the result is entry
    /// `(σ_i, σ_j)` of `self`, with `σ_0 = 0`. `perm` holds `σ_1..σ_k`
    /// as 1-based indices.
    pub fn permuted(&self, perm: &[usize]) -> DistanceMatrix {
        let k = self.k();
        debug_assert_eq!(perm.len(), k);
        let sigma = |i: usize| if i == 0 { 0 } else { perm[i - 1] };
        DistanceMatrix::from_fn(k, |i, j| self.get(sigma(i), sigma(j)))
    }

    /// Checks zero diagonal, symmetry, nonnegativity and the triangle
    /// inequality, up to `tol`.
    pub fn is_valid(&self, tol: f64) -> bool {
        let n = self.size;
        for i in 0..n {
            if self.get(i, i).abs() > tol {
                return false;
            }
            for j in 0..n {
                let d = self.get(i, j);
                if d < -tol || (d - self.get(j, i)).abs() > tol {
                    return false;
                }
                for p in 0..n {
                    if d > self.get(i, p) + self.get(p, j) + tol {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Whether all root distances are at most `radius`.
    pub fn within_radius(&self, radius: f64) -> bool {
        (1..self.size).all(|j| self.get(0, j) <= radius)
    }
}

/// Builds the planar tree encoded by a discrete shape.
///
/// Starts from the path to `v_1 = (1, …, 1)` and, for each `i`, grafts a
/// branch of length `ℓ_{i+1} − b_i` at the right-most vertex of height `b_i`.
pub fn decode_heights(shape: &DiscreteShape) -> Result<PlanarTree> {
    shape.validate()?;
    let leaves = leaf_words(shape);
    let mut vertices = Vec::new();
    for (i, leaf) in leaves.iter().enumerate() {
        // Vertices at generation <= b_{i-1} are shared with the previous leaf.
        let from = if i == 0 {
            0
        } else {
            shape.branches()[i - 1] as usize + 1
        };
        for g in from..=leaf.generation() {
            vertices.push(leaf.ancestor_at(g));
        }
    }
    vertices.sort();
    Ok(PlanarTree::from_sorted_unchecked(vertices))
}

/// The leaf words `v_1 < … < v_k` of the tree encoded by `shape`.
pub fn leaf_words(shape: &DiscreteShape) -> Vec<Vertex> {
    let mut out: Vec<Vertex> = Vec::with_capacity(shape.k());
    out.push(Vertex::new(vec![1; shape.leaves()[0] as usize]));
    for i in 0..shape.k() - 1 {
        let b = shape.branches()[i] as usize;
        let l = shape.leaves()[i + 1] as usize;
        let prev = out[i].word();
        let mut w = prev[..b].to_vec();
        w.push(prev[b] + 1);
        w.resize(l, 1);
        out.push(Vertex::new(w));
    }
    out
}

/// Reads off `(ℓ, b)` from a planar tree.
pub fn encode_heights(tree: &PlanarTree) -> DiscreteShape {
    let leaves: Vec<&Vertex> = tree.leaves().iter().map(|&i| tree.vertex(i)).collect();
    let l = leaves.iter().map(|v| v.generation() as u32).collect();
    let b = leaves.windows(2).map(|w| w[0].mrca_generation(w[1]) as u32).collect();
    TreeShape::new_unchecked(l, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(l: &[u32], b: &[u32]) -> DiscreteShape {
        TreeShape::new(l.to_vec(), b.to_vec()).unwrap()
    }

    #[test]
    fn rejects_invalid_shapes() {
        assert!(TreeShape::<u32>::new(vec![2, 2], vec![2]).is_err());
        assert!(TreeShape::<u32>::new(vec![2, 1], vec![1]).is_err());
        assert!(TreeShape::<u32>::new(vec![2, 2], vec![]).is_err());
        assert!(TreeShape::<u32>::new(vec![], vec![]).is_err());
        assert!(TreeShape::<f64>::new(vec![-1.0], vec![]).is_err());
        assert!(TreeShape::<f64>::new(vec![f64::NAN], vec![]).is_err());
        assert!(decode_heights(&TreeShape::new_unchecked(vec![3, 4], vec![3])).is_err());
    }

    #[test]
    fn decode_single_branch_and_cherry() {
        assert_eq!(decode_heights(&shape(&[1], &[])).unwrap(), PlanarTree::path(1));
        assert_eq!(decode_heights(&shape(&[0], &[])).unwrap(), PlanarTree::singleton());
        let t = decode_heights(&shape(&[2, 2], &[0])).unwrap();
        let expected: Vec<Vertex> = [&[][..], &[1], &[1, 1], &[2], &[2, 1]]
            .iter()
            .map(|w| Vertex::new(w.to_vec()))
            .collect();
        assert_eq!(t.vertices(), expected.as_slice());
        assert_eq!(t.branch_points(), vec![0]);
    }

    #[test]
    fn decode_then_encode_mixed_shape() {
        let s = shape(&[3, 4, 2], &[1, 0]);
        let t = decode_heights(&s).unwrap();
        let gens: Vec<usize> = t.branch_points().iter().map(|&i| t.generation(i)).collect();
        assert_eq!(gens, vec![0, 1]);
        assert_eq!(encode_heights(&t), s);
    }

    #[test]
    fn encode_path() {
        assert_eq!(encode_heights(&PlanarTree::path(3)), shape(&[3], &[]));
    }

    #[test]
    fn distance_matrix_both_conventions() {
        let s = shape(&[3, 4], &[1]);
        let d = s.distance_matrix(DistanceConvention::Graph);
        assert_eq!((d.get(0, 1), d.get(0, 2), d.get(1, 2)), (3.0, 4.0, 5.0));
        assert!(d.is_valid(0.0));
        let p = s.distance_matrix(DistanceConvention::Printed);
        assert_eq!(p.get(1, 2), 6.0);
        let u = shape(&[5, 5], &[2]).distance_matrix(DistanceConvention::Graph);
        assert_eq!(u.get(1, 2), 2.0 * (5.0 - 2.0));
    }

    #[test]
    fn permuted_distance_matrix() {
        let d = shape(&[1, 2, 3], &[0, 1]).distance_matrix(DistanceConvention::Graph);
        let p = d.permuted(&[3, 1, 2]);
        assert_eq!(p.get(0, 1), 3.0);
        assert_eq!(p.get(1, 2), d.get(3, 1));
        assert_eq!(p.get(2, 3), d.get(1, 2));
    }

    #[test]
    fn shape_level_split() {
        // first branch at height 1, blocks {1,2},{3}
        let s = shape(&[3, 4, 2], &[2, 1]);
        let split = s.split_first_branch(1).unwrap();
        assert_eq!(split.stem, 1);
        assert_eq!(split.first_branch_index, 1);
        assert_eq!(split.blocks, vec![0..2, 2..3]);
        assert_eq!(split.subshapes, vec![shape(&[1, 2], &[0]), shape(&[0], &[])]);
        assert!(shape(&[2], &[]).split_first_branch(1).is_err());
    }

    #[test]
    fn json_form() {
        let s = shape(&[3, 4], &[1]);
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, r#"{"l":[3,4],"b":[1]}"#);
        let back: DiscreteShape = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<DiscreteShape>(r#"{"l":[1,1],"b":[1]}"#).is_err());
        assert!(serde_json::from_str::<DiscreteShape>(r#"{"l":[1],"b":[],"x":0}"#).is_err());
    }
}
