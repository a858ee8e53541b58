//! Exact expectations under the tree-indexed spine chain.
//!
//! A shape with `k` leaves has at most `2k − 1` vertices that are not of
//! degree one: the root, the branch points and the leaves. Between them the
//! chain runs along a branch, so its weight is a power of a single matrix.
//! The expectation is a finite sum over the types of those special vertices.

use nalgebra::DMatrix;

use super::{Functional, ShapeFunctional, SpineKernel};
use crate::error::{Error, Result};
use crate::tree::DiscreteShape;

/// Powers `A^0, …, A^max` of a segment matrix, computed once.
#[derive(Clone, Debug)]
pub struct SegmentPowers {
    powers: Vec<DMatrix<f64>>,
}

impl SegmentPowers {
    pub fn new(step: &DMatrix<f64>, max: u32) -> Self {
        let n = step.nrows();
        let mut powers = Vec::with_capacity(max as usize + 1);
        powers.push(DMatrix::identity(n, n));
        for e in 1..=max as usize {
            let next = &powers[e - 1] * step;
            powers.push(next);
        }
        SegmentPowers { powers }
    }

    pub fn max_exponent(&self) -> u32 {
        self.powers.len() as u32 - 1
    }

    pub fn get(&self, e: u32) -> &DMatrix<f64> {
        &self.powers[e as usize]
    }
}

#[derive(Clone, Debug)]
enum NodeKind {
    Leaf(usize),
    Branch {
        children: Vec<usize>,
        /// Indices `i` with `v_i ∧ v_{i+1}` equal to this vertex.
        slots: Vec<usize>,
    },
}

#[derive(Clone, Debug)]
struct Node {
    height: u32,
    kind: NodeKind,
}

/// The root, branch points and leaves of a shape, in preorder.
#[derive(Clone, Debug)]
struct Skeleton {
    nodes: Vec<Node>,
}

impl Skeleton {
    fn new(shape: &DiscreteShape) -> Self {
        let mut nodes = Vec::new();
        build(shape, 0, shape.k(), &mut nodes);
        Skeleton { nodes }
    }
}

fn build(shape: &DiscreteShape, lo: usize, hi: usize, nodes: &mut Vec<Node>) -> usize {
    let id = nodes.len();
    if hi - lo == 1 {
        nodes.push(Node {
            height: shape.leaves()[lo],
            kind: NodeKind::Leaf(lo),
        });
        return id;
    }
    let b = &shape.branches()[lo..hi - 1];
    let m = *b.iter().min().unwrap();
    let slots: Vec<usize> = (lo..hi - 1).filter(|&i| shape.branches()[i] == m).collect();
    nodes.push(Node {
        height: m,
        kind: NodeKind::Branch {
            children: Vec::new(),
            slots: slots.clone(),
        },
    });
    let mut children = Vec::with_capacity(slots.len() + 1);
    let mut start = lo;
    for &s in slots.iter().chain(std::iter::once(&(hi - 1))) {
        children.push(build(shape, start, s + 1, nodes));
        start = s + 1;
    }
    if let NodeKind::Branch { children: c, .. } = &mut nodes[id].kind {
        *c = children;
    }
    id
}

/// Evaluates `ψ(x)·Q_{x,τ}[Δ_k F]` (with bias) or `Q_{x,τ}[F]` (without)
/// for shapes up to a fixed height, sharing one table of matrix powers.
#[derive(Clone, Debug)]
pub struct ShapeSum<'k> {
    kernel: &'k SpineKernel,
    powers: SegmentPowers,
    with_bias: bool,
}

impl<'k> ShapeSum<'k> {
    pub fn new(kernel: &'k SpineKernel, max_height: u32, with_bias: bool) -> Self {
        let step = if with_bias {
            kernel.segment_matrix()
        } else {
            kernel.transition_matrix()
        };
        ShapeSum {
            kernel,
            powers: SegmentPowers::new(&step, max_height),
            with_bias,
        }
    }

    pub fn kernel(&self) -> &SpineKernel {
        self.kernel
    }

    pub fn max_height(&self) -> u32 {
        self.powers.max_exponent()
    }

    /// `Q_{x0,τ}[Δ F]` (or `Q_{x0,τ}[F]` without bias).
    ///
    /// Panics if the shape is taller than the power table.
    pub fn expectation(&self, x0: usize, shape: &DiscreteShape, f: &dyn ShapeFunctional) -> f64 {
        assert!(
            shape.height() <= self.max_height(),
            "shape height {} exceeds the cached powers ({})",
            shape.height(),
            self.max_height()
        );
        let n = self.kernel.type_count();
        let k = shape.k();
        let sk = Skeleton::new(shape);
        let top = &sk.nodes[0];
        let root_is_top = top.height == 0;

        // Contracted branch tensors, indexed by node.
        let tensors: Vec<Option<Vec<f64>>> = sk
            .nodes
            .iter()
            .map(|node| match &node.kind {
                NodeKind::Leaf(_) => None,
                NodeKind::Branch { children, .. } => {
                    let lengths: Vec<u32> = children.iter().map(|&c| sk.nodes[c].height - node.height - 1).collect();
                    Some(self.branch_tensor(&lengths))
                }
            })
            .collect();

        let leaf_weight: Vec<f64> = (0..n)
            .map(|x| {
                if self.with_bias {
                    1.0 / self.kernel.psi()[x]
                } else {
                    1.0
                }
            })
            .collect();

        // Node types; node 0 is pinned to x0 when it sits at the root.
        let free: Vec<usize> = (usize::from(root_is_top)..sk.nodes.len()).collect();
        let mut types = vec![x0; sk.nodes.len()];
        let mut leaf_types = vec![0; k];
        let mut branch_types = vec![0; k.saturating_sub(1)];
        let total_assignments = n.pow(free.len() as u32);
        let mut total = 0.0;
        for code in 0..total_assignments {
            let mut c = code;
            for &i in free.iter().rev() {
                types[i] = c % n;
                c /= n;
            }
            let mut weight = if root_is_top {
                1.0
            } else {
                self.powers.get(top.height)[(x0, types[0])]
            };
            for (i, node) in sk.nodes.iter().enumerate() {
                if weight == 0.0 {
                    break;
                }
                match &node.kind {
                    NodeKind::Leaf(leaf) => {
                        weight *= leaf_weight[types[i]];
                        leaf_types[*leaf] = types[i];
                    }
                    NodeKind::Branch { children, slots } => {
                        let t = tensors[i].as_ref().unwrap();
                        let mut flat = types[i];
                        for &c in children {
                            flat = flat * n + types[c];
                        }
                        weight *= t[flat];
                        for &s in slots {
                            branch_types[s] = types[i];
                        }
                    }
                }
            }
            if weight != 0.0 {
                total += weight * f.eval(shape, &leaf_types, &branch_types);
            }
        }
        total
    }

    /// `G[x, t_1, …, t_d] = Σ_y W_d(x)[y] Π_i A^{len_i}[y_i, t_i]`, where
    /// `W_d` is the branch-point factor of the chain (times the bias).
    fn branch_tensor(&self, lengths: &[u32]) -> Vec<f64> {
        let n = self.kernel.type_count();
        let d = lengths.len();
        let mut tensor = Vec::with_capacity(n.pow(d as u32 + 1));
        for x in 0..n {
            if self.with_bias {
                let scale = 1.0 / self.kernel.psi()[x];
                if d <= self.kernel.max_degree() {
                    tensor.extend(self.kernel.planar_weight(d, x).iter().map(|w| w * scale));
                } else {
                    tensor.extend(std::iter::repeat_n(0.0, n.pow(d as u32)));
                }
            } else if d <= self.kernel.max_degree() {
                tensor.extend(self.kernel.planar_chi(d, x));
            } else {
                tensor.extend(std::iter::repeat_n(0.0, n.pow(d as u32)));
            }
        }
        for (axis, &len) in lengths.iter().enumerate() {
            tensor = contract_axis(&tensor, n, d + 1, axis + 1, self.powers.get(len));
        }
        tensor
    }
}

/// Replaces coordinate `axis` of a flat `[n; rank]` tensor `T` by
/// `Σ_y T[.., y, ..] A[y, t]`.
fn contract_axis(tensor: &[f64], n: usize, rank: usize, axis: usize, a: &DMatrix<f64>) -> Vec<f64> {
    let inner = n.pow((rank - 1 - axis) as u32);
    let outer = tensor.len() / (n * inner);
    let mut out = vec![0.0; tensor.len()];
    for o in 0..outer {
        for y in 0..n {
            let src = &tensor[(o * n + y) * inner..(o * n + y + 1) * inner];
            for t in 0..n {
                let coef = a[(y, t)];
                if coef == 0.0 {
                    continue;
                }
                let dst = &mut out[(o * n + t) * inner..(o * n + t + 1) * inner];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += coef * s;
                }
            }
        }
    }
    out
}

/// `Q_{x0,τ}[Δ_k F]` (or `Q_{x0,τ}[F]`) for a single shape.
pub fn q_expectation(
    kernel: &SpineKernel,
    x0: usize,
    shape: &DiscreteShape,
    f: &Functional,
    with_bias: bool,
) -> Result<f64> {
    let Functional::Shape(f) = f else {
        return Err(Error::InteriorMarks);
    };
    Ok(ShapeSum::new(kernel, shape.height(), with_bias).expectation(x0, shape, f.as_ref()))
}

/// Right side of the many-to-one formula at a fixed time, for a path
/// functional: `ψ(x0) Σ_{y_0 = x0, …, y_n} Π_m λ(y_m) P(y_m, y_{m+1}) F(y)`.
pub fn spine_path_sum(kernel: &SpineKernel, x0: usize, n: usize, f: impl Fn(&[usize]) -> f64) -> f64 {
    let b = kernel.segment_matrix();
    let t = kernel.type_count();
    let mut path = vec![x0; n + 1];
    let mut total = 0.0;
    for code in 0..t.pow(n as u32) {
        let mut c = code;
        for slot in path[1..].iter_mut().rev() {
            *slot = c % t;
            c /= t;
        }
        let w: f64 = path.windows(2).map(|s| b[(s[0], s[1])]).product();
        if w != 0.0 {
            total += w * f(&path);
        }
    }
    kernel.psi()[x0] * total
}

/// Many-to-one for a function of the endpoint, by matrix powers:
/// `E_{x0}[Σ_{|v|=n} f(X_v)] = ψ(x0) (Bⁿ (f/ψ))(x0)`.
pub fn many_to_one(kernel: &SpineKernel, x0: usize, n: u32, f: &[f64]) -> f64 {
    let powers = SegmentPowers::new(&kernel.segment_matrix(), n);
    let bn = powers.get(n);
    let psi = kernel.psi();
    psi[x0] * (0..f.len()).map(|y| bn[(x0, y)] * f[y] / psi[y]).sum::<f64>()
}
