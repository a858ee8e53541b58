//! Finite rooted planar trees encoded as prefix-closed sets of words.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::Vertex;
use crate::error::{Error, Result};

/// A finite rooted planar tree.
///
/// Vertices are kept sorted in lexicographic order, which is the depth-first
/// preorder of the tree, alongside their out-degrees. Indices into that
/// order are used throughout as vertex handles.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PlanarTree {
    vertices: Vec<Vertex>,
    degree: Vec<u32>,
    parent: Vec<Option<usize>>,
    subtree_end: Vec<usize>,
    leaves: Vec<usize>,
}

impl PlanarTree {
    /// The tree `{∅}`.
    pub fn singleton() -> Self {
        Self::from_sorted_unchecked(vec![Vertex::root()])
    }

    /// The path `{∅, (1), (1,1), …}` with `length` edges.
    pub fn path(length: usize) -> Self {
        let vertices = (0..=length).map(|g| Vertex::new(vec![1; g])).collect();
        Self::from_sorted_unchecked(vertices)
    }

    /// Builds a tree from an arbitrary collection of words, checking that the
    /// set is prefix-closed and that the children of every vertex are labelled
    /// `1..=d`.
    pub fn from_vertices<I: IntoIterator<Item = Vertex>>(vertices: I) -> Result<Self> {
        let set: BTreeSet<Vertex> = vertices.into_iter().collect();
        if set.is_empty() {
            return Err(Error::InvalidTree("empty vertex set".into()));
        }
        for v in &set {
            if let Some(p) = v.parent() {
                if !set.contains(&p) {
                    return Err(Error::InvalidTree(format!("{v} is present but its parent {p} is not")));
                }
                let last = *v.word().last().unwrap();
                if last > 1 && !set.contains(&p.child(last - 1)) {
                    return Err(Error::InvalidTree(format!(
                        "{v} is present but its left sibling is not"
                    )));
                }
            }
        }
        Ok(Self::from_sorted_unchecked(set.into_iter().collect()))
    }

    /// Builds a tree from its out-degree sequence in depth-first preorder
    /// (the Łukasiewicz encoding).
    pub fn from_preorder_degrees(degrees: &[u32]) -> Result<Self> {
        if degrees.is_empty() {
            return Err(Error::InvalidTree("empty degree sequence".into()));
        }
        let mut vertices = Vec::with_capacity(degrees.len());
        // stack of (vertex, next child label, remaining children)
        let mut stack: Vec<(Vertex, u32, u32)> = Vec::new();
        for (i, &d) in degrees.iter().enumerate() {
            let v = if i == 0 {
                Vertex::root()
            } else {
                let top = stack
                    .last_mut()
                    .ok_or_else(|| Error::InvalidTree("degree sequence closes before its end".into()))?;
                let v = top.0.child(top.1);
                top.1 += 1;
                top.2 -= 1;
                v
            };
            while matches!(stack.last(), Some(&(_, _, 0))) {
                stack.pop();
            }
            vertices.push(v.clone());
            if d > 0 {
                stack.push((v, 1, d));
            }
        }
        if !stack.is_empty() {
            return Err(Error::InvalidTree("degree sequence ends with open vertices".into()));
        }
        Ok(Self::from_sorted_unchecked(vertices))
    }

    /// `vertices` must be sorted, prefix-closed and child-contiguous.
    pub(crate) fn from_sorted_unchecked(vertices: Vec<Vertex>) -> Self {
        let n = vertices.len();
        let mut degree = vec![0u32; n];
        let mut parent = vec![None; n];
        let mut subtree_end = vec![n; n];
        let mut stack: Vec<usize> = Vec::new();
        for i in 0..n {
            while let Some(&top) = stack.last() {
                if vertices[top].is_strict_ancestor_of(&vertices[i]) {
                    break;
                }
                subtree_end[top] = i;
                stack.pop();
            }
            if let Some(&top) = stack.last() {
                parent[i] = Some(top);
                degree[top] += 1;
            }
            stack.push(i);
        }
        let leaves = (0..n).filter(|&i| degree[i] == 0).collect();
        PlanarTree {
            vertices,
            degree,
            parent,
            subtree_end,
            leaves,
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &Vertex {
        &self.vertices[i]
    }

    pub fn degree(&self, i: usize) -> u32 {
        self.degree[i]
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degree
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        self.parent[i]
    }

    pub fn generation(&self, i: usize) -> usize {
        self.vertices[i].generation()
    }

    /// One past the last preorder index of the subtree rooted at `i`.
    pub fn subtree_end(&self, i: usize) -> usize {
        self.subtree_end[i]
    }

    pub fn index_of(&self, v: &Vertex) -> Option<usize> {
        self.vertices.binary_search(v).ok()
    }

    pub fn contains(&self, v: &Vertex) -> bool {
        self.index_of(v).is_some()
    }

    /// `d_v(τ)`; zero for vertices outside the tree.
    pub fn degree_of(&self, v: &Vertex) -> u32 {
        self.index_of(v).map_or(0, |i| self.degree[i])
    }

    /// Children of `i`, in planar order.
    pub fn children(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let mut next = i + 1;
        let end = self.subtree_end[i];
        std::iter::from_fn(move || {
            if next >= end {
                return None;
            }
            let c = next;
            next = self.subtree_end[c];
            Some(c)
        })
    }

    /// Indices of the leaves, in lexicographic order.
    pub fn leaves(&self) -> &[usize] {
        &self.leaves
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    pub fn leaf_vertices(&self) -> Vec<Vertex> {
        self.leaves.iter().map(|&i| self.vertices[i].clone()).collect()
    }

    /// Indices of the vertices with out-degree at least two.
    pub fn branch_points(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.degree[i] >= 2).collect()
    }

    /// Maximal generation.
    pub fn height(&self) -> usize {
        self.vertices.iter().map(Vertex::generation).max().unwrap_or(0)
    }

    /// Indices of the vertices at generation `g`, in planar order.
    pub fn generation_indices(&self, g: usize) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.vertices[i].generation() == g)
            .collect()
    }

    /// `|L(τ)| = 1 + Σ_{v ∈ B(τ)} (d_v − 1)`.
    pub fn leaf_count_identity_holds(&self) -> bool {
        let excess: u64 = self
            .branch_points()
            .iter()
            .map(|&i| u64::from(self.degree[i] - 1))
            .sum();
        self.leaf_count() as u64 == 1 + excess
    }

    /// Graph distance between two vertices, by index.
    pub fn graph_distance(&self, i: usize, j: usize) -> usize {
        let (a, b) = (&self.vertices[i], &self.vertices[j]);
        a.generation() + b.generation() - 2 * a.mrca_generation(b)
    }

    /// The subtree spanned by `vertices`, relabelled into a planar tree.
    ///
    /// The relabelling keeps every vertex's degree within the spanned set and
    /// the relative order of its children. `origin[i]` is the index, in
    /// `self`, of the `i`-th vertex of the relabelled tree. `full` is false
    /// when the spanned tree has fewer leaves than `vertices.len()`.
    pub fn subtree_spanned(&self, vertices: &[Vertex]) -> Result<SpannedSubtree> {
        let mut set = BTreeSet::new();
        for v in vertices {
            if !self.contains(v) {
                return Err(Error::VertexNotInTree(v.to_string()));
            }
            for g in 0..=v.generation() {
                set.insert(v.ancestor_at(g));
            }
        }
        let mut relabel: HashMap<Vertex, Vertex> = HashMap::with_capacity(set.len());
        let mut next_child: HashMap<Vertex, u32> = HashMap::new();
        let mut new_vertices = Vec::with_capacity(set.len());
        let mut origin = Vec::with_capacity(set.len());
        for v in &set {
            let new = match v.parent() {
                None => Vertex::root(),
                Some(p) => {
                    let counter = next_child.entry(p.clone()).or_insert(0);
                    *counter += 1;
                    relabel[&p].child(*counter)
                }
            };
            relabel.insert(v.clone(), new.clone());
            new_vertices.push(new);
            origin.push(self.index_of(v).expect("ancestors of tree vertices are in the tree"));
        }
        // Relabelling preserves lexicographic order, so the list is sorted.
        let tree = PlanarTree::from_sorted_unchecked(new_vertices);
        let full = tree.leaf_count() == vertices.len();
        Ok(SpannedSubtree { tree, origin, full })
    }

    /// Canonical parenthesised form: each vertex is `(` followed by its
    /// children and `)`. The cherry is `(()())`.
    pub fn to_canonical_string(&self) -> String {
        let mut out = String::with_capacity(2 * self.len());
        let mut stack: Vec<usize> = Vec::new();
        for i in 0..self.len() {
            while let Some(&top) = stack.last() {
                if self.subtree_end[top] > i {
                    break;
                }
                out.push(')');
                stack.pop();
            }
            out.push('(');
            stack.push(i);
        }
        for _ in stack {
            out.push(')');
        }
        out
    }

    pub fn parse_canonical(s: &str) -> Result<Self> {
        let mut vertices = Vec::new();
        let mut stack: Vec<(Vertex, u32)> = Vec::new();
        let mut closed_root = false;
        for (pos, ch) in s.chars().enumerate() {
            match ch {
                '(' => {
                    if closed_root {
                        return Err(Error::Parse(format!("trailing vertex at offset {pos}")));
                    }
                    let v = match stack.last_mut() {
                        None if vertices.is_empty() => Vertex::root(),
                        None => unreachable!(),
                        Some(top) => {
                            top.1 += 1;
                            top.0.child(top.1)
                        }
                    };
                    vertices.push(v.clone());
                    stack.push((v, 0));
                }
                ')' => {
                    if stack.pop().is_none() {
                        return Err(Error::Parse(format!("unbalanced ')' at offset {pos}")));
                    }
                    if stack.is_empty() {
                        closed_root = true;
                    }
                }
                c if c.is_whitespace() => {}
                c => return Err(Error::Parse(format!("unexpected character {c:?}"))),
            }
        }
        if !closed_root || !stack.is_empty() {
            return Err(Error::Parse("unbalanced parentheses".into()));
        }
        Ok(Self::from_sorted_unchecked(vertices))
    }
}

/// Result of [`PlanarTree::subtree_spanned`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpannedSubtree {
    pub tree: PlanarTree,
    pub origin: Vec<usize>,
    pub full: bool,
}

impl fmt::Debug for PlanarTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PlanarTree{}", self.to_canonical_string())
    }
}

impl fmt::Display for PlanarTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_canonical_string())
    }
}

impl Serialize for PlanarTree {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_canonical_string())
    }
}

impl<'de> Deserialize<'de> for PlanarTree {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        PlanarTree::parse_canonical(&s).map_err(serde::de::Error::custom)
    }
}
