//! Spaces built from marked trees and from sampled contour paths.

use super::FiniteMmmSpace;
use crate::error::{Error, Result};
use crate::process::MarkedTree;
use crate::tree::PlanarTree;

/// Depth sequence of the Euler tour and the first visit of each vertex.
fn euler_tour(tree: &PlanarTree, edge_scale: f64) -> (Vec<f64>, Vec<usize>) {
    let depth = |v: usize| tree.generation(v) as f64 * edge_scale;
    let children: Vec<Vec<usize>> = (0..tree.len()).map(|v| tree.children(v).collect()).collect();
    let mut path = vec![0.0];
    let mut first = vec![0; tree.len()];
    // (vertex, number of children already visited)
    let mut stack = vec![(0usize, 0usize)];
    while let Some(top) = stack.last_mut() {
        let (v, next) = *top;
        if let Some(&c) = children[v].get(next) {
            top.1 += 1;
            first[c] = path.len();
            path.push(depth(c));
            stack.push((c, 0));
        } else {
            stack.pop();
            if let Some(&(parent, _)) = stack.last() {
                path.push(depth(parent));
            }
        }
    }
    (path, first)
}

/// Every vertex as a point of mass `mass_scale`, with graph distances
/// multiplied by `edge_scale`. Rooted at the ancestor.
pub fn tree_to_mmm(tree: &MarkedTree, edge_scale: f64, mass_scale: f64) -> FiniteMmmSpace {
    let (path, first) = euler_tour(&tree.tree, edge_scale);
    FiniteMmmSpace::from_path(path, first, 0, vec![mass_scale; tree.tree.len()], tree.marks.clone())
}

/// Generation `n` as points of mass `mass_scale`, plus the ancestor as a
/// massless root. An empty generation leaves only the root.
pub fn generation_slice(tree: &MarkedTree, n: usize, edge_scale: f64, mass_scale: f64) -> FiniteMmmSpace {
    let (path, first) = euler_tour(&tree.tree, edge_scale);
    let mut points = vec![0];
    if n > 0 {
        points.extend(tree.tree.generation_indices(n));
    }
    let mut mass = vec![mass_scale; points.len()];
    mass[0] = if n == 0 { mass_scale } else { 0.0 };
    FiniteMmmSpace::from_path(
        path,
        points.iter().map(|&i| first[i]).collect(),
        0,
        mass,
        points.iter().map(|&i| tree.marks[i]).collect(),
    )
}

/// The tree coded by a path sampled on a uniform grid, rooted at the first
/// sample. Grid points at distance zero are merged, each carrying
/// `mass_scale` per grid point; marks are all zero.
pub fn contour_space(path: &[f64], mass_scale: f64) -> Result<FiniteMmmSpace> {
    if path.is_empty() || path[0] != 0.0 || *path.last().unwrap() != 0.0 {
        return Err(Error::InvalidTree("a contour path starts and ends at zero".into()));
    }
    if path.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::InvalidTree("a contour path is finite and nonnegative".into()));
    }
    // u < v are identified iff f(u) = f(v) = min_{[u,v]} f. The stack holds
    // increasing values, each with the class of its latest occurrence.
    let mut stack: Vec<(f64, usize)> = Vec::new();
    let mut positions = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for (i, &x) in path.iter().enumerate() {
        while stack.last().is_some_and(|&(y, _)| y > x) {
            stack.pop();
        }
        match stack.last() {
            Some(&(y, class)) if y == x => counts[class] += 1,
            _ => {
                stack.push((x, positions.len()));
                positions.push(i);
                counts.push(1);
            }
        }
    }
    let mass = counts.iter().map(|&c| c as f64 * mass_scale).collect();
    let marks = vec![0; positions.len()];
    Ok(FiniteMmmSpace::from_path(path.to_vec(), positions, 0, mass, marks))
}
