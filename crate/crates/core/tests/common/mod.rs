//! Shared fixtures for the integration tests.
#![allow(dead_code)]

use treemoments::process::Model;
use treemoments::tree::PlanarTree;

/// Critical, irreducible, with `h_B = 2 h_A` and broods of up to 3.
pub fn asymmetric_model() -> Model {
    Model::from_named(
        &["A", "B"],
        &[
            &[(0.5, &[]), (0.25, &["A", "B"]), (0.25, &["A"])],
            &[(0.5, &["A", "A", "B"]), (0.5, &[])],
        ],
    )
    .unwrap()
}

pub fn acceptance_models() -> Vec<(&'static str, Model)> {
    vec![
        ("binary GW", Model::binary_galton_watson()),
        ("2-type symmetric", Model::symmetric_two_type()),
    ]
}

/// Every planar tree with at most `max_leaves` leaves and height at most
/// `max_height`, built from nested parentheses independently of the
/// height encoding. Returns `(tree, leaf count)`.
pub fn trees_up_to(max_leaves: usize, max_height: usize) -> Vec<(PlanarTree, usize)> {
    fn words(max_leaves: usize, max_height: usize) -> Vec<(String, usize)> {
        let mut out = vec![("()".to_string(), 1)];
        if max_height == 0 {
            return out;
        }
        let subtrees = words(max_leaves, max_height - 1);
        // Nonempty sequences of subtrees with total leaf count ≤ max_leaves.
        let mut partial: Vec<(String, usize)> = vec![(String::new(), 0)];
        while let Some((body, leaves)) = partial.pop() {
            for (s, l) in &subtrees {
                if leaves + l <= max_leaves {
                    let next = format!("{body}{s}");
                    out.push((format!("({next})"), leaves + l));
                    partial.push((next, leaves + l));
                }
            }
        }
        out
    }
    words(max_leaves, max_height)
        .into_iter()
        .map(|(w, l)| (PlanarTree::parse_canonical(&w).unwrap(), l))
        .collect()
}
