//! Random-walk excursions, their contour trees, and a Donsker-scale check
//! of the CRT's first moment.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::estimate::Estimate;
use crate::mmm::{contour_space, FiniteMmmSpace};
use crate::process::replica_rng;

/// A uniform simple-random-walk excursion with `steps` steps (even, at
/// least 2): positive strictly between its endpoints, zero at both ends.
///
/// The inner part is a uniform Dyck path of length `steps − 2`, obtained by
/// the cycle lemma: among the rotations of a shuffled sequence of `N` up and
/// `N + 1` down steps exactly one stays nonnegative until its last step.
pub fn random_walk_excursion<R: Rng + ?Sized>(steps: usize, rng: &mut R) -> Vec<i64> {
    assert!(
        steps >= 2 && steps.is_multiple_of(2),
        "an excursion has an even number of steps"
    );
    let n = (steps - 2) / 2;
    let mut moves: Vec<i64> = std::iter::repeat_n(1, n)
        .chain(std::iter::repeat_n(-1, n + 1))
        .collect();
    moves.shuffle(rng);
    // Rotate to start at the step leaving the first minimum.
    let (mut s, mut min, mut at) = (0i64, 0i64, 0usize);
    for (i, &m) in moves.iter().enumerate() {
        s += m;
        if s < min {
            min = s;
            at = i + 1;
        }
    }
    let len = moves.len();
    moves.rotate_left(at % len);
    let mut path = Vec::with_capacity(steps + 1);
    path.push(0);
    let mut h = 1;
    path.push(h);
    for &m in &moves[..2 * n] {
        h += m;
        path.push(h);
    }
    path.push(0);
    path
}

/// The tree coded by `path`, with mass `mass_scale` per grid point.
pub fn contour_tree(path: &[f64], mass_scale: f64) -> Result<FiniteMmmSpace> {
    contour_space(path, mass_scale)
}

/// For an excursion of unit length coded by `space`, the ball monomial
/// `Φ = μ{d(ρ, ·) ≤ radius}` integrated over the free CRT measure, i.e.
/// over excursion lengths under Itô's measure. The length integral is
/// explicit and leaves `radius/√(2π) · ∫ μ(du) / d(ρ, u)`, which does not
/// depend on `Σ`.
pub fn free_ball_moment(space: &FiniteMmmSpace, radius: f64) -> f64 {
    let s: f64 = space
        .support()
        .into_iter()
        .map(|i| (space.mass(i), space.root_distance(i)))
        .filter(|&(_, d)| d > 0.0)
        .map(|(m, d)| m / d)
        .sum();
    radius * s / (2.0 * PI).sqrt()
}

/// [`free_ball_moment`] averaged over `excursions` random-walk excursions of
/// `steps` steps, each rescaled to unit length by `e(i/steps) = S_i/√steps`.
/// Converges to the CRT value `radius` as `steps` grows.
pub fn contour_ball_check(excursions: u64, steps: usize, radius: f64, seed: u64) -> Result<Estimate> {
    let scale = (steps as f64).sqrt();
    let values: Result<Vec<f64>> = (0..excursions)
        .into_par_iter()
        .map(|j| {
            let mut rng = replica_rng(seed, j);
            let walk = random_walk_excursion(steps, &mut rng);
            let path: Vec<f64> = walk.iter().map(|&s| s as f64 / scale).collect();
            let space = contour_tree(&path, 1.0 / steps as f64)?;
            Ok(free_ball_moment(&space, radius))
        })
        .collect();
    Ok(Estimate::from_samples(&values?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn excursions_are_positive_bridges() {
        let mut rng = replica_rng(5, 0);
        for steps in [2, 4, 10, 200] {
            for _ in 0..50 {
                let w = random_walk_excursion(steps, &mut rng);
                assert_eq!(w.len(), steps + 1);
                assert_eq!((w[0], w[steps]), (0, 0));
                assert!(w[1..steps].iter().all(|&h| h > 0));
                assert!(w.windows(2).all(|p| (p[1] - p[0]).abs() == 1));
            }
        }
    }

    #[test]
    fn dyck_paths_are_uniform() {
        // The 5 Dyck paths of length 6 should appear equally often.
        let mut rng = replica_rng(6, 0);
        let mut counts = std::collections::HashMap::new();
        let n = 50_000;
        for _ in 0..n {
            *counts.entry(random_walk_excursion(8, &mut rng)).or_insert(0u32) += 1;
        }
        assert_eq!(counts.len(), 5);
        for &c in counts.values() {
            let p = c as f64 / n as f64;
            assert!((p - 0.2).abs() < 0.01, "{p}");
        }
    }

    #[test]
    fn tent_ball_moment() {
        let s = contour_tree(&[0.0, 0.5, 1.0, 0.5, 0.0], 0.25).unwrap();
        // Points at heights 0.5 (mass 0.5) and 1 (mass 0.25).
        let expected = 2.0 * (0.5 / 0.5 + 0.25 / 1.0) / (2.0 * PI).sqrt();
        assert!((free_ball_moment(&s, 2.0) - expected).abs() < 1e-12);
    }
}
