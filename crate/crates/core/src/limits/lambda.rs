//! Integrals against the uniform measures on continuous binary trees and on
//! ultrametric trees of height one.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::estimate::{Accumulator, Estimate};
use crate::moments::ContinuousFunctional;
use crate::process::replica_rng;
use crate::tree::ContinuousShape;

/// How to evaluate a low-dimensional integral.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integration {
    /// Uniform sampling of the bounding box with an indicator.
    MonteCarlo { samples: u64, seed: u64 },
    /// Midpoint rule with this many points per axis; no error estimate.
    Grid { points_per_axis: usize },
}

const BLOCK: u64 = 1 << 16;

/// `E[F(θ, X)]` with `X_1..X_k` i.i.d. from `pi`, by exact summation.
pub(crate) fn mark_average(k: usize, pi: &[f64], mut f: impl FnMut(&[usize]) -> f64) -> f64 {
    let types: Vec<usize> = (0..pi.len()).filter(|&x| pi[x] > 0.0).collect();
    if types.is_empty() {
        return 0.0;
    }
    let mut digits = vec![0usize; k];
    let mut marks = vec![0usize; k];
    let mut total = 0.0;
    loop {
        let mut w = 1.0;
        for (m, &d) in marks.iter_mut().zip(&digits) {
            *m = types[d];
            w *= pi[*m];
        }
        total += w * f(&marks);
        let Some(pos) = digits.iter().rposition(|&d| d + 1 < types.len()) else {
            return total;
        };
        digits[pos] += 1;
        digits[pos + 1..].iter_mut().for_each(|d| *d = 0);
    }
}

/// Integrates `g` over the box `[0, side]^dim` by `method`.
fn integrate_box(dim: usize, side: f64, method: Integration, g: &(dyn Fn(&[f64]) -> f64 + Sync)) -> Estimate {
    let volume = side.powi(dim as i32);
    if dim == 0 {
        return Estimate::exact(g(&[]));
    }
    match method {
        Integration::MonteCarlo { samples, seed } => {
            let blocks = samples.div_ceil(BLOCK);
            let parts: Vec<Accumulator> = (0..blocks)
                .into_par_iter()
                .map(|b| {
                    let mut rng = replica_rng(seed, b);
                    let mut acc = Accumulator::default();
                    let mut x = vec![0.0; dim];
                    let count = BLOCK.min(samples - b * BLOCK);
                    for _ in 0..count {
                        x.iter_mut().for_each(|v| *v = side * rng.random::<f64>());
                        acc.push(g(&x));
                    }
                    acc
                })
                .collect();
            let mut acc = Accumulator::default();
            parts.iter().for_each(|p| acc.merge(p));
            acc.estimate().scaled(volume)
        }
        Integration::Grid { points_per_axis } => {
            let m = points_per_axis;
            let h = side / m as f64;
            let partial: Vec<f64> = (0..m)
                .into_par_iter()
                .map(|first| {
                    let mut digits = vec![0usize; dim - 1];
                    let mut x = vec![0.0; dim];
                    x[0] = (first as f64 + 0.5) * h;
                    let mut total = 0.0;
                    loop {
                        for (v, &d) in x[1..].iter_mut().zip(&digits) {
                            *v = (d as f64 + 0.5) * h;
                        }
                        total += g(&x);
                        let Some(pos) = digits.iter().rposition(|&d| d + 1 < m) else {
                            return total;
                        };
                        digits[pos] += 1;
                        digits[pos + 1..].iter_mut().for_each(|d| *d = 0);
                    }
                })
                .collect();
            Estimate::exact(partial.iter().sum::<f64>() * h.powi(dim as i32))
        }
    }
}

/// `∫ E[F(θ, X)] Λ_k(dθ)` over binary trees with leaf heights at most
/// `radius`, where `Λ_k` is Lebesgue measure on `(ℓ, b)` restricted to
/// `b_i < min(ℓ_i, ℓ_{i+1})`. `F` must vanish when a leaf is above `radius`.
pub fn lambda_k_integral(
    k: usize,
    f: &dyn ContinuousFunctional,
    pi: &[f64],
    radius: f64,
    method: Integration,
) -> Estimate {
    let g = |x: &[f64]| {
        let (leaves, branches) = x.split_at(k);
        let valid = branches
            .iter()
            .enumerate()
            .all(|(i, &b)| b < leaves[i].min(leaves[i + 1]));
        if !valid {
            return 0.0;
        }
        let shape = ContinuousShape::new_unchecked(leaves.to_vec(), branches.to_vec());
        mark_average(k, pi, |marks| f.eval(&shape, marks))
    };
    integrate_box(2 * k - 1, radius, method, &g)
}

/// `∫ E[F(θ, X)] Λ̃_k(dθ) = ∫_{[0,1]^{k−1}} E[F((1, …, 1), b, X)] db`.
pub fn lambda_tilde_k_integral(k: usize, f: &dyn ContinuousFunctional, pi: &[f64], method: Integration) -> Estimate {
    let g = |b: &[f64]| {
        let shape = ContinuousShape::new_unchecked(vec![1.0; k], b.to_vec());
        mark_average(k, pi, |marks| f.eval(&shape, marks))
    };
    integrate_box(k - 1, 1.0, method, &g)
}
