//! Brownian coalescent point process: Poisson sampler and Monte Carlo
//! monomials.

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::Rng;
use rand_distr::{Exp1, Poisson};
use rayon::prelude::*;
use serde::Serialize;

use super::LimitQuery;
use crate::estimate::{Accumulator, Estimate};
use crate::process::replica_rng;
use crate::tree::DistanceMatrix;

/// Default cutoff below which excursion depths are dropped.
pub const DEFAULT_DEPTH_CUTOFF: f64 = 1e-3;

/// One realization: the length `Z` of `[0, Z]` and the atoms `(u, s)` of
/// the depth process with `s ≥` cutoff, sorted by position.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CppSample {
    pub sigma2: f64,
    pub z: f64,
    pub atoms: Vec<(f64, f64)>,
}

impl CppSample {
    /// `2 · max{s : (w, s) atom, u ≤ w ≤ v}`, zero when no atom lies between.
    pub fn distance(&self, u: f64, v: f64) -> f64 {
        let (lo, hi) = if u <= v { (u, v) } else { (v, u) };
        let start = self.atoms.partition_point(|&(w, _)| w < lo);
        2.0 * self.atoms[start..]
            .iter()
            .take_while(|&&(w, _)| w <= hi)
            .map(|&(_, s)| s)
            .fold(0.0, f64::max)
    }

    /// Distances between the root (at distance 1 from every point) and
    /// `points`.
    pub fn distance_matrix(&self, points: &[f64]) -> DistanceMatrix {
        DistanceMatrix::from_fn(points.len(), |i, j| {
            if i == 0 {
                1.0
            } else {
                self.distance(points[i - 1], points[j - 1])
            }
        })
    }

    /// Total mass `(Σ²/2) · Z`.
    pub fn mass(&self) -> f64 {
        self.sigma2 / 2.0 * self.z
    }
}

/// Draws `Z ~ Exp(1)` and the atoms of a Poisson process with intensity
/// `du ds / s²` on `[0, Z] × [cutoff, 1]`.
pub fn cpp_sample<R: Rng + ?Sized>(sigma2: f64, cutoff: f64, rng: &mut R) -> CppSample {
    let z: f64 = Exp1.sample(rng);
    let rate = 1.0 / cutoff - 1.0;
    let mean = z * rate;
    let count = if mean > 0.0 {
        Poisson::new(mean).expect("positive mean").sample(rng) as usize
    } else {
        0
    };
    let mut atoms: Vec<(f64, f64)> = (0..count)
        .map(|_| {
            let u = z * rng.random::<f64>();
            // Inverse of the depth law with density ∝ s^{−2} on [cutoff, 1].
            let s = 1.0 / (1.0 / cutoff - rng.random::<f64>() * rate);
            (u, s)
        })
        .collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    CppSample { sigma2, z, atoms }
}

/// Largest depth over a gap of length `g`, or zero when it is below
/// `cutoff`: `P(max ≤ s) = exp(−g (1/s − 1))`.
fn gap_depth<R: Rng + ?Sized>(g: f64, cutoff: f64, rng: &mut R) -> f64 {
    let u: f64 = 1.0 - rng.random::<f64>();
    let s = 1.0 / (1.0 - u.ln() / g);
    if s >= cutoff {
        s
    } else {
        0.0
    }
}

const BLOCK: u64 = 4096;

/// Monte Carlo estimate of `E[Φ(U_b)]`: `k` uniform points on `[0, Z]` with
/// weight `((Σ²/2) Z)^k` and i.i.d. marks. Only the depth maxima over the
/// gaps between sorted points are drawn, which has the same law as reading
/// them off a full [`cpp_sample`].
pub fn cpp_monomial_mc(query: &LimitQuery, samples: u64, cutoff: f64, seed: u64) -> Estimate {
    let k = query.k;
    let marks_law = WeightedIndex::new(&query.pi).expect("mark law has positive mass");
    let blocks = samples.div_ceil(BLOCK);
    let parts: Vec<Accumulator> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = replica_rng(seed, b);
            let mut acc = Accumulator::default();
            let mut points = vec![0.0; k];
            let mut order: Vec<usize> = (0..k).collect();
            let mut gaps = vec![0.0; k.saturating_sub(1)];
            let mut marks = vec![0usize; k];
            for _ in 0..BLOCK.min(samples - b * BLOCK) {
                let z: f64 = Exp1.sample(&mut rng);
                points.iter_mut().for_each(|p| *p = z * rng.random::<f64>());
                marks.iter_mut().for_each(|m| *m = marks_law.sample(&mut rng));
                order.sort_by(|&i, &j| points[i].total_cmp(&points[j]));
                for (j, g) in gaps.iter_mut().enumerate() {
                    *g = gap_depth(points[order[j + 1]] - points[order[j]], cutoff, &mut rng);
                }
                let mut rank = vec![0; k];
                for (r, &i) in order.iter().enumerate() {
                    rank[i] = r;
                }
                let d = DistanceMatrix::from_fn(k, |i, j| {
                    if i == 0 {
                        return 1.0;
                    }
                    let (a, b) = (rank[i - 1].min(rank[j - 1]), rank[i - 1].max(rank[j - 1]));
                    2.0 * gaps[a..b].iter().copied().fold(0.0, f64::max)
                });
                let weight = (query.sigma2 / 2.0 * z).powi(k as i32);
                acc.push(weight * query.phi.eval(&d, &marks));
            }
            acc
        })
        .collect();
    let mut acc = Accumulator::default();
    parts.iter().for_each(|p| acc.merge(p));
    acc.estimate()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limits::{cpp_moment, Integration};

    #[test]
    fn max_depth_rule() {
        let s = CppSample {
            sigma2: 1.0,
            z: 2.0,
            atoms: vec![(0.5, 0.3), (1.2, 0.8)],
        };
        assert!((s.distance(0.2, 1.0) - 0.6).abs() < 1e-15);
        assert!((s.distance(1.5, 0.2) - 1.6).abs() < 1e-15);
        assert_eq!(s.distance(1.3, 1.9), 0.0);
        assert_eq!(s.distance_matrix(&[0.2, 1.5]).get(0, 2), 1.0);
    }

    #[test]
    fn atom_count_matches_intensity() {
        // E[#atoms] = E[Z] (1/ε − 1) = 1/ε − 1.
        let eps = 0.01;
        let mut rng = replica_rng(3, 0);
        let counts: Vec<f64> = (0..20_000)
            .map(|_| cpp_sample(1.0, eps, &mut rng).atoms.len() as f64)
            .collect();
        let est = Estimate::from_samples(&counts);
        assert!(est.agrees_with(1.0 / eps - 1.0, 3.0), "{est:?}");
    }

    #[test]
    fn gap_sampler_matches_full_sampler() {
        let eps = 0.01;
        let far = |d: &DistanceMatrix, _: &[usize]| f64::from(d.get(1, 2) > 0.5);
        let q = LimitQuery::new(2, 1.0, vec![1.0], far, 1.0);
        let fast = cpp_monomial_mc(&q, 100_000, eps, 1);
        let mut rng = replica_rng(2, 0);
        let full: Vec<f64> = (0..100_000)
            .map(|_| {
                let s = cpp_sample(1.0, eps, &mut rng);
                let p = [s.z * rng.random::<f64>(), s.z * rng.random::<f64>()];
                s.mass().powi(2) * far(&s.distance_matrix(&p), &[0, 0])
            })
            .collect();
        let full = Estimate::from_samples(&full);
        let diff = (fast.value - full.value).abs();
        assert!(diff <= 3.0 * (fast.stderr.powi(2) + full.stderr.powi(2)).sqrt());
        let exact = cpp_moment(&q, Integration::Grid { points_per_axis: 200 }).value;
        assert!(fast.agrees_with(exact, 3.0));
    }

    #[test]
    fn cutoff_stability() {
        let far = |d: &DistanceMatrix, _: &[usize]| f64::from(d.get(1, 2) > 0.5);
        let q = LimitQuery::new(2, 1.0, vec![1.0], far, 1.0);
        let a = cpp_monomial_mc(&q, 50_000, 1e-3, 11);
        let b = cpp_monomial_mc(&q, 50_000, 5e-4, 11);
        assert!((a.value - b.value).abs() < a.stderr);
    }
}
