//! Mean matrix, Perron eigenpair, Σ², and the survival recursion.

use nalgebra::DMatrix;
use serde::Serialize;

use super::Model;
use crate::error::{Error, Result};

const EIGEN_TOLERANCE: f64 = 1e-12;
const MAX_ITERATIONS: usize = 1_000_000;
const CRITICAL_TOLERANCE: f64 = 1e-9;

/// `M[x][y]`: expected number of type-`y` children of a type-`x` parent.
pub fn mean_matrix(model: &Model) -> DMatrix<f64> {
    let n = model.type_count();
    let mut m = DMatrix::zeros(n, n);
    for x in 0..n {
        for atom in model.atoms(x) {
            for &y in &atom.children {
                m[(x, y)] += atom.prob;
            }
        }
    }
    m
}

/// Right and left Perron vectors of the mean matrix, normalized so that
/// `Σ π = 1` and `⟨π, h⟩ = 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Eigenpair {
    pub h: Vec<f64>,
    pub pi: Vec<f64>,
    pub perron: f64,
}

impl Eigenpair {
    pub fn is_critical(&self) -> bool {
        (self.perron - 1.0).abs() <= CRITICAL_TOLERANCE
    }

    /// `⟨π, f⟩`.
    pub fn pi_mean(&self, f: &[f64]) -> f64 {
        self.pi.iter().zip(f).map(|(p, v)| p * v).sum()
    }
}

/// Fails unless `m` is irreducible and aperiodic.
pub fn check_primitive(model: &Model, m: &DMatrix<f64>) -> Result<()> {
    let n = m.nrows();
    let pattern = m.map(|v| v > 0.0);
    // (I + A)^{n−1} has a positive (x, y) entry iff y is reachable from x.
    let mut reach = DMatrix::from_fn(n, n, |i, j| i == j || pattern[(i, j)]);
    let step = reach.clone();
    for _ in 1..n.saturating_sub(1) {
        reach = bool_mul(&reach, &step);
    }
    for x in 0..n {
        for y in 0..n {
            if !reach[(x, y)] {
                return Err(Error::Reducible {
                    from: model.type_name(x).to_string(),
                    to: model.type_name(y).to_string(),
                });
            }
        }
    }
    if n == 1 && !pattern[(0, 0)] {
        let name = model.type_name(0).to_string();
        return Err(Error::Reducible {
            from: name.clone(),
            to: name,
        });
    }
    // Wielandt: a primitive matrix has A^{(n−1)²+1} > 0.
    let mut power = pattern.clone();
    for _ in 1..(n - 1) * (n - 1) + 1 {
        power = bool_mul(&power, &pattern);
    }
    if power.iter().all(|&b| b) {
        Ok(())
    } else {
        Err(Error::Periodic)
    }
}

fn bool_mul(a: &DMatrix<bool>, b: &DMatrix<bool>) -> DMatrix<bool> {
    let n = a.nrows();
    DMatrix::from_fn(n, n, |i, j| (0..n).any(|k| a[(i, k)] && b[(k, j)]))
}

/// Perron eigenpair by power iteration.
///
/// Non-critical models are accepted with a logged warning.
pub fn eigenpair(model: &Model) -> Result<Eigenpair> {
    let m = mean_matrix(model);
    check_primitive(model, &m)?;
    let (perron, h) = power_iteration(&m)?;
    let (_, pi) = power_iteration(&m.transpose())?;
    let pi_sum: f64 = pi.iter().sum();
    let pi: Vec<f64> = pi.iter().map(|v| v / pi_sum).collect();
    let inner: f64 = pi.iter().zip(&h).map(|(p, v)| p * v).sum();
    let h = h.iter().map(|v| v / inner).collect();
    if (perron - 1.0).abs() > CRITICAL_TOLERANCE {
        log::warn!("model is not critical: Perron eigenvalue {perron}");
    }
    Ok(Eigenpair { h, pi, perron })
}

fn power_iteration(m: &DMatrix<f64>) -> Result<(f64, Vec<f64>)> {
    let n = m.nrows();
    let mut v = nalgebra::DVector::from_element(n, 1.0 / n as f64);
    for _ in 0..MAX_ITERATIONS {
        let w = m * &v;
        let norm = w.sum();
        let w = w / norm;
        let change = (&w - &v).amax();
        v = w;
        if change <= EIGEN_TOLERANCE {
            let mv = m * &v;
            let perron = mv.sum() / v.sum();
            return Ok((perron, v.iter().copied().collect()));
        }
    }
    Err(Error::NoConvergence(MAX_ITERATIONS))
}

/// `Σ² = Σ_x π(x) E_x[Σ_{i≠j} h(ξ_i) h(ξ_j)]`.
pub fn sigma_squared(model: &Model, eig: &Eigenpair) -> f64 {
    (0..model.type_count())
        .map(|x| {
            let pairs: f64 = model
                .atoms(x)
                .iter()
                .map(|a| {
                    let s: f64 = a.children.iter().map(|&c| eig.h[c]).sum();
                    let s2: f64 = a.children.iter().map(|&c| eig.h[c] * eig.h[c]).sum();
                    a.prob * (s * s - s2)
                })
                .sum();
            eig.pi[x] * pairs
        })
        .sum()
}

/// One step of the extinction recursion `s ↦ (Σ_atoms p Π s(child))_x`.
pub fn extinction_step(model: &Model, s: &[f64]) -> Vec<f64> {
    (0..model.type_count())
        .map(|x| {
            model
                .atoms(x)
                .iter()
                .map(|a| a.prob * a.children.iter().map(|&c| s[c]).product::<f64>())
                .sum()
        })
        .collect()
}

/// `P_{x0}(Z_n = 0)`.
pub fn extinction_by(model: &Model, x0: usize, n: usize) -> f64 {
    let mut s = vec![0.0; model.type_count()];
    for _ in 0..n {
        s = extinction_step(model, &s);
    }
    s[x0]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KolmogorovRow {
    pub n: usize,
    /// `P_x(Z_n > 0)` for every type.
    pub survival: Vec<f64>,
    /// `n · P_x(Z_n > 0)`.
    pub scaled: Vec<f64>,
}

/// Survival probabilities along `grid`, with the limits `2h(x)/Σ²`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KolmogorovProfile {
    pub rows: Vec<KolmogorovRow>,
    /// `None` when the model is not critical or `Σ² = 0`.
    pub limit: Option<Vec<f64>>,
}

pub fn kolmogorov_profile(model: &Model, grid: &[usize]) -> Result<KolmogorovProfile> {
    let eig = eigenpair(model)?;
    let sigma2 = sigma_squared(model, &eig);
    let limit = (eig.is_critical() && sigma2 > 0.0).then(|| eig.h.iter().map(|h| 2.0 * h / sigma2).collect());

    let mut sorted = grid.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut rows = Vec::with_capacity(sorted.len());
    let mut s = vec![0.0; model.type_count()];
    let mut step = 0;
    for &n in &sorted {
        while step < n {
            s = extinction_step(model, &s);
            step += 1;
        }
        let survival: Vec<f64> = s.iter().map(|q| 1.0 - q).collect();
        let scaled = survival.iter().map(|p| n as f64 * p).collect();
        rows.push(KolmogorovRow { n, survival, scaled });
    }
    Ok(KolmogorovProfile { rows, limit })
}
