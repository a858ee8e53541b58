//! Closed-form moments of the Brownian CRT and of the Brownian CPP.

use std::sync::Arc;

use super::{lambda_k_integral, lambda_tilde_k_integral, Integration};
use crate::estimate::Estimate;
use crate::mmm::{permutations, symmetrized, DistanceFunctional};
use crate::tree::{ContinuousShape, DistanceConvention};

/// A monomial of a limit tree: order `k`, variance `Σ²`, leaf mark law `π`
/// and a test function `φ` vanishing when a root distance exceeds `radius`.
#[derive(Clone)]
pub struct LimitQuery {
    pub k: usize,
    pub sigma2: f64,
    pub pi: Vec<f64>,
    pub phi: Arc<dyn DistanceFunctional>,
    pub radius: f64,
}

impl LimitQuery {
    pub fn new(k: usize, sigma2: f64, pi: Vec<f64>, phi: impl DistanceFunctional + 'static, radius: f64) -> Self {
        assert!(k >= 1, "monomials have order at least 1");
        LimitQuery {
            k,
            sigma2,
            pi,
            phi: Arc::new(phi),
            radius,
        }
    }

    /// `θ ↦ Σ_σ φ_σ(D(θ), e)`, with graph distances.
    fn symmetrized_on_shapes(&self) -> impl Fn(&ContinuousShape, &[usize]) -> f64 + Send + Sync + '_ {
        let perms = permutations(self.k);
        move |shape: &ContinuousShape, marks: &[usize]| {
            let d = shape.distance_matrix(DistanceConvention::Graph);
            symmetrized(self.phi.as_ref(), &d, marks, &perms)
        }
    }
}

/// `E[Φ(T_b)] = (Σ²/2)^{k−1} Σ_σ ∫ E[φ_σ(D(θ), X)] Λ_k(dθ)`.
pub fn crt_moment(query: &LimitQuery, method: Integration) -> Estimate {
    let f = query.symmetrized_on_shapes();
    lambda_k_integral(query.k, &f, &query.pi, query.radius, method)
        .scaled((query.sigma2 / 2.0).powi(query.k as i32 - 1))
}

/// `E[Φ(U_b)] = (Σ²/2)^k Σ_σ ∫ E[φ_σ(D(θ), X)] Λ̃_k(dθ)`.
pub fn cpp_moment(query: &LimitQuery, method: Integration) -> Estimate {
    let f = query.symmetrized_on_shapes();
    lambda_tilde_k_integral(query.k, &f, &query.pi, method).scaled((query.sigma2 / 2.0).powi(query.k as i32))
}
