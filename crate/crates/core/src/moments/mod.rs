//! Planar factorial moments `M^k_x[F]` computed three independent ways,
//! and their rescaled and ultrametric versions.

mod bruteforce;
mod m2f;
mod recursive;
mod scaled;

pub use bruteforce::{
    for_each_leaf_tuple, moment_bruteforce, moment_bruteforce_capped, path_sum_bruteforce, planar_tuple_sum,
};
pub use m2f::{moment_m2f, moment_m2f_with};
pub use recursive::{moment_recursive, ProductFunctional};
pub use scaled::{rescaled_moment, ultrametric_moment, ContinuousFunctional};

use crate::spine::{Functional, Psi};

/// What to compute: `M^k_{x0}[F]` for a functional supported on trees of
/// height at most `radius`.
#[derive(Clone, Debug)]
pub struct MomentQuery {
    pub k: usize,
    pub x0: usize,
    pub psi: Psi,
    pub functional: Functional,
    pub radius: u32,
}

impl MomentQuery {
    pub fn new(k: usize, x0: usize, psi: Psi, functional: Functional, radius: u32) -> Self {
        assert!(k >= 1, "moments have order at least 1");
        MomentQuery {
            k,
            x0,
            psi,
            functional,
            radius,
        }
    }
}
