//! Finite-type branching processes: models, simulation, exact enumeration
//! and criticality diagnostics.

mod criticality;
mod enumerate;
mod model;
mod simulate;

pub use criticality::{
    check_primitive, eigenpair, extinction_by, extinction_step, kolmogorov_profile, mean_matrix, sigma_squared,
    Eigenpair, KolmogorovProfile, KolmogorovRow,
};
pub use enumerate::{enumerate_population, enumerate_population_exact, population_outcome_count, DEFAULT_OUTCOME_CAP};
pub(crate) use model::next_permutation;
pub use model::{Atom, BroodOrder, Model};
pub use simulate::{replica_rng, simulate, simulate_with, MarkedTree, OffspringSampler};
