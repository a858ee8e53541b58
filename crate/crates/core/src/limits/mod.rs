//! Brownian CRT and CPP limits: integrals against the uniform tree
//! measures, closed-form and sampled monomials, contour trees of
//! excursions, and finite-n convergence reports.

mod brownian;
mod contour;
mod convergence;
mod cpp;
mod lambda;

pub use brownian::{cpp_moment, crt_moment, LimitQuery};
pub use contour::{contour_ball_check, contour_tree, free_ball_moment, random_walk_excursion};
pub use convergence::{convergence_report, ConvergenceReport, ConvergenceRow, ConvergenceSettings, ScalingPath};
pub use cpp::{cpp_monomial_mc, cpp_sample, CppSample, DEFAULT_DEPTH_CUTOFF};
pub use lambda::{lambda_k_integral, lambda_tilde_k_integral, Integration};
