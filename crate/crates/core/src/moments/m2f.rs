//! Moments as a sum over shapes of biased spine-chain expectations.

use rayon::prelude::*;

use super::MomentQuery;
use crate::error::{Error, Result};
use crate::process::Model;
use crate::spine::{Functional, ShapeFunctional, ShapeSum, SpineKernel};
use crate::tree::{enumerate_shapes, DiscreteShape};

/// `M^k_x[F] = ψ(x) Σ_τ Q^ψ_{x,τ}[Δ_k F]`, summed over every shape of height
/// at most the query radius.
pub fn moment_m2f(model: &Model, query: &MomentQuery) -> Result<f64> {
    let kernel = SpineKernel::build(model, &query.psi)?;
    let Functional::Shape(f) = &query.functional else {
        return Err(Error::InteriorMarks);
    };
    let sum = ShapeSum::new(&kernel, query.radius, true);
    Ok(moment_m2f_with(
        &sum,
        query.x0,
        enumerate_shapes(query.k, query.radius),
        f.as_ref(),
    ))
}

/// Shape sum over an arbitrary shape stream with a prepared evaluator.
///
/// Terms are computed in parallel and added in stream order, so the result
/// does not depend on the thread count.
pub fn moment_m2f_with(
    sum: &ShapeSum<'_>,
    x0: usize,
    shapes: impl Iterator<Item = DiscreteShape>,
    f: &dyn ShapeFunctional,
) -> f64 {
    const BATCH: usize = 4096;
    let psi = sum.kernel().psi()[x0];
    let mut total = 0.0;
    let mut batch = Vec::with_capacity(BATCH);
    let mut flush = |batch: &mut Vec<DiscreteShape>| {
        let terms: Vec<f64> = batch.par_iter().map(|s| sum.expectation(x0, s, f)).collect();
        total += terms.iter().sum::<f64>();
        batch.clear();
    };
    for shape in shapes {
        batch.push(shape);
        if batch.len() == BATCH {
            flush(&mut batch);
        }
    }
    flush(&mut batch);
    psi * total
}
