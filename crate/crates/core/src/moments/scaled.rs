//! Moments under the diffusive rescaling and at a fixed generation.

use crate::error::Result;
use crate::process::Model;
use crate::spine::{Psi, ShapeSum, SpineKernel};
use crate::tree::{enumerate_shapes, ultrametric_shapes, ContinuousShape};

use super::moment_m2f_with;

/// A functional of a continuous shape and its leaf types.
pub trait ContinuousFunctional: Send + Sync {
    fn eval(&self, shape: &ContinuousShape, leaf_types: &[usize]) -> f64;
}

impl<F> ContinuousFunctional for F
where
    F: Fn(&ContinuousShape, &[usize]) -> f64 + Send + Sync,
{
    fn eval(&self, shape: &ContinuousShape, leaf_types: &[usize]) -> f64 {
        self(shape, leaf_types)
    }
}

/// `n^{−2k} M^k_{x0}[F(τ/n)]`, with edge lengths scaled by `1/n` and the
/// sum restricted to leaf heights at most `⌊radius·n⌋`. `F` must vanish
/// beyond `radius`.
pub fn rescaled_moment(
    model: &Model,
    x0: usize,
    k: usize,
    f: &dyn ContinuousFunctional,
    radius: f64,
    n: u32,
) -> Result<f64> {
    let kernel = SpineKernel::build(model, &Psi::Harmonic)?;
    let max_height = (radius * f64::from(n)).floor() as u32;
    let sum = ShapeSum::new(&kernel, max_height, true);
    let scale = 1.0 / f64::from(n);
    let adapted = |s: &crate::tree::DiscreteShape, l: &[usize], _: &[usize]| f.eval(&s.scaled(scale), l);
    let total = moment_m2f_with(&sum, x0, enumerate_shapes(k, max_height), &adapted);
    Ok(total * f64::from(n).powi(-2 * k as i32))
}

/// `n^{−k} M^k_{x0}[F(τ/n) 1{all leaves at generation n}]`.
pub fn ultrametric_moment(model: &Model, x0: usize, k: usize, f: &dyn ContinuousFunctional, n: u32) -> Result<f64> {
    let kernel = SpineKernel::build(model, &Psi::Harmonic)?;
    let sum = ShapeSum::new(&kernel, n, true);
    let scale = 1.0 / f64::from(n);
    let adapted = |s: &crate::tree::DiscreteShape, l: &[usize], _: &[usize]| f.eval(&s.scaled(scale), l);
    let total = moment_m2f_with(&sum, x0, ultrametric_shapes(k, n), &adapted);
    Ok(total * f64::from(n).powi(-(k as i32)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::{eigenpair, mean_matrix};

    #[test]
    fn order_one_reduces_to_mean_matrix() {
        let m = Model::from_named(
            &["A", "B"],
            &[
                &[(0.5, &[]), (0.25, &["A", "B"]), (0.25, &["A"])],
                &[(0.5, &["A", "A", "B"]), (0.5, &[])],
            ],
        )
        .unwrap();
        let f = [0.3, 1.7];
        let mm = mean_matrix(&m);
        let n = 12u32;
        let leaf = move |s: &ContinuousShape, l: &[usize]| f64::from(s.height() <= 1.0) * f[l[0]];
        for x0 in 0..2 {
            let mut sum = 0.0;
            for g in 0..=n {
                let p = mm.pow(g);
                sum += (0..2).map(|y| p[(x0, y)] * f[y]).sum::<f64>();
            }
            let r = rescaled_moment(&m, x0, 1, &leaf, 1.0, n).unwrap();
            assert!((f64::from(n) * r - sum / f64::from(n)).abs() < 1e-12);
            let p = mm.pow(n);
            let exact: f64 = (0..2).map(|y| p[(x0, y)] * f[y]).sum();
            let u = ultrametric_moment(&m, x0, 1, &leaf, n).unwrap();
            assert!((f64::from(n) * u - exact).abs() < 1e-12);
        }
        let e = eigenpair(&m).unwrap();
        assert!(e.is_critical());
    }

    #[test]
    fn binary_pairs_at_fixed_generation() {
        // E[Z_n(Z_n − 1)] = n for the critical binary law, so the ordered
        // pair count is n/2 and n·n^{−2}·n/2 = 1/2.
        let m = Model::binary_galton_watson();
        let one = |_: &ContinuousShape, _: &[usize]| 1.0;
        for n in [1u32, 5, 20] {
            let u = ultrametric_moment(&m, 0, 2, &one, n).unwrap();
            assert!((f64::from(n) * u - 0.5).abs() < 1e-12);
        }
    }
}
