//! Test functionals selectable from a config.

use treemoments::moments::ProductFunctional;
use treemoments::spine::Functional;
use treemoments::tree::{ContinuousShape, DistanceMatrix};

use crate::config::{ContinuousFunctionalKind, DiscreteFunctionalKind, PhiKind};

fn leaf_weight(h: u32, t: usize) -> f64 {
    1.0 + h as f64 * (0.5 + t as f64)
}

fn stem_weight(s: u32, t: usize) -> f64 {
    1.0 + s as f64 + 0.5 * t as f64
}

/// The left comb of order `k`: each branch point splits off one leaf on
/// the right.
pub fn comb(k: usize) -> ProductFunctional {
    assert!(k >= 1, "a comb has at least one leaf");
    let mut f = ProductFunctional::leaf(leaf_weight);
    for _ in 1..k {
        f = ProductFunctional::split(stem_weight, vec![f, ProductFunctional::leaf(leaf_weight)]).expect("two blocks");
    }
    f
}

/// The functional of `kind` and order `k`, cut off above `radius` so that
/// enumeration to that generation is exact.
pub fn discrete(kind: DiscreteFunctionalKind, k: usize, radius: u32) -> Functional {
    match kind {
        DiscreteFunctionalKind::HeightIndicator => Functional::height_at_most(radius),
        DiscreteFunctionalKind::Comb => {
            let f = comb(k);
            Functional::shape(move |s, l, b| {
                if s.height() > radius {
                    0.0
                } else {
                    f.eval_shape(s, l, b)
                }
            })
        }
    }
}

pub fn continuous(
    kind: ContinuousFunctionalKind,
    radius: f64,
) -> impl Fn(&ContinuousShape, &[usize]) -> f64 + Send + Sync + 'static {
    move |s: &ContinuousShape, _: &[usize]| match kind {
        ContinuousFunctionalKind::HeightIndicator => f64::from(s.height() <= radius),
        ContinuousFunctionalKind::One => 1.0,
    }
}

/// `φ` on the distance matrix of the root (index 0) and sampled points.
pub fn phi(kind: PhiKind) -> impl Fn(&DistanceMatrix, &[usize]) -> f64 + Send + Sync + 'static {
    move |d: &DistanceMatrix, _: &[usize]| match kind {
        PhiKind::One => 1.0,
        PhiKind::Separated { threshold } => {
            let k = d.k();
            let apart = (1..=k).all(|i| (i + 1..=k).all(|j| d.get(i, j) > threshold));
            f64::from(apart)
        }
    }
}
