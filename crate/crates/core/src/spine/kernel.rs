use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::process::{eigenpair, MarkedTree, Model};

/// Choice of the positive weight function ψ on types.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Psi {
    /// ψ ≡ 1: the Feynman–Kac representation.
    Unit,
    /// ψ = h, the right Perron vector: Doob's transform of the mean
    /// semigroup.
    Harmonic,
    Custom(Vec<f64>),
}

impl Psi {
    pub fn values(&self, model: &Model) -> Result<Vec<f64>> {
        let values = match self {
            Psi::Unit => vec![1.0; model.type_count()],
            Psi::Harmonic => eigenpair(model)?.h,
            Psi::Custom(v) => {
                if v.len() != model.type_count() {
                    return Err(Error::InvalidModel(format!(
                        "psi has {} entries for {} types",
                        v.len(),
                        model.type_count()
                    )));
                }
                v.clone()
            }
        };
        if let Some((ty, &value)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::NonPositivePsi { ty, value });
        }
        Ok(values)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Psi::Unit => "unit",
            Psi::Harmonic => "harmonic",
            Psi::Custom(_) => "custom",
        }
    }
}

/// ψ-biased offspring quantities of a model.
///
/// Tensors over ordered `d`-tuples of types are stored flat, the first
/// coordinate most significant.
#[derive(Clone, Debug, Serialize)]
pub struct SpineKernel {
    type_count: usize,
    psi: Vec<f64>,
    max_degree: usize,
    /// `moment[d][x]`: factorial ψ-moment `m_d(x)`, with `m_0 = 1`.
    moment: Vec<Vec<f64>>,
    /// `growth[x] = m_1(x) / ψ(x)`.
    growth: Vec<f64>,
    transition: Vec<Vec<f64>>,
    /// `chi_weight[d][x][y]`: expected sum over ordered distinct child
    /// tuples of `Π ψ · 1{types = y}`.
    chi_weight: Vec<Vec<Vec<f64>>>,
    /// `chi_weight / m_d`, or zero where `m_d = 0`.
    chi: Vec<Vec<Vec<f64>>>,
    /// As `chi_weight`, over increasing (planar) child tuples only.
    planar_weight: Vec<Vec<Vec<f64>>>,
}

/// Elementary symmetric polynomials `e_0, …, e_max` of `weights`.
pub fn elementary_symmetric(weights: impl IntoIterator<Item = f64>, max: usize) -> Vec<f64> {
    let mut e = vec![0.0; max + 1];
    e[0] = 1.0;
    for w in weights {
        for j in (1..=max).rev() {
            e[j] += w * e[j - 1];
        }
    }
    e
}

fn factorial(d: usize) -> f64 {
    (1..=d).map(|i| i as f64).product()
}

/// Calls `visit` with every ordered tuple of distinct indices below `len`.
fn for_each_distinct_tuple(len: usize, d: usize, visit: &mut impl FnMut(&[usize])) {
    fn rec(len: usize, d: usize, used: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
        if used.len() == d {
            visit(used);
            return;
        }
        for i in 0..len {
            if !used.contains(&i) {
                used.push(i);
                rec(len, d, used, visit);
                used.pop();
            }
        }
    }
    rec(len, d, &mut Vec::with_capacity(d), visit);
}

impl SpineKernel {
    pub fn build(model: &Model, psi: &Psi) -> Result<Self> {
        let psi = psi.values(model)?;
        let n = model.type_count();
        let max_degree = model.max_brood();

        let mut moment = vec![vec![0.0; n]; max_degree + 1];
        for x in 0..n {
            moment[0][x] = 1.0;
            for atom in model.atoms(x) {
                let e = elementary_symmetric(atom.children.iter().map(|&c| psi[c]), max_degree);
                for d in 1..=max_degree {
                    moment[d][x] += atom.prob * factorial(d) * e[d];
                }
            }
        }

        let mut chi_weight = Vec::with_capacity(max_degree + 1);
        let mut planar_weight = Vec::with_capacity(max_degree + 1);
        for d in 0..=max_degree {
            let size = n.pow(d as u32);
            let mut distinct = vec![vec![0.0; size]; n];
            let mut planar = vec![vec![0.0; size]; n];
            for x in 0..n {
                for atom in model.planar_atoms(x) {
                    let kids = &atom.children;
                    for_each_distinct_tuple(kids.len(), d, &mut |idx| {
                        let mut flat = 0;
                        let mut w = atom.prob;
                        for &i in idx {
                            flat = flat * n + kids[i];
                            w *= psi[kids[i]];
                        }
                        distinct[x][flat] += w;
                        if idx.windows(2).all(|p| p[0] < p[1]) {
                            planar[x][flat] += w;
                        }
                    });
                }
            }
            chi_weight.push(distinct);
            planar_weight.push(planar);
        }

        let chi: Vec<Vec<Vec<f64>>> = chi_weight
            .iter()
            .enumerate()
            .map(|(d, rows)| {
                rows.iter()
                    .enumerate()
                    .map(|(x, row)| {
                        let m = moment[d][x];
                        row.iter().map(|w| if m > 0.0 { w / m } else { 0.0 }).collect()
                    })
                    .collect()
            })
            .collect();
        let growth = (0..n).map(|x| moment[1][x] / psi[x]).collect();
        let transition = if max_degree >= 1 {
            chi[1].clone()
        } else {
            vec![vec![0.0; n]; n]
        };
        Ok(SpineKernel {
            type_count: n,
            psi,
            max_degree,
            moment,
            growth,
            transition,
            chi_weight,
            chi,
            planar_weight,
        })
    }

    pub fn type_count(&self) -> usize {
        self.type_count
    }

    pub fn psi(&self) -> &[f64] {
        &self.psi
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// `m_d(x)`; zero beyond the largest brood.
    pub fn moment(&self, d: usize, x: usize) -> f64 {
        self.moment.get(d).map_or(0.0, |row| row[x])
    }

    /// `λ(x) = m_1(x) / ψ(x)`.
    pub fn growth(&self, x: usize) -> f64 {
        self.growth[x]
    }

    pub fn transition(&self, x: usize, y: usize) -> f64 {
        self.transition[x][y]
    }

    /// Joint law of the types of `d` distinct children sampled under the
    /// `m_d`-biased offspring law, as a flat tensor over `E^d`.
    pub fn chi(&self, d: usize, x: usize) -> &[f64] {
        &self.chi[d][x]
    }

    pub fn chi_weight(&self, d: usize, x: usize) -> &[f64] {
        &self.chi_weight[d][x]
    }

    /// Unnormalized law of the types of `d` children taken in planar order.
    /// Its total mass is `m_d(x) / d!`.
    pub fn planar_weight(&self, d: usize, x: usize) -> &[f64] {
        &self.planar_weight[d][x]
    }

    /// `planar_weight` normalized to a probability, or zero where `m_d = 0`.
    pub fn planar_chi(&self, d: usize, x: usize) -> Vec<f64> {
        let mass = self.moment(d, x) / factorial(d);
        self.planar_weight[d][x]
            .iter()
            .map(|w| if mass > 0.0 { w / mass } else { 0.0 })
            .collect()
    }

    pub fn transition_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.type_count, self.type_count, |x, y| self.transition[x][y])
    }

    /// `B[x][y] = λ(x) P(x, y)`, the weight of one step along a branch.
    pub fn segment_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.type_count, self.type_count, |x, y| {
            self.growth[x] * self.transition[x][y]
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("kernel serializes")
    }

    /// The bias `Δ_k` on a marked tree, evaluated from its product formula
    /// after cancelling the `λ` factors of leaves and branch points.
    pub fn delta(&self, tree: &MarkedTree) -> f64 {
        (0..tree.tree.len())
            .map(|i| {
                let x = tree.marks[i];
                match tree.tree.degree(i) as usize {
                    0 => 1.0 / self.psi[x],
                    1 => self.growth[x],
                    d => self.moment(d, x) / (factorial(d) * self.psi[x]),
                }
            })
            .product()
    }
}

/// Free-function form of [`SpineKernel::build`].
pub fn build_kernel(model: &Model, psi: &Psi) -> Result<SpineKernel> {
    SpineKernel::build(model, psi)
}

/// Free-function form of [`SpineKernel::delta`].
pub fn delta_k(kernel: &SpineKernel, tree: &MarkedTree) -> f64 {
    kernel.delta(tree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::BroodOrder;
    use crate::tree::{decode_heights, PlanarTree, TreeShape};

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12
    }

    #[test]
    fn elementary_symmetric_small_case() {
        let e = elementary_symmetric([1.0, 1.0, 2.0], 3);
        assert_eq!(e, vec![1.0, 4.0, 5.0, 2.0]);
        // 2!·e_2(1,1,2) = 10, the ordered distinct pair sum.
        let mut direct = 0.0;
        let w = [1.0, 1.0, 2.0];
        for_each_distinct_tuple(3, 2, &mut |idx| direct += w[idx[0]] * w[idx[1]]);
        assert_eq!(direct, 10.0);
        assert_eq!(2.0 * e[2], direct);
    }

    #[test]
    fn binary_gw_unit_kernel() {
        let k = SpineKernel::build(&Model::binary_galton_watson(), &Psi::Unit).unwrap();
        assert!(close(k.growth(0), 1.0));
        assert!(close(k.moment(2, 0), 1.0));
        assert!(close(k.transition(0, 0), 1.0));
        assert_eq!(k.moment(3, 0), 0.0);
    }

    #[test]
    fn symmetric_two_type_chi() {
        let k = SpineKernel::build(&Model::symmetric_two_type(), &Psi::Harmonic).unwrap();
        for x in 0..2 {
            assert!(close(k.growth(x), 1.0));
            let chi = k.chi(2, x);
            // Tuples (A,A), (A,B), (B,A), (B,B).
            assert!(close(chi[1], 0.5) && close(chi[2], 0.5));
            assert_eq!(chi[0] + chi[3], 0.0);
            let planar = k.planar_chi(2, x);
            for (a, b) in planar.iter().zip(chi) {
                assert!(close(*a, *b));
            }
        }
    }

    #[test]
    fn planar_order_breaks_symmetry() {
        let m = Model::symmetric_two_type().reordered(BroodOrder::Planar);
        let k = SpineKernel::build(&m, &Psi::Unit).unwrap();
        assert_eq!(k.planar_chi(2, 0), vec![0.0, 1.0, 0.0, 0.0]);
        assert!(close(k.chi(2, 0)[2], 0.5));
    }

    #[test]
    fn rows_sum_to_one() {
        let m = Model::from_named(
            &["A", "B"],
            &[
                &[(0.5, &[]), (0.25, &["A", "B"]), (0.25, &["A"])],
                &[(0.5, &["A", "A", "B"]), (0.5, &[])],
            ],
        )
        .unwrap();
        for psi in [Psi::Unit, Psi::Harmonic, Psi::Custom(vec![0.3, 2.0])] {
            let k = SpineKernel::build(&m, &psi).unwrap();
            for x in 0..2 {
                let row: f64 = (0..2).map(|y| k.transition(x, y)).sum();
                assert!(close(row, 1.0));
                for d in 1..=k.max_degree() {
                    let s: f64 = k.chi(d, x).iter().sum();
                    assert!(s == 0.0 || close(s, 1.0), "d={d} x={x} sum={s}");
                    let total: f64 = k.chi_weight(d, x).iter().sum();
                    assert!((total - k.moment(d, x)).abs() < 1e-12);
                }
            }
        }
        let h = SpineKernel::build(&m, &Psi::Harmonic).unwrap();
        assert!((h.growth(0) - 1.0).abs() < 1e-10 && (h.growth(1) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_nonpositive_psi() {
        let m = Model::symmetric_two_type();
        assert!(matches!(
            SpineKernel::build(&m, &Psi::Custom(vec![1.0, 0.0])),
            Err(Error::NonPositivePsi { ty: 1, .. })
        ));
        assert!(SpineKernel::build(&m, &Psi::Custom(vec![1.0])).is_err());
    }

    #[test]
    fn delta_examples() {
        let m = Model::binary_galton_watson();
        let k = SpineKernel::build(&m, &Psi::Unit).unwrap();
        let single = MarkedTree::new(PlanarTree::singleton(), vec![0]).unwrap();
        assert!(close(delta_k(&k, &single), 1.0));
        let cherry = decode_heights(&TreeShape::new(vec![1, 1], vec![0]).unwrap()).unwrap();
        let cherry = MarkedTree::new(cherry, vec![0; 3]).unwrap();
        assert!(close(delta_k(&k, &cherry), 0.5));

        let custom = SpineKernel::build(&Model::symmetric_two_type(), &Psi::Custom(vec![2.0, 0.5])).unwrap();
        let one = MarkedTree::new(PlanarTree::singleton(), vec![1]).unwrap();
        assert!(close(custom.delta(&one), 2.0));
        let path = MarkedTree::new(PlanarTree::path(3), vec![0, 1, 0, 1]).unwrap();
        let h = SpineKernel::build(&Model::symmetric_two_type(), &Psi::Harmonic).unwrap();
        assert!(close(h.delta(&path), 1.0));
    }

    #[test]
    fn kernel_dumps_json() {
        let k = SpineKernel::build(&Model::binary_galton_watson(), &Psi::Unit).unwrap();
        let v: serde_json::Value = serde_json::from_str(&k.to_json()).unwrap();
        assert_eq!(v["moment"][2][0], 1.0);
    }
}
