use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PROB_TOLERANCE: f64 = 1e-12;

/// One support point of an offspring law: with probability `prob`, the
/// parent has exactly `children` (types, in planar order).
#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub prob: f64,
    pub children: Vec<usize>,
}

/// How the listed children of an atom are placed in planar order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BroodOrder {
    /// The brood is a point process: children are labelled in a uniformly
    /// random order.
    #[default]
    Exchangeable,
    /// Children are labelled in the listed order.
    Planar,
}

/// A finite-type branching mechanism: for every type, a finitely supported
/// offspring law.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    types: Vec<String>,
    order: BroodOrder,
    offspring: Vec<Vec<Atom>>,
    planar: Vec<Vec<Atom>>,
    cumulative: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelJson {
    types: Vec<String>,
    #[serde(default)]
    order: BroodOrder,
    offspring: BTreeMap<String, Vec<AtomJson>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomJson {
    prob: f64,
    children: Vec<String>,
}

impl Model {
    /// Validates and normalizes an offspring table, with exchangeable broods.
    ///
    /// Atoms with the same brood are merged and zero-probability atoms are
    /// dropped, so every realization has a unique atom.
    pub fn new(types: Vec<String>, offspring: Vec<Vec<Atom>>) -> Result<Self> {
        Model::with_order(types, offspring, BroodOrder::Exchangeable)
    }

    pub fn with_order(types: Vec<String>, offspring: Vec<Vec<Atom>>, order: BroodOrder) -> Result<Self> {
        if types.is_empty() {
            return Err(Error::InvalidModel("no types".into()));
        }
        if offspring.len() != types.len() {
            return Err(Error::InvalidModel(format!(
                "{} types but {} offspring laws",
                types.len(),
                offspring.len()
            )));
        }
        for (i, a) in types.iter().enumerate() {
            if types[..i].contains(a) {
                return Err(Error::InvalidModel(format!("duplicate type {a:?}")));
            }
        }
        let mut merged = Vec::with_capacity(types.len());
        for (x, atoms) in offspring.into_iter().enumerate() {
            let mut law: Vec<Atom> = Vec::new();
            let mut total = 0.0;
            for mut atom in atoms {
                if !(0.0..=1.0).contains(&atom.prob) {
                    return Err(Error::InvalidModel(format!(
                        "type {}: probability {} outside [0, 1]",
                        types[x], atom.prob
                    )));
                }
                if let Some(&c) = atom.children.iter().find(|&&c| c >= types.len()) {
                    return Err(Error::InvalidModel(format!(
                        "type {}: unknown child type index {c}",
                        types[x]
                    )));
                }
                total += atom.prob;
                if atom.prob == 0.0 {
                    continue;
                }
                if order == BroodOrder::Exchangeable {
                    atom.children.sort_unstable();
                }
                match law.iter_mut().find(|a| a.children == atom.children) {
                    Some(a) => a.prob += atom.prob,
                    None => law.push(atom),
                }
            }
            if (total - 1.0).abs() > PROB_TOLERANCE {
                return Err(Error::InvalidModel(format!(
                    "type {}: probabilities sum to {total}",
                    types[x]
                )));
            }
            merged.push(law);
        }
        let planar: Vec<Vec<Atom>> = match order {
            BroodOrder::Planar => merged.clone(),
            BroodOrder::Exchangeable => merged
                .iter()
                .map(|law| law.iter().flat_map(distinct_orderings).collect())
                .collect(),
        };
        let cumulative = planar
            .iter()
            .map(|law| {
                law.iter()
                    .scan(0.0, |acc, a| {
                        *acc += a.prob;
                        Some(*acc)
                    })
                    .collect()
            })
            .collect();
        Ok(Model {
            types,
            order,
            offspring: merged,
            planar,
            cumulative,
        })
    }

    /// Builds a model from type names, with broods given by name.
    pub fn from_named(types: &[&str], offspring: &[&[(f64, &[&str])]]) -> Result<Self> {
        let names: Vec<String> = types.iter().map(|s| s.to_string()).collect();
        let mut laws = Vec::with_capacity(offspring.len());
        for atoms in offspring {
            let mut law = Vec::with_capacity(atoms.len());
            for &(prob, children) in atoms.iter() {
                let children = children.iter().map(|c| index_of(&names, c)).collect::<Result<_>>()?;
                law.push(Atom { prob, children });
            }
            laws.push(law);
        }
        Model::new(names, laws)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ModelJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let mut laws = Vec::with_capacity(raw.types.len());
        for name in &raw.types {
            let atoms = raw
                .offspring
                .get(name)
                .ok_or_else(|| Error::InvalidModel(format!("no offspring law for {name:?}")))?;
            let mut law = Vec::with_capacity(atoms.len());
            for a in atoms {
                let children = a
                    .children
                    .iter()
                    .map(|c| index_of(&raw.types, c))
                    .collect::<Result<_>>()?;
                law.push(Atom { prob: a.prob, children });
            }
            laws.push(law);
        }
        if let Some(extra) = raw.offspring.keys().find(|k| !raw.types.contains(k)) {
            return Err(Error::InvalidModel(format!(
                "offspring law for undeclared type {extra:?}"
            )));
        }
        Model::with_order(raw.types, laws, raw.order)
    }

    pub fn to_json(&self) -> String {
        let raw = ModelJson {
            types: self.types.clone(),
            order: self.order,
            offspring: self
                .types
                .iter()
                .zip(&self.offspring)
                .map(|(name, law)| {
                    let atoms = law
                        .iter()
                        .map(|a| AtomJson {
                            prob: a.prob,
                            children: a.children.iter().map(|&c| self.types[c].clone()).collect(),
                        })
                        .collect();
                    (name.clone(), atoms)
                })
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("model serializes")
    }

    /// Critical binary Galton–Watson: no child or two children, each with
    /// probability one half.
    pub fn binary_galton_watson() -> Self {
        Model::from_named(&["A"], &[&[(0.5, &[]), (0.5, &["A", "A"])]]).expect("valid preset")
    }

    /// Two types, each with no child or the ordered pair `(A, B)`, each with
    /// probability one half.
    pub fn symmetric_two_type() -> Self {
        Model::from_named(
            &["A", "B"],
            &[&[(0.5, &[]), (0.5, &["A", "B"])], &[(0.5, &[]), (0.5, &["A", "B"])]],
        )
        .expect("valid preset")
    }

    pub fn type_count(&self) -> usize {
        self.types.len()
    }

    pub fn types(&self) -> &[String] {
        &self.types
    }

    pub fn type_name(&self, x: usize) -> &str {
        &self.types[x]
    }

    pub fn type_index(&self, name: &str) -> Result<usize> {
        index_of(&self.types, name)
    }

    pub fn order(&self) -> BroodOrder {
        self.order
    }

    /// The same model with another brood order.
    pub fn reordered(&self, order: BroodOrder) -> Self {
        Model::with_order(self.types.clone(), self.offspring.clone(), order).expect("already validated")
    }

    /// The offspring law as given, after merging. With exchangeable broods
    /// each atom lists its children in sorted order.
    pub fn atoms(&self, x: usize) -> &[Atom] {
        &self.offspring[x]
    }

    /// The offspring law on planar (labelled) broods. Every atom is a
    /// distinct labelled brood; with exchangeable broods each listed brood
    /// is split over its distinct orderings.
    pub fn planar_atoms(&self, x: usize) -> &[Atom] {
        &self.planar[x]
    }

    /// Largest brood in the support of any offspring law.
    pub fn max_brood(&self) -> usize {
        self.offspring
            .iter()
            .flatten()
            .map(|a| a.children.len())
            .max()
            .unwrap_or(0)
    }

    /// Picks the planar atom of type `x` whose cumulative probability
    /// window contains `u ∈ [0, 1)`.
    pub(crate) fn atom_for(&self, x: usize, u: f64) -> &Atom {
        let cum = &self.cumulative[x];
        let i = cum.partition_point(|&c| c <= u).min(cum.len() - 1);
        &self.planar[x][i]
    }
}

/// Distinct permutations of a sorted brood, sharing the atom's mass
/// uniformly over all `b!` labellings.
fn distinct_orderings(atom: &Atom) -> Vec<Atom> {
    let mut perm = atom.children.clone();
    let mut out = Vec::new();
    loop {
        out.push(perm.clone());
        if !next_permutation(&mut perm) {
            break;
        }
    }
    let prob = atom.prob / out.len() as f64;
    out.into_iter().map(|children| Atom { prob, children }).collect()
}

pub(crate) fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).unwrap();
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

fn index_of(types: &[String], name: &str) -> Result<usize> {
    types
        .iter()
        .position(|t| t == name)
        .ok_or_else(|| Error::InvalidModel(format!("unknown type {name:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let text = r#"{"types":["A","B"],"offspring":{
            "A":[{"prob":0.5,"children":[]},{"prob":0.5,"children":["A","B"]}],
            "B":[{"prob":0.5,"children":[]},{"prob":0.5,"children":["A","B"]}]}}"#;
        let m = Model::from_json(text).unwrap();
        assert_eq!(m, Model::symmetric_two_type());
        assert_eq!(Model::from_json(&m.to_json()).unwrap(), m);
    }

    #[test]
    fn rejects_bad_models() {
        let bad = [
            r#"{"types":["A"],"offspring":{"A":[{"prob":0.4,"children":[]}]}}"#,
            r#"{"types":["A"],"offspring":{"A":[{"prob":1.0,"children":["C"]}]}}"#,
            r#"{"types":["A"],"offspring":{}}"#,
            r#"{"types":["A"],"offspring":{"A":[{"prob":1.0,"children":[]}],"B":[]}}"#,
            r#"{"types":["A"],"offspring":{"A":[{"prob":1.0,"children":[]}]},"x":1}"#,
            r#"{"types":["A"],"offspring":{"A":[{"prob":1.0,"children":[],"w":2}]}}"#,
            r#"{"types":["A"],"offspring":{"A":[{"prob":1.5,"children":[]},{"prob":-0.5,"children":["A"]}]}}"#,
            r#"{"types":[],"offspring":{}}"#,
        ];
        for text in bad {
            assert!(Model::from_json(text).is_err(), "{text}");
        }
    }

    #[test]
    fn merges_duplicate_broods_and_drops_null_atoms() {
        let m = Model::from_named(
            &["A", "B"],
            &[
                &[(0.25, &["A"]), (0.25, &["A"]), (0.0, &["B"]), (0.5, &[])],
                &[(1.0, &[])],
            ],
        )
        .unwrap();
        assert_eq!(m.atoms(0).len(), 2);
        assert_eq!(m.atoms(0)[0].prob, 0.5);
        assert_eq!(m.max_brood(), 1);
    }

    #[test]
    fn exchangeable_broods_spread_over_orderings() {
        let m = Model::from_named(&["A", "B"], &[&[(1.0, &["B", "A", "A"])], &[(1.0, &[])]]).unwrap();
        assert_eq!(m.atoms(0)[0].children, vec![0, 0, 1]);
        let planar = m.planar_atoms(0);
        assert_eq!(planar.len(), 3);
        assert!(planar.iter().all(|a| (a.prob - 1.0 / 3.0).abs() < 1e-15));
        let p = m.reordered(BroodOrder::Planar);
        assert_eq!(p.planar_atoms(0), p.atoms(0));
        // (A, B) and (B, A) are one point process.
        let merged =
            Model::from_named(&["A", "B"], &[&[(0.5, &["A", "B"]), (0.5, &["B", "A"])], &[(1.0, &[])]]).unwrap();
        assert_eq!(merged.atoms(0).len(), 1);
        assert_eq!(merged.planar_atoms(0).len(), 2);
    }

    #[test]
    fn order_survives_json() {
        let p = Model::symmetric_two_type().reordered(BroodOrder::Planar);
        assert_eq!(Model::from_json(&p.to_json()).unwrap(), p);
    }

    #[test]
    fn atom_lookup_covers_unit_interval() {
        let m = Model::binary_galton_watson();
        assert!(m.atom_for(0, 0.0).children.is_empty());
        assert!(m.atom_for(0, 0.4999).children.is_empty());
        assert_eq!(m.atom_for(0, 0.5).children.len(), 2);
        assert_eq!(m.atom_for(0, 0.999_999).children.len(), 2);
    }
}
