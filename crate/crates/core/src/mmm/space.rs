//! Finite pointed marked metric measure spaces.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::DistanceMatrix;

/// Range-minimum table over a sampled path.
#[derive(Clone, Debug)]
struct SparseTable {
    levels: Vec<Vec<f64>>,
}

impl SparseTable {
    fn new(values: &[f64]) -> Self {
        let mut levels = vec![values.to_vec()];
        let mut width = 1;
        while 2 * width <= values.len() {
            let prev = levels.last().unwrap();
            let next = (0..prev.len() - width).map(|i| prev[i].min(prev[i + width])).collect();
            levels.push(next);
            width *= 2;
        }
        SparseTable { levels }
    }

    /// Minimum over `lo..=hi`.
    fn min(&self, lo: usize, hi: usize) -> f64 {
        let len = hi - lo + 1;
        let level = (usize::BITS - 1 - len.leading_zeros()) as usize;
        let row = &self.levels[level];
        row[lo].min(row[hi + 1 - (1 << level)])
    }
}

/// Distances read off a path `f` by `d(u, v) = f(u) + f(v) − 2 min_{[u,v]} f`.
///
/// Covers both contour functions of excursions and Euler tours of planar
/// trees, whose graph distance has exactly this form.
#[derive(Clone, Debug)]
pub struct ContourMetric {
    path: Vec<f64>,
    positions: Vec<usize>,
    table: OnceLock<SparseTable>,
}

impl ContourMetric {
    fn distance(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        let (a, b) = (self.positions[i], self.positions[j]);
        let (lo, hi) = (a.min(b), a.max(b));
        let m = self.table.get_or_init(|| SparseTable::new(&self.path)).min(lo, hi);
        self.path[a] + self.path[b] - 2.0 * m
    }
}

#[derive(Clone, Debug)]
pub enum Metric {
    /// Row-major `n × n` matrix.
    Dense(Vec<f64>),
    Contour(ContourMetric),
}

/// A finite pointed marked metric measure space.
#[derive(Clone, Debug)]
pub struct FiniteMmmSpace {
    root: usize,
    metric: Metric,
    mass: Vec<f64>,
    marks: Vec<usize>,
}

/// Serialized form: the metric is always written densely.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceJson {
    points: usize,
    root: usize,
    dist: Vec<f64>,
    mass: Vec<f64>,
    mark: Vec<usize>,
}

const VALIDATION_TOL: f64 = 1e-9;

impl FiniteMmmSpace {
    /// Builds a space from a row-major distance matrix, checking the metric
    /// axioms.
    pub fn from_dense(dist: Vec<f64>, root: usize, mass: Vec<f64>, marks: Vec<usize>) -> Result<Self> {
        let n = mass.len();
        if dist.len() != n * n || marks.len() != n || root >= n {
            return Err(Error::InvalidTree(format!(
                "space with {n} points needs {} distances, {n} marks and a root below {n}",
                n * n
            )));
        }
        let space = FiniteMmmSpace {
            root,
            metric: Metric::Dense(dist),
            mass,
            marks,
        };
        space.check_masses()?;
        if !space.is_metric(VALIDATION_TOL) {
            return Err(Error::InvalidTree("distances violate the metric axioms".into()));
        }
        Ok(space)
    }

    pub(crate) fn from_path(
        path: Vec<f64>,
        positions: Vec<usize>,
        root: usize,
        mass: Vec<f64>,
        marks: Vec<usize>,
    ) -> Self {
        debug_assert!(positions.iter().all(|&p| p < path.len()));
        FiniteMmmSpace {
            root,
            metric: Metric::Contour(ContourMetric {
                path,
                positions,
                table: OnceLock::new(),
            }),
            mass,
            marks,
        }
    }

    fn check_masses(&self) -> Result<()> {
        if self.mass.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::InvalidTree("masses must be finite and nonnegative".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        match &self.metric {
            Metric::Dense(d) => d[i * self.len() + j],
            Metric::Contour(c) => c.distance(i, j),
        }
    }

    pub fn root_distance(&self, i: usize) -> f64 {
        self.distance(self.root, i)
    }

    pub fn mass(&self, i: usize) -> f64 {
        self.mass[i]
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn mark(&self, i: usize) -> usize {
        self.marks[i]
    }

    pub fn marks(&self) -> &[usize] {
        &self.marks
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// Points of positive mass.
    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.mass[i] > 0.0).collect()
    }

    /// Distances between the root (row 0) and `points`.
    pub fn distance_matrix(&self, points: &[usize]) -> DistanceMatrix {
        let at = |i: usize| if i == 0 { self.root } else { points[i - 1] };
        DistanceMatrix::from_fn(points.len(), |i, j| self.distance(at(i), at(j)))
    }

    /// Zero diagonal, symmetry, nonnegativity and the triangle inequality.
    /// Cubic in the number of points.
    pub fn is_metric(&self, tol: f64) -> bool {
        let n = self.len();
        for i in 0..n {
            if self.distance(i, i).abs() > tol {
                return false;
            }
            for j in 0..n {
                let d = self.distance(i, j);
                if d < -tol || (d - self.distance(j, i)).abs() > tol {
                    return false;
                }
                if (0..n).any(|p| d > self.distance(i, p) + self.distance(p, j) + tol) {
                    return false;
                }
            }
        }
        true
    }

    /// The closed ball of radius `radius` around the root, as a space of its
    /// own. The root is always kept; masses are untouched.
    pub fn restrict_ball(&self, radius: f64) -> FiniteMmmSpace {
        let kept: Vec<usize> = (0..self.len())
            .filter(|&i| i == self.root || self.root_distance(i) <= radius)
            .collect();
        self.subspace(&kept)
    }

    /// The space induced on `kept`, which must contain the root.
    pub fn subspace(&self, kept: &[usize]) -> FiniteMmmSpace {
        let root = kept
            .iter()
            .position(|&i| i == self.root)
            .expect("a subspace keeps the root");
        let metric = match &self.metric {
            Metric::Dense(_) => {
                let m = kept.len();
                let mut d = vec![0.0; m * m];
                for (a, &i) in kept.iter().enumerate() {
                    for (b, &j) in kept.iter().enumerate() {
                        d[a * m + b] = self.distance(i, j);
                    }
                }
                Metric::Dense(d)
            }
            Metric::Contour(c) => Metric::Contour(ContourMetric {
                path: c.path.clone(),
                positions: kept.iter().map(|&i| c.positions[i]).collect(),
                table: c.table.clone(),
            }),
        };
        FiniteMmmSpace {
            root,
            metric,
            mass: kept.iter().map(|&i| self.mass[i]).collect(),
            marks: kept.iter().map(|&i| self.marks[i]).collect(),
        }
    }

    /// Largest root distance over the support; zero for an empty measure.
    pub fn height(&self) -> f64 {
        self.support()
            .into_iter()
            .map(|i| self.root_distance(i))
            .fold(0.0, f64::max)
    }

    /// Smallest mass of a closed `delta`-ball centred on the support;
    /// infinite for an empty measure.
    pub fn lower_mass(&self, delta: f64) -> f64 {
        let support = self.support();
        support
            .iter()
            .map(|&x| {
                support
                    .iter()
                    .filter(|&&y| self.distance(x, y) <= delta)
                    .map(|&y| self.mass[y])
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let n = self.len();
        let mut dist = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                dist.push(self.distance(i, j));
            }
        }
        serde_json::to_value(SpaceJson {
            points: n,
            root: self.root,
            dist,
            mass: self.mass.clone(),
            mark: self.marks.clone(),
        })
        .expect("space serializes")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let raw: SpaceJson = serde_json::from_value(value.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        if raw.mass.len() != raw.points {
            return Err(Error::InvalidTree(format!(
                "{} masses for {} points",
                raw.mass.len(),
                raw.points
            )));
        }
        Self::from_dense(raw.dist, raw.root, raw.mass, raw.mark)
    }
}
