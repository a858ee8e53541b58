//! Experiment configuration: one JSON file naming a model and holding
//! optional parameter blocks for each subcommand.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use treemoments::limits::{ScalingPath, DEFAULT_DEPTH_CUTOFF};
use treemoments::process::{Model, DEFAULT_OUTCOME_CAP};
use treemoments::spine::Psi;

use crate::error::CliError;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Model file, relative to the config file.
    pub model: PathBuf,
    /// Root type name; the first declared type when absent.
    #[serde(default)]
    pub x0: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Output file, relative to the working directory. `--out` wins.
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub simulate: SimulateParams,
    #[serde(default)]
    pub verify_m2f: VerifyParams,
    #[serde(default)]
    pub moments: MomentParams,
    #[serde(default)]
    pub convergence: ConvergenceParams,
    #[serde(default)]
    pub survival: SurvivalParams,
    #[serde(default)]
    pub cpp: CppParams,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateParams {
    pub generations: usize,
    pub replicas: u64,
}

impl Default for SimulateParams {
    fn default() -> Self {
        SimulateParams {
            generations: 6,
            replicas: 10,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyParams {
    pub k: Vec<usize>,
    pub radius: Vec<u32>,
    pub psi: Vec<Psi>,
    pub tolerance: f64,
    /// Cells whose enumeration exceeds this many outcomes are skipped.
    pub outcome_cap: u64,
}

impl Default for VerifyParams {
    fn default() -> Self {
        VerifyParams {
            k: vec![1, 2, 3],
            radius: vec![1, 2, 3],
            psi: vec![Psi::Unit, Psi::Harmonic],
            tolerance: 1e-9,
            outcome_cap: DEFAULT_OUTCOME_CAP,
        }
    }
}

/// Discrete test functionals selectable from a config.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscreteFunctionalKind {
    /// `1{height ≤ radius}`.
    HeightIndicator,
    /// A left comb of leaf and stem weights; the only kind the recursive
    /// path accepts.
    Comb,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentPath {
    Bruteforce,
    M2f,
    Recursive,
}

impl MomentPath {
    pub fn label(self) -> &'static str {
        match self {
            MomentPath::Bruteforce => "bruteforce",
            MomentPath::M2f => "m2f",
            MomentPath::Recursive => "recursive",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MomentParams {
    pub k: Vec<usize>,
    pub radius: Vec<u32>,
    pub psi: Psi,
    pub functional: DiscreteFunctionalKind,
    pub paths: Vec<MomentPath>,
}

impl Default for MomentParams {
    fn default() -> Self {
        MomentParams {
            k: vec![1, 2],
            radius: vec![1, 2, 3],
            psi: Psi::Harmonic,
            functional: DiscreteFunctionalKind::Comb,
            paths: vec![MomentPath::Bruteforce, MomentPath::M2f, MomentPath::Recursive],
        }
    }
}

/// Test functionals of continuous shapes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContinuousFunctionalKind {
    /// `1{height ≤ radius}`.
    HeightIndicator,
    /// Constant one.
    One,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergenceParams {
    pub k: usize,
    pub radius: f64,
    pub n_grid: Vec<u32>,
    pub paths: Vec<ScalingPath>,
    pub functional: ContinuousFunctionalKind,
    /// Midpoint-rule resolution of the limit integral. Ignored when
    /// `mc_samples` is set.
    pub grid_points: usize,
    pub mc_samples: Option<u64>,
    pub kolmogorov_grid: Vec<usize>,
}

impl Default for ConvergenceParams {
    fn default() -> Self {
        ConvergenceParams {
            k: 1,
            radius: 1.0,
            n_grid: vec![10, 30, 100],
            paths: vec![ScalingPath::Rescaled, ScalingPath::Ultrametric],
            functional: ContinuousFunctionalKind::HeightIndicator,
            grid_points: 400,
            mc_samples: None,
            kolmogorov_grid: vec![10, 100, 1000],
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SurvivalParams {
    pub n_grid: Vec<usize>,
}

impl Default for SurvivalParams {
    fn default() -> Self {
        SurvivalParams {
            n_grid: vec![10, 100, 1000, 10_000],
        }
    }
}

/// Test functions of the distance matrix of sampled points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiKind {
    One,
    /// All pairwise distances between sampled points exceed `threshold`.
    Separated {
        threshold: f64,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CppParams {
    pub k: Vec<usize>,
    pub phi: PhiKind,
    pub samples: u64,
    pub cutoff: f64,
    pub grid_points: usize,
    /// A row fails when the sampler is further than this many standard
    /// errors from the formula.
    pub max_z: f64,
}

impl Default for CppParams {
    fn default() -> Self {
        CppParams {
            k: vec![1, 2],
            phi: PhiKind::One,
            samples: 100_000,
            cutoff: DEFAULT_DEPTH_CUTOFF,
            grid_points: 400,
            max_z: 3.0,
        }
    }
}

/// A parsed config together with its model.
pub struct Loaded {
    pub config: ExperimentConfig,
    pub model: Model,
    pub x0: usize,
    /// SHA-256 of the config and model files, in that order.
    pub hash: String,
}

pub fn load(path: &Path) -> Result<Loaded, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let config: ExperimentConfig = serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
    let model_path = path.parent().unwrap_or(Path::new(".")).join(&config.model);
    let model_text = fs::read_to_string(&model_path).map_err(|e| CliError::io(&model_path, e))?;
    let model = Model::from_json(&model_text)?;
    let x0 = match &config.x0 {
        Some(name) => model.type_index(name)?,
        None => 0,
    };
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    hasher.update(model_text.as_bytes());
    let hash = hasher.finalize().iter().map(|b| format!("{b:02x}")).collect();
    Ok(Loaded {
        config,
        model,
        x0,
        hash,
    })
}
