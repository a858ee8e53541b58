//! Finite-n moments against their scaling limits.

use serde::{Deserialize, Serialize};

use super::{lambda_k_integral, lambda_tilde_k_integral, Integration};
use crate::error::Result;
use crate::moments::{rescaled_moment, ultrametric_moment, ContinuousFunctional};
use crate::process::{eigenpair, kolmogorov_profile, sigma_squared, KolmogorovProfile, Model};

/// Which rescaled moment a row reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingPath {
    /// `n · n^{−2k} M^k[F(τ/n)]` against `Λ_k`.
    Rescaled,
    /// `n · n^{−k} M^k[F(τ/n); leaves at generation n]` against `Λ̃_k`.
    Ultrametric,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergenceSettings {
    pub k: usize,
    pub x0: usize,
    /// Support radius of `F` for the rescaled path.
    pub radius: f64,
    pub n_grid: Vec<u32>,
    pub paths: Vec<ScalingPath>,
    pub integration: Integration,
    pub kolmogorov_grid: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: u32,
    pub observed: f64,
    /// Absent when the model is not critical.
    pub limit: Option<f64>,
    pub rel_error: Option<f64>,
    pub path: ScalingPath,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub perron: f64,
    pub critical: bool,
    pub sigma2: f64,
    pub h: Vec<f64>,
    pub pi: Vec<f64>,
    pub rows: Vec<ConvergenceRow>,
    pub kolmogorov: KolmogorovProfile,
}

/// Evaluates both sides of the moment limits on `settings.n_grid`:
/// `h(x0) (Σ²/2)^{k−1} ∫ E[F(θ, X)] Λ_k(dθ)` for the rescaled path and the
/// same with `Λ̃_k` for the ultrametric one. Limits are suppressed for
/// non-critical models.
pub fn convergence_report(
    model: &Model,
    f: &dyn ContinuousFunctional,
    settings: &ConvergenceSettings,
) -> Result<ConvergenceReport> {
    let eig = eigenpair(model)?;
    let sigma2 = sigma_squared(model, &eig);
    let critical = eig.is_critical();
    let k = settings.k;
    let prefactor = eig.h[settings.x0] * (sigma2 / 2.0).powi(k as i32 - 1);
    let limit_for = |path: ScalingPath| {
        critical.then(|| {
            let integral = match path {
                ScalingPath::Rescaled => lambda_k_integral(k, f, &eig.pi, settings.radius, settings.integration),
                ScalingPath::Ultrametric => lambda_tilde_k_integral(k, f, &eig.pi, settings.integration),
            };
            prefactor * integral.value
        })
    };
    let limits: Vec<(ScalingPath, Option<f64>)> = settings.paths.iter().map(|&p| (p, limit_for(p))).collect();

    let mut rows = Vec::new();
    for &n in &settings.n_grid {
        for &(path, limit) in &limits {
            let observed = f64::from(n)
                * match path {
                    ScalingPath::Rescaled => rescaled_moment(model, settings.x0, k, f, settings.radius, n)?,
                    ScalingPath::Ultrametric => ultrametric_moment(model, settings.x0, k, f, n)?,
                };
            rows.push(ConvergenceRow {
                n,
                observed,
                limit,
                rel_error: limit.map(|l| (observed - l).abs() / l.abs()),
                path,
            });
        }
    }
    let kolmogorov = kolmogorov_profile(model, &settings.kolmogorov_grid)?;
    Ok(ConvergenceReport {
        perron: eig.perron,
        critical,
        sigma2,
        h: eig.h,
        pi: eig.pi,
        rows,
        kolmogorov,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::ContinuousShape;

    fn settings(k: usize, n_grid: Vec<u32>, paths: Vec<ScalingPath>) -> ConvergenceSettings {
        ConvergenceSettings {
            k,
            x0: 0,
            radius: 1.0,
            n_grid,
            paths,
            integration: Integration::Grid { points_per_axis: 400 },
            kolmogorov_grid: vec![10, 100],
        }
    }

    #[test]
    fn binary_gw_rows() {
        let below = |s: &ContinuousShape, _: &[usize]| f64::from(s.height() <= 1.0);
        let r = convergence_report(
            &Model::binary_galton_watson(),
            &below,
            &settings(1, vec![100], vec![ScalingPath::Rescaled]),
        )
        .unwrap();
        assert!(r.critical);
        let row = &r.rows[0];
        assert!((row.observed - 1.01).abs() < 1e-9);
        assert!(row.rel_error.unwrap() <= 0.02);

        let one = |_: &ContinuousShape, _: &[usize]| 1.0;
        let r = convergence_report(
            &Model::binary_galton_watson(),
            &one,
            &settings(2, vec![10, 100], vec![ScalingPath::Ultrametric]),
        )
        .unwrap();
        for row in &r.rows {
            assert!((row.observed - 0.5).abs() < 1e-9);
            assert!(row.rel_error.unwrap() < 1e-9);
        }
    }

    #[test]
    fn subcritical_has_no_limits() {
        let m = Model::from_named(&["A"], &[&[(0.75, &[]), (0.25, &["A", "A"])]]).unwrap();
        let one = |_: &ContinuousShape, _: &[usize]| 1.0;
        let r = convergence_report(&m, &one, &settings(1, vec![5], vec![ScalingPath::Ultrametric])).unwrap();
        assert!(!r.critical);
        assert!((r.perron - 0.5).abs() < 1e-12);
        assert!(r.rows[0].limit.is_none() && r.rows[0].rel_error.is_none());
        assert!(r.kolmogorov.limit.is_none());
    }
}
