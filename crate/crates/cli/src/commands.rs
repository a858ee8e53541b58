//! One function per subcommand. Each renders its rows, writes them, and
//! only then reports a model-property or verification failure, so failing
//! runs still leave their table behind.

use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use treemoments::limits::{
    convergence_report, cpp_moment, cpp_monomial_mc, ConvergenceRow, ConvergenceSettings, Integration, LimitQuery,
};
use treemoments::moments::{moment_bruteforce_capped, moment_m2f, moment_recursive, MomentQuery};
use treemoments::process::{
    eigenpair, kolmogorov_profile, replica_rng, sigma_squared, simulate_with, Model, DEFAULT_OUTCOME_CAP,
};

use crate::config::{DiscreteFunctionalKind, Loaded, MomentPath};
use crate::error::CliError;
use crate::functionals;
use crate::output::{self, Format, Header};

/// Everything a subcommand needs besides its own parameters.
pub struct Context {
    pub loaded: Loaded,
    pub command: String,
    pub seed: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
    /// Record wall-clock times. Off by default so reruns are byte-identical.
    pub timings: bool,
}

impl Context {
    fn model(&self) -> &Model {
        &self.loaded.model
    }

    fn header(&self) -> Header {
        Header {
            command: self.command.clone(),
            seed: self.seed,
            git_describe: crate::GIT_DESCRIBE.to_string(),
            config_sha256: self.loaded.hash.clone(),
        }
    }

    fn emit<R: Serialize>(&self, rows: &[R], summary: Value) -> Result<(), CliError> {
        let bytes = output::render(&self.header(), self.format, rows, &summary)?;
        output::write(self.out.as_deref(), &bytes)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelCheckRow {
    #[serde(rename = "type")]
    pub type_name: String,
    pub h: f64,
    pub pi: f64,
    pub perron: f64,
    pub sigma2: f64,
    pub critical: bool,
}

pub fn model_check(ctx: &Context) -> Result<(), CliError> {
    let model = ctx.model();
    let eig = eigenpair(model)?;
    let sigma2 = sigma_squared(model, &eig);
    let critical = eig.is_critical();
    let rows: Vec<ModelCheckRow> = (0..model.type_count())
        .map(|x| ModelCheckRow {
            type_name: model.type_name(x).to_string(),
            h: eig.h[x],
            pi: eig.pi[x],
            perron: eig.perron,
            sigma2,
            critical,
        })
        .collect();
    let summary = json!({
        "perron": eig.perron,
        "sigma2": sigma2,
        "h": eig.h,
        "pi": eig.pi,
        "primitive": true,
        "critical": critical,
    });
    ctx.emit(&rows, summary)?;
    if critical {
        Ok(())
    } else {
        Err(CliError::ModelProperty(format!(
            "model is not critical: Perron eigenvalue {}",
            eig.perron
        )))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationRow {
    pub replica: u64,
    pub vertices: usize,
    pub height: usize,
    pub leaves: usize,
    /// Canonical parenthesised form.
    pub tree: String,
    /// Type names in preorder, space separated.
    pub marks: String,
}

pub fn simulate(ctx: &Context) -> Result<(), CliError> {
    let p = &ctx.loaded.config.simulate;
    let model = ctx.model();
    let rows: Vec<SimulationRow> = (0..p.replicas)
        .map(|r| {
            let t = simulate_with(model, ctx.loaded.x0, p.generations, &mut replica_rng(ctx.seed, r));
            let marks: Vec<&str> = t.marks.iter().map(|&m| model.type_name(m)).collect();
            SimulationRow {
                replica: r,
                vertices: t.tree.len(),
                height: t.tree.height(),
                leaves: t.tree.leaf_count(),
                tree: t.tree.to_canonical_string(),
                marks: marks.join(" "),
            }
        })
        .collect();
    ctx.emit(&rows, json!({ "generations": p.generations, "replicas": p.replicas }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyRow {
    pub k: usize,
    pub radius: u32,
    pub psi: String,
    pub x0: String,
    /// Absent when enumeration would exceed the outcome cap.
    pub bruteforce: Option<f64>,
    pub m2f: f64,
    pub recursive: f64,
    pub max_abs_diff: f64,
    /// `pass`, `fail`, or `skipped` when the enumeration was capped and
    /// only the two fast paths were compared.
    pub status: String,
}

pub fn verify_m2f(ctx: &Context) -> Result<(), CliError> {
    let p = &ctx.loaded.config.verify_m2f;
    let model = ctx.model();
    let mut rows = Vec::new();
    for &k in &p.k {
        let comb = functionals::comb(k);
        for &r in &p.radius {
            for psi in &p.psi {
                for x0 in 0..model.type_count() {
                    let functional = functionals::discrete(DiscreteFunctionalKind::Comb, k, r);
                    let q = MomentQuery::new(k, x0, psi.clone(), functional, r);
                    let bruteforce = match moment_bruteforce_capped(model, &q, r as usize, p.outcome_cap) {
                        Ok(v) => Some(v),
                        Err(treemoments::Error::EnumerationCap { .. }) => None,
                        Err(e) => return Err(e.into()),
                    };
                    let m2f = moment_m2f(model, &q)?;
                    let recursive = moment_recursive(model, &q, &comb)?;
                    let mut diff = (m2f - recursive).abs();
                    if let Some(b) = bruteforce {
                        diff = diff.max((b - m2f).abs()).max((b - recursive).abs());
                    }
                    let status = if diff > p.tolerance {
                        "fail"
                    } else if bruteforce.is_none() {
                        "skipped"
                    } else {
                        "pass"
                    };
                    rows.push(VerifyRow {
                        k,
                        radius: r,
                        psi: psi.label().to_string(),
                        x0: model.type_name(x0).to_string(),
                        bruteforce,
                        m2f,
                        recursive,
                        max_abs_diff: diff,
                        status: status.to_string(),
                    });
                }
            }
        }
    }
    let failures = rows.iter().filter(|r| r.status == "fail").count();
    let skipped = rows.iter().filter(|r| r.status == "skipped").count();
    ctx.emit(
        &rows,
        json!({ "cells": rows.len(), "failures": failures, "skipped": skipped, "tolerance": p.tolerance }),
    )?;
    if failures == 0 {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "{failures} of {} cells differ by more than {}",
            rows.len(),
            p.tolerance
        )))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentRecord {
    pub k: usize,
    /// Support radius, which is also the enumeration horizon.
    pub n: u32,
    pub psi: String,
    pub value: f64,
    pub path: String,
    /// Present only with `--timings`.
    pub runtime_ms: Option<u64>,
}

pub fn moments(ctx: &Context) -> Result<(), CliError> {
    let p = &ctx.loaded.config.moments;
    let model = ctx.model();
    if p.paths.contains(&MomentPath::Recursive) && p.functional != DiscreteFunctionalKind::Comb {
        return Err(CliError::Config("the recursive path needs the comb functional".into()));
    }
    let mut rows = Vec::new();
    for &k in &p.k {
        for &r in &p.radius {
            let q = MomentQuery::new(
                k,
                ctx.loaded.x0,
                p.psi.clone(),
                functionals::discrete(p.functional, k, r),
                r,
            );
            for &path in &p.paths {
                let start = Instant::now();
                let value = match path {
                    MomentPath::Bruteforce => moment_bruteforce_capped(model, &q, r as usize, DEFAULT_OUTCOME_CAP)?,
                    MomentPath::M2f => moment_m2f(model, &q)?,
                    MomentPath::Recursive => moment_recursive(model, &q, &functionals::comb(k))?,
                };
                rows.push(MomentRecord {
                    k,
                    n: r,
                    psi: p.psi.label().to_string(),
                    value,
                    path: path.label().to_string(),
                    runtime_ms: ctx.timings.then(|| start.elapsed().as_millis() as u64),
                });
            }
        }
    }
    ctx.emit(
        &rows,
        json!({ "functional": p.functional, "x0": model.type_name(ctx.loaded.x0) }),
    )
}

pub fn convergence(ctx: &Context) -> Result<(), CliError> {
    let p = &ctx.loaded.config.convergence;
    let integration = match p.mc_samples {
        Some(samples) => Integration::MonteCarlo {
            samples,
            seed: ctx.seed,
        },
        None => Integration::Grid {
            points_per_axis: p.grid_points,
        },
    };
    let settings = ConvergenceSettings {
        k: p.k,
        x0: ctx.loaded.x0,
        radius: p.radius,
        n_grid: p.n_grid.clone(),
        paths: p.paths.clone(),
        integration,
        kolmogorov_grid: p.kolmogorov_grid.clone(),
    };
    let f = functionals::continuous(p.functional, p.radius);
    let report = convergence_report(ctx.model(), &f, &settings)?;
    if !report.critical {
        log::warn!("model is not critical; limits are omitted");
    }
    let rows: Vec<ConvergenceRow> = report.rows.clone();
    let summary = json!({
        "perron": report.perron,
        "critical": report.critical,
        "sigma2": report.sigma2,
        "h": report.h,
        "pi": report.pi,
        "kolmogorov": report.kolmogorov,
    });
    ctx.emit(&rows, summary)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivalRow {
    pub n: usize,
    #[serde(rename = "type")]
    pub type_name: String,
    pub survival: f64,
    /// `n · P(Z_n > 0)`.
    pub scaled: f64,
    /// `2h/Σ²`, absent for non-critical models.
    pub limit: Option<f64>,
}

pub fn survival(ctx: &Context) -> Result<(), CliError> {
    let model = ctx.model();
    let profile = kolmogorov_profile(model, &ctx.loaded.config.survival.n_grid)?;
    let mut rows = Vec::new();
    for row in &profile.rows {
        for x in 0..model.type_count() {
            rows.push(SurvivalRow {
                n: row.n,
                type_name: model.type_name(x).to_string(),
                survival: row.survival[x],
                scaled: row.scaled[x],
                limit: profile.limit.as_ref().map(|l| l[x]),
            });
        }
    }
    ctx.emit(&rows, json!({ "limit": profile.limit }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CppRow {
    pub k: usize,
    pub sigma2: f64,
    pub mc: f64,
    pub stderr: f64,
    pub formula: f64,
    /// `|mc − formula| / stderr`.
    pub z: f64,
    pub status: String,
}

pub fn cpp(ctx: &Context) -> Result<(), CliError> {
    let p = &ctx.loaded.config.cpp;
    let model = ctx.model();
    let eig = eigenpair(model)?;
    let sigma2 = sigma_squared(model, &eig);
    let grid = Integration::Grid {
        points_per_axis: p.grid_points,
    };
    let mut rows = Vec::new();
    for &k in &p.k {
        let q = LimitQuery::new(k, sigma2, eig.pi.clone(), functionals::phi(p.phi), 1.0);
        let formula = cpp_moment(&q, grid).value;
        // Each order gets its own stream.
        let mc = cpp_monomial_mc(&q, p.samples, p.cutoff, ctx.seed.wrapping_add(k as u64));
        let z = if mc.stderr > 0.0 {
            (mc.value - formula).abs() / mc.stderr
        } else if mc.value == formula {
            0.0
        } else {
            f64::INFINITY
        };
        rows.push(CppRow {
            k,
            sigma2,
            mc: mc.value,
            stderr: mc.stderr,
            formula,
            z,
            status: if z <= p.max_z { "pass" } else { "fail" }.to_string(),
        });
    }
    let failures = rows.iter().filter(|r| r.status == "fail").count();
    ctx.emit(
        &rows,
        json!({ "phi": p.phi, "samples": p.samples, "cutoff": p.cutoff, "max_z": p.max_z }),
    )?;
    if failures == 0 {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "{failures} orders disagree with the formula by more than {} standard errors",
            p.max_z
        )))
    }
}
