//! Subcommand dispatch.

use mhdrt::chebgrid::TwoLayerGrid;
use mhdrt::forms::{assemble_forms, reduce_basis, ReducedMode};
use mhdrt::growthrate::{
    critical_field_estimate, dispersion, fixed_point_forms, quadratic_pencil_check, stability_map, Stability, DEFAULT_CRITICAL_TOL,
};
use mhdrt::ivp::{evolve, growth_fit, ModeState};
use mhdrt::model::{classify_regime, critical_field, Regime};
use mhdrt::oracles::{korn_check, poincare_check, testfn_limits, trace_check};
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::float;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Subcommand {
    Mc,
    Dispersion,
    CriticalField,
    StabilityMap,
    Ivp,
    Verify,
}

impl Subcommand {
    pub fn as_str(&self) -> &'static str {
        match self {
            Subcommand::Mc => "mc",
            Subcommand::Dispersion => "dispersion",
            Subcommand::CriticalField => "critical-field",
            Subcommand::StabilityMap => "stability-map",
            Subcommand::Ivp => "ivp",
            Subcommand::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McReport {
    #[serde(rename = "M_c")]
    pub m_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalFieldReport {
    pub b3: f64,
    pub magnitude: f64,
    pub direction: [f64; 3],
    pub k_max: f64,
    pub bracket: [f64; 2],
    pub bisections: usize,
    #[serde(rename = "M_c")]
    pub m_c: f64,
    pub relative_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispersionRow {
    pub k1: f64,
    pub k2: f64,
    pub status: String,
    pub lambda: f64,
    pub s_star: f64,
    pub iterations: usize,
    pub phi_residual: f64,
    pub eig_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispersionReport {
    pub lambda_max: f64,
    pub k_argmax: [f64; 2],
    pub rows: Vec<DispersionRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapRow {
    pub b3: f64,
    pub lambda_max: f64,
    pub k1_argmax: f64,
    pub k2_argmax: f64,
    pub regime: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapReport {
    #[serde(rename = "M_c")]
    pub m_c: f64,
    pub rows: Vec<MapRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IvpRow {
    pub t: f64,
    pub kinetic: f64,
    pub magnetic: f64,
    pub surface: f64,
    pub dissipation_integral: f64,
    pub u_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IvpReport {
    pub k: [f64; 2],
    pub dt: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    /// Fixed-point growth rate at `k` (0 when stable).
    pub lambda: f64,
    /// Fitted exponential rate of `u_norm`, if the run is long enough.
    pub fitted_rate: Option<f64>,
    pub max_balance_residual: f64,
    pub rows: Vec<IvpRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// `pass`, `fail` or `skipped`.
    pub status: String,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Payload {
    Mc(McReport),
    CriticalField(CriticalFieldReport),
    Dispersion(DispersionReport),
    StabilityMap(MapReport),
    Ivp(IvpReport),
    Verify(VerifyReport),
}

impl Payload {
    /// CSV header and rows.
    pub fn table(&self) -> (Vec<String>, Vec<Vec<String>>) {
        let h = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        match self {
            Payload::Mc(r) => (h(&["M_c"]), vec![vec![float(r.m_c)]]),
            Payload::CriticalField(r) => (
                h(&[
                    "b3",
                    "magnitude",
                    "k_max",
                    "bracket_lo",
                    "bracket_hi",
                    "bisections",
                    "M_c",
                    "relative_gap",
                ]),
                vec![vec![
                    float(r.b3),
                    float(r.magnitude),
                    float(r.k_max),
                    float(r.bracket[0]),
                    float(r.bracket[1]),
                    r.bisections.to_string(),
                    float(r.m_c),
                    float(r.relative_gap),
                ]],
            ),
            Payload::Dispersion(r) => (
                h(&["k1", "k2", "status", "lambda", "s_star", "iterations"]),
                r.rows
                    .iter()
                    .map(|x| {
                        vec![
                            float(x.k1),
                            float(x.k2),
                            x.status.clone(),
                            float(x.lambda),
                            float(x.s_star),
                            x.iterations.to_string(),
                        ]
                    })
                    .collect(),
            ),
            Payload::StabilityMap(r) => (
                h(&["b3", "lambda_max", "k1_argmax", "k2_argmax", "regime"]),
                r.rows
                    .iter()
                    .map(|x| {
                        vec![
                            float(x.b3),
                            float(x.lambda_max),
                            float(x.k1_argmax),
                            float(x.k2_argmax),
                            x.regime.clone(),
                        ]
                    })
                    .collect(),
            ),
            Payload::Ivp(r) => (
                h(&["t", "kinetic", "magnetic", "surface", "dissipation_integral", "u_norm"]),
                r.rows
                    .iter()
                    .map(|x| {
                        vec![
                            float(x.t),
                            float(x.kinetic),
                            float(x.magnetic),
                            float(x.surface),
                            float(x.dissipation_integral),
                            float(x.u_norm),
                        ]
                    })
                    .collect(),
            ),
            Payload::Verify(r) => (
                h(&["name", "status", "value", "threshold"]),
                r.checks
                    .iter()
                    .map(|c| vec![c.name.clone(), c.status.clone(), float(c.value), float(c.threshold)])
                    .collect(),
            ),
        }
    }
}

pub fn run(sub: Subcommand, cfg: &RunConfig, seed: u64) -> Result<Payload, CliError> {
    match sub {
        Subcommand::Mc => Ok(Payload::Mc(McReport {
            m_c: critical_field(&cfg.fluid()?),
        })),
        Subcommand::CriticalField => critical(cfg).map(Payload::CriticalField),
        Subcommand::Dispersion => dispersion_report(cfg, &cfg.k_grid()).map(Payload::Dispersion),
        Subcommand::StabilityMap => map(cfg).map(Payload::StabilityMap),
        Subcommand::Ivp => ivp(cfg, seed).map(Payload::Ivp),
        Subcommand::Verify => verify(cfg, seed).map(Payload::Verify),
    }
}

fn critical(cfg: &RunConfig) -> Result<CriticalFieldReport, CliError> {
    let p = cfg.fluid()?;
    let d = cfg.discretization()?;
    let dir = cfg.field;
    if dir[2] == 0.0 {
        return Err(CliError::Config {
            path: "field".into(),
            reason: "critical-field uses `field` as a direction and needs a nonzero vertical component".into(),
        });
    }
    let k_max = cfg.kgrid.max;
    let e = critical_field_estimate(&p, dir, k_max, &d, DEFAULT_CRITICAL_TOL).map_err(CliError::run("critical-field"))?;
    let m_c = critical_field(&p);
    Ok(CriticalFieldReport {
        b3: e.b3,
        magnitude: e.magnitude,
        direction: dir,
        k_max,
        bracket: [e.bracket.0, e.bracket.1],
        bisections: e.bisections,
        m_c,
        relative_gap: (e.b3 - m_c).abs() / m_c,
    })
}

fn dispersion_report(cfg: &RunConfig, ks: &[[f64; 2]]) -> Result<DispersionReport, CliError> {
    let p = cfg.fluid()?;
    let d = cfg.discretization()?;
    let c = dispersion(&p, &cfg.magnetic(), ks, &d, cfg.tolerances.fixed_point).map_err(CliError::run("dispersion"))?;
    let rows = c
        .samples
        .iter()
        .map(|s| match &s.result {
            Ok(r) => DispersionRow {
                k1: s.k[0],
                k2: s.k[1],
                status: r.status.as_str().to_string(),
                lambda: r.lambda,
                s_star: r.s_star,
                iterations: r.iterations,
                phi_residual: r.phi_residual,
                eig_residual: r.eig_residual,
                warning: r.warning.clone(),
                error: None,
            },
            Err(e) => DispersionRow {
                k1: s.k[0],
                k2: s.k[1],
                status: "error".into(),
                lambda: f64::NAN,
                s_star: f64::NAN,
                iterations: 0,
                phi_residual: f64::NAN,
                eig_residual: f64::NAN,
                warning: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    Ok(DispersionReport {
        lambda_max: c.lambda_max,
        k_argmax: c.k_argmax,
        rows,
    })
}

fn map(cfg: &RunConfig) -> Result<MapReport, CliError> {
    let b3s = cfg.b3_values().ok_or_else(|| CliError::Config {
        path: "sweep".into(),
        reason: "stability-map needs a `sweep` section".into(),
    })?;
    let p = cfg.fluid()?;
    let d = cfg.discretization()?;
    let m = stability_map(
        &p,
        [cfg.field[0], cfg.field[1]],
        &b3s,
        &cfg.k_grid(),
        &d,
        cfg.tolerances.fixed_point,
        cfg.tolerances.classify,
    )
    .map_err(CliError::run("stability-map"))?;
    Ok(MapReport {
        m_c: critical_field(&p),
        rows: m
            .rows
            .iter()
            .map(|r| MapRow {
                b3: r.b3,
                lambda_max: r.lambda_max,
                k1_argmax: r.k_argmax[0],
                k2_argmax: r.k_argmax[1],
                regime: r.regime.as_str().to_string(),
            })
            .collect(),
    })
}

fn random_state(cfg: &RunConfig, k: [f64; 2], seed: u64) -> Result<ModeState<f64>, CliError> {
    let d = cfg.discretization()?;
    let rb = reduce_basis(&d, k).map_err(CliError::run("ivp initial data"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = ReducedMode::random(&d, &rb, &mut rng, 0.7, 12);
    Ok(ModeState {
        u: vec![Complex::new(0.0, 0.0); m.coeffs.len()],
        eta: m.coeffs,
        t: 0.0,
    })
}

fn ivp(cfg: &RunConfig, seed: u64) -> Result<IvpReport, CliError> {
    let iv = cfg.ivp.as_ref().ok_or_else(|| CliError::Config {
        path: "ivp".into(),
        reason: "the ivp subcommand needs an `ivp` section with T and dt".into(),
    })?;
    let k = match iv.k {
        Some(k) => k,
        None => {
            let r = dispersion_report(cfg, &cfg.k_grid())?;
            if r.lambda_max > 0.0 {
                r.k_argmax
            } else {
                cfg.k_grid()[0]
            }
        }
    };
    let p = cfg.fluid()?;
    let d = cfg.discretization()?;
    let forms = assemble_forms(&p, &cfg.magnetic(), k, &d).map_err(CliError::run("ivp forms"))?;
    let lambda = fixed_point_forms(&forms, cfg.tolerances.fixed_point)
        .map_err(CliError::run("ivp growth rate"))?
        .lambda;
    let s0 = random_state(cfg, k, seed)?;
    let (_, ledger) = evolve(&forms, &s0, iv.horizon, iv.dt).map_err(CliError::run("ivp"))?;
    Ok(IvpReport {
        k,
        dt: iv.dt,
        horizon: iv.horizon,
        lambda,
        fitted_rate: growth_fit(&ledger).ok().map(|f| f.0),
        max_balance_residual: ledger.max_balance_residual(),
        rows: ledger
            .rows
            .iter()
            .map(|r| IvpRow {
                t: r.t,
                kinetic: r.kinetic,
                magnetic: r.magnetic,
                surface: r.surface,
                dissipation_integral: r.dissipation_integral,
                u_norm: r.u_norm,
            })
            .collect(),
    })
}

fn check(name: &str, ok: bool, value: f64, threshold: f64, detail: String) -> Check {
    Check {
        name: name.into(),
        status: if ok { "pass" } else { "fail" }.into(),
        value,
        threshold,
        detail,
    }
}

fn skipped(name: &str, detail: &str) -> Check {
    Check {
        name: name.into(),
        status: "skipped".into(),
        value: f64::NAN,
        threshold: f64::NAN,
        detail: detail.into(),
    }
}

fn failed(name: &str, e: impl std::fmt::Display) -> Check {
    Check {
        name: name.into(),
        status: "fail".into(),
        value: f64::NAN,
        threshold: f64::NAN,
        detail: e.to_string(),
    }
}

/// Sample count for the Poincare and trace oracles.
pub const ORACLE_SAMPLES: usize = 1000;
/// Sample count for the Korn oracle.
pub const KORN_SAMPLES: usize = 200;

fn verify(cfg: &RunConfig, seed: u64) -> Result<VerifyReport, CliError> {
    let p = cfg.fluid()?;
    let d = cfg.discretization()?;
    let field = cfg.magnetic();
    let (nu, nl) = (cfg.grid.n_upper, cfg.grid.n_lower);
    let grid = TwoLayerGrid::build(nu, nl, p.ell, p.m).map_err(CliError::run("verify grid"))?;
    let ks = cfg.k_grid();
    let k = ks[ks.len() / 2];
    let mut checks = Vec::new();

    if field.b3() != 0.0 {
        match poincare_check(&field, k, &grid, ORACLE_SAMPLES, seed) {
            Ok(r) => checks.push(check(
                "poincare_bound",
                r.violations == 0,
                r.estimate.best_ratio,
                r.bound,
                format!("{} violations in {} samples", r.violations, r.estimate.sample_size),
            )),
            Err(e) => checks.push(failed("poincare_bound", e)),
        }
        match trace_check(&field, k, &grid, ORACLE_SAMPLES, seed.wrapping_add(1)) {
            Ok(r) => checks.push(check(
                "trace_drift",
                r.refinement_drift < 0.1,
                r.refinement_drift,
                0.1,
                format!("best ratio {}", r.best_ratio),
            )),
            Err(e) => checks.push(failed("trace_drift", e)),
        }
    } else {
        checks.push(skipped("poincare_bound", "needs a nonzero vertical field"));
        checks.push(skipped("trace_drift", "needs a nonzero vertical field"));
    }
    match korn_check(k, p.ell, p.m, nu.min(nl), KORN_SAMPLES, seed.wrapping_add(2)) {
        Ok(r) => checks.push(check(
            "korn_drift",
            r.refinement_drift < 0.1,
            r.refinement_drift,
            0.1,
            format!("best ratio {}", r.best_ratio),
        )),
        Err(e) => checks.push(failed("korn_drift", e)),
    }
    if field.b3() != 0.0 {
        match testfn_limits(&p, &field, &[1.0, 10.0, 100.0, 1000.0], &[10.0, 100.0, 1000.0, 10000.0], &grid) {
            Ok(t) => {
                let last = t.rows.last().expect("nonempty");
                let gap = (last.ratio - t.limit).abs() / t.limit;
                checks.push(check(
                    "testfn_limit",
                    gap < 0.02,
                    gap,
                    0.02,
                    format!("ratio {} vs limit {}, E0 {}", last.ratio, t.limit, last.e0),
                ));
            }
            Err(e) => checks.push(failed("testfn_limit", e)),
        }
    } else {
        checks.push(skipped("testfn_limit", "the limit is 0 without a vertical field"));
    }

    let forms = assemble_forms(&p, &field, k, &d).map_err(CliError::run("verify forms"))?;
    match fixed_point_forms(&forms, cfg.tolerances.fixed_point) {
        Ok(r) if r.status == Stability::Unstable => {
            let m = r.minimizer.as_ref().expect("unstable result carries a minimizer");
            checks.push(check(
                "fixed_point_residual",
                r.phi_residual < cfg.tolerances.fixed_point,
                r.phi_residual,
                cfg.tolerances.fixed_point,
                format!("lambda {} at k = ({}, {})", r.lambda, k[0], k[1]),
            ));
            let scale = forms.e0().add_scaled(r.lambda, &forms.e1()).max_abs() + r.lambda * r.lambda * forms.j().max_abs();
            let rel = r.eig_residual / scale;
            checks.push(check(
                "eigen_residual",
                rel < cfg.tolerances.eig,
                rel,
                cfg.tolerances.eig,
                "relative to the pencil scale".into(),
            ));
            match quadratic_pencil_check(&forms, r.lambda, m) {
                Ok(res) => checks.push(check("quadratic_pencil", res < 1e-8, res, 1e-8, String::new())),
                Err(e) => checks.push(failed("quadratic_pencil", e)),
            }
        }
        Ok(_) => {
            checks.push(skipped("fixed_point_residual", "mode is stable"));
            checks.push(skipped("eigen_residual", "mode is stable"));
            checks.push(skipped("quadratic_pencil", "mode is stable"));
        }
        Err(e) => checks.push(failed("fixed_point_residual", e)),
    }

    let s0 = random_state(cfg, k, seed.wrapping_add(3))?;
    match evolve(&forms, &s0, 1.0, 0.01) {
        Ok((_, ledger)) => {
            let b = ledger.max_balance_residual();
            checks.push(check("energy_identity", b < 1e-12, b, 1e-12, "100 Crank-Nicolson steps".into()));
        }
        Err(e) => checks.push(failed("energy_identity", e)),
    }

    let regime = classify_regime(&p, &field, cfg.tolerances.classify).regime;
    if regime == Regime::Supercritical {
        let r = dispersion_report(cfg, &ks)?;
        checks.push(check(
            "supercritical_stable",
            r.lambda_max == 0.0,
            r.lambda_max,
            0.0,
            format!("{} wavevectors", ks.len()),
        ));
    } else {
        checks.push(skipped("supercritical_stable", regime.as_str()));
    }

    Ok(VerifyReport {
        passed: checks.iter().all(|c| c.status != "fail"),
        checks,
    })
}
