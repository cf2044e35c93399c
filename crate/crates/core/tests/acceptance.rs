//! Acceptance checks. Each test writes one `PASS` or `FAIL` line straight to
//! stdout (bypassing the test harness capture) and then asserts.

use std::io::Write;

use mhdrt::basis::Discretization;
use mhdrt::chebgrid::TwoLayerGrid;
use mhdrt::forms::{assemble_forms, QuadForms};
use mhdrt::growthrate::{
    critical_field_estimate, dispersion, fixed_point, fixed_point_forms, log_k_grid, phi, quadratic_pencil_check, Stability,
};
use mhdrt::ivp::{evolve, rayleigh_growth_rate, ModeState};
use mhdrt::model::{critical_field, FluidParams, MagneticField};
use mhdrt::oracles::{korn_check, poincare_check, testfn_limits, trace_check};
use mhdrt::spectrum::{alpha_value, inviscid_quotient, steady_residual};
use mhdrt::Cx;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, name: &str, ok: bool, detail: String) {
    let line = format!("{} criterion {id:>2} {name}: {detail}\n", if ok { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    assert!(ok, "criterion {id} ({name}) failed: {detail}");
}

fn canonical() -> FluidParams<f64> {
    FluidParams::canonical()
}

fn disc(n: usize) -> Discretization<f64> {
    Discretization::uniform(n, 1.0, 1.0).unwrap()
}

fn geomspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a * (b / a).powf(i as f64 / (n - 1) as f64)).collect()
}

#[test]
fn c01_critical_field_recovery() {
    let p = canonical();
    let d = disc(48);
    let mc = critical_field(&p);
    let est: Vec<f64> = [50.0, 100.0, 200.0]
        .iter()
        .map(|&k| critical_field_estimate(&p, [0.0, 0.0, 1.0], k, &d, 1e-6).unwrap().b3)
        .collect();
    let rel = (est[2] - mc).abs() / mc;
    let monotone = est.windows(2).all(|w| w[1] >= w[0]);
    report(
        1,
        "critical field",
        rel < 0.05 && monotone,
        format!("estimates {est:?} for k_max 50/100/200, M_c = {mc}, rel err {rel:.3e}"),
    );
}

#[test]
fn c02_variational_identity() {
    let d = disc(48);
    let f = MagneticField::new(1.0, 0.0, 0.5);
    let ks = [2.0, 5.0, 10.0, 20.0, 50.0, 100.0];
    let q: Vec<f64> = ks.iter().map(|&k| inviscid_quotient(&f, [0.0, k], &d).unwrap().value).collect();
    let downward = q.windows(2).all(|w| w[1] <= w[0]) && q.iter().all(|&v| v >= 0.5 * (1.0 - 1e-12));
    let gap = (q[q.len() - 1] - 0.5) / 0.5;
    let zero = inviscid_quotient(&MagneticField::new(1.0, 0.0, 0.0), [0.0, 100.0], &d)
        .unwrap()
        .value;
    report(
        2,
        "variational identity",
        downward && gap < 0.02 && zero.abs() < 1e-10,
        format!("quotients {q:?}, gap at K=100 {gap:.3e}, B3=0 value {zero:e}"),
    );
}

#[test]
fn c03_fixed_point_correctness() {
    let p = canonical();
    let f = MagneticField::new(0.0, 0.0, 0.3);
    let k = [0.0, 10.0];
    let mut rows = Vec::new();
    for n in [16, 32, 48] {
        let d = disc(n);
        let forms = assemble_forms(&p, &f, k, &d).unwrap();
        let r = fixed_point_forms(&forms, 1e-10).unwrap();
        let m = r.minimizer.clone().unwrap();
        let s = steady_residual(&p, &f, k, r.lambda, &d, &m).unwrap();
        let pencil = quadratic_pencil_check(&forms, r.lambda, &m).unwrap();
        rows.push((r, s.momentum, s.jump, pencil));
    }
    // refinement is measured below the floating-point floor reached at n = 48
    let (coarse, mid, fine) = (&rows[0], &rows[1], &rows[2]);
    let r = &fine.0;
    let ok = r.status == Stability::Unstable
        && r.lambda > 0.0
        && r.phi_residual < 1e-10
        && fine.1 < 1e-8
        && fine.2 < 1e-8
        && fine.3 < 1e-8
        && mid.1 < coarse.1
        && mid.2 < coarse.2;
    report(
        3,
        "fixed point",
        ok,
        format!(
            "lambda {:.12}, |Phi-1| {:.2e}, momentum {:.2e} -> {:.2e} (n 16 -> 32), jump {:.2e} -> {:.2e}, at n = 48: momentum {:.2e} jump {:.2e} pencil {:.2e}",
            r.lambda, r.phi_residual, coarse.1, mid.1, coarse.2, mid.2, fine.1, fine.2, fine.3
        ),
    );
}

fn growing_setup() -> (QuadForms<f64>, ModeState<f64>, f64, f64) {
    let forms = assemble_forms(&canonical(), &MagneticField::new(0.0, 0.0, 0.3), [0.0, 10.0], &disc(48)).unwrap();
    let r = fixed_point_forms(&forms, 1e-10).unwrap();
    let w = r.minimizer.unwrap();
    let lam_ref = rayleigh_growth_rate(&forms, &w).unwrap();
    (forms, ModeState::growing_mode(&w, lam_ref), r.lambda, lam_ref)
}

#[test]
fn c04_sharp_growth() {
    let (forms, s0, lam, lam_ref) = growing_setup();
    let horizon = 3.0 / lam;
    let mut worst = 0.0f64;
    let mut errors = Vec::new();
    for (i, dt) in [1e-3 / lam, 0.5e-3 / lam, 0.25e-3 / lam].into_iter().enumerate() {
        let (_, ledger) = evolve(&forms, &s0, horizon, dt).unwrap();
        let u0 = ledger.rows[0].u_norm;
        if i == 0 {
            for row in &ledger.rows {
                worst = worst.max((row.u_norm / u0 / (lam * row.t).exp() - 1.0).abs());
            }
        }
        let last = ledger.rows.last().unwrap();
        errors.push((last.u_norm / u0 / (lam_ref * last.t).exp() - 1.0).abs());
    }
    let orders: Vec<f64> = errors.windows(2).map(|e| (e[0] / e[1]).log2()).collect();
    report(
        4,
        "sharp growth",
        worst < 0.01 && orders.iter().all(|&o| o >= 2.0),
        format!("max |amp/e^(lambda t) - 1| {worst:.2e}, endpoint errors {errors:?}, orders {orders:.8?}"),
    );
}

#[test]
fn c05_energy_identity() {
    let (forms, s0, lam, _) = growing_setup();
    let (_, ledger) = evolve(&forms, &s0, 3.0 / lam, 1e-3 / lam).unwrap();
    let balance = ledger.max_balance_residual();

    let p = canonical();
    let d = disc(48);
    let f = MagneticField::new(0.0, 0.0, 1.2 * critical_field(&p));
    let inv = assemble_forms(&p, &f, [0.0, 3.0], &d).unwrap().inviscid();
    let rb = mhdrt::forms::reduce_basis(&d, [0.0, 3.0]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let m = mhdrt::forms::ReducedMode::random(&d, &rb, &mut rng, 0.6, 10);
    let s = ModeState {
        eta: m.coeffs.clone(),
        u: vec![Cx::zero(); m.coeffs.len()],
        t: 0.0,
    };
    let (_, inv_ledger) = evolve(&inv, &s, 10.0, 1e-2).unwrap();
    let drift = inv_ledger.max_energy_drift();
    report(
        5,
        "energy identity",
        balance < 1e-12 && drift < 1e-10,
        format!("max per-step balance residual {balance:.2e}, inviscid drift over T=10 {drift:.2e}"),
    );
}

#[test]
fn c06_monotonicity() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let d = disc(32);
    let mut details = Vec::new();
    let mut ok = true;
    for _ in 0..5 {
        let rho_minus = rng.random_range(0.5..1.5);
        let p = FluidParams::new(
            rho_minus * rng.random_range(1.2..3.0),
            rho_minus,
            rng.random_range(0.5..2.0),
            rng.random_range(0.5..2.0),
            rng.random_range(0.5..2.0),
            rng.random_range(0.5..2.0),
            rng.random_range(0.5..2.0),
        )
        .unwrap();
        let b_star: [f64; 2] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let b3 = rng.random_range(0.2..0.6) * critical_field(&p);
        let f = MagneticField::new(b_star[0], b_star[1], b3);
        let kmag = rng.random_range(5.0..20.0);
        let norm = b_star[0].hypot(b_star[1]);
        let k = [-b_star[1] / norm * kmag, b_star[0] / norm * kmag];
        let forms = assemble_forms(&p, &f, k, &d).unwrap();

        let a: Vec<f64> = geomspace(1e-4, 10.0, 20).iter().map(|&s| alpha_value(&forms, s).unwrap()).collect();
        let alpha_inc = a.windows(2).all(|w| w[1] > w[0]);

        let r = fixed_point_forms(&forms, 1e-10).unwrap();
        let unstable = r.status == Stability::Unstable;
        let lam = r.lambda.max(1e-3);
        let ph: Vec<f64> = geomspace(0.5 * lam, 2.0 * lam, 20)
            .iter()
            .map(|&s| phi(&forms, s).unwrap())
            .collect();
        // Phi is +inf once alpha >= 0; finite values must increase strictly and
        // the infinite tail must not be followed by finite values
        let finite: Vec<f64> = ph.iter().copied().take_while(|v| v.is_finite()).collect();
        let phi_inc = finite.len() >= 5 && finite.windows(2).all(|w| w[1] > w[0]) && ph[finite.len()..].iter().all(|v| v.is_infinite());
        let audit: Vec<bool> = geomspace(1e-2 * lam, 1e2 * lam, 50)
            .iter()
            .map(|&s| phi(&forms, s).unwrap() >= 1.0)
            .collect();
        let changes = audit.windows(2).filter(|w| w[0] != w[1]).count();
        ok &= unstable && alpha_inc && phi_inc && changes == 1;
        details.push(format!(
            "(lambda {:.4}, alpha inc {alpha_inc}, Phi inc {phi_inc}, sign changes {changes})",
            r.lambda
        ));
    }
    report(6, "monotonicity", ok, details.join(" "));
}

#[test]
fn c07_supercritical_stability() {
    let p = canonical();
    let d = disc(48);
    let f = MagneticField::new(0.0, 0.0, 1.2 * critical_field(&p));
    let ks = log_k_grid(&f, 0.1, 200.0, 40).unwrap();
    let ss = geomspace(1e-6, 10.0, 20);
    let mut worst = f64::INFINITY;
    for &k in &ks {
        let forms = assemble_forms(&p, &f, k, &d).unwrap();
        for &s in &ss {
            worst = worst.min(alpha_value(&forms, s).unwrap());
        }
    }
    let curve = dispersion(&p, &f, &ks, &d, 1e-10).unwrap();
    let errors = curve.samples.iter().filter(|s| s.result.is_err()).count();
    report(
        7,
        "supercritical stability",
        worst >= -1e-8 && curve.lambda_max == 0.0 && errors == 0,
        format!("min alpha over scan {worst:.3e}, dispersion lambda_max {}", curve.lambda_max),
    );
}

#[test]
fn c08_inequality_oracles() {
    let g = TwoLayerGrid::<f64>::build(24, 24, 1.0, 1.0).unwrap();
    let f = MagneticField::new(0.7, -0.4, 0.5);
    let k = [2.0, 3.0];
    let pc = poincare_check(&f, k, &g, 1000, 7).unwrap();
    let tc = trace_check(&f, k, &g, 1000, 8).unwrap();
    let kc = korn_check(k, 1.0, 1.0, 16, 200, 9).unwrap();

    let fine = TwoLayerGrid::<f64>::build(32, 32, 1.0, 1.0).unwrap();
    let b = MagneticField::new(1.0, 0.0, 0.3);
    let ks = [1.0, 10.0, 100.0, 1000.0];
    let ns = [10.0, 100.0, 1000.0, 10000.0];
    let t = testfn_limits(&canonical(), &b, &ks, &ns, &fine).unwrap();
    let last = t.rows.last().unwrap();
    let gap = (last.ratio - t.limit).abs() / t.limit;
    let ok = pc.violations == 0
        && pc.estimate.sample_size == 1000
        && tc.refinement_drift < 0.1
        && kc.refinement_drift < 0.1
        && gap < 0.02
        && last.e0 < 0.0;
    report(
        8,
        "inequality oracles",
        ok,
        format!(
            "Poincare best {:.4} vs bound {} ({} violations), trace {:.4} drift {:.1e}, Korn {:.4} drift {:.1e}, test-fn ratio {:.5} vs {:.5} (gap {gap:.2e}), E0 {:.4}",
            pc.estimate.best_ratio, pc.bound, pc.violations, tc.best_ratio, tc.refinement_drift, kc.best_ratio, kc.refinement_drift, last.ratio, t.limit, last.e0
        ),
    );
}

#[test]
fn c09_symmetry() {
    let p = canonical();
    let d = disc(32);
    let b = [0.8, 0.3];
    let b3 = 0.3;
    let k = [2.0, 5.0];
    let lam = |b: [f64; 2], k: [f64; 2]| fixed_point(&p, &MagneticField::new(b[0], b[1], b3), k, &d, 1e-10).unwrap().lambda;
    let base = lam(b, k);
    let mut rot_err = 0.0f64;
    for theta in [0.3, 1.1, 2.5, -0.7] {
        let (c, s) = (f64::cos(theta), f64::sin(theta));
        let r = |v: [f64; 2]| [c * v[0] - s * v[1], s * v[0] + c * v[1]];
        rot_err = rot_err.max((lam(r(b), r(k)) - base).abs() / base);
    }
    let flip_err = (lam(b, [-k[0], -k[1]]) - base).abs() / base;
    let mut q = p;
    q.mu_plus = 7.3;
    q.mu_minus = 0.01;
    let bits = critical_field(&p).to_bits() == critical_field(&q).to_bits();
    report(
        9,
        "symmetry",
        base > 0.0 && rot_err < 1e-10 && flip_err < 1e-10 && bits,
        format!("lambda {base:.12}, rotation err {rot_err:.1e}, k -> -k err {flip_err:.1e}, M_c bitwise equal {bits}"),
    );
}

#[test]
fn c10_horizontal_field_instability() {
    let p = canonical();
    let d = disc(48);
    let f = MagneticField::new(1.0, 0.0, 0.0);
    let ks: Vec<[f64; 2]> = log_k_grid(&f, 0.1, 200.0, 40)
        .unwrap()
        .into_iter()
        .filter(|k| k[0] == 0.0)
        .collect();
    let curve = dispersion(&p, &f, &ks, &d, 1e-10).unwrap();
    report(
        10,
        "horizontal field instability",
        curve.lambda_max > 0.0 && ks.len() == 40,
        format!(
            "lambda_max {:.6} at k = {:?} over {} wavevectors perpendicular to B",
            curve.lambda_max,
            curve.k_argmax,
            ks.len()
        ),
    );
}
