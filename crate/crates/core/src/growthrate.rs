//! Growth rates as fixed points `s = lambda(s)`, dispersion scans, the
//! critical-field estimate and a companion-matrix cross-check.

use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;

use crate::basis::Discretization;
use crate::error::{Error, Result};
use crate::forms::{assemble_forms, FormBlock, QuadForms, ReducedMode};
use crate::linalg::{eigenvalues, CMatrix, Lu};
use crate::model::{classify_regime, FluidParams, MagneticField, Regime};
use crate::scalar::{vec_norm, Cx, Real};
use crate::spectrum::{alpha, alpha_below, alpha_value};

pub const DEFAULT_FP_TOL: f64 = 1e-10;
/// First probe of the modified parameter.
pub const S_PROBE_START: f64 = 1e-8;
const MAX_PROBES: usize = 80;
const MAX_BISECTIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stability {
    Unstable,
    Stable,
}

impl Stability {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stability::Unstable => "unstable",
            Stability::Stable => "stable",
        }
    }
}

#[derive(Debug, Clone)]
pub struct FixedPointResult<T> {
    pub k: [T; 2],
    pub status: Stability,
    /// Growth rate, 0 when stable.
    pub lambda: T,
    /// Fixed point of `s -> lambda(s)`; equal to `lambda`.
    pub s_star: T,
    pub minimizer: Option<ReducedMode<T>>,
    /// Number of alpha evaluations (probes plus bisection steps).
    pub iterations: usize,
    pub bracket: (T, T),
    /// `|Phi(s_star) - 1|`, 0 when stable.
    pub phi_residual: T,
    /// Eigen residual of the minimizer.
    pub eig_residual: T,
    pub warning: Option<String>,
}

impl<T: Real> FixedPointResult<T> {
    fn stable(k: [T; 2], iterations: usize, bracket: (T, T), warning: Option<String>) -> Self {
        Self {
            k,
            status: Stability::Stable,
            lambda: T::zero(),
            s_star: T::zero(),
            minimizer: None,
            iterations,
            bracket,
            phi_residual: T::zero(),
            eig_residual: T::zero(),
            warning,
        }
    }
}

/// `Phi(s) = s / sqrt(-alpha(s))`, infinite when `alpha(s) >= 0`.
pub fn phi<T: Real>(forms: &QuadForms<T>, s: T) -> Result<T> {
    Ok(phi_of(s, alpha_value(forms, s)?))
}

fn phi_of<T: Real>(s: T, a: T) -> T {
    if a < T::zero() {
        s / (-a).sqrt()
    } else {
        T::infinity()
    }
}

pub fn fixed_point<T: Real>(
    params: &FluidParams<T>,
    field: &MagneticField<T>,
    k: [T; 2],
    disc: &Discretization<T>,
    tol: T,
) -> Result<FixedPointResult<T>> {
    if k[0] == T::zero() && k[1] == T::zero() {
        return Ok(FixedPointResult::stable(k, 0, (T::zero(), T::zero()), None));
    }
    let forms = assemble_forms(params, field, k, disc)?;
    fixed_point_forms(&forms, tol)
}

/// Bisection of `Phi(s) - 1` for already assembled forms.
pub fn fixed_point_forms<T: Real>(forms: &QuadForms<T>, tol: T) -> Result<FixedPointResult<T>> {
    let k = forms.meta.k;
    let two = T::lit(2.0);
    let mut evals = 0;
    let mut s = T::lit(S_PROBE_START);
    let first = alpha_value(forms, s)?;
    evals += 1;
    if first >= T::zero() {
        return Ok(FixedPointResult::stable(k, evals, (T::zero(), s), None));
    }
    let (mut lo, mut hi);
    if phi_of(s, first) >= T::one() {
        lo = T::zero();
        hi = s;
    } else {
        lo = s;
        let mut found = None;
        for _ in 0..MAX_PROBES {
            s = s * two;
            let a = alpha_value(forms, s)?;
            evals += 1;
            if phi_of(s, a) >= T::one() {
                found = Some(s);
                break;
            }
            lo = s;
        }
        match found {
            Some(h) => hi = h,
            None => {
                return Ok(FixedPointResult::stable(
                    k,
                    evals,
                    (lo, s),
                    Some(format!("Phi stayed below 1 up to s = {s}")),
                ))
            }
        }
    }

    let mut trace = Vec::new();
    for it in 0..MAX_BISECTIONS {
        let mid = T::lit(0.5) * (lo + hi);
        let p = phi_of(mid, alpha_value(forms, mid)?);
        evals += 1;
        let resid = (p - T::one()).abs();
        // The bracket has shrunk to floating-point resolution: the residual is
        // then limited by the accuracy of alpha itself.
        let exhausted = hi - lo <= T::lit(4.0) * T::epsilon() * hi;
        if resid < tol || exhausted {
            let a = alpha(forms, mid)?;
            let resid = (phi_of(mid, a.alpha) - T::one()).abs();
            let warning = (resid >= tol).then(|| format!("bracket exhausted at floating-point resolution with |Phi - 1| = {resid}"));
            return Ok(FixedPointResult {
                k,
                status: Stability::Unstable,
                lambda: mid,
                s_star: mid,
                minimizer: Some(a.minimizer),
                iterations: evals,
                bracket: (lo, hi),
                phi_residual: resid,
                eig_residual: a.eig_residual,
                warning,
            });
        }
        if it + 8 >= MAX_BISECTIONS {
            trace.push(format!("s = {mid}, Phi - 1 = {}", p - T::one()));
        }
        if p < T::one() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::BisectionNoConvergence {
        trace: format!("k = ({}, {}), bracket [{lo}, {hi}]: {}", k[0], k[1], trace.join("; ")),
    })
}

/// `|(lambda^2 2J + lambda 2E1 + 2E0) x| / |x|`, with the doubled matrices
/// being the Hessians of the forms.
pub fn quadratic_pencil_check<T: Real>(forms: &QuadForms<T>, lambda: T, mode: &ReducedMode<T>) -> Result<T> {
    if mode.coeffs.len() != forms.dim() {
        return Err(Error::DimensionMismatch {
            expected: forms.dim(),
            found: mode.coeffs.len(),
        });
    }
    let two = T::lit(2.0);
    let mut r = Vec::with_capacity(forms.dim());
    for (blk, x) in [(&forms.vertical, mode.w_coeffs()), (&forms.shear, mode.b_coeffs())] {
        let p = blk.e0().add_scaled(lambda, &blk.viscous).add_scaled(lambda * lambda, &blk.mass);
        r.extend(p.mul_vec(x).into_iter().map(|v| v.scale(two)));
    }
    let n = vec_norm(&mode.coeffs);
    Ok(if n > T::zero() { vec_norm(&r) / n } else { T::zero() })
}

/// Shifts tried for the companion solve, in order.
const COMPANION_SHIFTS: [f64; 3] = [-0.37, -1.13, -2.9];

/// Largest real part among the eigenvalues of the first-order evolution
/// `eta' = u`, `J u' = -E1 u - E0 eta`, computed through the shift-inverted
/// companion matrix so that the stiff viscous modes stay harmless.
pub fn companion_growth_rate<T: Real>(forms: &QuadForms<T>) -> Result<T> {
    let a = companion_block(&forms.vertical)?;
    let b = companion_block(&forms.shear)?;
    Ok(a.max(b))
}

fn companion_block<T: Real>(blk: &FormBlock<T>) -> Result<T> {
    let n = blk.dim();
    let e0 = blk.e0();
    let mut last = Error::Singular("companion shift");
    for &shift in &COMPANION_SHIFTS {
        let sigma = T::lit(shift);
        let p = e0.add_scaled(sigma, &blk.viscous).add_scaled(sigma * sigma, &blk.mass);
        let lu = match Lu::factor(&p) {
            Ok(lu) => lu,
            Err(e) => {
                last = e;
                continue;
            }
        };
        let e1s = blk.viscous.add_scaled(sigma, &blk.mass);
        let mut m = CMatrix::zeros(2 * n, 2 * n);
        for col in 0..2 * n {
            // (L - sigma)^{-1} applied to the unit vector (a, b)
            let mut rhs = vec![Cx::zero(); n];
            let mut acol = vec![Cx::zero(); n];
            if col < n {
                acol[col] = Complex::new(T::one(), T::zero());
                for i in 0..n {
                    rhs[i] = -e1s[(i, col)];
                }
            } else {
                for i in 0..n {
                    rhs[i] = -blk.mass[(i, col - n)];
                }
            }
            let eta = lu.solve(&rhs);
            for i in 0..n {
                m[(i, col)] = eta[i];
                m[(n + i, col)] = acol[i] + eta[i].scale(sigma);
            }
        }
        let mus = eigenvalues(&m)?;
        let top = mus.iter().fold(T::zero(), |acc, z| acc.max(z.norm()));
        let floor = top * T::lit(1e-7);
        let best = mus
            .iter()
            .filter(|z| z.norm() > floor)
            .map(|z| sigma + (Complex::new(T::one(), T::zero()) / z).re)
            .fold(T::neg_infinity(), T::max);
        return Ok(best);
    }
    Err(last)
}

/// One row of a scan.
#[derive(Debug, Clone)]
pub struct DispersionSample<T> {
    pub k: [T; 2],
    pub result: std::result::Result<FixedPointResult<T>, Error>,
}

#[derive(Debug, Clone)]
pub struct DispersionCurve<T> {
    pub samples: Vec<DispersionSample<T>>,
    pub lambda_max: T,
    pub k_argmax: [T; 2],
}

pub fn dispersion<T: Real>(
    params: &FluidParams<T>,
    field: &MagneticField<T>,
    k_grid: &[[T; 2]],
    disc: &Discretization<T>,
    tol: T,
) -> Result<DispersionCurve<T>> {
    if k_grid.is_empty() {
        return Err(Error::InvalidParameter {
            field: "k_grid",
            reason: "must contain at least one wavevector".into(),
        });
    }
    params.validate()?;
    let samples: Vec<DispersionSample<T>> = k_grid
        .par_iter()
        .map(|&k| DispersionSample {
            k,
            result: fixed_point(params, field, k, disc, tol),
        })
        .collect();
    let mut lambda_max = T::zero();
    let mut k_argmax = k_grid[0];
    for s in &samples {
        if let Ok(r) = &s.result {
            if r.lambda > lambda_max {
                lambda_max = r.lambda;
                k_argmax = s.k;
            }
        }
    }
    Ok(DispersionCurve {
        samples,
        lambda_max,
        k_argmax,
    })
}

/// `count` log-spaced magnitudes in `[k_min, k_max]` along the direction
/// perpendicular to the horizontal field, and along the field itself when
/// it is nonzero.
pub fn log_k_grid<T: Real>(field: &MagneticField<T>, k_min: T, k_max: T, count: usize) -> Result<Vec<[T; 2]>> {
    if !(k_min > T::zero()) || !(k_max >= k_min) || count == 0 || !k_max.is_finite() {
        return Err(Error::InvalidParameter {
            field: "k_grid",
            reason: format!("need 0 < k_min <= k_max and count > 0, got [{k_min}, {k_max}] x {count}"),
        });
    }
    let [b1, b2] = field.b_star();
    let nb = b1.hypot(b2);
    let mut dirs = Vec::new();
    if nb > T::zero() {
        dirs.push([-b2 / nb, b1 / nb]);
        dirs.push([b1 / nb, b2 / nb]);
    } else {
        dirs.push([T::zero(), T::one()]);
    }
    let mags: Vec<T> = if count == 1 {
        vec![k_min]
    } else {
        let (l0, l1) = (k_min.ln(), k_max.ln());
        (0..count)
            .map(|i| (l0 + (l1 - l0) * T::from_usize_lossy(i) / T::from_usize_lossy(count - 1)).exp())
            .collect()
    };
    Ok(dirs.iter().flat_map(|d| mags.iter().map(move |&m| [d[0] * m, d[1] * m])).collect())
}

pub const DEFAULT_CRITICAL_TOL: f64 = 1e-6;
pub const CRITICAL_K_MIN: f64 = 0.1;
pub const CRITICAL_K_COUNT: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalFieldEstimate<T> {
    /// Estimated critical `|B3|`.
    pub b3: T,
    /// Field magnitude along the direction at the estimate.
    pub magnitude: T,
    pub k_max: T,
    pub bracket: (T, T),
    pub bisections: usize,
}

/// A wavevector grows faster than `tol` exactly when `alpha(tol) < -tol^2`,
/// because `Phi` is increasing and `Phi(tol) < 1` is then equivalent to a
/// fixed point above `tol`.
fn any_growth<T: Real>(params: &FluidParams<T>, field: &MagneticField<T>, ks: &[[T; 2]], disc: &Discretization<T>, tol: T) -> Result<bool> {
    let hits: Vec<Result<bool>> = ks
        .par_iter()
        .map(|&k| {
            let forms = assemble_forms(params, field, k, disc)?;
            alpha_below(&forms, tol, -tol * tol)
        })
        .collect();
    let mut any = false;
    for h in hits {
        any |= h?;
    }
    Ok(any)
}

/// Smallest magnitude along `direction` at which no wavevector of the log
/// grid up to `k_max` grows faster than `tol`.
pub fn critical_field_estimate<T: Real>(
    params: &FluidParams<T>,
    direction: [T; 3],
    k_max: T,
    disc: &Discretization<T>,
    tol: T,
) -> Result<CriticalFieldEstimate<T>> {
    params.validate()?;
    let norm = (direction[0] * direction[0] + direction[1] * direction[1] + direction[2] * direction[2]).sqrt();
    if !(direction[2].abs() > T::zero()) || !norm.is_finite() {
        return Err(Error::InvalidParameter {
            field: "direction",
            reason: "needs a nonzero vertical component".into(),
        });
    }
    let d = direction.map(|v| v / norm);
    let at = |m: T| MagneticField::new(d[0] * m, d[1] * m, d[2] * m);
    let ks = log_k_grid(&at(T::one()), T::lit(CRITICAL_K_MIN), k_max, CRITICAL_K_COUNT)?;
    let unstable = |m: T| any_growth(params, &at(m), &ks, disc, tol);

    let mut lo = T::zero();
    let mut hi = T::one();
    let mut doublings = 0;
    while unstable(hi)? {
        lo = hi;
        hi = hi * T::lit(2.0);
        doublings += 1;
        if doublings > 60 {
            return Err(Error::NoBracket(format!("still unstable at field magnitude {hi}")));
        }
    }
    let rtol = T::lit(1e-6);
    let mut bisections = 0;
    while hi - lo > rtol * hi {
        let mid = T::lit(0.5) * (lo + hi);
        if unstable(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
        bisections += 1;
    }
    Ok(CriticalFieldEstimate {
        b3: (d[2] * hi).abs(),
        magnitude: hi,
        k_max,
        bracket: (lo, hi),
        bisections,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityRow<T> {
    pub b3: T,
    pub lambda_max: T,
    pub k_argmax: [T; 2],
    pub regime: Regime,
}

#[derive(Debug, Clone)]
pub struct StabilityMap<T> {
    pub rows: Vec<StabilityRow<T>>,
    pub params: FluidParams<T>,
    pub k_grid: Vec<[T; 2]>,
    pub n_upper: usize,
    pub n_lower: usize,
}

/// Dispersion maxima as the vertical field varies with the horizontal part
/// held fixed. Rows come back sorted by `b3`.
pub fn stability_map<T: Real>(
    params: &FluidParams<T>,
    b_star: [T; 2],
    b3_values: &[T],
    k_grid: &[[T; 2]],
    disc: &Discretization<T>,
    tol: T,
    classify_tol: T,
) -> Result<StabilityMap<T>> {
    let mut b3s = b3_values.to_vec();
    if b3s.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("b3 values"));
    }
    b3s.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let mut rows = Vec::with_capacity(b3s.len());
    for b3 in b3s {
        let field = MagneticField::new(b_star[0], b_star[1], b3);
        let curve = dispersion(params, &field, k_grid, disc, tol)?;
        rows.push(StabilityRow {
            b3,
            lambda_max: curve.lambda_max,
            k_argmax: curve.k_argmax,
            regime: classify_regime(params, &field, classify_tol).regime,
        });
    }
    let (n_upper, n_lower) = disc.basis.degrees();
    Ok(StabilityMap {
        rows,
        params: *params,
        k_grid: k_grid.to_vec(),
        n_upper,
        n_lower,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::steady_residual;

    fn disc(n: usize) -> Discretization<f64> {
        Discretization::uniform(n, 1.0, 1.0).unwrap()
    }

    #[test]
    fn supercritical_is_stable() {
        let d = disc(24);
        let r = fixed_point(
            &FluidParams::canonical(),
            &MagneticField::new(0.0, 0.0, 1.0),
            [0.0, 10.0],
            &d,
            1e-10,
        )
        .unwrap();
        assert_eq!(r.status, Stability::Stable);
        assert_eq!(r.lambda, 0.0);
    }

    #[test]
    fn zero_wavevector_is_stable() {
        let d = disc(8);
        let r = fixed_point(&FluidParams::canonical(), &MagneticField::new(0.0, 0.0, 0.0), [0.0, 0.0], &d, 1e-10).unwrap();
        assert_eq!(r.status, Stability::Stable);
    }

    #[test]
    fn horizontal_field_unstable_and_cross_checked() {
        let d = disc(32);
        let p = FluidParams::canonical();
        let f = MagneticField::new(1.0, 0.0, 0.0);
        let forms = assemble_forms(&p, &f, [0.0, 10.0], &d).unwrap();
        let r = fixed_point_forms(&forms, 1e-10).unwrap();
        assert_eq!(r.status, Stability::Unstable);
        assert!(r.lambda > 0.0);
        assert_eq!(r.lambda.to_bits(), r.s_star.to_bits());
        assert!(r.phi_residual < 1e-10);
        let m = r.minimizer.as_ref().unwrap();
        let res = quadratic_pencil_check(&forms, r.lambda, m).unwrap();
        assert!(res < 1e-8, "{res}");
        let bad = quadratic_pencil_check(&forms, r.lambda * (1.0 + 1e-3), m).unwrap();
        assert!(bad > 1e-6, "{bad}");
        let c = companion_growth_rate(&forms).unwrap();
        assert!((c - r.lambda).abs() < 1e-6 * r.lambda, "{c} vs {}", r.lambda);
    }

    #[test]
    fn subcritical_fixed_point_solves_steady_system() {
        let p = FluidParams::canonical();
        let f = MagneticField::new(0.0, 0.0, 0.3);
        let k = [0.0, 10.0];
        let mut last = (f64::INFINITY, f64::INFINITY);
        for n in [16, 32] {
            let d = disc(n);
            let r = fixed_point(&p, &f, k, &d, 1e-10).unwrap();
            let m = r.minimizer.as_ref().unwrap();
            let s = steady_residual(&p, &f, k, r.lambda, &d, m).unwrap();
            assert!(s.momentum < last.0 && s.jump < last.1, "{} {}", s.momentum, s.jump);
            last = (s.momentum, s.jump);
            if n == 32 {
                let perturbed = steady_residual(&p, &f, k, 1.1 * r.lambda, &d, m).unwrap();
                assert!(perturbed.jump > 1e-3, "{}", perturbed.jump);
            }
        }
        let d = disc(48);
        let r = fixed_point(&p, &f, k, &d, 1e-10).unwrap();
        let s = steady_residual(&p, &f, k, r.lambda, &d, r.minimizer.as_ref().unwrap()).unwrap();
        assert!(s.momentum < 1e-8 && s.jump < 1e-8, "{} {}", s.momentum, s.jump);
    }

    #[test]
    fn zero_mode_pencil_residual() {
        let d = disc(8);
        let mut p = FluidParams::canonical();
        p.rho_plus = 1.0 + 1e-14;
        let forms = assemble_forms(&p, &MagneticField::new(0.0, 0.0, 0.0), [1.0, 1.0], &d).unwrap();
        let z = ReducedMode::from_blocks([1.0, 1.0], &vec![Cx::zero(); forms.dim_w()], &vec![Cx::zero(); forms.shear.dim()]);
        assert_eq!(quadratic_pencil_check(&forms, 0.0, &z).unwrap(), 0.0);
    }

    #[test]
    fn k_grid_shape() {
        let g = log_k_grid(&MagneticField::<f64>::new(1.0, 0.0, 0.3), 0.1, 200.0, 40).unwrap();
        assert_eq!(g.len(), 80);
        assert!((g[0][1] - 0.1).abs() < 1e-15 && g[0][0] == 0.0);
        assert!((g[39][1] - 200.0).abs() < 1e-10);
        assert!((g[40][0] - 0.1).abs() < 1e-15);
        assert_eq!(log_k_grid(&MagneticField::new(0.0, 0.0, 1.0), 0.1, 200.0, 40).unwrap().len(), 40);
        assert!(log_k_grid(&MagneticField::new(0.0, 0.0, 1.0), 0.0, 200.0, 40).is_err());
    }

    #[test]
    fn dispersion_interior_maximum() {
        let d = disc(24);
        let f = MagneticField::new(1.0, 0.0, 0.3);
        let ks: Vec<[f64; 2]> = (0..25).map(|i| [0.0, 0.1 * (2000f64).powf(i as f64 / 24.0)]).collect();
        let c = dispersion(&FluidParams::canonical(), &f, &ks, &d, 1e-10).unwrap();
        let lam: Vec<f64> = c.samples.iter().map(|s| s.result.as_ref().unwrap().lambda).collect();
        let imax = lam.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert!(imax > 0 && imax < lam.len() - 1, "{lam:?}");
        assert_eq!(c.lambda_max, lam[imax]);
    }

    #[test]
    fn small_density_jump_small_critical_field() {
        let d = disc(16);
        let p = FluidParams::new(1.0 + 1e-6, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let est = critical_field_estimate(&p, [0.0, 0.0, 1.0], 50.0, &d, 1e-6).unwrap();
        assert!(est.b3 < 1e-2, "{est:?}");
    }

    #[test]
    fn stability_map_sorted() {
        let d = disc(16);
        let ks = log_k_grid(&MagneticField::new(0.0, 0.0, 1.0), 0.5, 20.0, 6).unwrap();
        let m = stability_map(&FluidParams::canonical(), [0.0, 0.0], &[1.0, 0.0, 0.3], &ks, &d, 1e-10, 1e-9).unwrap();
        let b3: Vec<f64> = m.rows.iter().map(|r| r.b3).collect();
        assert_eq!(b3, vec![0.0, 0.3, 1.0]);
        assert!(m.rows[0].lambda_max > m.rows[1].lambda_max);
        assert_eq!(m.rows[2].lambda_max, 0.0);
        assert_eq!(m.rows[2].regime, Regime::Supercritical);
    }
}
