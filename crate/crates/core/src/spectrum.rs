//! The modified variational problem `alpha(s) = inf E0 + s E1` over the
//! J-unit sphere, the inviscid trace quotient and the steady residual.

use num_traits::Zero;

use crate::basis::{Discretization, Layer};
use crate::error::{Error, Result};
use crate::forms::{assemble_forms, mode_derivatives, reduce_basis, QuadForms, ReducedMode};
use crate::linalg::{pencil_exceeds, smallest_pencil_eigen, smallest_pencil_value, Cholesky};
use crate::model::{FluidParams, MagneticField};
use crate::scalar::{dot_h, im, re, Cx, Real};

#[derive(Debug, Clone)]
pub struct AlphaResult<T> {
    pub alpha: T,
    /// J-normalized, phase-normalized minimizer.
    pub minimizer: ReducedMode<T>,
    /// `|(E0 + s E1) x - alpha J x| / |x|`.
    pub eig_residual: T,
}

/// Smallest eigenvalue of the pencil `(E0 + s E1, J)`.
///
/// The blocks are solved separately. The shear block has a nonnegative
/// energy, so it is skipped whenever the vertical block already gives a
/// negative value.
pub fn alpha<T: Real>(forms: &QuadForms<T>, s: T) -> Result<AlphaResult<T>> {
    check_s(s)?;
    let (dw, db) = (forms.vertical.dim(), forms.shear.dim());
    let v = smallest_pencil_eigen(&forms.vertical.energy(s), &forms.vertical.mass)?;
    let k = forms.meta.k;
    let vertical = |v: crate::linalg::PencilEigen<T>| {
        let b = vec![Cx::zero(); db];
        AlphaResult {
            alpha: v.value,
            minimizer: ReducedMode::from_blocks(k, &v.vector, &b),
            eig_residual: v.residual,
        }
    };
    if v.value < T::zero() {
        return Ok(vertical(v));
    }
    let h = smallest_pencil_eigen(&forms.shear.energy(s), &forms.shear.mass)?;
    if h.value < v.value {
        let w = vec![Cx::zero(); dw];
        Ok(AlphaResult {
            alpha: h.value,
            minimizer: ReducedMode::from_blocks(k, &w, &h.vector),
            eig_residual: h.residual,
        })
    } else {
        Ok(vertical(v))
    }
}

/// `alpha(s)` without the minimizer.
pub fn alpha_value<T: Real>(forms: &QuadForms<T>, s: T) -> Result<T> {
    check_s(s)?;
    let v = smallest_pencil_value(&forms.vertical.energy(s), &forms.vertical.mass)?;
    if v < T::zero() {
        return Ok(v);
    }
    Ok(v.min(smallest_pencil_value(&forms.shear.energy(s), &forms.shear.mass)?))
}

/// Whether `alpha(s) < level`, by an inertia test instead of an eigensolve.
pub fn alpha_below<T: Real>(forms: &QuadForms<T>, s: T, level: T) -> Result<bool> {
    check_s(s)?;
    for blk in [&forms.vertical, &forms.shear] {
        if !pencil_exceeds(&blk.energy(s), &blk.mass, level)? {
            return Ok(true);
        }
    }
    Ok(false)
}

fn check_s<T: Real>(s: T) -> Result<()> {
    if !(s >= T::zero()) || !s.is_finite() {
        return Err(Error::InvalidParameter {
            field: "s",
            reason: format!("must be finite and nonnegative, got {s}"),
        });
    }
    Ok(())
}

/// Assembles and solves in one call.
pub fn alpha_at<T: Real>(
    params: &FluidParams<T>,
    field: &MagneticField<T>,
    k: [T; 2],
    disc: &Discretization<T>,
    s: T,
) -> Result<AlphaResult<T>> {
    alpha(&assemble_forms(params, field, k, disc)?, s)
}

/// Trace quotients of the magnetic form, per block and overall.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InviscidQuotient<T> {
    /// Infimum over all divergence-free modes.
    pub value: T,
    /// Restricted to modes with a vertical component.
    pub vertical: T,
    /// Restricted to transverse shear modes.
    pub shear: T,
}

/// `inf int |(B.grad) w|^2 / |w(0)|^2` over divergence-free modes with a
/// nonvanishing interface trace. The trace counts every velocity component;
/// for the vertical block that is `w3(0)` and the induced `i w3'(0) / |k|`.
pub fn inviscid_quotient<T: Real>(field: &MagneticField<T>, k: [T; 2], disc: &Discretization<T>) -> Result<InviscidQuotient<T>> {
    // The magnetic form does not depend on the fluid parameters.
    let forms = assemble_forms(&FluidParams::canonical(), field, k, disc)?;
    let kappa = k[0].hypot(k[1]);
    let at_interface = disc.basis.eval_layer(Layer::Upper, -T::one());
    let (dw, db) = (forms.vertical.dim(), forms.shear.dim());
    let mut v0 = vec![Cx::zero(); dw];
    let mut v1 = vec![Cx::zero(); dw];
    for (i, f) in &at_interface.w {
        v0[*i] = re(f[0]);
        v1[*i] = re(f[1] / kappa);
    }
    let mut h0 = vec![Cx::zero(); db];
    for (i, f) in &at_interface.b {
        h0[*i] = re(f[0]);
    }
    let vertical = trace_quotient(&forms.vertical.magnetic, &[v0, v1])?;
    let shear = trace_quotient(&forms.shear.magnetic, &[h0])?;
    Ok(InviscidQuotient {
        value: vertical.min(shear),
        vertical,
        shear,
    })
}

/// `1 / lambda_max(V^H (2M)^{-1} V)` for trace functionals the columns of `V`.
fn trace_quotient<T: Real>(mag: &crate::linalg::CMatrix<T>, traces: &[Vec<Cx<T>>]) -> Result<T> {
    let two_m = mag.scale(T::lit(2.0));
    if two_m.max_abs() == T::zero() {
        return Ok(T::zero());
    }
    let ch = Cholesky::factor(&two_m).map_err(|_| Error::Singular("magnetic form on the trace space"))?;
    let ys: Vec<Vec<Cx<T>>> = traces.iter().map(|v| ch.solve(v)).collect();
    let s = crate::linalg::CMatrix::from_fn(traces.len(), traces.len(), |i, j| dot_h(&traces[i], &ys[j]));
    let top = *crate::linalg::hermitian_eigen(&s)?.values.last().unwrap_or(&T::zero());
    if !(top > T::zero()) {
        return Err(Error::Singular("interface trace form"));
    }
    Ok(T::one() / top)
}

/// Residuals of the steady linear system at `s = lambda`.
#[derive(Debug, Clone)]
pub struct SteadyResidual<T> {
    /// Largest momentum residual over the nodes, relative to the largest term.
    pub momentum: T,
    /// Largest stress-jump residual, relative to the largest term.
    pub jump: T,
    /// Recovered pressure at the nodes of each layer.
    pub pressure_upper: Vec<Cx<T>>,
    pub pressure_lower: Vec<Cx<T>>,
}

struct Side<T> {
    q: Cx<T>,
    /// `(a, a', b, b', w, w')` at the interface.
    vals: [Cx<T>; 6],
}

/// Recovers the pressure from the horizontal momentum equation along `k`
/// and reports the vertical and shear momentum residuals along with the
/// three components of the stress jump at the interface.
pub fn steady_residual<T: Real>(
    params: &FluidParams<T>,
    field: &MagneticField<T>,
    k: [T; 2],
    lambda: T,
    disc: &Discretization<T>,
    mode: &ReducedMode<T>,
) -> Result<SteadyResidual<T>> {
    params.validate()?;
    let rb = reduce_basis(disc, k)?;
    if mode.coeffs.len() != rb.dim() {
        return Err(Error::DimensionMismatch {
            expected: rb.dim(),
            found: mode.coeffs.len(),
        });
    }
    let kappa = rb.kappa;
    let k2 = kappa * kappa;
    let beta = field.dot_horizontal(k);
    let b3 = field.b3();
    let l2 = lambda * lambda;
    let ib = im::<T>(beta);
    // (B.grad)^2 f = -beta^2 f + 2 i beta B3 f' + B3^2 f''
    let dd = |f0: Cx<T>, f1: Cx<T>, f2: Cx<T>| f0.scale(-beta * beta) + (ib * f1).scale(T::lit(2.0) * b3) + f2.scale(b3 * b3);
    let ik = im::<T>(T::one() / kappa);

    let mut mom = T::zero();
    let mut mom_scale = T::zero();
    let mut pressure = [Vec::new(), Vec::new()];
    let mut sides: Vec<Side<T>> = Vec::new();
    for (slot, layer) in Layer::BOTH.into_iter().enumerate() {
        let (rho, mu, lg) = match layer {
            Layer::Upper => (params.rho_plus, params.mu_plus, &disc.grid.upper),
            Layer::Lower => (params.rho_minus, params.mu_minus, &disc.grid.lower),
        };
        let nodes = lg.nodes();
        let iface = match layer {
            Layer::Upper => disc.grid.upper_interface(),
            Layer::Lower => disc.grid.lower_interface(),
        };
        for (i, &z) in nodes.iter().enumerate() {
            let (w, b) = mode_derivatives(disc, mode, layer, z);
            // a = i w'/k and its derivatives
            let a: [Cx<T>; 4] = [ik * w[1], ik * w[2], ik * w[3], ik * w[4]];
            let q_terms = [
                a[0].scale(l2 * rho),
                -(a[2] - a[0].scale(k2)).scale(lambda * mu),
                -dd(a[0], a[1], a[2]),
            ];
            let q = ik * (q_terms[0] + q_terms[1] + q_terms[2]);
            let dq = ik * (a[1].scale(l2 * rho) - (a[3] - a[1].scale(k2)).scale(lambda * mu) - dd(a[1], a[2], a[3]));
            let vert = [
                w[0].scale(l2 * rho),
                -(w[2] - w[0].scale(k2)).scale(lambda * mu),
                dq,
                -dd(w[0], w[1], w[2]),
            ];
            let shear = [
                b[0].scale(l2 * rho),
                -(b[2] - b[0].scale(k2)).scale(lambda * mu),
                -dd(b[0], b[1], b[2]),
            ];
            let rv: Cx<T> = vert.iter().copied().sum();
            let rs: Cx<T> = shear.iter().copied().sum();
            mom = mom.max(rv.norm()).max(rs.norm());
            for t in vert.iter().chain(&shear).chain(&q_terms) {
                mom_scale = mom_scale.max(t.norm());
            }
            pressure[slot].push(q);
            if i == iface {
                sides.push(Side {
                    q,
                    vals: [a[0], a[1], b[0], b[1], w[0], w[1]],
                });
            }
        }
    }
    let (up, lo) = (&sides[0], &sides[1]);
    let jump_of = |f: &dyn Fn(&Side<T>, T) -> Cx<T>| f(up, params.mu_plus) - f(lo, params.mu_minus);
    let dvec = |f0: Cx<T>, f1: Cx<T>| ib * f0 + f1.scale(b3);
    let ikap = im::<T>(kappa);
    let visc_h: Cx<T> = jump_of(&|s, mu| (s.vals[1] + ikap * s.vals[4]).scale(mu)).scale(-lambda);
    let mag_h = jump_of(&|s, _| dvec(s.vals[0], s.vals[1])).scale(-b3);
    let visc_p = jump_of(&|s, mu| s.vals[3].scale(mu)).scale(-lambda);
    let mag_p = jump_of(&|s, _| dvec(s.vals[2], s.vals[3])).scale(-b3);
    let qj = up.q - lo.q;
    let visc_3 = jump_of(&|s, mu| s.vals[5].scale(mu)).scale(-T::lit(2.0) * lambda);
    let mag_3 = jump_of(&|s, _| dvec(s.vals[4], s.vals[5])).scale(-b3);
    let w0 = (up.vals[4] + lo.vals[4]).scale(T::lit(0.5));
    let surf = w0.scale(-params.density_jump() * params.g);
    let comps = [visc_h + mag_h, visc_p + mag_p, qj + visc_3 + mag_3 + surf];
    let mut jump_scale = T::zero();
    for t in [visc_h, mag_h, visc_p, mag_p, up.q, lo.q, visc_3, mag_3, surf] {
        jump_scale = jump_scale.max(t.norm());
    }
    let jump = comps.iter().fold(T::zero(), |m, c| m.max(c.norm()));
    let rel = |r: T, s: T| if s > T::zero() { r / s } else { T::zero() };
    let [pressure_upper, pressure_lower] = pressure;
    Ok(SteadyResidual {
        momentum: rel(mom, mom_scale),
        jump: rel(jump, jump_scale),
        pressure_upper,
        pressure_lower,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::evaluate_energy;

    fn disc(n: usize) -> Discretization<f64> {
        Discretization::uniform(n, 1.0, 1.0).unwrap()
    }

    #[test]
    fn no_density_jump_gives_nonnegative_alpha() {
        let d = disc(16);
        let mut p = FluidParams::canonical();
        p.rho_plus = 1.0 + 1e-15;
        for k in [[0.0, 0.5], [3.0, 4.0], [0.0, 50.0]] {
            for s in [1e-4, 1.0] {
                let f = MagneticField::new(0.2, 0.0, 0.1);
                let a = alpha_at(&p, &f, k, &d, s).unwrap();
                assert!(a.alpha >= -1e-12, "{}", a.alpha);
            }
        }
    }

    #[test]
    fn supercritical_alpha_nonnegative() {
        let d = disc(24);
        let p = FluidParams::canonical();
        let f = MagneticField::new(0.0, 0.0, 1.0);
        for k in [[0.0, 0.1], [0.0, 3.0], [0.0, 100.0]] {
            for s in [1e-6, 1e-2, 1.0] {
                assert!(alpha_at(&p, &f, k, &d, s).unwrap().alpha >= -1e-8);
            }
        }
    }

    #[test]
    fn subcritical_small_s_negative_and_invariants() {
        let d = disc(32);
        let p = FluidParams::canonical();
        let f = MagneticField::new(0.0, 0.0, 0.3);
        let forms = assemble_forms(&p, &f, [0.0, 30.0], &d).unwrap();
        let a = alpha(&forms, 1e-3).unwrap();
        assert!(a.alpha < 0.0);
        assert!(a.eig_residual < 1e-10, "{}", a.eig_residual);
        let e = evaluate_energy(&forms, &a.minimizer, 1e-3).unwrap();
        assert!((e.j - 1.0).abs() < 1e-12);
        assert!((e.e - a.alpha).abs() < 1e-10 * a.alpha.abs().max(1.0));
        assert!(a.minimizer.interface_w3().norm() > 1e-8);
        // agrees with a doubled resolution
        let fine = alpha_at(&p, &f, [0.0, 30.0], &disc(64), 1e-3).unwrap();
        assert!((fine.alpha - a.alpha).abs() < 1e-6 * a.alpha.abs());
    }

    #[test]
    fn alpha_rejects_negative_s() {
        let d = disc(8);
        let forms = assemble_forms(&FluidParams::canonical(), &MagneticField::new(0.0, 0.0, 0.3), [1.0, 0.0], &d).unwrap();
        assert!(alpha(&forms, -1.0).is_err());
    }

    #[test]
    fn inviscid_quotient_examples() {
        let d = disc(48);
        let f = MagneticField::new(1.0, 0.0, 0.5);
        let q: Vec<_> = [10.0, 30.0, 100.0]
            .iter()
            .map(|&kk| inviscid_quotient(&f, [0.0, kk], &d).unwrap())
            .collect();
        for w in q.windows(2) {
            assert!(w[1].value <= w[0].value + 1e-12);
            assert!(w[1].vertical < w[0].vertical);
        }
        assert!(q[2].value >= 0.5 - 1e-10 && (q[2].value - 0.5) / 0.5 < 0.02, "{q:?}");
        // the transverse interface hat attains the bound
        assert!((q[0].shear - 0.5).abs() < 1e-12);
        // vertical block: (1/2) K / (K - 2) up to exponentially small terms
        for (qq, kk) in q.iter().zip([10.0, 30.0, 100.0]) {
            assert!((qq.vertical - 0.5 * kk / (kk - 2.0)).abs() < 1e-4, "{qq:?}");
        }
        let z = inviscid_quotient(&MagneticField::new(1.0, 0.0, 0.0), [0.0, 3.0], &d).unwrap();
        assert!(z.value.abs() < 1e-10);
        let v = MagneticField::new(0.0, 0.0, 0.5);
        for k in [[1.0, 0.0], [0.0, 20.0], [3.0, 3.0]] {
            assert!(inviscid_quotient(&v, k, &d).unwrap().value >= 0.5 - 1e-10);
        }
    }

    #[test]
    fn steady_residual_of_zero_mode() {
        let d = disc(12);
        let rb = reduce_basis(&d, [0.0, 2.0]).unwrap();
        let r = steady_residual(
            &FluidParams::canonical(),
            &MagneticField::new(0.0, 0.0, 0.3),
            [0.0, 2.0],
            0.5,
            &d,
            &ReducedMode::zero(&rb),
        )
        .unwrap();
        assert_eq!(r.momentum, 0.0);
        assert_eq!(r.jump, 0.0);
    }
}
