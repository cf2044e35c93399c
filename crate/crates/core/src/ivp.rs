//! Crank-Nicolson integration of the reduced linear system
//! `eta' = u`, `J u' = -E1 u - E0 eta + f` for a single wavevector.
//!
//! With the midpoint values `u_m`, `eta_m` the update satisfies
//! `N(n+1) - N(n) = -2 dt u_m^H E1 u_m + 2 dt Re(u_m^H f)` exactly, where
//! `N = u^H J u + eta^H E0 eta` is kinetic plus magnetic minus surface energy.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::forms::{QuadForms, ReducedMode};
use crate::linalg::{CMatrix, Lu};
use crate::scalar::{dot_h, vec_norm, Cx, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct ModeState<T> {
    pub eta: Vec<Cx<T>>,
    pub u: Vec<Cx<T>>,
    pub t: T,
}

impl<T: Real> ModeState<T> {
    pub fn zero(dim: usize) -> Self {
        Self {
            eta: vec![Cx::zero(); dim],
            u: vec![Cx::zero(); dim],
            t: T::zero(),
        }
    }

    /// `(eta, u) = (w, lambda w)`.
    pub fn growing_mode(w: &ReducedMode<T>, lambda: T) -> Self {
        Self {
            eta: w.coeffs.clone(),
            u: w.coeffs.iter().map(|c| c.scale(lambda)).collect(),
            t: T::zero(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerRow<T> {
    pub t: T,
    /// `u^H J u`.
    pub kinetic: T,
    /// `eta^H M eta`, `M` the magnetic form.
    pub magnetic: T,
    /// `eta^H S eta`, `S` the interface gravity form.
    pub surface: T,
    /// Running sum of `2 dt u_m^H E1 u_m`.
    pub dissipation_integral: T,
    /// Running sum of `2 dt Re(u_m^H f)`.
    pub forcing_work: T,
    /// `sqrt(2 kinetic)`, the density-weighted L2 norm of the velocity.
    pub u_norm: T,
}

impl<T: Real> LedgerRow<T> {
    pub fn natural_energy(&self) -> T {
        self.kinetic + self.magnetic - self.surface
    }
}

#[derive(Debug, Clone, Default)]
pub struct EnergyLedger<T> {
    pub rows: Vec<LedgerRow<T>>,
}

impl<T: Real> EnergyLedger<T> {
    /// Largest per-step defect of the discrete energy identity, relative to
    /// the largest energy term of the two rows involved.
    pub fn max_balance_residual(&self) -> T {
        let mut worst = T::zero();
        for w in self.rows.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let defect = (b.natural_energy() - a.natural_energy()) + (b.dissipation_integral - a.dissipation_integral)
                - (b.forcing_work - a.forcing_work);
            let scale = [
                a.kinetic,
                a.magnetic,
                a.surface,
                b.kinetic,
                b.magnetic,
                b.surface,
                b.dissipation_integral - a.dissipation_integral,
            ]
            .iter()
            .fold(T::zero(), |m, v| m.max(v.abs()));
            if scale > T::zero() {
                worst = worst.max(defect.abs() / scale);
            }
        }
        worst
    }

    /// Largest relative drift of the natural energy from its initial value.
    pub fn max_energy_drift(&self) -> T {
        let Some(first) = self.rows.first() else { return T::zero() };
        let e0 = first.natural_energy();
        let scale = first.kinetic.max(first.magnetic).max(first.surface).max(e0.abs());
        if scale == T::zero() {
            return T::zero();
        }
        self.rows
            .iter()
            .fold(T::zero(), |m, r| m.max((r.natural_energy() - e0).abs() / scale))
    }
}

/// Crank-Nicolson stepper with the implicit matrix factored once.
#[derive(Debug, Clone)]
pub struct Stepper<T: Real> {
    dt: T,
    e0: CMatrix<T>,
    e1: CMatrix<T>,
    j: CMatrix<T>,
    magnetic: CMatrix<T>,
    surface: CMatrix<T>,
    lu: Lu<T>,
}

impl<T: Real> Stepper<T> {
    pub fn new(forms: &QuadForms<T>, dt: T) -> Result<Self> {
        if !(dt > T::zero()) || !dt.is_finite() {
            return Err(Error::InvalidParameter {
                field: "dt",
                reason: format!("must be finite and positive, got {dt}"),
            });
        }
        let e0 = forms.e0();
        let e1 = forms.e1();
        let j = forms.j();
        let half = T::lit(0.5);
        let lhs = j.add_scaled(half * dt, &e1).add_scaled(T::lit(0.25) * dt * dt, &e0);
        let lu = Lu::factor(&lhs)?;
        Ok(Self {
            dt,
            e0,
            e1,
            j,
            magnetic: forms.magnetic(),
            surface: forms.surface(),
            lu,
        })
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn dim(&self) -> usize {
        self.j.rows()
    }

    fn check(&self, state: &ModeState<T>) -> Result<()> {
        let n = self.dim();
        if state.eta.len() != n || state.u.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: state.eta.len().min(state.u.len()),
            });
        }
        Ok(())
    }

    /// One step with optional midpoint forcing; returns the new state and
    /// the dissipation and forcing-work increments.
    pub fn step(&self, state: &ModeState<T>, forcing: Option<&[Cx<T>]>) -> Result<(ModeState<T>, T, T)> {
        self.check(state)?;
        let dt = self.dt;
        let half = T::lit(0.5);
        let e1u = self.e1.mul_vec(&state.u);
        let e0eta = self.e0.mul_vec(&state.eta);
        let e0u = self.e0.mul_vec(&state.u);
        let mut rhs: Vec<Cx<T>> = (0..self.dim())
            .map(|i| -(e1u[i] + e0eta[i]).scale(dt) - e0u[i].scale(half * dt * dt))
            .collect();
        if let Some(f) = forcing {
            if f.len() != self.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.dim(),
                    found: f.len(),
                });
            }
            if f.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite("forcing"));
            }
            for (r, fi) in rhs.iter_mut().zip(f) {
                *r += fi.scale(dt);
            }
        }
        let delta = self.lu.solve(&rhs);
        let u_new: Vec<Cx<T>> = state.u.iter().zip(&delta).map(|(u, d)| u + d).collect();
        let u_mid: Vec<Cx<T>> = state.u.iter().zip(&u_new).map(|(a, b)| (a + b).scale(half)).collect();
        let eta_new: Vec<Cx<T>> = state.eta.iter().zip(&u_mid).map(|(e, m)| e + m.scale(dt)).collect();
        let two = T::lit(2.0);
        let diss = two * dt * self.e1.quad_form(&u_mid).re;
        let work = forcing.map_or(T::zero(), |f| two * dt * dot_h(&u_mid, f).re);
        Ok((
            ModeState {
                eta: eta_new,
                u: u_new,
                t: state.t + dt,
            },
            diss,
            work,
        ))
    }

    fn row(&self, s: &ModeState<T>, diss: T, work: T) -> LedgerRow<T> {
        let kinetic = self.j.quad_form(&s.u).re;
        LedgerRow {
            t: s.t,
            kinetic,
            magnetic: self.magnetic.quad_form(&s.eta).re,
            surface: self.surface.quad_form(&s.eta).re,
            dissipation_integral: diss,
            forcing_work: work,
            u_norm: (T::lit(2.0) * kinetic).max(T::zero()).sqrt(),
        }
    }
}

fn step_count<T: Real>(horizon: T, dt: T) -> Result<usize> {
    if !(horizon > T::zero()) || !(dt > T::zero()) || dt > horizon * (T::one() + T::lit(1e-12)) {
        return Err(Error::InvalidParameter {
            field: "dt",
            reason: format!("need 0 < dt <= T, got dt = {dt}, T = {horizon}"),
        });
    }
    let n = (horizon / dt).round();
    n.to_usize().ok_or(Error::NonFinite("step count"))
}

/// Integrates for `round(T / dt)` steps, sampling every step.
pub fn evolve<T: Real>(forms: &QuadForms<T>, state0: &ModeState<T>, horizon: T, dt: T) -> Result<(Vec<ModeState<T>>, EnergyLedger<T>)> {
    evolve_forced(forms, state0, horizon, dt, |_| None)
}

/// As `evolve`, with `forcing(t)` evaluated at step midpoints.
pub fn evolve_forced<T: Real, F>(
    forms: &QuadForms<T>,
    state0: &ModeState<T>,
    horizon: T,
    dt: T,
    forcing: F,
) -> Result<(Vec<ModeState<T>>, EnergyLedger<T>)>
where
    F: Fn(T) -> Option<Vec<Cx<T>>>,
{
    let stepper = Stepper::new(forms, dt)?;
    stepper.check(state0)?;
    let steps = step_count(horizon, dt)?;
    let mut traj = Vec::with_capacity(steps + 1);
    let mut ledger = EnergyLedger {
        rows: Vec::with_capacity(steps + 1),
    };
    let (mut diss, mut work) = (T::zero(), T::zero());
    ledger.rows.push(stepper.row(state0, diss, work));
    traj.push(state0.clone());
    for i in 0..steps {
        let cur = traj.last().expect("nonempty");
        let f = forcing(cur.t + T::lit(0.5) * dt);
        let (mut next, dd, dw) = stepper.step(cur, f.as_deref())?;
        // summing dt drifts by O(steps * eps)
        next.t = state0.t + T::from_usize_lossy(i + 1) * dt;
        diss += dd;
        work += dw;
        ledger.rows.push(stepper.row(&next, diss, work));
        traj.push(next);
    }
    Ok((traj, ledger))
}

/// Least-squares slope of `ln u_norm` against `t` over the second half of the
/// samples, with its coefficient of determination.
pub fn growth_fit<T: Real>(ledger: &EnergyLedger<T>) -> Result<(T, T)> {
    let rows = &ledger.rows;
    if rows.len() < 10 {
        return Err(Error::InvalidParameter {
            field: "trajectory",
            reason: format!("need at least 10 samples, got {}", rows.len()),
        });
    }
    let tail = &rows[rows.len() / 2..];
    if tail.iter().any(|r| !(r.u_norm > T::zero()) || !r.u_norm.is_finite()) {
        return Err(Error::InvalidParameter {
            field: "trajectory",
            reason: "velocity norms must be positive and finite".into(),
        });
    }
    let n = T::from_usize_lossy(tail.len());
    let xs: Vec<T> = tail.iter().map(|r| r.t).collect();
    let ys: Vec<T> = tail.iter().map(|r| r.u_norm.ln()).collect();
    let xm = xs.iter().copied().sum::<T>() / n;
    let ym = ys.iter().copied().sum::<T>() / n;
    let (mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero());
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (*x - xm) * (*x - xm);
        sxy += (*x - xm) * (*y - ym);
        syy += (*y - ym) * (*y - ym);
    }
    let slope = sxy / sxx;
    let r2 = if syy > T::zero() { sxy * sxy / (sxx * syy) } else { T::one() };
    Ok((slope, r2))
}

/// Positive root of `lambda^2 x^H J x + lambda x^H E1 x + x^H E0 x = 0`,
/// accurate to second order in the eigenvector error.
pub fn rayleigh_growth_rate<T: Real>(forms: &QuadForms<T>, x: &ReducedMode<T>) -> Result<T> {
    let a = forms.j().quad_form(&x.coeffs).re;
    let b = forms.e1().quad_form(&x.coeffs).re;
    let c = forms.e0().quad_form(&x.coeffs).re;
    let disc = b * b - T::lit(4.0) * a * c;
    if !(a > T::zero()) || !(disc >= T::zero()) || !(c < T::zero()) {
        return Err(Error::InadmissibleMode("no positive growth rate for this profile".into()));
    }
    // -2c / (b + sqrt(disc)) avoids cancellation
    Ok(-T::lit(2.0) * c / (b + disc.sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForcedGrowthReport<T> {
    /// `sup_t e^{-lambda t} |u(t)|` at `dt`.
    pub sup_weighted: T,
    /// The same at `dt / 2`.
    pub sup_weighted_refined: T,
    /// Relative change between the two.
    pub drift: T,
    pub initial_norm: T,
    /// `sup_t |f(t)|` over the midpoints sampled at `dt`.
    pub forcing_sup: T,
    /// `(int_0^T |f|^2 dt)^{1/2}` by the midpoint rule.
    pub forcing_l2: T,
}

/// Integrates the forced system at `dt` and `dt / 2` and reports the
/// weighted velocity supremum with the forcing norms. Non-finite forcing
/// samples are rejected.
pub fn forced_growth_check<T: Real, F>(
    forms: &QuadForms<T>,
    lambda: T,
    state0: &ModeState<T>,
    forcing: F,
    horizon: T,
    dt: T,
) -> Result<ForcedGrowthReport<T>>
where
    F: Fn(T) -> Vec<Cx<T>>,
{
    let weighted = |dt: T| -> Result<(T, T, T, T)> {
        let mut fsup = T::zero();
        let mut fl2 = T::zero();
        let ok = std::cell::Cell::new(true);
        let samples = std::cell::RefCell::new(Vec::new());
        let (_, ledger) = evolve_forced(forms, state0, horizon, dt, |t| {
            let f = forcing(t);
            if f.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                ok.set(false);
            }
            samples.borrow_mut().push(vec_norm(&f));
            Some(f)
        })?;
        if !ok.get() {
            return Err(Error::NonFinite("forcing"));
        }
        for n in samples.borrow().iter() {
            fsup = fsup.max(*n);
            fl2 += *n * *n * dt;
        }
        let sup = ledger.rows.iter().fold(T::zero(), |m, r| m.max((-lambda * r.t).exp() * r.u_norm));
        if !sup.is_finite() {
            return Err(Error::NonFinite("weighted velocity supremum"));
        }
        Ok((sup, ledger.rows[0].u_norm, fsup, fl2.sqrt()))
    };
    let (sup, init, fsup, fl2) = weighted(dt)?;
    let (sup2, _, _, _) = weighted(dt * T::lit(0.5))?;
    let drift = if sup2 > T::zero() {
        (sup - sup2).abs() / sup2
    } else {
        (sup - sup2).abs()
    };
    Ok(ForcedGrowthReport {
        sup_weighted: sup,
        sup_weighted_refined: sup2,
        drift,
        initial_norm: init,
        forcing_sup: fsup,
        forcing_l2: fl2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::Discretization;
    use crate::forms::{assemble_forms, reduce_basis};
    use crate::growthrate::fixed_point_forms;
    use crate::model::{FluidParams, MagneticField};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn forms(b3: f64, k: [f64; 2], n: usize) -> (QuadForms<f64>, Discretization<f64>) {
        let d = Discretization::uniform(n, 1.0, 1.0).unwrap();
        let f = assemble_forms(&FluidParams::canonical(), &MagneticField::new(0.0, 0.0, b3), k, &d).unwrap();
        (f, d)
    }

    #[test]
    fn zero_state_stays_zero() {
        let (f, _) = forms(0.3, [0.0, 5.0], 12);
        let (traj, ledger) = evolve(&f, &ModeState::zero(f.dim()), 1.0, 0.1).unwrap();
        assert_eq!(traj.len(), 11);
        assert!(traj.iter().all(|s| s.u.iter().chain(&s.eta).all(|z| *z == Cx::zero())));
        assert_eq!(ledger.max_balance_residual(), 0.0);
        assert!(growth_fit(&ledger).is_err());
    }

    #[test]
    fn growing_mode_follows_exponential() {
        let (f, _) = forms(0.3, [0.0, 10.0], 24);
        let r = fixed_point_forms(&f, 1e-10).unwrap();
        let lam = r.lambda;
        let w = r.minimizer.unwrap();
        let s0 = ModeState::growing_mode(&w, lam);
        let dt = 1e-2 / lam;
        let (_, ledger) = evolve(&f, &s0, 3.0 / lam, dt).unwrap();
        let u0 = ledger.rows[0].u_norm;
        for row in &ledger.rows {
            let expect = (lam * row.t).exp();
            assert!((row.u_norm / u0 / expect - 1.0).abs() < 1e-3);
        }
        let (rate, r2) = growth_fit(&ledger).unwrap();
        assert!((rate - lam).abs() < 1e-2 * lam && r2 > 0.999);
        assert!(ledger.max_balance_residual() < 1e-12, "{}", ledger.max_balance_residual());
    }

    #[test]
    fn random_data_grows_no_faster_than_lambda() {
        let (f, d) = forms(0.3, [0.0, 10.0], 16);
        let lam = fixed_point_forms(&f, 1e-10).unwrap().lambda;
        let rb = reduce_basis(&d, [0.0, 10.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = ReducedMode::random(&d, &rb, &mut rng, 0.7, 10);
        let s0 = ModeState {
            eta: m.coeffs.clone(),
            u: vec![Cx::zero(); m.coeffs.len()],
            t: 0.0,
        };
        let (_, ledger) = evolve(&f, &s0, 6.0 / lam, 0.02 / lam).unwrap();
        let (rate, _) = growth_fit(&ledger).unwrap();
        assert!(rate <= lam * 1.01, "{rate} vs {lam}");
    }

    #[test]
    fn supercritical_energy_nonincreasing() {
        let (f, d) = forms(1.0, [0.0, 3.0], 16);
        let rb = reduce_basis(&d, [0.0, 3.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = ReducedMode::random(&d, &rb, &mut rng, 0.7, 10);
        let s0 = ModeState {
            eta: m.coeffs.clone(),
            u: m.coeffs.clone(),
            t: 0.0,
        };
        let (_, ledger) = evolve(&f, &s0, 2.0, 0.01).unwrap();
        for w in ledger.rows.windows(2) {
            assert!(w[1].natural_energy() <= w[0].natural_energy() * (1.0 + 1e-14));
        }
        assert!(ledger.rows.iter().all(|r| r.natural_energy() >= 0.0));
    }

    #[test]
    fn inviscid_run_conserves_energy() {
        let (f, d) = forms(1.0, [0.0, 3.0], 12);
        let f = f.inviscid();
        let rb = reduce_basis(&d, [0.0, 3.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = ReducedMode::random(&d, &rb, &mut rng, 0.6, 6);
        let s0 = ModeState {
            eta: m.coeffs.clone(),
            u: vec![Cx::zero(); m.coeffs.len()],
            t: 0.0,
        };
        let (_, ledger) = evolve(&f, &s0, 1.0, 1e-2).unwrap();
        assert!(ledger.max_energy_drift() < 1e-12);
    }

    #[test]
    fn forced_check_examples() {
        let (f, _) = forms(0.3, [0.0, 10.0], 16);
        let r = fixed_point_forms(&f, 1e-10).unwrap();
        let lam = r.lambda;
        let dim = f.dim();
        let zero = |_t: f64| vec![Cx::zero(); dim];
        let s0 = ModeState::growing_mode(r.minimizer.as_ref().unwrap(), lam);
        let rep = forced_growth_check(&f, lam, &s0, zero, 3.0 / lam, 0.01 / lam).unwrap();
        assert!((rep.sup_weighted / rep.initial_norm - 1.0).abs() < 1e-2);
        let rep0 = forced_growth_check(&f, lam, &ModeState::zero(dim), zero, 1.0, 0.1).unwrap();
        assert_eq!(rep0.sup_weighted, 0.0);
        let bad = |_t: f64| vec![Cx::new(f64::NAN, 0.0); dim];
        assert!(forced_growth_check(&f, lam, &ModeState::zero(dim), bad, 1.0, 0.1).is_err());
    }

    #[test]
    fn rejects_bad_steps() {
        let (f, _) = forms(0.3, [0.0, 10.0], 8);
        assert!(Stepper::new(&f, 0.0).is_err());
        assert!(evolve(&f, &ModeState::zero(f.dim()), 1.0, 2.0).is_err());
        assert!(evolve(&f, &ModeState::zero(3), 1.0, 0.5).is_err());
    }
}
