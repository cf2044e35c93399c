//! Discrete checks of the functional inequalities behind the stability
//! theory, and the explicit test-function limits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::basis::Discretization;
use crate::chebgrid::{LayerGrid, TwoLayerGrid};
use crate::error::{Error, Result};
use crate::forms::{lift_nodal, reduce_basis, sample_mode, NodalMode, ReducedMode, VelocityProfile};
use crate::model::{canonicalize, FluidParams, MagneticField};
use crate::scalar::{cx, im, Cx, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantEstimate<T> {
    /// Largest ratio over the sample.
    pub best_ratio: T,
    pub sample_size: usize,
    /// Relative change of `best_ratio` when the grid degree is doubled.
    pub refinement_drift: T,
}

/// Degree of the random correction series.
pub const PROFILE_DEGREE: usize = 12;
const PROFILE_DECAY: f64 = 0.6;
const WALL_TOL: f64 = 1e-12;

/// Scalar profile vanishing at both walls and continuous across the
/// interface: `v` at `z = 0` plus a polynomial correction with geometrically
/// decaying Chebyshev coefficients in each layer.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarProfile<T> {
    pub interface_value: Cx<T>,
    pub upper: Vec<Cx<T>>,
    pub lower: Vec<Cx<T>>,
    pub ell: T,
    pub m: T,
}

impl<T: Real> ScalarProfile<T> {
    pub fn random<R: Rng + ?Sized>(rng: &mut R, ell: T, m: T) -> Self {
        let mut draw = |scale: f64| {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            cx(T::lit(a * scale), T::lit(b * scale))
        };
        let v = draw(1.0);
        let upper = (0..=PROFILE_DEGREE).map(|j| draw(PROFILE_DECAY.powi(j as i32))).collect();
        let lower = (0..=PROFILE_DEGREE).map(|j| draw(PROFILE_DECAY.powi(j as i32))).collect();
        Self {
            interface_value: v,
            upper,
            lower,
            ell,
            m,
        }
    }

    fn cheb(c: &[Cx<T>], x: T) -> Cx<T> {
        // Clenshaw
        let two = T::lit(2.0);
        let (mut b1, mut b2) = (Cx::new(T::zero(), T::zero()), Cx::new(T::zero(), T::zero()));
        for &cj in c.iter().skip(1).rev() {
            let b0 = cj + b1.scale(two * x) - b2;
            b2 = b1;
            b1 = b0;
        }
        c[0] + b1.scale(x) - b2
    }

    pub fn eval(&self, z: T) -> Cx<T> {
        let one = T::one();
        let half = T::lit(0.5);
        if z >= T::zero() {
            let xi = T::lit(2.0) * z / self.ell - one;
            (self.interface_value + Self::cheb(&self.upper, xi).scale(one + xi)).scale(half * (one - xi))
        } else {
            let xi = T::lit(2.0) * z / self.m + one;
            (self.interface_value + Self::cheb(&self.lower, xi).scale(one - xi)).scale(half * (one + xi))
        }
    }

    pub fn sample(&self, grid: &TwoLayerGrid<T>) -> (Vec<Cx<T>>, Vec<Cx<T>>) {
        grid.sample(|z| self.eval(z))
    }
}

fn require_b3<T: Real>(field: &MagneticField<T>) -> Result<()> {
    if field.b3() == T::zero() || !field.is_finite() {
        return Err(Error::InvalidParameter {
            field: "b3",
            reason: "the vertical field must be finite and nonzero".into(),
        });
    }
    Ok(())
}

fn check_scalar<T: Real>(grid: &TwoLayerGrid<T>, upper: &[Cx<T>], lower: &[Cx<T>]) -> Result<()> {
    let (nu, nl) = (grid.upper.len(), grid.lower.len());
    if upper.len() != nu || lower.len() != nl {
        return Err(Error::DimensionMismatch {
            expected: nu + nl,
            found: upper.len() + lower.len(),
        });
    }
    let scale = upper.iter().chain(lower).fold(T::zero(), |m, z| m.max(z.norm()));
    let tol = T::lit(WALL_TOL) * scale.max(T::min_positive_value());
    if upper[nu - 1].norm() > tol || lower[0].norm() > tol {
        return Err(Error::InadmissibleMode("profile must vanish at both walls".into()));
    }
    if (upper[grid.upper_interface()] - lower[grid.lower_interface()]).norm() > tol {
        return Err(Error::InadmissibleMode("profile must be continuous across the interface".into()));
    }
    Ok(())
}

/// `(int |f|^2, int |(i B_*.k + B3 d/dz) f|^2)`.
fn scalar_norms<T: Real>(field: &MagneticField<T>, k: [T; 2], grid: &TwoLayerGrid<T>, upper: &[Cx<T>], lower: &[Cx<T>]) -> Result<(T, T)> {
    let beta = field.dot_horizontal(k);
    let b3 = field.b3();
    let part = |lg: &LayerGrid<T>, f: &[Cx<T>]| -> Result<(T, T)> {
        let df = lg.differentiate(f)?;
        let f2: Vec<T> = f.iter().map(|z| z.norm_sqr()).collect();
        let g2: Vec<T> = f
            .iter()
            .zip(&df)
            .map(|(v, d)| (im::<T>(beta) * v + d.scale(b3)).norm_sqr())
            .collect();
        Ok((lg.integrate_real(&f2)?, lg.integrate_real(&g2)?))
    };
    let (a, b) = part(&grid.upper, upper)?;
    let (c, d) = part(&grid.lower, lower)?;
    Ok((a + c, b + d))
}

/// `int |f|^2 / int |(B.grad) f|^2` for a per-mode scalar profile.
pub fn poincare_ratio<T: Real>(field: &MagneticField<T>, k: [T; 2], grid: &TwoLayerGrid<T>, upper: &[Cx<T>], lower: &[Cx<T>]) -> Result<T> {
    require_b3(field)?;
    check_scalar(grid, upper, lower)?;
    let (f2, g2) = scalar_norms(field, k, grid, upper, lower)?;
    if !(f2 > T::zero()) {
        return Err(Error::InadmissibleMode("zero profile".into()));
    }
    Ok(f2 / g2)
}

/// `|f(0)|^2 / (|B3|^{-1} |(B.grad) f| |f|)`.
pub fn trace_ratio<T: Real>(field: &MagneticField<T>, k: [T; 2], grid: &TwoLayerGrid<T>, upper: &[Cx<T>], lower: &[Cx<T>]) -> Result<T> {
    require_b3(field)?;
    check_scalar(grid, upper, lower)?;
    let (f2, g2) = scalar_norms(field, k, grid, upper, lower)?;
    if !(f2 > T::zero()) {
        return Err(Error::InadmissibleMode("zero profile".into()));
    }
    let f0 = upper[grid.upper_interface()];
    Ok(f0.norm_sqr() / ((g2 * f2).sqrt() / field.b3().abs()))
}

/// `(m^2 + l^2) / B3^2`.
pub fn poincare_bound<T: Real>(field: &MagneticField<T>, ell: T, m: T) -> T {
    (m * m + ell * ell) / (field.b3() * field.b3())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoincareReport<T> {
    pub estimate: ConstantEstimate<T>,
    pub bound: T,
    pub violations: usize,
}

fn sample_ratios<T: Real>(
    grid: &TwoLayerGrid<T>,
    n_samples: usize,
    seed: u64,
    ratio: impl Fn(&[Cx<T>], &[Cx<T>]) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    // one stream per sample so the batch splits across threads
    (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let p = ScalarProfile::random(&mut rng, grid.ell(), grid.m());
            let (u, l) = p.sample(grid);
            ratio(&u, &l)
        })
        .collect()
}

fn refined<T: Real>(grid: &TwoLayerGrid<T>) -> Result<TwoLayerGrid<T>> {
    TwoLayerGrid::build(2 * grid.upper.degree(), 2 * grid.lower.degree(), grid.ell(), grid.m())
}

fn max_of<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(*x))
}

fn drift<T: Real>(a: T, b: T) -> T {
    if b != T::zero() {
        (a - b).abs() / b.abs()
    } else {
        (a - b).abs()
    }
}

/// Checks the explicit Poincare bound on `n_samples` random profiles.
pub fn poincare_check<T: Real>(
    field: &MagneticField<T>,
    k: [T; 2],
    grid: &TwoLayerGrid<T>,
    n_samples: usize,
    seed: u64,
) -> Result<PoincareReport<T>> {
    require_b3(field)?;
    let bound = poincare_bound(field, grid.ell(), grid.m());
    let ratios = sample_ratios(grid, n_samples, seed, |u, l| poincare_ratio(field, k, grid, u, l))?;
    let fine = refined(grid)?;
    let ratios_f = sample_ratios(&fine, n_samples, seed, |u, l| poincare_ratio(field, k, &fine, u, l))?;
    let violations = ratios.iter().chain(&ratios_f).filter(|r| **r > bound).count();
    let best = max_of(&ratios);
    Ok(PoincareReport {
        estimate: ConstantEstimate {
            best_ratio: best,
            sample_size: n_samples,
            refinement_drift: drift(best, max_of(&ratios_f)),
        },
        bound,
        violations,
    })
}

pub fn trace_check<T: Real>(
    field: &MagneticField<T>,
    k: [T; 2],
    grid: &TwoLayerGrid<T>,
    n_samples: usize,
    seed: u64,
) -> Result<ConstantEstimate<T>> {
    require_b3(field)?;
    let ratios = sample_ratios(grid, n_samples, seed, |u, l| trace_ratio(field, k, grid, u, l))?;
    let fine = refined(grid)?;
    let ratios_f = sample_ratios(&fine, n_samples, seed, |u, l| trace_ratio(field, k, &fine, u, l))?;
    let best = max_of(&ratios);
    if !best.is_finite() {
        return Err(Error::NonFinite("trace ratio"));
    }
    Ok(ConstantEstimate {
        best_ratio: best,
        sample_size: n_samples,
        refinement_drift: drift(best, max_of(&ratios_f)),
    })
}

/// `int |u|^2 + |grad u|^2` over `int |Du|^2`, `Du = grad u + grad u^T`.
pub fn korn_ratio<T: Real>(grid: &TwoLayerGrid<T>, profile: &VelocityProfile<T>) -> Result<T> {
    let k = profile.k;
    let mut h1 = T::zero();
    let mut dd = T::zero();
    for (lg, comps) in [(&grid.upper, &profile.upper), (&grid.lower, &profile.lower)] {
        let d3: Vec<Vec<Cx<T>>> = comps.iter().map(|c| lg.differentiate(c)).collect::<Result<_>>()?;
        let n = lg.len();
        let mut a = vec![T::zero(); n];
        let mut b = vec![T::zero(); n];
        for i in 0..n {
            let mut grad = [[Cx::new(T::zero(), T::zero()); 3]; 3];
            for c in 0..3 {
                grad[0][c] = im::<T>(k[0]) * comps[c][i];
                grad[1][c] = im::<T>(k[1]) * comps[c][i];
                grad[2][c] = d3[c][i];
            }
            let mut s = T::zero();
            let mut g = T::zero();
            for p in 0..3 {
                g += comps[p][i].norm_sqr();
                for q in 0..3 {
                    g += grad[p][q].norm_sqr();
                    s += (grad[p][q] + grad[q][p]).norm_sqr();
                }
            }
            a[i] = g;
            b[i] = s;
        }
        h1 += lg.integrate_real(&a)?;
        dd += lg.integrate_real(&b)?;
    }
    if !(dd > T::zero()) {
        return Err(Error::InadmissibleMode("zero symmetric gradient".into()));
    }
    Ok(h1 / dd)
}

/// Korn ratio of a nodal mode; wall values must vanish.
pub fn korn_ratio_nodal<T: Real>(grid: &TwoLayerGrid<T>, mode: &NodalMode<T>) -> Result<T> {
    let p = lift_nodal(grid, mode, T::lit(WALL_TOL))?;
    korn_ratio(grid, &p)
}

/// Bubble levels used by the random Korn samples.
pub const KORN_LEVELS: usize = 8;

/// Korn ratio over random modal modes at degree `n` and `2n`.
pub fn korn_check<T: Real>(k: [T; 2], ell: T, m: T, n: usize, n_samples: usize, seed: u64) -> Result<ConstantEstimate<T>> {
    let run = |n: usize| -> Result<T> {
        let disc = Discretization::uniform(n, ell, m)?;
        let fine = TwoLayerGrid::build(2 * n + 4, 2 * n + 4, ell, m)?;
        let rb = reduce_basis(&disc, k)?;
        let ratios: Vec<T> = (0..n_samples)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                let mode = ReducedMode::random(&disc, &rb, &mut rng, T::lit(0.7), KORN_LEVELS);
                korn_ratio_nodal(&fine, &sample_mode(&disc, &mode, &fine)?)
            })
            .collect::<Result<_>>()?;
        Ok(max_of(&ratios))
    };
    let best = run(n)?;
    let best_f = run(2 * n)?;
    Ok(ConstantEstimate {
        best_ratio: best,
        sample_size: n_samples,
        refinement_drift: drift(best, best_f),
    })
}

/// Horizontal Gaussian factor integrals for one `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianFactors<T> {
    /// `int e^{-2 n z^2}` (no prefactor).
    pub raw: T,
    /// `int |d/dz e^{-n z^2}|^2`.
    pub raw_deriv: T,
    /// With the `n^{-1/4}` prefactor.
    pub scaled: T,
    pub scaled_deriv: T,
    /// Deviation of the quadrature from the closed forms.
    pub truncation_error: T,
}

/// Trapezoid integration on `[-L, L]` with the Gaussian tail below `1e-16`.
pub fn gaussian_factors<T: Real>(n: T) -> Result<GaussianFactors<T>> {
    if !(n > T::zero()) || !n.is_finite() {
        return Err(Error::InvalidParameter {
            field: "n",
            reason: format!("must be positive, got {n}"),
        });
    }
    let two = T::lit(2.0);
    // e^{-2 n L^2} = 1e-16 relative to the peak
    let half_width = (T::lit(37.0) / (two * n)).sqrt();
    let points = 4001usize;
    let h = two * half_width / T::from_usize_lossy(points - 1);
    let (mut a, mut b) = (T::zero(), T::zero());
    for i in 0..points {
        let z = -half_width + h * T::from_usize_lossy(i);
        let g = (-n * z * z).exp();
        let dg = -two * n * z * g;
        let w = if i == 0 || i == points - 1 { T::lit(0.5) } else { T::one() };
        a += w * g * g;
        b += w * dg * dg;
    }
    a *= h;
    b *= h;
    let pi = T::PI();
    let exact_a = (pi / (two * n)).sqrt();
    let exact_b = n * exact_a;
    let truncation_error = ((a - exact_a).abs() / exact_a).max((b - exact_b).abs() / exact_b);
    if truncation_error > T::lit(1e-10) {
        return Err(Error::NonFinite("Gaussian quadrature (truncation error above 1e-10)"));
    }
    let pre = T::one() / n.sqrt();
    Ok(GaussianFactors {
        raw: a,
        raw_deriv: b,
        scaled: a * pre,
        scaled_deriv: b * pre,
        truncation_error,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFnRow<T> {
    pub k: T,
    pub n: T,
    /// Magnetic energy over interface trace.
    pub ratio: T,
    /// `E0` per unit trace: `(ratio - [rho] g) / 2`.
    pub e0: T,
    pub gaussian: GaussianFactors<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestFnTable<T> {
    pub rows: Vec<TestFnRow<T>>,
    /// `int psi^2` and `int psi'^2` on the grid.
    pub psi_sq: T,
    pub dpsi_sq: T,
    /// `B3^2 (1/l + 1/m)`.
    pub limit: T,
}

/// Ratios for the horizontally stretched test functions built from
/// `phi(x1/k)`, `phi_n(x2/k) = n^{-1/4} e^{-n (x2/k)^2}` and the tent `psi`.
///
/// The vertical velocity is `phi(x1/k) k^{-1} phi_n'(x2/k) psi(x3)` and the
/// horizontal one `-phi(x1/k) phi_n(x2/k) psi'(x3)` along `x2`, which makes the
/// field divergence-free. `psi'` jumps at the interface, so the term
/// `B3^2 int |d3 w2|^2` is singular there and left out of the ratio; the
/// remaining terms factor into one-dimensional integrals.
pub fn testfn_limits<T: Real>(
    params: &FluidParams<T>,
    field: &MagneticField<T>,
    k_seq: &[T],
    n_seq: &[T],
    grid: &TwoLayerGrid<T>,
) -> Result<TestFnTable<T>> {
    params.validate()?;
    if k_seq.len() != n_seq.len() || k_seq.is_empty() {
        return Err(Error::InvalidParameter {
            field: "k_seq",
            reason: "k and n sequences must be nonempty and of equal length".into(),
        });
    }
    for s in [k_seq, n_seq] {
        if s.windows(2).any(|w| !(w[1] > w[0])) || !(s[0] > T::zero()) {
            return Err(Error::InvalidParameter {
                field: "k_seq",
                reason: "sequences must be positive and strictly increasing".into(),
            });
        }
    }
    let (cf, _, _) = canonicalize(field, [T::one(), T::zero()]);
    let b1 = cf.b[0];
    let b3 = cf.b3();
    let (ell, m) = (grid.ell(), grid.m());
    let (pu, pl) = grid.sample(|z| {
        let v = if z >= T::zero() { T::one() - z / ell } else { T::one() + z / m };
        Cx::new(v, T::zero())
    });
    let sq = |v: &[Cx<T>]| v.iter().map(|z| z.norm_sqr()).collect::<Vec<T>>();
    let psi_sq = grid.integrate_real(&sq(&pu), &sq(&pl))?;
    let dpsi_sq = grid.integrate_real(&sq(&grid.upper.differentiate(&pu)?), &sq(&grid.lower.differentiate(&pl)?))?;
    // phi(x) = e^{-x^2}: int phi'^2 / int phi^2 = 1
    let phi_ratio = gaussian_factors(T::one())?;
    let phi_ratio = phi_ratio.raw_deriv / phi_ratio.raw;
    let jump = params.density_jump() * params.g;
    let mut rows = Vec::with_capacity(k_seq.len());
    for (&k, &n) in k_seq.iter().zip(n_seq) {
        let g = gaussian_factors(n)?;
        let ratio =
            b1 * b1 * phi_ratio * (g.scaled / g.scaled_deriv) * dpsi_sq + b1 * b1 / (k * k) * phi_ratio * psi_sq + b3 * b3 * dpsi_sq;
        rows.push(TestFnRow {
            k,
            n,
            ratio,
            e0: T::lit(0.5) * (ratio - jump),
            gaussian: g,
        });
    }
    Ok(TestFnTable {
        rows,
        psi_sq,
        dpsi_sq,
        limit: b3 * b3 * (T::one() / ell + T::one() / m),
    })
}
