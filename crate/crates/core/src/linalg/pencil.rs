//! Smallest eigenpair of a Hermitian-definite pencil `A x = alpha J x`.
//!
//! `J` in the reduced bases is badly conditioned (high bubbles carry tiny
//! mass), so reducing through `chol(J)` would lose digits proportional to the
//! largest eigenvalue. The pencil is instead shifted below its spectrum and
//! inverted: with `K = A - sigma J = L L^H`, the largest eigenvalue `theta` of
//! `L^{-1} J L^{-H}` gives `alpha = sigma + 1/theta` with error relative to
//! `alpha - sigma`.

use num_complex::Complex;

use super::hermitian::hermitian_eigenvalues;
use super::{hermitian_eigen, CMatrix, Cholesky};
use crate::error::{Error, Result};
use crate::scalar::{dot_h, vec_norm, Cx, Real};

#[derive(Debug, Clone)]
pub struct PencilEigen<T: Real> {
    pub value: T,
    /// J-normalized, phase-normalized eigenvector.
    pub vector: Vec<Cx<T>>,
    /// `|A x - value J x| / |x|`.
    pub residual: T,
}

const MAX_SHIFT_TRIALS: usize = 24;
const MAX_REFINEMENTS: usize = 4;

pub fn smallest_pencil_eigen<T: Real>(a: &CMatrix<T>, j: &CMatrix<T>) -> Result<PencilEigen<T>> {
    let prep = prepare(a, j)?;
    let (alpha, y) = top_inverse_pair(&prep.chol, &prep.js, prep.sigma)?;
    let mut x: Vec<Cx<T>> = y.iter().zip(&prep.d).map(|(v, &di)| v.scale(di)).collect();
    let jn = dot_h(&x, &j.mul_vec(&x)).re;
    if !(jn > T::zero()) || !jn.is_finite() {
        return Err(Error::NonFinite("pencil eigenvector"));
    }
    let inv = T::one() / jn.sqrt();
    for v in x.iter_mut() {
        *v = v.scale(inv);
    }
    phase_normalize(&mut x);
    let ax = a.mul_vec(&x);
    let jx = j.mul_vec(&x);
    let r: Vec<Cx<T>> = ax.iter().zip(&jx).map(|(p, q)| p - q.scale(alpha)).collect();
    let residual = vec_norm(&r) / vec_norm(&x);
    Ok(PencilEigen {
        value: alpha,
        vector: x,
        residual,
    })
}

/// Smallest eigenvalue only; skips the eigenvector work.
pub fn smallest_pencil_value<T: Real>(a: &CMatrix<T>, j: &CMatrix<T>) -> Result<T> {
    Ok(prepare(a, j)?.value)
}

/// Whether every eigenvalue of `(A, J)` exceeds `level`, decided by one
/// Cholesky factorization of `A - level J`.
pub fn pencil_exceeds<T: Real>(a: &CMatrix<T>, j: &CMatrix<T>, level: T) -> Result<bool> {
    let n = a.rows();
    if !a.is_square() || j.rows() != n || j.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: j.rows(),
        });
    }
    let mut d = Vec::with_capacity(n);
    for i in 0..n {
        let jii = j[(i, i)].re;
        if !(jii > T::zero()) {
            return Err(Error::NotPositiveDefinite("mass form diagonal"));
        }
        d.push(T::one() / jii.sqrt());
    }
    let k = CMatrix::from_fn(n, n, |r, c| (a[(r, c)] - j[(r, c)].scale(level)).scale(d[r] * d[c]));
    Ok(Cholesky::factor(&k).is_ok())
}

struct Prepared<T: Real> {
    d: Vec<T>,
    js: CMatrix<T>,
    chol: Cholesky<T>,
    sigma: T,
    value: T,
}

fn prepare<T: Real>(a: &CMatrix<T>, j: &CMatrix<T>) -> Result<Prepared<T>> {
    let n = a.rows();
    if !a.is_square() || j.rows() != n || j.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: j.rows(),
        });
    }
    if n == 0 {
        return Err(Error::DimensionMismatch { expected: 1, found: 0 });
    }
    // Diagonal equilibration so that the scaled J has unit diagonal.
    let mut d = Vec::with_capacity(n);
    for i in 0..n {
        let jii = j[(i, i)].re;
        if !(jii > T::zero()) {
            return Err(Error::NotPositiveDefinite("mass form diagonal"));
        }
        d.push(T::one() / jii.sqrt());
    }
    let as_ = CMatrix::from_fn(n, n, |r, c| a[(r, c)].scale(d[r] * d[c]));
    let js = CMatrix::from_fn(n, n, |r, c| j[(r, c)].scale(d[r] * d[c]));
    if Cholesky::factor(&js).is_err() {
        return Err(Error::NotPositiveDefinite("mass form"));
    }

    // A positive definite A needs no shift at all.
    let scale = as_.max_abs().max(T::one());
    if let Ok(chol) = Cholesky::factor(&as_) {
        let value = top_inverse_value(&chol, &js, T::zero())?;
        return Ok(Prepared {
            d,
            js,
            chol,
            sigma: T::zero(),
            value,
        });
    }
    // March the shift downward until A - sigma J is positive definite.
    let mut sigma = -scale;
    let mut found = None;
    for _ in 0..MAX_SHIFT_TRIALS {
        let k = as_.add_scaled(-sigma, &js);
        if let Ok(ch) = Cholesky::factor(&k) {
            found = Some(ch);
            break;
        }
        sigma = sigma * T::lit(8.0);
    }
    let mut chol = found.ok_or(Error::EigenNoConvergence {
        iterations: MAX_SHIFT_TRIALS,
        context: "pencil shift search",
    })?;

    // Cholesky doubles as an inertia test, so climb towards the spectrum
    // with factorizations only: alpha_min > sigma exactly when it succeeds.
    let floor = scale * T::lit(1e-14);
    loop {
        let next = if sigma < -floor { sigma / T::lit(8.0) } else { T::zero() };
        if next == sigma {
            break;
        }
        match Cholesky::factor(&as_.add_scaled(-next, &js)) {
            Ok(ch) => {
                chol = ch;
                sigma = next;
            }
            Err(_) => break,
        }
    }
    let mut value = top_inverse_value(&chol, &js, sigma)?;

    // Refine with shifts closer below the estimate until the gap is
    // comparable to the eigenvalue itself.
    for _ in 0..MAX_REFINEMENTS {
        let gap = value - sigma;
        if gap <= T::lit(4.0) * value.abs() || sigma == T::zero() {
            break;
        }
        let sigma2 = value - T::lit(0.5) * value.abs() - T::lit(1e-3) * gap;
        let k = as_.add_scaled(-sigma2, &js);
        match Cholesky::factor(&k) {
            Ok(ch2) => {
                value = top_inverse_value(&ch2, &js, sigma2)?;
                chol = ch2;
                sigma = sigma2;
            }
            Err(_) => break,
        }
    }
    if !value.is_finite() {
        return Err(Error::NonFinite("pencil eigenvalue"));
    }
    Ok(Prepared { d, js, chol, sigma, value })
}

fn top_inverse_value<T: Real>(ch: &Cholesky<T>, js: &CMatrix<T>, sigma: T) -> Result<T> {
    let c = ch.congruence_inverse(js);
    let vals = hermitian_eigenvalues(&c)?;
    let theta = vals[vals.len() - 1];
    if !(theta > T::zero()) {
        return Err(Error::NotPositiveDefinite("shift-inverted pencil"));
    }
    Ok(sigma + T::one() / theta)
}

/// Returns `(sigma + 1/theta_max, L^{-H} y)` in the scaled coordinates.
fn top_inverse_pair<T: Real>(ch: &Cholesky<T>, js: &CMatrix<T>, sigma: T) -> Result<(T, Vec<Cx<T>>)> {
    let c = ch.congruence_inverse(js);
    let eig = hermitian_eigen(&c)?;
    let n = c.rows();
    let theta = eig.values[n - 1];
    if !(theta > T::zero()) {
        return Err(Error::NotPositiveDefinite("shift-inverted pencil"));
    }
    let y = ch.solve_upper_adjoint(&eig.vector(n - 1));
    Ok((sigma + T::one() / theta, y))
}

/// Rotates `x` so its largest-modulus entry (first on ties) is real positive.
pub fn phase_normalize<T: Real>(x: &mut [Cx<T>]) {
    let mut best = 0;
    let mut best_mod = T::zero();
    for (i, v) in x.iter().enumerate() {
        if v.norm() > best_mod {
            best_mod = v.norm();
            best = i;
        }
    }
    if best_mod == T::zero() {
        return;
    }
    let ph = x[best].conj().unscale(best_mod);
    for v in x.iter_mut() {
        *v *= ph;
    }
    x[best] = Complex::new(x[best].re, T::zero());
}
