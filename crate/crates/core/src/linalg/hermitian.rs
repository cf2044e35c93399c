//! Hermitian eigendecomposition: Householder reduction to a real symmetric
//! tridiagonal matrix followed by implicit QL iterations.

use num_complex::Complex;
use num_traits::Zero;

use super::{CMatrix, Matrix};
use crate::error::{Error, Result};
use crate::scalar::{Cx, Real};

/// Eigenvalues in ascending order; eigenvectors stored as matching columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen<T: Real> {
    pub values: Vec<T>,
    pub vectors: CMatrix<T>,
}

impl<T: Real> HermitianEigen<T> {
    pub fn vector(&self, j: usize) -> Vec<Cx<T>> {
        self.vectors.column(j)
    }
}

const MAX_QL_SWEEPS: usize = 80;

/// Full eigendecomposition of a Hermitian matrix (only the lower triangle and
/// diagonal real parts are trusted).
pub fn hermitian_eigen<T: Real>(a: &CMatrix<T>) -> Result<HermitianEigen<T>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            found: a.cols(),
        });
    }
    let n = a.rows();
    if n == 0 {
        return Ok(HermitianEigen {
            values: vec![],
            vectors: CMatrix::zeros(0, 0),
        });
    }
    let (diag, off, q) = tridiagonalize(a, true);
    let q = q.expect("accumulated");

    // Make the subdiagonal real with a diagonal unitary D: T = D T_r D^H.
    let mut phase = vec![Complex::new(T::one(), T::zero()); n];
    let mut e = vec![T::zero(); n];
    for i in 0..n - 1 {
        let r = off[i].norm();
        e[i] = r;
        phase[i + 1] = if r > T::zero() { phase[i] * off[i].unscale(r) } else { phase[i] };
    }
    let mut d = diag;
    let mut z = Matrix::<T>::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() });
    tql(&mut d, &mut e, Some(&mut z))?;

    // V = Q D Z
    let mut qd = q;
    for i in 0..n {
        for j in 0..n {
            qd[(i, j)] = qd[(i, j)] * phase[j];
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| d[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (jj, &j) in order.iter().enumerate() {
        for r in 0..n {
            let mut s = Cx::<T>::zero();
            let row = qd.row(r);
            for k in 0..n {
                s += row[k].scale(z[(k, j)]);
            }
            vectors[(r, jj)] = s;
        }
    }
    Ok(HermitianEigen { values, vectors })
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues<T: Real>(a: &CMatrix<T>) -> Result<Vec<T>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            found: a.cols(),
        });
    }
    let n = a.rows();
    if n == 0 {
        return Ok(vec![]);
    }
    let (mut d, off, _) = tridiagonalize(a, false);
    let mut e: Vec<T> = off.iter().map(|z| z.norm()).collect();
    e.push(T::zero());
    tql(&mut d, &mut e, None)?;
    d.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    Ok(d)
}

/// Returns `(diag, subdiag, Q)` with `A = Q T Q^H`; `Q` only when asked.
fn tridiagonalize<T: Real>(a: &CMatrix<T>, accumulate: bool) -> (Vec<T>, Vec<Cx<T>>, Option<CMatrix<T>>) {
    let n = a.rows();
    let mut h = a.clone();
    // Enforce exact Hermitian structure from the lower triangle.
    for i in 0..n {
        h[(i, i)] = Complex::new(h[(i, i)].re, T::zero());
        for j in 0..i {
            h[(j, i)] = h[(i, j)].conj();
        }
    }
    let mut q = if accumulate { Some(CMatrix::<T>::identity(n)) } else { None };
    let two = T::lit(2.0);
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let x: Vec<Cx<T>> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        let tail = x[1..].iter().map(|z| z.norm_sqr()).sum::<T>();
        if xnorm == T::zero() || tail == T::zero() {
            continue;
        }
        let x0 = x[0];
        let ph = if x0.norm() > T::zero() {
            x0.unscale(x0.norm())
        } else {
            Complex::new(T::one(), T::zero())
        };
        let beta = -ph.scale(xnorm);
        let mut v = x;
        v[0] -= beta;
        let vnorm2 = v.iter().map(|z| z.norm_sqr()).sum::<T>();
        let tau = two / vnorm2;

        // p = tau * H22 v
        let mut p = vec![Cx::<T>::zero(); m];
        for (ii, pi) in p.iter_mut().enumerate() {
            let row = &h.row(k + 1 + ii)[k + 1..];
            let mut s = Cx::<T>::zero();
            for (hij, vj) in row.iter().zip(&v) {
                s += hij * vj;
            }
            *pi = s.scale(tau);
        }
        let vhp = crate::scalar::dot_h(&v, &p);
        let kk = vhp.scale(tau / two);
        let w: Vec<Cx<T>> = p.iter().zip(&v).map(|(pi, vi)| pi - kk * vi).collect();
        for ii in 0..m {
            for jj in 0..m {
                let upd = v[ii] * w[jj].conj() + w[ii] * v[jj].conj();
                h[(k + 1 + ii, k + 1 + jj)] -= upd;
            }
        }
        h[(k + 1, k)] = beta;
        h[(k, k + 1)] = beta.conj();
        for i in (k + 2)..n {
            h[(i, k)] = Cx::zero();
            h[(k, i)] = Cx::zero();
        }
        // Q <- Q (I - tau v v^H)
        let Some(q) = q.as_mut() else { continue };
        for r in 0..n {
            let row = &q.row(r)[k + 1..];
            let mut s = Cx::<T>::zero();
            for (qj, vj) in row.iter().zip(&v) {
                s += qj * vj;
            }
            let s = s.scale(tau);
            let row = &mut q.row_mut(r)[k + 1..];
            for (qj, vj) in row.iter_mut().zip(&v) {
                *qj -= s * vj.conj();
            }
        }
    }
    let diag = (0..n).map(|i| h[(i, i)].re).collect();
    let off = (0..n.saturating_sub(1)).map(|i| h[(i + 1, i)]).collect();
    (diag, off, q)
}

/// Implicit QL with Wilkinson-type shifts on a real symmetric tridiagonal
/// matrix; `e[i]` couples `i` and `i + 1`, `e[n-1]` is scratch.
fn tql<T: Real>(d: &mut [T], e: &mut [T], mut z: Option<&mut Matrix<T>>) -> Result<()> {
    let n = d.len();
    if n == 1 {
        return Ok(());
    }
    e[n - 1] = T::zero();
    let eps = T::epsilon();
    let two = T::lit(2.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_SWEEPS {
                return Err(Error::EigenNoConvergence {
                    iterations: iter,
                    context: "tridiagonal QL",
                });
            }
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] -= p;
                    e[m] = T::zero();
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let Some(z) = z.as_deref_mut() else { continue };
                for k in 0..n {
                    let fz = z[(k, i + 1)];
                    z[(k, i + 1)] = s * z[(k, i)] + c * fz;
                    z[(k, i)] = c * z[(k, i)] - s * fz;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    Ok(())
}
