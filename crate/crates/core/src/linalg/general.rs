//! Eigenvalues of a general complex matrix: Householder reduction to upper
//! Hessenberg form and single-shift QR with Givens rotations.

use num_complex::Complex;
use num_traits::Zero;

use super::CMatrix;
use crate::error::{Error, Result};
use crate::scalar::{Cx, Real};

const MAX_ITER_PER_EIGENVALUE: usize = 60;

/// All eigenvalues of `a`, in the order they deflate (no sorting).
pub fn eigenvalues<T: Real>(a: &CMatrix<T>) -> Result<Vec<Cx<T>>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            found: a.cols(),
        });
    }
    let n = a.rows();
    let mut h = hessenberg(a);
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return Ok(out);
    }
    let eps = T::epsilon();
    let mut hi = n - 1;
    let mut iter = 0usize;
    loop {
        if hi == 0 {
            out.push(h[(0, 0)]);
            break;
        }
        // Locate the start of the unreduced block ending at `hi`.
        let mut l = hi;
        while l > 0 {
            let s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            if h[(l, l - 1)].norm() <= eps * s {
                h[(l, l - 1)] = Cx::zero();
                break;
            }
            l -= 1;
        }
        if l == hi {
            out.push(h[(hi, hi)]);
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > MAX_ITER_PER_EIGENVALUE {
            return Err(Error::EigenNoConvergence {
                iterations: iter,
                context: "hessenberg QR",
            });
        }
        let sigma = if iter % 11 == 0 {
            // Exceptional shift to break cycles.
            h[(hi, hi)] + Complex::new(h[(hi, hi - 1)].norm(), T::zero())
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        qr_sweep(&mut h, l, hi, sigma);
    }
    Ok(out)
}

fn wilkinson_shift<T: Real>(a: Cx<T>, b: Cx<T>, c: Cx<T>, d: Cx<T>) -> Cx<T> {
    let half = T::lit(0.5);
    let m = (a + d).scale(half);
    let disc = ((a - d).scale(half).powu(2) + b * c).sqrt();
    let l1 = m + disc;
    let l2 = m - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Rotation `[c s; -conj(s) c]` mapping `(x, y)` to `(r, 0)`.
fn givens<T: Real>(x: Cx<T>, y: Cx<T>) -> (T, Cx<T>) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == T::zero() {
        return (T::one(), Cx::zero());
    }
    if ax == T::zero() {
        return (T::zero(), Complex::new(T::one(), T::zero()) * y.conj().unscale(ay));
    }
    let r = ax.hypot(ay);
    let alpha = x.unscale(ax);
    (ax / r, alpha * y.conj().unscale(r))
}

fn qr_sweep<T: Real>(h: &mut CMatrix<T>, l: usize, hi: usize, sigma: Cx<T>) {
    for i in l..=hi {
        h[(i, i)] -= sigma;
    }
    let mut rots = Vec::with_capacity(hi - l);
    for k in l..hi {
        let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
        for j in k..=hi {
            let x = h[(k, j)];
            let y = h[(k + 1, j)];
            h[(k, j)] = x.scale(c) + s * y;
            h[(k + 1, j)] = -(s.conj() * x) + y.scale(c);
        }
        rots.push((c, s));
    }
    for (off, &(c, s)) in rots.iter().enumerate() {
        let k = l + off;
        let top = (k + 2).min(hi);
        for i in l..=top {
            let x = h[(i, k)];
            let y = h[(i, k + 1)];
            h[(i, k)] = x.scale(c) + y * s.conj();
            h[(i, k + 1)] = -(x * s) + y.scale(c);
        }
    }
    for i in l..=hi {
        h[(i, i)] += sigma;
    }
}

fn hessenberg<T: Real>(a: &CMatrix<T>) -> CMatrix<T> {
    let n = a.rows();
    let mut h = a.clone();
    let two = T::lit(2.0);
    for k in 0..n.saturating_sub(2) {
        let x: Vec<Cx<T>> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let tail = x[1..].iter().map(|z| z.norm_sqr()).sum::<T>();
        if tail == T::zero() {
            continue;
        }
        let xnorm = (tail + x[0].norm_sqr()).sqrt();
        let ph = if x[0].norm() > T::zero() {
            x[0].unscale(x[0].norm())
        } else {
            Complex::new(T::one(), T::zero())
        };
        let mut v = x;
        v[0] += ph.scale(xnorm);
        let tau = two / v.iter().map(|z| z.norm_sqr()).sum::<T>();
        // Left: rows k+1.., columns k..
        for j in k..n {
            let mut s = Cx::<T>::zero();
            for (ii, vi) in v.iter().enumerate() {
                s += vi.conj() * h[(k + 1 + ii, j)];
            }
            let s = s.scale(tau);
            for (ii, vi) in v.iter().enumerate() {
                h[(k + 1 + ii, j)] -= vi * s;
            }
        }
        // Right: all rows, columns k+1..
        for i in 0..n {
            let mut s = Cx::<T>::zero();
            for (jj, vj) in v.iter().enumerate() {
                s += h[(i, k + 1 + jj)] * vj;
            }
            let s = s.scale(tau);
            for (jj, vj) in v.iter().enumerate() {
                h[(i, k + 1 + jj)] -= s * vj.conj();
            }
        }
        for i in (k + 2)..n {
            h[(i, k)] = Cx::zero();
        }
    }
    h
}
