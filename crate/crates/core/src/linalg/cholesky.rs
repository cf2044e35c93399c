use num_complex::Complex;

use super::CMatrix;
use crate::error::{Error, Result};
use crate::scalar::{Cx, Real};

/// `A = L L^H` for Hermitian positive-definite `A`.
#[derive(Debug, Clone)]
pub struct Cholesky<T: Real> {
    l: CMatrix<T>,
}

impl<T: Real> Cholesky<T> {
    /// Factors the lower triangle of `a`; the upper triangle is not read.
    pub fn factor(a: &CMatrix<T>) -> Result<Self> {
        let n = a.rows();
        if !a.is_square() {
            return Err(Error::DimensionMismatch {
                expected: a.rows(),
                found: a.cols(),
            });
        }
        let mut l = CMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)].re;
            for k in 0..j {
                d -= l[(j, k)].norm_sqr();
            }
            if !(d > T::zero()) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite("cholesky pivot"));
            }
            let djj = d.sqrt();
            l[(j, j)] = Complex::new(djj, T::zero());
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = s.unscale(djj);
            }
        }
        Ok(Self { l })
    }

    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    pub fn lower(&self) -> &CMatrix<T> {
        &self.l
    }

    /// `L^{-1} b`.
    pub fn solve_lower(&self, b: &[Cx<T>]) -> Vec<Cx<T>> {
        let n = self.dim();
        let mut x = b.to_vec();
        for i in 0..n {
            let mut s = x[i];
            let row = self.l.row(i);
            for k in 0..i {
                s -= row[k] * x[k];
            }
            x[i] = s / row[i];
        }
        x
    }

    /// `L^{-H} b`.
    pub fn solve_upper_adjoint(&self, b: &[Cx<T>]) -> Vec<Cx<T>> {
        let n = self.dim();
        let mut x = b.to_vec();
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= self.l[(k, i)].conj() * x[k];
            }
            x[i] = s / self.l[(i, i)].conj();
        }
        x
    }

    /// `A^{-1} b`.
    pub fn solve(&self, b: &[Cx<T>]) -> Vec<Cx<T>> {
        self.solve_upper_adjoint(&self.solve_lower(b))
    }

    /// `L^{-1} M L^{-H}`, Hermitian whenever `M` is.
    pub fn congruence_inverse(&self, m: &CMatrix<T>) -> CMatrix<T> {
        let n = self.dim();
        // Y = L^{-1} M column by column, then Z = L^{-1} Y^H = (L^{-1} M L^{-H})^H.
        let mut y = CMatrix::zeros(n, n);
        for j in 0..n {
            let col = self.solve_lower(&m.column(j));
            for i in 0..n {
                y[(i, j)] = col[i];
            }
        }
        let yh = y.adjoint();
        let mut z = CMatrix::zeros(n, n);
        for j in 0..n {
            let col = self.solve_lower(&yh.column(j));
            for i in 0..n {
                z[(i, j)] = col[i];
            }
        }
        let mut out = z.adjoint();
        // Symmetrize roundoff.
        for i in 0..n {
            out[(i, i)] = Complex::new(out[(i, i)].re, T::zero());
            for j in (i + 1)..n {
                let avg = (out[(i, j)] + out[(j, i)].conj()).scale(T::lit(0.5));
                out[(i, j)] = avg;
                out[(j, i)] = avg.conj();
            }
        }
        out
    }
}

impl<T: Real> Cholesky<T> {
    /// Returns `true` when `a` admits a Cholesky factorization.
    pub fn is_positive_definite(a: &CMatrix<T>) -> bool {
        Self::factor(a).is_ok()
    }
}
