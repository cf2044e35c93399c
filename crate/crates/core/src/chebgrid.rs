//! Chebyshev–Lobatto grids on the two layers `(-m, 0)` and `(0, ell)`.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{Cx, Real};

pub const MIN_DEGREE: usize = 8;

/// Lobatto nodes on `[-1, 1]` in increasing order, endpoints exact.
pub fn lobatto_nodes<T: Real>(n: usize) -> Vec<T> {
    let pi = T::PI();
    let nn = T::from_usize_lossy(n);
    (0..=n)
        .map(|j| {
            if j == 0 {
                -T::one()
            } else if j == n {
                T::one()
            } else {
                // sin form keeps the nodes exactly antisymmetric
                let jj = T::from_usize_lossy(2 * j) - nn;
                (pi * jj / (T::lit(2.0) * nn)).sin()
            }
        })
        .collect()
}

/// Clenshaw–Curtis weights on `[-1, 1]` for the Lobatto nodes.
pub fn clenshaw_curtis_weights<T: Real>(n: usize) -> Vec<T> {
    let pi = T::PI();
    let nn = T::from_usize_lossy(n);
    let one = T::one();
    let two = T::lit(2.0);
    let mut w = vec![T::zero(); n + 1];
    if n == 0 {
        w[0] = two;
        return w;
    }
    let n2 = nn * nn - one;
    if n % 2 == 0 {
        w[0] = one / n2;
        w[n] = w[0];
    } else {
        w[0] = one / (nn * nn);
        w[n] = w[0];
    }
    for (i, wi) in w.iter_mut().enumerate().take(n).skip(1) {
        let theta = pi * T::from_usize_lossy(i) / nn;
        let mut v = one;
        if n % 2 == 0 {
            for k in 1..n / 2 {
                let kk = T::from_usize_lossy(k);
                v -= two * (two * kk * theta).cos() / (T::lit(4.0) * kk * kk - one);
            }
            v -= (nn * theta).cos() / n2;
        } else {
            for k in 1..=(n - 1) / 2 {
                let kk = T::from_usize_lossy(k);
                v -= two * (two * kk * theta).cos() / (T::lit(4.0) * kk * kk - one);
            }
        }
        *wi = two * v / nn;
    }
    w
}

/// Chebyshev grid on one layer `[a, b]`.
#[derive(Debug, Clone)]
pub struct LayerGrid<T: Real> {
    n: usize,
    a: T,
    b: T,
    xi: Vec<T>,
    nodes: Vec<T>,
    diff: Matrix<T>,
    weights: Vec<T>,
    bary: Vec<T>,
}

impl<T: Real> LayerGrid<T> {
    pub fn new(n: usize, a: T, b: T) -> Result<Self> {
        if n < MIN_DEGREE {
            return Err(Error::InvalidParameter {
                field: "n",
                reason: format!("degree {n} below the minimum {MIN_DEGREE}"),
            });
        }
        if !(b > a) {
            return Err(Error::InvalidParameter {
                field: "interval",
                reason: format!("empty layer [{a}, {b}]"),
            });
        }
        Ok(Self::build_unchecked(n, a, b))
    }

    pub(crate) fn build_unchecked(n: usize, a: T, b: T) -> Self {
        let half = T::lit(0.5);
        let len = b - a;
        let xi = lobatto_nodes::<T>(n);
        let mut nodes: Vec<T> = xi.iter().map(|&x| a + (x + T::one()) * half * len).collect();
        nodes[0] = a;
        nodes[n] = b;
        let weights = clenshaw_curtis_weights::<T>(n).into_iter().map(|w| w * half * len).collect();

        // Barycentric weights for Lobatto points: (-1)^j, halved at the ends.
        let bary: Vec<T> = (0..=n)
            .map(|j| {
                let s = if j % 2 == 0 { T::one() } else { -T::one() };
                if j == 0 || j == n {
                    s * half
                } else {
                    s
                }
            })
            .collect();
        let pi = T::PI();
        let nn = T::from_usize_lossy(n);
        let theta: Vec<T> = (0..=n).map(|j| pi * T::from_usize_lossy(j) / nn).collect();
        let mut diff = Matrix::<T>::zeros(n + 1, n + 1);
        let scale = T::lit(2.0) / len;
        for i in 0..=n {
            let mut row_sum = T::zero();
            for j in 0..=n {
                if i == j {
                    continue;
                }
                // xi_i - xi_j = cos(theta_j) - cos(theta_i), written with sines.
                let dx = T::lit(2.0) * ((theta[i] + theta[j]) * half).sin() * ((theta[i] - theta[j]) * half).sin();
                let v = (bary[j] / bary[i]) / dx;
                diff[(i, j)] = v * scale;
                row_sum += v;
            }
            diff[(i, i)] = -row_sum * scale;
        }
        Self {
            n,
            a,
            b,
            xi,
            nodes,
            diff,
            weights,
            bary,
        }
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn interval(&self) -> (T, T) {
        (self.a, self.b)
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    /// Reference coordinates of the nodes on `[-1, 1]`.
    pub fn reference_nodes(&self) -> &[T] {
        &self.xi
    }

    pub fn diff(&self) -> &Matrix<T> {
        &self.diff
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: len,
            });
        }
        Ok(())
    }

    pub fn differentiate(&self, samples: &[Cx<T>]) -> Result<Vec<Cx<T>>> {
        self.check_len(samples.len())?;
        Ok((0..self.len())
            .map(|i| {
                self.diff
                    .row(i)
                    .iter()
                    .zip(samples)
                    .fold(Cx::zero(), |acc: Cx<T>, (d, s)| acc + s.scale(*d))
            })
            .collect())
    }

    pub fn differentiate_real(&self, samples: &[T]) -> Result<Vec<T>> {
        self.check_len(samples.len())?;
        Ok((0..self.len())
            .map(|i| self.diff.row(i).iter().zip(samples).map(|(d, s)| *d * *s).sum())
            .collect())
    }

    pub fn integrate(&self, samples: &[Cx<T>]) -> Result<Cx<T>> {
        self.check_len(samples.len())?;
        Ok(samples
            .iter()
            .zip(&self.weights)
            .fold(Cx::zero(), |acc: Cx<T>, (s, w)| acc + s.scale(*w)))
    }

    pub fn integrate_real(&self, samples: &[T]) -> Result<T> {
        self.check_len(samples.len())?;
        Ok(samples.iter().zip(&self.weights).map(|(s, w)| *s * *w).sum())
    }

    /// Barycentric interpolation of nodal samples at a physical point.
    pub fn interpolate(&self, samples: &[Cx<T>], x: T) -> Result<Cx<T>> {
        self.check_len(samples.len())?;
        let mut num = Cx::<T>::zero();
        let mut den = T::zero();
        for (j, (&xj, s)) in self.nodes.iter().zip(samples).enumerate() {
            let dx = x - xj;
            if dx == T::zero() {
                return Ok(*s);
            }
            let c = self.bary[j] / dx;
            num += s.scale(c);
            den += c;
        }
        Ok(num.unscale(den))
    }
}

/// The pair of layer grids sharing the interface `x3 = 0`.
#[derive(Debug, Clone)]
pub struct TwoLayerGrid<T: Real> {
    pub upper: LayerGrid<T>,
    pub lower: LayerGrid<T>,
}

impl<T: Real> TwoLayerGrid<T> {
    pub fn build(n_upper: usize, n_lower: usize, ell: T, m: T) -> Result<Self> {
        Ok(Self {
            upper: LayerGrid::new(n_upper, T::zero(), ell)?,
            lower: LayerGrid::new(n_lower, -m, T::zero())?,
        })
    }

    /// Index of the `x3 = 0` node in the upper layer.
    pub fn upper_interface(&self) -> usize {
        0
    }

    /// Index of the `x3 = 0` node in the lower layer.
    pub fn lower_interface(&self) -> usize {
        self.lower.degree()
    }

    pub fn ell(&self) -> T {
        self.upper.interval().1
    }

    pub fn m(&self) -> T {
        -self.lower.interval().0
    }

    pub fn integrate(&self, upper: &[Cx<T>], lower: &[Cx<T>]) -> Result<Cx<T>> {
        Ok(self.upper.integrate(upper)? + self.lower.integrate(lower)?)
    }

    pub fn integrate_real(&self, upper: &[T], lower: &[T]) -> Result<T> {
        Ok(self.upper.integrate_real(upper)? + self.lower.integrate_real(lower)?)
    }

    /// One-sided values at `x3 = 0`: (from above, from below).
    pub fn interface_value(&self, upper: &[Cx<T>], lower: &[Cx<T>]) -> Result<(Cx<T>, Cx<T>)> {
        self.upper.check_len(upper.len())?;
        self.lower.check_len(lower.len())?;
        Ok((upper[self.upper_interface()], lower[self.lower_interface()]))
    }

    /// Samples a function of `x3` on both layers.
    pub fn sample(&self, f: impl Fn(T) -> Cx<T>) -> (Vec<Cx<T>>, Vec<Cx<T>>) {
        (
            self.upper.nodes().iter().map(|&x| f(x)).collect(),
            self.lower.nodes().iter().map(|&x| f(x)).collect(),
        )
    }
}
