//! Hierarchical modal bases on the two layers and their Gram matrices.
//!
//! The vertical velocity must be `C^1` across the interface and vanish with
//! its slope at the walls (the horizontal part is `i w3' / |k|`), so it uses
//! Hermite cubics for the interface value and slope plus biharmonic Legendre
//! bubbles per layer. The transverse shear only needs `C^0`: one interface
//! hat plus Dirichlet Legendre bubbles. Bubbles are Legendre combinations,
//! so a given function does not change when the degree is raised.

use crate::chebgrid::{clenshaw_curtis_weights, lobatto_nodes, TwoLayerGrid};
use crate::error::Result;
use crate::linalg::Matrix;
use crate::scalar::{Cx, Real};

/// Number of stored derivatives (orders 0 to 4).
pub const NDERIV: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Layer {
    Upper,
    Lower,
}

impl Layer {
    pub const BOTH: [Layer; 2] = [Layer::Upper, Layer::Lower];
}

/// `P_j^{(r)}(xi)` for `j <= nmax`, `r < NDERIV`.
pub fn legendre_table<T: Real>(xi: T, nmax: usize) -> Vec<[T; NDERIV]> {
    let mut p = vec![[T::zero(); NDERIV]; nmax + 1];
    p[0][0] = T::one();
    if nmax == 0 {
        return p;
    }
    p[1][0] = xi;
    p[1][1] = T::one();
    for j in 1..nmax {
        let jj = T::from_usize_lossy(j);
        let a = T::from_usize_lossy(2 * j + 1);
        let inv = T::one() / T::from_usize_lossy(j + 1);
        for r in 0..NDERIV {
            let lower = if r > 0 { T::from_usize_lossy(r) * p[j][r - 1] } else { T::zero() };
            p[j + 1][r] = (a * (xi * p[j][r] + lower) - jj * p[j - 1][r]) * inv;
        }
    }
    p
}

fn cubic<T: Real>(c: [f64; 4], xi: T) -> [T; NDERIV] {
    let [c0, c1, c2, c3] = c.map(T::lit);
    let three = T::lit(3.0);
    let two = T::lit(2.0);
    [
        c0 + xi * (c1 + xi * (c2 + xi * c3)),
        c1 + xi * (two * c2 + three * c3 * xi),
        two * c2 + T::lit(6.0) * c3 * xi,
        T::lit(6.0) * c3,
        T::zero(),
    ]
}

// Hermite cubics in the reference coordinate. Upper layer: interface at
// xi = -1, wall at +1; the lower layer mirrors it.
const UPPER_VALUE: [f64; 4] = [0.5, -0.75, 0.0, 0.25];
const UPPER_SLOPE: [f64; 4] = [0.25, -0.25, -0.25, 0.25];
const LOWER_VALUE: [f64; 4] = [0.5, 0.75, 0.0, -0.25];
const LOWER_SLOPE: [f64; 4] = [-0.25, -0.25, 0.25, 0.25];

/// Basis functions supported in one layer, evaluated at one point; each entry
/// is `(global index, [f, f', f'', f''', f''''])` with `z`-derivatives.
#[derive(Debug, Clone)]
pub struct LayerValues<T> {
    pub w: Vec<(usize, [T; NDERIV])>,
    pub b: Vec<(usize, [T; NDERIV])>,
}

/// Per-layer Gram matrices `G^{pq}_{ij} = int phi_i^{(p)} phi_j^{(q)} dz`.
#[derive(Debug, Clone)]
pub struct LayerGrams<T: Real> {
    pub w: [[Matrix<T>; 3]; 3],
    pub b: [[Matrix<T>; 2]; 2],
}

#[derive(Debug, Clone)]
pub struct ModalBasis<T: Real> {
    n_upper: usize,
    n_lower: usize,
    ell: T,
    m: T,
    w_scale: Vec<T>,
    b_scale: Vec<T>,
}

impl<T: Real> ModalBasis<T> {
    fn unscaled(n_upper: usize, n_lower: usize, ell: T, m: T) -> Self {
        let dim_w = n_upper + n_lower - 4;
        let dim_b = n_upper + n_lower - 1;
        Self {
            n_upper,
            n_lower,
            ell,
            m,
            w_scale: vec![T::one(); dim_w],
            b_scale: vec![T::one(); dim_b],
        }
    }

    pub fn degrees(&self) -> (usize, usize) {
        (self.n_upper, self.n_lower)
    }

    pub fn dim_w(&self) -> usize {
        self.w_scale.len()
    }

    pub fn dim_b(&self) -> usize {
        self.b_scale.len()
    }

    pub fn dim(&self) -> usize {
        self.dim_w() + self.dim_b()
    }

    /// Index of the interface value of `w3` (the only `w3` unknown seen at
    /// `x3 = 0`).
    pub fn w_interface_index(&self) -> usize {
        0
    }

    /// Index of the interface slope of `w3`.
    pub fn w_slope_index(&self) -> usize {
        1
    }

    /// Index of the interface value of the shear amplitude.
    pub fn b_interface_index(&self) -> usize {
        0
    }

    /// Global index of the `level`-th `w3` bubble (from 1) of `layer`.
    pub fn w_bubble_index(&self, layer: Layer, level: usize) -> Option<usize> {
        if level == 0 {
            return None;
        }
        match layer {
            Layer::Upper => (level <= self.n_upper - 3).then(|| 1 + level),
            Layer::Lower => (level <= self.n_lower - 3).then(|| self.n_upper - 2 + level),
        }
    }

    /// Global index of the `level`-th shear bubble (from 1) of `layer`.
    pub fn b_bubble_index(&self, layer: Layer, level: usize) -> Option<usize> {
        if level == 0 {
            return None;
        }
        match layer {
            Layer::Upper => (level <= self.n_upper - 1).then_some(level),
            Layer::Lower => (level <= self.n_lower - 1).then(|| self.n_upper - 1 + level),
        }
    }

    pub fn layer_len(&self, layer: Layer) -> T {
        match layer {
            Layer::Upper => self.ell,
            Layer::Lower => self.m,
        }
    }

    pub fn layer_degree(&self, layer: Layer) -> usize {
        match layer {
            Layer::Upper => self.n_upper,
            Layer::Lower => self.n_lower,
        }
    }

    /// Reference coordinate of a physical height inside `layer`.
    pub fn to_reference(&self, layer: Layer, z: T) -> T {
        let two = T::lit(2.0);
        match layer {
            Layer::Upper => two * z / self.ell - T::one(),
            Layer::Lower => two * z / self.m + T::one(),
        }
    }

    /// Hierarchical position of a global index inside its layer group
    /// (0 for the interface functions), used to shape random samples.
    pub fn w_level(&self, i: usize) -> usize {
        match i {
            0 | 1 => 0,
            _ if i < 2 + self.n_upper - 3 => i - 2 + 1,
            _ => i - 2 - (self.n_upper - 3) + 1,
        }
    }

    pub fn b_level(&self, i: usize) -> usize {
        match i {
            0 => 0,
            _ if i < 1 + self.n_upper - 1 => i,
            _ => i - (self.n_upper - 1),
        }
    }

    pub fn eval_layer(&self, layer: Layer, xi: T) -> LayerValues<T> {
        let n = self.layer_degree(layer);
        let len = self.layer_len(layer);
        let jac = T::lit(2.0) / len;
        let mut pow = [T::one(); NDERIV];
        for r in 1..NDERIV {
            pow[r] = pow[r - 1] * jac;
        }
        let phys = |mut v: [T; NDERIV], s: T| {
            for r in 0..NDERIV {
                v[r] = v[r] * pow[r] * s;
            }
            v
        };
        let leg = legendre_table(xi, n);
        let (val, slope, w_off, b_off) = match layer {
            Layer::Upper => (UPPER_VALUE, UPPER_SLOPE, 2, 1),
            Layer::Lower => (LOWER_VALUE, LOWER_SLOPE, 2 + self.n_upper - 3, self.n_upper),
        };
        let half_len = len * T::lit(0.5);
        let mut w = Vec::with_capacity(n);
        w.push((0, phys(cubic(val, xi), self.w_scale[0])));
        w.push((1, phys(cubic(slope, xi), half_len * self.w_scale[1])));
        for j in 0..=(n - 4) {
            let jj = T::from_usize_lossy(j);
            let c2 = -T::lit(2.0) * (T::lit(2.0) * jj + T::lit(5.0)) / (T::lit(2.0) * jj + T::lit(7.0));
            let c4 = (T::lit(2.0) * jj + T::lit(3.0)) / (T::lit(2.0) * jj + T::lit(7.0));
            let mut v = [T::zero(); NDERIV];
            for r in 0..NDERIV {
                v[r] = leg[j][r] + c2 * leg[j + 2][r] + c4 * leg[j + 4][r];
            }
            let gi = w_off + j;
            w.push((gi, phys(v, self.w_scale[gi])));
        }
        let mut b = Vec::with_capacity(n);
        let hat = match layer {
            Layer::Upper => [T::lit(0.5) * (T::one() - xi), -T::lit(0.5), T::zero(), T::zero(), T::zero()],
            Layer::Lower => [T::lit(0.5) * (T::one() + xi), T::lit(0.5), T::zero(), T::zero(), T::zero()],
        };
        b.push((0, phys(hat, self.b_scale[0])));
        for j in 0..=(n - 2) {
            let mut v = [T::zero(); NDERIV];
            for r in 0..NDERIV {
                v[r] = leg[j][r] - leg[j + 2][r];
            }
            let gi = b_off + j;
            b.push((gi, phys(v, self.b_scale[gi])));
        }
        LayerValues { w, b }
    }

    /// `(w3, b)` and their first four `z`-derivatives at reference point
    /// `xi` of `layer`.
    pub fn eval_mode(&self, w_coeffs: &[Cx<T>], b_coeffs: &[Cx<T>], layer: Layer, xi: T) -> ([Cx<T>; NDERIV], [Cx<T>; NDERIV]) {
        let vals = self.eval_layer(layer, xi);
        let zero = Cx::new(T::zero(), T::zero());
        let mut w = [zero; NDERIV];
        let mut b = [zero; NDERIV];
        for (i, f) in &vals.w {
            for r in 0..NDERIV {
                w[r] += w_coeffs[*i].scale(f[r]);
            }
        }
        for (i, f) in &vals.b {
            for r in 0..NDERIV {
                b[r] += b_coeffs[*i].scale(f[r]);
            }
        }
        (w, b)
    }
}

/// Grid, modal basis and Gram matrices for one resolution.
#[derive(Debug, Clone)]
pub struct Discretization<T: Real> {
    pub grid: TwoLayerGrid<T>,
    pub basis: ModalBasis<T>,
    upper: LayerGrams<T>,
    lower: LayerGrams<T>,
}

impl<T: Real> Discretization<T> {
    pub fn new(n_upper: usize, n_lower: usize, ell: T, m: T) -> Result<Self> {
        let grid = TwoLayerGrid::build(n_upper, n_lower, ell, m)?;
        let mut basis = ModalBasis::unscaled(n_upper, n_lower, ell, m);
        let raw_u = layer_grams(&basis, Layer::Upper);
        let raw_l = layer_grams(&basis, Layer::Lower);
        // Bubbles normalized to unit energy in the highest derivative a form
        // uses: int (phi'')^2 for w3, int (chi')^2 for b.
        for i in 2..basis.dim_w() {
            let e = raw_u.w[2][2][(i, i)] + raw_l.w[2][2][(i, i)];
            basis.w_scale[i] = T::one() / e.sqrt();
        }
        for i in 1..basis.dim_b() {
            let e = raw_u.b[1][1][(i, i)] + raw_l.b[1][1][(i, i)];
            basis.b_scale[i] = T::one() / e.sqrt();
        }
        let upper = rescale(raw_u, &basis);
        let lower = rescale(raw_l, &basis);
        Ok(Self { grid, basis, upper, lower })
    }

    /// Same degree on both layers.
    pub fn uniform(n: usize, ell: T, m: T) -> Result<Self> {
        Self::new(n, n, ell, m)
    }

    pub fn grams(&self, layer: Layer) -> &LayerGrams<T> {
        match layer {
            Layer::Upper => &self.upper,
            Layer::Lower => &self.lower,
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }
}

fn layer_grams<T: Real>(basis: &ModalBasis<T>, layer: Layer) -> LayerGrams<T> {
    let n = basis.layer_degree(layer);
    let nq = 2 * n + 2;
    let xi = lobatto_nodes::<T>(nq);
    let half_len = basis.layer_len(layer) * T::lit(0.5);
    let wq = clenshaw_curtis_weights::<T>(nq);
    let dw = basis.dim_w();
    let db = basis.dim_b();
    let mut gw: [[Matrix<T>; 3]; 3] = std::array::from_fn(|_| std::array::from_fn(|_| Matrix::zeros(dw, dw)));
    let mut gb: [[Matrix<T>; 2]; 2] = std::array::from_fn(|_| std::array::from_fn(|_| Matrix::zeros(db, db)));
    for (x, w) in xi.iter().zip(&wq) {
        let weight = *w * half_len;
        let vals = basis.eval_layer(layer, *x);
        for (i, fi) in &vals.w {
            for (j, fj) in &vals.w {
                for p in 0..3 {
                    for q in 0..3 {
                        gw[p][q][(*i, *j)] += weight * fi[p] * fj[q];
                    }
                }
            }
        }
        for (i, fi) in &vals.b {
            for (j, fj) in &vals.b {
                for p in 0..2 {
                    for q in 0..2 {
                        gb[p][q][(*i, *j)] += weight * fi[p] * fj[q];
                    }
                }
            }
        }
    }
    LayerGrams { w: gw, b: gb }
}

fn rescale<T: Real>(mut g: LayerGrams<T>, basis: &ModalBasis<T>) -> LayerGrams<T> {
    for row in g.w.iter_mut() {
        for m in row.iter_mut() {
            for i in 0..basis.dim_w() {
                for j in 0..basis.dim_w() {
                    m[(i, j)] = m[(i, j)] * basis.w_scale[i] * basis.w_scale[j];
                }
            }
        }
    }
    for row in g.b.iter_mut() {
        for m in row.iter_mut() {
            for i in 0..basis.dim_b() {
                for j in 0..basis.dim_b() {
                    m[(i, j)] = m[(i, j)] * basis.b_scale[i] * basis.b_scale[j];
                }
            }
        }
    }
    g
}
