//! Per-wavevector quadratic forms on the divergence-free reduced basis.
//!
//! A mode `w(z) e^{i k.x}` is written `w = a k^ + b k^perp + w3 e3` and the
//! divergence constraint `i |k| a + w3' = 0` eliminates `a = i w3' / |k|`.
//! The forms split exactly into a vertical block (`w3`) and a shear block
//! (`b`); `QuadForms` keeps both and exposes the block-diagonal matrices
//! over the stacked coordinates `[w3 coefficients, b coefficients]`.

use num_traits::Zero;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::basis::{Discretization, Layer, NDERIV};
use crate::chebgrid::TwoLayerGrid;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Matrix};
use crate::model::{FluidParams, MagneticField};
use crate::scalar::{cx, im, re, Cx, Real};

/// Frame attached to a nonzero wavevector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedBasis<T> {
    pub k: [T; 2],
    pub kappa: T,
    pub khat: [T; 2],
    pub kperp: [T; 2],
    pub dim_w: usize,
    pub dim_b: usize,
}

impl<T: Real> ReducedBasis<T> {
    pub fn dim(&self) -> usize {
        self.dim_w + self.dim_b
    }

    /// Physical components `(u1, u2, u3)` from `w3`, `w3'` and `b`.
    pub fn components(&self, w3: Cx<T>, dw3: Cx<T>, b: Cx<T>) -> [Cx<T>; 3] {
        let a = im::<T>(T::one() / self.kappa) * dw3;
        [
            a.scale(self.khat[0]) + b.scale(self.kperp[0]),
            a.scale(self.khat[1]) + b.scale(self.kperp[1]),
            w3,
        ]
    }
}

pub fn reduce_basis<T: Real>(disc: &Discretization<T>, k: [T; 2]) -> Result<ReducedBasis<T>> {
    let kappa = k[0].hypot(k[1]);
    if !(kappa > T::zero()) {
        return Err(Error::ZeroWavevector);
    }
    if !kappa.is_finite() {
        return Err(Error::NonFinite("wavevector"));
    }
    let khat = [k[0] / kappa, k[1] / kappa];
    Ok(ReducedBasis {
        k,
        kappa,
        khat,
        kperp: [-khat[1], khat[0]],
        dim_w: disc.basis.dim_w(),
        dim_b: disc.basis.dim_b(),
    })
}

/// Coordinates of a mode in the reduced basis: `w3` coefficients followed by
/// shear coefficients. Wall and interface conditions hold by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedMode<T> {
    pub k: [T; 2],
    pub dim_w: usize,
    pub coeffs: Vec<Cx<T>>,
}

impl<T: Real> ReducedMode<T> {
    pub fn zero(basis: &ReducedBasis<T>) -> Self {
        Self {
            k: basis.k,
            dim_w: basis.dim_w,
            coeffs: vec![Cx::zero(); basis.dim()],
        }
    }

    pub fn from_blocks(k: [T; 2], w: &[Cx<T>], b: &[Cx<T>]) -> Self {
        let mut coeffs = w.to_vec();
        coeffs.extend_from_slice(b);
        Self { k, dim_w: w.len(), coeffs }
    }

    pub fn w_coeffs(&self) -> &[Cx<T>] {
        &self.coeffs[..self.dim_w]
    }

    pub fn b_coeffs(&self) -> &[Cx<T>] {
        &self.coeffs[self.dim_w..]
    }

    /// `w3(0)`.
    pub fn interface_w3(&self) -> Cx<T> {
        self.coeffs[0]
    }

    /// Random smooth mode: complex Gaussian coefficients damped by
    /// `decay^level` along each layer's hierarchy up to `max_level`. Draws
    /// follow a fixed order (interface functions, then bubbles by layer and
    /// level), so the same seed gives the same function at every resolution
    /// that contains `max_level` bubbles.
    pub fn random<R: Rng + ?Sized>(disc: &Discretization<T>, basis: &ReducedBasis<T>, rng: &mut R, decay: T, max_level: usize) -> Self {
        let draw = |rng: &mut R, level: usize| {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            cx(T::lit(a), T::lit(b)).scale(decay.powi(level as i32))
        };
        let mb = &disc.basis;
        let mut w = vec![Cx::zero(); basis.dim_w];
        let mut b = vec![Cx::zero(); basis.dim_b];
        w[mb.w_interface_index()] = draw(rng, 0);
        w[mb.w_slope_index()] = draw(rng, 0);
        for layer in Layer::BOTH {
            for level in 1..=max_level {
                let c = draw(rng, level);
                if let Some(i) = mb.w_bubble_index(layer, level) {
                    w[i] = c;
                }
            }
        }
        b[mb.b_interface_index()] = draw(rng, 0);
        for layer in Layer::BOTH {
            for level in 1..=max_level {
                let c = draw(rng, level);
                if let Some(i) = mb.b_bubble_index(layer, level) {
                    b[i] = c;
                }
            }
        }
        Self::from_blocks(basis.k, &w, &b)
    }
}

/// Nodal samples of `(w3, b)` on a two-layer grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalMode<T> {
    pub k: [T; 2],
    pub w3_upper: Vec<Cx<T>>,
    pub w3_lower: Vec<Cx<T>>,
    pub b_upper: Vec<Cx<T>>,
    pub b_lower: Vec<Cx<T>>,
}

impl<T: Real> NodalMode<T> {
    /// Checks wall values and interface continuity to `tol` (relative to the
    /// largest sample).
    pub fn validate(&self, grid: &TwoLayerGrid<T>, tol: T) -> Result<()> {
        let nu = grid.upper.len();
        let nl = grid.lower.len();
        for (name, v, n) in [
            ("w3_upper", &self.w3_upper, nu),
            ("w3_lower", &self.w3_lower, nl),
            ("b_upper", &self.b_upper, nu),
            ("b_lower", &self.b_lower, nl),
        ] {
            if v.len() != n {
                return Err(Error::InadmissibleMode(format!("{name} has {} samples, grid has {n}", v.len())));
            }
        }
        let scale = [&self.w3_upper, &self.w3_lower, &self.b_upper, &self.b_lower]
            .iter()
            .flat_map(|v| v.iter())
            .fold(T::zero(), |m, z| m.max(z.norm()))
            .max(T::min_positive_value());
        let iu = grid.upper_interface();
        let il = grid.lower_interface();
        let checks = [
            ("w3 at the upper wall", self.w3_upper[nu - 1].norm()),
            ("w3 at the lower wall", self.w3_lower[0].norm()),
            ("b at the upper wall", self.b_upper[nu - 1].norm()),
            ("b at the lower wall", self.b_lower[0].norm()),
            ("w3 jump at the interface", (self.w3_upper[iu] - self.w3_lower[il]).norm()),
            ("b jump at the interface", (self.b_upper[iu] - self.b_lower[il]).norm()),
        ];
        for (what, v) in checks {
            if v > tol * scale {
                return Err(Error::InadmissibleMode(format!("{what} is {v}")));
            }
        }
        Ok(())
    }
}

/// Three physical velocity components at the nodes of each layer.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityProfile<T> {
    pub k: [T; 2],
    pub upper: [Vec<Cx<T>>; 3],
    pub lower: [Vec<Cx<T>>; 3],
}

impl<T: Real> VelocityProfile<T> {
    /// `max |i k . u_* + u3'|` over all nodes.
    pub fn divergence_residual(&self, grid: &TwoLayerGrid<T>) -> Result<T> {
        let mut worst = T::zero();
        for (layer, comps) in [(&grid.upper, &self.upper), (&grid.lower, &self.lower)] {
            let d3 = layer.differentiate(&comps[2])?;
            for i in 0..layer.len() {
                let div = im::<T>(self.k[0]) * comps[0][i] + im::<T>(self.k[1]) * comps[1][i] + d3[i];
                worst = worst.max(div.norm());
            }
        }
        Ok(worst)
    }

    /// Largest component modulus at the walls.
    pub fn wall_residual(&self) -> T {
        let nu = self.upper[0].len();
        (0..3).fold(T::zero(), |m, c| m.max(self.upper[c][nu - 1].norm()).max(self.lower[c][0].norm()))
    }

    /// Largest component jump at the interface.
    pub fn interface_jump(&self, grid: &TwoLayerGrid<T>) -> T {
        let iu = grid.upper_interface();
        let il = grid.lower_interface();
        (0..3).fold(T::zero(), |m, c| m.max((self.upper[c][iu] - self.lower[c][il]).norm()))
    }
}

/// The four Hermitian pieces of one decoupled block.
#[derive(Debug, Clone)]
pub struct FormBlock<T: Real> {
    /// `(1/2) int |(B.grad) w|^2`.
    pub magnetic: CMatrix<T>,
    /// `(1/2) [rho] g |w3(0)|^2`.
    pub surface: CMatrix<T>,
    /// `E1 = (1/2) int (mu/2) |Dw|^2`.
    pub viscous: CMatrix<T>,
    /// `J = (1/2) int rho |w|^2`.
    pub mass: CMatrix<T>,
}

impl<T: Real> FormBlock<T> {
    /// `E0 = magnetic - surface`.
    pub fn e0(&self) -> CMatrix<T> {
        self.magnetic.add_scaled(-T::one(), &self.surface)
    }

    /// `E0 + s E1`.
    pub fn energy(&self, s: T) -> CMatrix<T> {
        self.e0().add_scaled(s, &self.viscous)
    }

    pub fn dim(&self) -> usize {
        self.mass.rows()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormMeta<T> {
    pub params: FluidParams<T>,
    pub field: MagneticField<T>,
    pub k: [T; 2],
    pub n_upper: usize,
    pub n_lower: usize,
}

#[derive(Debug, Clone)]
pub struct QuadForms<T: Real> {
    pub vertical: FormBlock<T>,
    pub shear: FormBlock<T>,
    pub meta: FormMeta<T>,
}

impl<T: Real> QuadForms<T> {
    pub fn dim(&self) -> usize {
        self.vertical.dim() + self.shear.dim()
    }

    pub fn dim_w(&self) -> usize {
        self.vertical.dim()
    }

    fn full(&self, f: impl Fn(&FormBlock<T>) -> CMatrix<T>) -> CMatrix<T> {
        CMatrix::block_diag(&[&f(&self.vertical), &f(&self.shear)])
    }

    pub fn e0(&self) -> CMatrix<T> {
        self.full(|b| b.e0())
    }

    pub fn e1(&self) -> CMatrix<T> {
        self.full(|b| b.viscous.clone())
    }

    pub fn j(&self) -> CMatrix<T> {
        self.full(|b| b.mass.clone())
    }

    pub fn magnetic(&self) -> CMatrix<T> {
        self.full(|b| b.magnetic.clone())
    }

    pub fn surface(&self) -> CMatrix<T> {
        self.full(|b| b.surface.clone())
    }

    /// The same forms with the viscous part removed (the `mu = 0` system).
    pub fn inviscid(&self) -> Self {
        let mut out = self.clone();
        let zero = |b: &mut FormBlock<T>| b.viscous = CMatrix::zeros(b.dim(), b.dim());
        zero(&mut out.vertical);
        zero(&mut out.shear);
        out
    }
}

/// `acc += s * m` for a real Gram `m` and complex `s`.
fn axpy<T: Real>(acc: &mut CMatrix<T>, s: Cx<T>, m: &Matrix<T>) {
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            acc[(i, j)] += s.scale(m[(i, j)]);
        }
    }
}

pub fn assemble_forms<T: Real>(
    params: &FluidParams<T>,
    field: &MagneticField<T>,
    k: [T; 2],
    disc: &Discretization<T>,
) -> Result<QuadForms<T>> {
    params.validate()?;
    if !field.is_finite() {
        return Err(Error::NonFinite("magnetic field"));
    }
    let rb = reduce_basis(disc, k)?;
    let kappa = rb.kappa;
    let k2 = kappa * kappa;
    let beta = field.dot_horizontal(k);
    let b3 = field.b3();
    let half = T::lit(0.5);
    let (dw, db) = (rb.dim_w, rb.dim_b);

    let mut vm = CMatrix::zeros(dw, dw);
    let mut vv = CMatrix::zeros(dw, dw);
    let mut vj = CMatrix::zeros(dw, dw);
    let mut sm = CMatrix::zeros(db, db);
    let mut sv = CMatrix::zeros(db, db);
    let mut sj = CMatrix::zeros(db, db);
    let cross = im::<T>(beta * b3);
    for layer in Layer::BOTH {
        let g = disc.grams(layer);
        let (rho, mu) = match layer {
            Layer::Upper => (params.rho_plus, params.mu_plus),
            Layer::Lower => (params.rho_minus, params.mu_minus),
        };
        let w = &g.w;
        // mass: (1/2) rho (|w3|^2 + |w3'|^2 / k^2)
        axpy(&mut vj, re(half * rho), &w[0][0]);
        axpy(&mut vj, re(half * rho / k2), &w[1][1]);
        // magnetic on w3 and on a = i w3'/k
        axpy(&mut vm, re(half * beta * beta), &w[0][0]);
        axpy(&mut vm, re(half * b3 * b3), &w[1][1]);
        axpy(&mut vm, cross.scale(half), &w[1][0]);
        axpy(&mut vm, -cross.scale(half), &w[0][1]);
        axpy(&mut vm, re(half * beta * beta / k2), &w[1][1]);
        axpy(&mut vm, re(half * b3 * b3 / k2), &w[2][2]);
        axpy(&mut vm, cross.scale(half / k2), &w[2][1]);
        axpy(&mut vm, -cross.scale(half / k2), &w[1][2]);
        // viscous: (mu/4) (8|w3'|^2 + 2|w3''/k + k w3|^2)
        axpy(&mut vv, re(T::lit(2.0) * mu), &w[1][1]);
        axpy(&mut vv, re(half * mu / k2), &w[2][2]);
        axpy(&mut vv, re(half * mu * k2), &w[0][0]);
        axpy(&mut vv, re(half * mu), &w[2][0]);
        axpy(&mut vv, re(half * mu), &w[0][2]);

        let b = &g.b;
        axpy(&mut sj, re(half * rho), &b[0][0]);
        axpy(&mut sm, re(half * beta * beta), &b[0][0]);
        axpy(&mut sm, re(half * b3 * b3), &b[1][1]);
        axpy(&mut sm, cross.scale(half), &b[1][0]);
        axpy(&mut sm, -cross.scale(half), &b[0][1]);
        // viscous: (mu/4) (2 k^2 |b|^2 + 2 |b'|^2)
        axpy(&mut sv, re(half * mu * k2), &b[0][0]);
        axpy(&mut sv, re(half * mu), &b[1][1]);
    }
    let mut surf = CMatrix::zeros(dw, dw);
    let iw = disc.basis.w_interface_index();
    surf[(iw, iw)] = re(half * params.density_jump() * params.g);

    let vertical = FormBlock {
        magnetic: hermitize(vm),
        surface: surf,
        viscous: hermitize(vv),
        mass: hermitize(vj),
    };
    let shear = FormBlock {
        magnetic: hermitize(sm),
        surface: CMatrix::zeros(db, db),
        viscous: hermitize(sv),
        mass: hermitize(sj),
    };
    let (n_upper, n_lower) = disc.basis.degrees();
    Ok(QuadForms {
        vertical,
        shear,
        meta: FormMeta {
            params: *params,
            field: *field,
            k,
            n_upper,
            n_lower,
        },
    })
}

fn hermitize<T: Real>(mut m: CMatrix<T>) -> CMatrix<T> {
    let n = m.rows();
    let half = T::lit(0.5);
    for i in 0..n {
        m[(i, i)] = re(m[(i, i)].re);
        for j in (i + 1)..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()).scale(half);
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
    m
}

/// Samples `(w3, b)` of a modal mode at the nodes of any two-layer grid.
pub fn sample_mode<T: Real>(disc: &Discretization<T>, mode: &ReducedMode<T>, grid: &TwoLayerGrid<T>) -> Result<NodalMode<T>> {
    check_mode(disc, mode)?;
    let mut out = NodalMode {
        k: mode.k,
        w3_upper: vec![],
        w3_lower: vec![],
        b_upper: vec![],
        b_lower: vec![],
    };
    for (layer, lg) in [(Layer::Upper, &grid.upper), (Layer::Lower, &grid.lower)] {
        let (w, b): (Vec<_>, Vec<_>) = lg
            .nodes()
            .iter()
            .map(|&z| {
                let xi = disc.basis.to_reference(layer, z);
                let (w, b) = disc.basis.eval_mode(mode.w_coeffs(), mode.b_coeffs(), layer, xi);
                (w[0], b[0])
            })
            .unzip();
        match layer {
            Layer::Upper => {
                out.w3_upper = w;
                out.b_upper = b;
            }
            Layer::Lower => {
                out.w3_lower = w;
                out.b_lower = b;
            }
        }
    }
    Ok(out)
}

/// `(w3, b)` with derivatives up to fourth order at height `z` (the layer
/// decides the one-sided limit at `z = 0`).
pub fn mode_derivatives<T: Real>(
    disc: &Discretization<T>,
    mode: &ReducedMode<T>,
    layer: Layer,
    z: T,
) -> ([Cx<T>; NDERIV], [Cx<T>; NDERIV]) {
    let xi = disc.basis.to_reference(layer, z);
    disc.basis.eval_mode(mode.w_coeffs(), mode.b_coeffs(), layer, xi)
}

fn check_mode<T: Real>(disc: &Discretization<T>, mode: &ReducedMode<T>) -> Result<()> {
    if mode.coeffs.len() != disc.dim() || mode.dim_w != disc.basis.dim_w() {
        return Err(Error::DimensionMismatch {
            expected: disc.dim(),
            found: mode.coeffs.len(),
        });
    }
    Ok(())
}

/// Full velocity of a modal mode at the grid nodes, with the horizontal part
/// from exact derivatives of the basis.
pub fn lift_velocity<T: Real>(disc: &Discretization<T>, mode: &ReducedMode<T>) -> Result<VelocityProfile<T>> {
    check_mode(disc, mode)?;
    let rb = reduce_basis(disc, mode.k)?;
    let mut layers: [[Vec<Cx<T>>; 3]; 2] = Default::default();
    for (slot, (layer, lg)) in [(Layer::Upper, &disc.grid.upper), (Layer::Lower, &disc.grid.lower)]
        .into_iter()
        .enumerate()
    {
        for &z in lg.nodes() {
            let (w, b) = mode_derivatives(disc, mode, layer, z);
            let c = rb.components(w[0], w[1], b[0]);
            for (d, v) in c.into_iter().enumerate() {
                layers[slot][d].push(v);
            }
        }
    }
    let [upper, lower] = layers;
    Ok(VelocityProfile { k: mode.k, upper, lower })
}

/// Lifts nodal samples with the grid's differentiation matrix; the discrete
/// divergence vanishes identically.
pub fn lift_nodal<T: Real>(grid: &TwoLayerGrid<T>, mode: &NodalMode<T>, tol: T) -> Result<VelocityProfile<T>> {
    mode.validate(grid, tol)?;
    let kappa = mode.k[0].hypot(mode.k[1]);
    if !(kappa > T::zero()) {
        return Err(Error::ZeroWavevector);
    }
    let khat = [mode.k[0] / kappa, mode.k[1] / kappa];
    let kperp = [-khat[1], khat[0]];
    let rb = ReducedBasis {
        k: mode.k,
        kappa,
        khat,
        kperp,
        dim_w: 0,
        dim_b: 0,
    };
    let build = |lg: &crate::chebgrid::LayerGrid<T>, w: &[Cx<T>], b: &[Cx<T>]| -> Result<[Vec<Cx<T>>; 3]> {
        let dw = lg.differentiate(w)?;
        let mut out: [Vec<Cx<T>>; 3] = Default::default();
        for i in 0..lg.len() {
            let c = rb.components(w[i], dw[i], b[i]);
            for (d, v) in c.into_iter().enumerate() {
                out[d].push(v);
            }
        }
        Ok(out)
    };
    Ok(VelocityProfile {
        k: mode.k,
        upper: build(&grid.upper, &mode.w3_upper, &mode.b_upper)?,
        lower: build(&grid.lower, &mode.w3_lower, &mode.b_lower)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Energies<T> {
    pub e: T,
    pub e0: T,
    pub e1: T,
    pub j: T,
}

pub fn evaluate_energy<T: Real>(forms: &QuadForms<T>, mode: &ReducedMode<T>, s: T) -> Result<Energies<T>> {
    if mode.coeffs.len() != forms.dim() || mode.dim_w != forms.dim_w() {
        return Err(Error::DimensionMismatch {
            expected: forms.dim(),
            found: mode.coeffs.len(),
        });
    }
    let (w, b) = (mode.w_coeffs(), mode.b_coeffs());
    let q = |blk: &FormBlock<T>, x: &[Cx<T>]| {
        (
            blk.magnetic.quad_form(x).re - blk.surface.quad_form(x).re,
            blk.viscous.quad_form(x).re,
            blk.mass.quad_form(x).re,
        )
    };
    let (e0w, e1w, jw) = q(&forms.vertical, w);
    let (e0b, e1b, jb) = q(&forms.shear, b);
    let e0 = e0w + e0b;
    let e1 = e1w + e1b;
    Ok(Energies {
        e: e0 + s * e1,
        e0,
        e1,
        j: jw + jb,
    })
}

/// Form values computed by direct quadrature of a lifted profile: the
/// independent oracle for the assembled matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureEnergies<T> {
    pub magnetic: T,
    pub surface: T,
    pub viscous: T,
    pub mass: T,
}

impl<T: Real> QuadratureEnergies<T> {
    pub fn e0(&self) -> T {
        self.magnetic - self.surface
    }
}

pub fn quadrature_energies<T: Real>(
    params: &FluidParams<T>,
    field: &MagneticField<T>,
    grid: &TwoLayerGrid<T>,
    profile: &VelocityProfile<T>,
) -> Result<QuadratureEnergies<T>> {
    let k = profile.k;
    let beta = field.dot_horizontal(k);
    let b3 = field.b3();
    let half = T::lit(0.5);
    let mut out = QuadratureEnergies {
        magnetic: T::zero(),
        surface: T::zero(),
        viscous: T::zero(),
        mass: T::zero(),
    };
    for (lg, comps, rho, mu) in [
        (&grid.upper, &profile.upper, params.rho_plus, params.mu_plus),
        (&grid.lower, &profile.lower, params.rho_minus, params.mu_minus),
    ] {
        let d3: Vec<Vec<Cx<T>>> = comps.iter().map(|c| lg.differentiate(c)).collect::<Result<_>>()?;
        let n = lg.len();
        let mut mag = vec![T::zero(); n];
        let mut vis = vec![T::zero(); n];
        let mut mass = vec![T::zero(); n];
        for i in 0..n {
            // grad[a][c] = d_a u_c
            let mut grad = [[Cx::<T>::zero(); 3]; 3];
            for c in 0..3 {
                grad[0][c] = im::<T>(k[0]) * comps[c][i];
                grad[1][c] = im::<T>(k[1]) * comps[c][i];
                grad[2][c] = d3[c][i];
            }
            let mut dd = T::zero();
            for a in 0..3 {
                for c in 0..3 {
                    dd += (grad[a][c] + grad[c][a]).norm_sqr();
                }
            }
            vis[i] = T::lit(0.25) * mu * dd;
            mass[i] = half * rho * (0..3).map(|c| comps[c][i].norm_sqr()).sum::<T>();
            mag[i] = half
                * (0..3)
                    .map(|c| (im::<T>(beta) * comps[c][i] + d3[c][i].scale(b3)).norm_sqr())
                    .sum::<T>();
        }
        out.magnetic += lg.integrate_real(&mag)?;
        out.viscous += lg.integrate_real(&vis)?;
        out.mass += lg.integrate_real(&mass)?;
    }
    let (a, b) = grid.interface_value(&profile.upper[2], &profile.lower[2])?;
    let w0 = (a + b).scale(half);
    out.surface = half * params.density_jump() * params.g * w0.norm_sqr();
    Ok(out)
}
