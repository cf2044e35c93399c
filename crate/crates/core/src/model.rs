//! Physical configuration, the critical vertical field and horizontal
//! rotations.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Two-layer configuration: heavy fluid on `(0, ell)` above light fluid on
/// `(-m, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidParams<T> {
    pub rho_plus: T,
    pub rho_minus: T,
    pub mu_plus: T,
    pub mu_minus: T,
    pub g: T,
    pub ell: T,
    pub m: T,
}

impl<T: Real> FluidParams<T> {
    /// Validated constructor.
    pub fn new(rho_plus: T, rho_minus: T, mu_plus: T, mu_minus: T, g: T, ell: T, m: T) -> Result<Self> {
        let p = Self {
            rho_plus,
            rho_minus,
            mu_plus,
            mu_minus,
            g,
            ell,
            m,
        };
        p.validate()?;
        Ok(p)
    }

    /// `rho = (2, 1)`, `mu = (1, 1)`, `g = 1`, unit depths.
    pub fn canonical() -> Self {
        let one = T::one();
        Self {
            rho_plus: T::lit(2.0),
            rho_minus: one,
            mu_plus: one,
            mu_minus: one,
            g: one,
            ell: one,
            m: one,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("rho_plus", self.rho_plus),
            ("rho_minus", self.rho_minus),
            ("mu_plus", self.mu_plus),
            ("mu_minus", self.mu_minus),
            ("g", self.g),
            ("ell", self.ell),
            ("m", self.m),
        ];
        for (field, v) in fields {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidParameter {
                    field,
                    reason: format!("must be finite and strictly positive, got {v}"),
                });
            }
        }
        if !(self.rho_plus > self.rho_minus) {
            return Err(Error::InvalidParameter {
                field: "rho_plus",
                reason: format!(
                    "the density jump rho_plus - rho_minus must be positive (heavy fluid on top), got {} <= {}",
                    self.rho_plus, self.rho_minus
                ),
            });
        }
        Ok(())
    }

    /// `rho_plus - rho_minus`.
    pub fn density_jump(&self) -> T {
        self.rho_plus - self.rho_minus
    }
}

/// Uniform steady magnetic field `(b1, b2, b3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagneticField<T> {
    pub b: [T; 3],
}

impl<T: Real> MagneticField<T> {
    pub fn new(b1: T, b2: T, b3: T) -> Self {
        Self { b: [b1, b2, b3] }
    }

    pub fn b_star(&self) -> [T; 2] {
        [self.b[0], self.b[1]]
    }

    pub fn b3(&self) -> T {
        self.b[2]
    }

    /// `B_* . k`.
    pub fn dot_horizontal(&self, k: [T; 2]) -> T {
        self.b[0] * k[0] + self.b[1] * k[1]
    }

    pub fn is_finite(&self) -> bool {
        self.b.iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Subcritical => "subcritical",
            Regime::Critical => "critical",
            Regime::Supercritical => "supercritical",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeLabel<T> {
    pub regime: Regime,
    /// `|B3| - M_c`.
    pub margin: T,
}

pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-9;

/// `M_c = sqrt([rho] g / (1/ell + 1/m))`.
pub fn critical_field<T: Real>(params: &FluidParams<T>) -> T {
    let harmonic = T::one() / params.ell + T::one() / params.m;
    (params.density_jump() * params.g / harmonic).sqrt()
}

pub fn classify_regime<T: Real>(params: &FluidParams<T>, field: &MagneticField<T>, tol: T) -> RegimeLabel<T> {
    let margin = field.b3().abs() - critical_field(params);
    let regime = if margin < -tol {
        Regime::Subcritical
    } else if margin > tol {
        Regime::Supercritical
    } else {
        Regime::Critical
    };
    RegimeLabel { regime, margin }
}

/// Rotation `R` (columns: new horizontal axes) such that `R^T B_* = (|B_*|, 0)`.
pub type Rotation<T> = [[T; 2]; 2];

/// Rotates the horizontal frame so the horizontal field lies on the first
/// axis; returns the rotated field, `R^T k` and `R`.
pub fn canonicalize<T: Real>(field: &MagneticField<T>, k: [T; 2]) -> (MagneticField<T>, [T; 2], Rotation<T>) {
    let [b1, b2] = field.b_star();
    let norm = b1.hypot(b2);
    let (c, s) = if norm > T::zero() {
        (b1 / norm, b2 / norm)
    } else {
        (T::one(), T::zero())
    };
    let rot = [[c, -s], [s, c]];
    let apply_t = |v: [T; 2]| [c * v[0] + s * v[1], -s * v[0] + c * v[1]];
    let b_rot = if norm > T::zero() { [norm, T::zero()] } else { [b1, b2] };
    (MagneticField::new(b_rot[0], b_rot[1], field.b3()), apply_t(k), rot)
}

/// Applies a 2x2 matrix to a horizontal vector.
pub fn rotate<T: Real>(r: &Rotation<T>, v: [T; 2]) -> [T; 2] {
    [r[0][0] * v[0] + r[0][1] * v[1], r[1][0] * v[0] + r[1][1] * v[1]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn critical_field_examples() {
        let p = FluidParams::<f64>::canonical();
        assert_relative_eq!(critical_field(&p), 1.0 / 2f64.sqrt(), max_relative = 1e-15);
        let q = FluidParams::new(1.5, 1.0, 1.0, 1.0, 9.81, 2.0, 1.0).unwrap();
        assert_relative_eq!(critical_field(&q), (0.5 * 9.81 / 1.5f64).sqrt(), max_relative = 1e-15);
        assert!((critical_field(&q) - 1.8083).abs() < 1e-4);
        let tiny = FluidParams::new(1.0 + 1e-12, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert!(critical_field(&tiny) < 1e-5);
    }

    #[test]
    fn regime_examples() {
        let p = FluidParams::<f64>::canonical();
        let l = classify_regime(&p, &MagneticField::new(0.0, 0.0, 0.3), 1e-9);
        assert_eq!(l.regime, Regime::Subcritical);
        assert!((l.margin + 0.40711).abs() < 1e-5);
        let h = classify_regime(&p, &MagneticField::new(5.0, 5.0, 0.0), 1e-9);
        assert_eq!(h.regime, Regime::Subcritical);
        let mc = critical_field(&p);
        let c = classify_regime(&p, &MagneticField::new(0.0, 0.0, mc), 1e-9);
        assert_eq!(c.regime, Regime::Critical);
        let s = classify_regime(&p, &MagneticField::new(0.0, 0.0, -1.0), 1e-9);
        assert_eq!(s.regime, Regime::Supercritical);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(FluidParams::new(1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(FluidParams::new(2.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(FluidParams::new(2.0, 1.0, 1.0, 1.0, 1.0, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn canonicalize_quarter_turn() {
        let (b, k, r) = canonicalize(&MagneticField::<f64>::new(0.0, 1.0, 0.5), [1.0, 0.0]);
        assert_relative_eq!(b.b[0], 1.0);
        assert_eq!(b.b[1], 0.0);
        assert_eq!(b.b[2], 0.5);
        assert!((k[0] - 0.0).abs() < 1e-16 && (k[1] + 1.0).abs() < 1e-16);
        let back = rotate(&r, k);
        assert!((back[0] - 1.0).abs() < 1e-16 && back[1].abs() < 1e-16);
    }

    #[test]
    fn canonicalize_zero_horizontal_is_identity() {
        let (b, k, r) = canonicalize(&MagneticField::new(0.0, 0.0, 2.0), [0.3, -0.7]);
        assert_eq!(r, [[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(k, [0.3, -0.7]);
        assert_eq!(b.b, [0.0, 0.0, 2.0]);
    }

    proptest! {
        #[test]
        fn critical_field_homogeneous(c in 0.01f64..100.0) {
            let p = FluidParams::<f64>::canonical();
            let mut q = p;
            q.g *= c * c;
            prop_assert!((critical_field(&q) - c * critical_field(&p)).abs() <= 1e-13 * c);
        }

        #[test]
        fn critical_field_ignores_viscosity(mp in 1e-3f64..1e3, mm in 1e-3f64..1e3) {
            let p = FluidParams::<f64>::canonical();
            let mut q = p;
            q.mu_plus = mp;
            q.mu_minus = mm;
            prop_assert_eq!(critical_field(&q).to_bits(), critical_field(&p).to_bits());
        }

        #[test]
        fn classify_monotone(a in 0.0f64..2.0, d in 0.0f64..1.0) {
            let p = FluidParams::<f64>::canonical();
            let r1 = classify_regime(&p, &MagneticField::new(0.0, 0.0, a), 1e-9).regime;
            let r2 = classify_regime(&p, &MagneticField::new(0.0, 0.0, a + d), 1e-9).regime;
            let rank = |r: Regime| match r { Regime::Subcritical => 0, Regime::Critical => 1, Regime::Supercritical => 2 };
            prop_assert!(rank(r1) <= rank(r2));
        }

        #[test]
        fn canonicalize_preserves_invariants(b1 in -5.0f64..5.0, b2 in -5.0f64..5.0, b3 in -2.0f64..2.0,
                                             k1 in -50.0f64..50.0, k2 in -50.0f64..50.0) {
            let f = MagneticField::new(b1, b2, b3);
            let (g, kr, _) = canonicalize(&f, [k1, k2]);
            let kn = k1.hypot(k2);
            prop_assert!((kr[0].hypot(kr[1]) - kn).abs() <= 1e-14 * kn.max(1.0));
            prop_assert!((g.b[0].hypot(g.b[1]) - b1.hypot(b2)).abs() <= 1e-14 * b1.hypot(b2).max(1.0));
            prop_assert_eq!(g.b3(), b3);
            let dot = f.dot_horizontal([k1, k2]);
            prop_assert!((g.dot_horizontal(kr) - dot).abs() <= 1e-14 * (kn * b1.hypot(b2)).max(1.0));
        }
    }
}
