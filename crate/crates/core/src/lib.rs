//! Linear stability of a two-layer viscous MHD fluid with a uniform field:
//! per-wavevector quadratic forms, the growth-rate fixed point, the critical
//! vertical field, a Crank-Nicolson evolver and discrete inequality checks.
//!
//! Everything is generic over the real scalar (`f32` or `f64`); the aliases
//! below fix `f64`.

// `!(x > 0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod chebgrid;
pub mod error;
pub mod forms;
pub mod growthrate;
pub mod ivp;
pub mod linalg;
pub mod model;
pub mod oracles;
pub mod scalar;
pub mod spectrum;

pub use error::{Error, Result};
pub use growthrate::{FixedPointResult, Stability};
pub use model::{critical_field, Regime};
pub use scalar::{Cx, Real};

pub type Params = model::FluidParams<f64>;
pub type Field = model::MagneticField<f64>;
pub type Grid = chebgrid::TwoLayerGrid<f64>;
pub type Disc = basis::Discretization<f64>;
pub type Forms = forms::QuadForms<f64>;
pub type Mode = forms::ReducedMode<f64>;
pub type FixedPoint = growthrate::FixedPointResult<f64>;
pub type Curve = growthrate::DispersionCurve<f64>;
pub type Map = growthrate::StabilityMap<f64>;
pub type State = ivp::ModeState<f64>;
pub type Ledger = ivp::EnergyLedger<f64>;
