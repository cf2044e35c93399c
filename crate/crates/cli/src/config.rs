//! Run configuration: JSON in, validated values with defaults out.

use mhdrt::basis::Discretization;
use mhdrt::model::{FluidParams, MagneticField};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_N: usize = 48;
pub const DEFAULT_EIG_TOL: f64 = 1e-12;
pub const DEFAULT_FP_TOL: f64 = 1e-10;
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub rho_plus: f64,
    pub rho_minus: f64,
    pub mu_plus: f64,
    pub mu_minus: f64,
    pub g: f64,
    pub ell: f64,
    pub m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_n")]
    pub n_upper: usize,
    #[serde(default = "default_n")]
    pub n_lower: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n_upper: DEFAULT_N,
            n_lower: DEFAULT_N,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KGridMode {
    Log,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Direction {
    Named(NamedDirection),
    Vector([f64; 2]),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NamedDirection {
    #[serde(rename = "perp-to-Bstar")]
    PerpToBstar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KGridConfig {
    #[serde(default = "default_mode")]
    pub mode: KGridMode,
    #[serde(default = "default_kmin")]
    pub min: f64,
    #[serde(default = "default_kmax")]
    pub max: f64,
    #[serde(default = "default_kcount")]
    pub count: usize,
    #[serde(default = "default_direction")]
    pub direction: Direction,
}

impl Default for KGridConfig {
    fn default() -> Self {
        Self {
            mode: default_mode(),
            min: default_kmin(),
            max: default_kmax(),
            count: default_kcount(),
            direction: default_direction(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub b3_min: f64,
    pub b3_max: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IvpConfig {
    #[serde(rename = "T")]
    pub horizon: f64,
    pub dt: f64,
    #[serde(default)]
    pub seed: u64,
    /// Wavevector to evolve; defaults to the fastest-growing one on the k grid.
    #[serde(default)]
    pub k: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_eig")]
    pub eig: f64,
    #[serde(default = "default_fp")]
    pub fixed_point: f64,
    #[serde(default = "default_classify")]
    pub classify: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eig: DEFAULT_EIG_TOL,
            fixed_point: DEFAULT_FP_TOL,
            classify: DEFAULT_CLASSIFY_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: ParamsConfig,
    pub field: [f64; 3],
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub kgrid: KGridConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub ivp: Option<IvpConfig>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_n() -> usize {
    DEFAULT_N
}
fn default_mode() -> KGridMode {
    KGridMode::Log
}
fn default_kmin() -> f64 {
    0.1
}
fn default_kmax() -> f64 {
    200.0
}
fn default_kcount() -> usize {
    40
}
fn default_direction() -> Direction {
    Direction::Named(NamedDirection::PerpToBstar)
}
fn default_eig() -> f64 {
    DEFAULT_EIG_TOL
}
fn default_fp() -> f64 {
    DEFAULT_FP_TOL
}
fn default_classify() -> f64 {
    DEFAULT_CLASSIFY_TOL
}

fn invalid(path: &str, reason: impl Into<String>) -> CliError {
    CliError::Config {
        path: path.to_string(),
        reason: reason.into(),
    }
}

fn positive(path: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(path, format!("must be finite and positive, got {v}")))
    }
}

/// Parses and validates a JSON config.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        invalid(&path, e.into_inner().to_string())
    })?;
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let p = &self.params;
        for (name, v) in [
            ("params.rho_plus", p.rho_plus),
            ("params.rho_minus", p.rho_minus),
            ("params.mu_plus", p.mu_plus),
            ("params.mu_minus", p.mu_minus),
            ("params.g", p.g),
            ("params.ell", p.ell),
            ("params.m", p.m),
        ] {
            positive(name, v)?;
        }
        if !(p.rho_plus > p.rho_minus) {
            return Err(invalid(
                "params.rho_plus",
                format!(
                    "the model assumes a positive density jump [rho] = rho_plus - rho_minus > 0 (heavier fluid on top); got rho_plus = {} <= rho_minus = {}",
                    p.rho_plus, p.rho_minus
                ),
            ));
        }
        if self.field.iter().any(|v| !v.is_finite()) {
            return Err(invalid("field", "components must be finite"));
        }
        for (name, n) in [("grid.n_upper", self.grid.n_upper), ("grid.n_lower", self.grid.n_lower)] {
            if n < 4 {
                return Err(invalid(name, format!("degree must be at least 4, got {n}")));
            }
        }
        let kg = &self.kgrid;
        if !kg.min.is_finite() || !kg.max.is_finite() || !(kg.min < kg.max) {
            return Err(invalid(
                "kgrid",
                format!("need min < max, got min = {} and max = {}", kg.min, kg.max),
            ));
        }
        match kg.mode {
            KGridMode::Log => positive("kgrid.min", kg.min)?,
            KGridMode::Linear if kg.min < 0.0 => return Err(invalid("kgrid.min", "must be nonnegative")),
            KGridMode::Linear => {}
        }
        if kg.count == 0 {
            return Err(invalid("kgrid.count", "must be positive"));
        }
        if let Direction::Vector(d) = kg.direction {
            if !(d[0].hypot(d[1]) > 0.0) || d.iter().any(|v| !v.is_finite()) {
                return Err(invalid("kgrid.direction", "must be a finite nonzero vector"));
            }
        }
        if let Some(s) = &self.sweep {
            if !s.b3_min.is_finite() || !s.b3_max.is_finite() || s.b3_min > s.b3_max {
                return Err(invalid("sweep", "need finite b3_min <= b3_max"));
            }
            if s.count == 0 {
                return Err(invalid("sweep.count", "must be positive"));
            }
        }
        if let Some(iv) = &self.ivp {
            positive("ivp.T", iv.horizon)?;
            positive("ivp.dt", iv.dt)?;
            if iv.dt > iv.horizon {
                return Err(invalid("ivp.dt", "must not exceed T"));
            }
            if let Some(k) = iv.k {
                if k.iter().any(|v| !v.is_finite()) {
                    return Err(invalid("ivp.k", "must be finite"));
                }
            }
        }
        let t = &self.tolerances;
        positive("tolerances.eig", t.eig)?;
        positive("tolerances.fixed_point", t.fixed_point)?;
        positive("tolerances.classify", t.classify)?;
        Ok(())
    }

    pub fn fluid(&self) -> Result<FluidParams<f64>, CliError> {
        let p = &self.params;
        FluidParams::new(p.rho_plus, p.rho_minus, p.mu_plus, p.mu_minus, p.g, p.ell, p.m).map_err(|e| CliError::Run {
            context: "params".into(),
            source: e,
        })
    }

    pub fn magnetic(&self) -> MagneticField<f64> {
        MagneticField::new(self.field[0], self.field[1], self.field[2])
    }

    pub fn discretization(&self) -> Result<Discretization<f64>, CliError> {
        Discretization::new(self.grid.n_upper, self.grid.n_lower, self.params.ell, self.params.m).map_err(|e| CliError::Run {
            context: "grid".into(),
            source: e,
        })
    }

    /// Unit direction of the k grid.
    pub fn k_direction(&self) -> [f64; 2] {
        match self.kgrid.direction {
            Direction::Vector(d) => {
                let n = d[0].hypot(d[1]);
                [d[0] / n, d[1] / n]
            }
            Direction::Named(NamedDirection::PerpToBstar) => {
                let (b1, b2) = (self.field[0], self.field[1]);
                let n = b1.hypot(b2);
                if n > 0.0 {
                    [-b2 / n, b1 / n]
                } else {
                    [0.0, 1.0]
                }
            }
        }
    }

    pub fn k_magnitudes(&self) -> Vec<f64> {
        let kg = &self.kgrid;
        if kg.count == 1 {
            return vec![kg.min];
        }
        let last = (kg.count - 1) as f64;
        (0..kg.count)
            .map(|i| {
                let t = i as f64 / last;
                match kg.mode {
                    KGridMode::Log => kg.min * (kg.max / kg.min).powf(t),
                    KGridMode::Linear => kg.min + (kg.max - kg.min) * t,
                }
            })
            .collect()
    }

    pub fn k_grid(&self) -> Vec<[f64; 2]> {
        let d = self.k_direction();
        self.k_magnitudes().into_iter().map(|k| [d[0] * k, d[1] * k]).collect()
    }

    pub fn b3_values(&self) -> Option<Vec<f64>> {
        let s = self.sweep.as_ref()?;
        if s.count == 1 {
            return Some(vec![s.b3_min]);
        }
        let last = (s.count - 1) as f64;
        Some((0..s.count).map(|i| s.b3_min + (s.b3_max - s.b3_min) * (i as f64 / last)).collect())
    }
}
