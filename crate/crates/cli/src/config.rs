//! Run configuration: a TOML file with one section per concern.
//!
//! Every key has a default, and the defaults together describe the
//! reference experiment (f = 1 + ν, k = 2π, ω = 10 on a 20-unit periodic
//! domain with a complex Gaussian kick). Validation happens once, at load
//! time, and every failure names the offending key and, when the key was
//! written in the file, its line.

use std::f64::consts::TAU;
use std::path::PathBuf;

use kgwave::field::check_commensurate;
use kgwave::model::{close_amplitude, close_dispersion, regime, Nonlinearity, PhaseModulation, PlaneWave};
use kgwave::polar::Window;
use kgwave::solver::{Problem, SplitConfig};
use kgwave::spectral::default_ell_max;
use kgwave::{PeriodicGrid, Perturbation};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use toml::de::{DeTable, DeValue};

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub nonlinearity: NonlinearityConfig,
    pub wave: WaveConfig,
    pub modulation: ModulationConfig,
    pub perturbation: PerturbationConfig,
    pub grid: GridConfig,
    pub solver: SolverConfig,
    pub scan: ScanConfig,
    pub energy: EnergyConfig,
    pub window: WindowConfig,
    pub output: OutputConfig,
}

/// Coefficients of `f(ν) = c₀ + c₁ν + c₂ν² + …`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NonlinearityConfig {
    pub coeffs: Vec<f64>,
}

/// The background wave. Give `a` to close the dispersion relation for `ω`,
/// or `omega` to solve for the amplitude. Giving both checks consistency.
/// Inside a `[wave]` section both start unset and `k` defaults to 2π; the
/// reference frequency applies only when the section is absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default = "default_k")]
    pub k: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
}

fn default_k() -> f64 {
    TAU
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModulationConfig {
    #[default]
    Zero,
    TanhFront {
        x_minus: f64,
        x_plus: f64,
        k: f64,
    },
    Algebraic {
        epsilon: f64,
    },
}

/// `w0 = w0_amp·e^{−width(x−center)²}`, likewise `v0`. Amplitudes are
/// written as `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerturbationConfig {
    pub w0_amp: [f64; 2],
    pub v0_amp: [f64; 2],
    pub width: f64,
    pub center: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub length: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    pub sample_every: usize,
    /// Mass of the linear part of the splitting; defaults to `f(a²)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    /// Half-width of the frequency range; defaults to `4|k|` (4 when k = 0).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell_max: Option<f64>,
    pub n_samples: usize,
    /// Frame speed of the linearization.
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyConfig {
    pub delta2: f64,
    /// Explicit co-moving speed; by default it is chosen from the regime.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowConfig {
    pub center: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub snapshot_times: Vec<f64>,
}

impl Default for NonlinearityConfig {
    fn default() -> Self {
        Self { coeffs: vec![1.0, 1.0] }
    }
}

impl Default for WaveConfig {
    fn default() -> Self {
        Self { a: None, k: default_k(), omega: Some(10.0) }
    }
}

impl Default for PerturbationConfig {
    fn default() -> Self {
        Self { w0_amp: [4.0, 4.0], v0_amp: [40.0, 40.0], width: 25.0, center: 10.0 }
    }
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { length: 20.0, n: 2048 }
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { dt: 2e-4, t_end: 4.0, sample_every: 20, mass: None }
    }
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self { ell_max: None, n_samples: kgwave::spectral::DEFAULT_SCAN_SAMPLES, c: 0.0 }
    }
}

impl Default for EnergyConfig {
    fn default() -> Self {
        Self { delta2: kgwave::energy::DEFAULT_DELTA2, c: None }
    }
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self { center: 10.0, radius: 5.0 }
    }
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), snapshot_times: Vec::new() }
    }
}

/// Everything the commands need, built from a validated configuration.
#[derive(Debug, Clone)]
pub struct Setup {
    pub problem: Problem,
    pub split: SplitConfig,
    pub window: Window,
    pub ell_max: f64,
}

/// A validation failure tied to a dotted key path such as `wave.a`.
struct Issue {
    key: &'static str,
    message: String,
}

fn issue(key: &'static str, message: impl ToString) -> Issue {
    Issue { key, message: message.to_string() }
}

fn finite(key: &'static str, v: f64) -> Result<f64, Issue> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(issue(key, format!("must be finite, got {v}")))
    }
}

impl RunConfig {
    /// Parses and validates a configuration document.
    pub fn parse(src: &str) -> Result<(Self, Setup), CliError> {
        let cfg: RunConfig =
            toml::from_str(src).map_err(|e| CliError::Config { key: None, line: None, message: e.to_string() })?;
        match cfg.build() {
            Ok(setup) => Ok((cfg, setup)),
            Err(is) => Err(CliError::Config {
                key: Some(is.key.to_string()),
                line: line_of_key(src, is.key),
                message: is.message,
            }),
        }
    }

    /// Validates the defaults-only configuration.
    pub fn defaults() -> Result<(Self, Setup), CliError> {
        let cfg = RunConfig::default();
        match cfg.build() {
            Ok(setup) => Ok((cfg, setup)),
            Err(is) => Err(CliError::Config { key: Some(is.key.to_string()), line: None, message: is.message }),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    fn build(&self) -> Result<Setup, Issue> {
        let f = Nonlinearity::new(self.nonlinearity.coeffs.clone()).map_err(|e| issue("nonlinearity.coeffs", e))?;
        let pw = self.wave(&f)?;

        let grid = PeriodicGrid::new(finite("grid.length", self.grid.length)?, self.grid.n).map_err(|e| {
            let key = if self.grid.length > 0.0 { "grid.n" } else { "grid.length" };
            issue(key, e)
        })?;
        check_commensurate(&grid, pw.k).map_err(|e| issue("wave.k", e))?;

        let pm = match self.modulation {
            ModulationConfig::Zero => PhaseModulation::Zero,
            ModulationConfig::TanhFront { x_minus, x_plus, k } => PhaseModulation::TanhFront { x_minus, x_plus, k },
            ModulationConfig::Algebraic { epsilon } => PhaseModulation::Algebraic { epsilon },
        };
        pm.validate().map_err(|e| issue("modulation", e))?;
        let reg = regime(&pw, &f);
        if !pm.admissible(reg) {
            return Err(issue("modulation.kind", format!("not admissible in the {} regime", reg.name())));
        }

        let p = &self.perturbation;
        let w0 =
            Complex64::new(finite("perturbation.w0_amp", p.w0_amp[0])?, finite("perturbation.w0_amp", p.w0_amp[1])?);
        let v0 =
            Complex64::new(finite("perturbation.v0_amp", p.v0_amp[0])?, finite("perturbation.v0_amp", p.v0_amp[1])?);
        if !(p.width > 0.0 && p.width.is_finite()) {
            return Err(issue("perturbation.width", format!("must be positive, got {}", p.width)));
        }
        let perturbation = Perturbation { w0, v0, width: p.width, center: finite("perturbation.center", p.center)? };

        let s = &self.solver;
        if let Some(m) = s.mass {
            finite("solver.mass", m)?;
        }
        let split = SplitConfig::new(s.dt, s.t_end, s.sample_every, s.mass).map_err(|e| {
            let key = match &e {
                kgwave::Error::InvalidParameter { name: "t_end", .. } => "solver.t_end",
                kgwave::Error::InvalidParameter { name: "sample_every", .. } => "solver.sample_every",
                kgwave::Error::InvalidParameter { name: "mass", .. } => "solver.mass",
                _ => "solver.dt",
            };
            issue(key, e)
        })?;

        let window = Window::new(finite("window.center", self.window.center)?, self.window.radius, &grid)
            .map_err(|e| issue("window.radius", e))?;

        let ell_max = match self.scan.ell_max {
            Some(v) if !(v > 0.0 && v.is_finite()) => {
                return Err(issue("scan.ell_max", format!("must be positive, got {v}")))
            }
            Some(v) => v,
            None => default_ell_max(&pw),
        };
        if self.scan.n_samples < 64 {
            return Err(issue("scan.n_samples", format!("must be at least 64, got {}", self.scan.n_samples)));
        }
        if !(self.scan.c.abs() < 1.0) {
            return Err(issue("scan.c", format!("must satisfy |c| < 1, got {}", self.scan.c)));
        }
        if !(self.energy.delta2 > 0.0 && self.energy.delta2 < 1.0) {
            return Err(issue("energy.delta2", format!("must lie in (0, 1), got {}", self.energy.delta2)));
        }
        if let Some(c) = self.energy.c {
            if !(c.abs() < 1.0) {
                return Err(issue("energy.c", format!("must satisfy |c| < 1, got {c}")));
            }
        }
        for &t in &self.output.snapshot_times {
            if !(t >= 0.0 && t <= s.t_end) {
                return Err(issue("output.snapshot_times", format!("time {t} lies outside [0, {}]", s.t_end)));
            }
        }

        Ok(Setup { problem: Problem { grid, f, pw, pm, perturbation }, split, window, ell_max })
    }

    fn wave(&self, f: &Nonlinearity) -> Result<PlaneWave, Issue> {
        let w = &self.wave;
        let k = finite("wave.k", w.k)?;
        match (w.a, w.omega) {
            (Some(a), omega) => {
                if !(a > 0.0 && a.is_finite()) {
                    return Err(issue("wave.a", format!("amplitude must be positive and finite, got {a}")));
                }
                match omega {
                    Some(om) => PlaneWave::new(a, k, om, f).map_err(|e| issue("wave.omega", e)),
                    None => close_dispersion(a, k, f).map_err(|e| issue("wave.a", e)),
                }
            }
            (None, Some(om)) => close_amplitude(k, finite("wave.omega", om)?, f).map_err(|e| issue("wave.omega", e)),
            (None, None) => Err(issue("wave", "give the amplitude a, the frequency omega, or both")),
        }
    }
}

/// One-based line of `key` (dotted path) in `src`, falling back to the
/// nearest enclosing table that is present.
fn line_of_key(src: &str, key: &str) -> Option<usize> {
    let doc = DeTable::parse(src).ok()?;
    let mut table = doc.get_ref();
    let mut found = None;
    for part in key.split('.') {
        let Some((k, v)) = table.iter().find(|(k, _)| k.get_ref().as_ref() == part) else {
            break;
        };
        found = Some(k.span().start);
        match v.get_ref() {
            DeValue::Table(t) => table = t,
            _ => break,
        }
    }
    found.map(|offset| src[..offset].matches('\n').count() + 1)
}
