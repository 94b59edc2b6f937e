//! Parameter domain: polynomial nonlinearities, plane waves and the
//! dispersion relation `ω² = k² + f(a²)`, the spectral condition, the mass
//! regime and the catalog of admissible phase modulations.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad;
use crate::roots;

/// Relative tolerance on the dispersion relation.
pub const DISPERSION_TOL: f64 = 1e-12;
/// Band around `f(a²) = 0` treated as massless.
pub const REGIME_TOL: f64 = 1e-12;
/// Integrands below this value are truncated in the `E∞` quadrature.
pub const QUADRATURE_CUTOFF: f64 = 1e-14;

/// Polynomial nonlinearity `f(ν) = Σ_j c_j ν^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Nonlinearity {
    coeffs: Vec<f64>,
}

impl Nonlinearity {
    /// Coefficients in ascending powers. Trailing zeros are dropped.
    pub fn new(mut coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::EmptyNonlinearity);
        }
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Ok(Self { coeffs })
    }

    /// `f(ν) = 1 + ν`.
    pub fn defocusing_cubic() -> Self {
        Self { coeffs: vec![1.0, 1.0] }
    }

    /// `f(ν) = 1 − ν`.
    pub fn focusing_cubic() -> Self {
        Self { coeffs: vec![1.0, -1.0] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, nu: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * nu + c)
    }

    pub fn derivative(&self, nu: f64) -> f64 {
        self.coeffs.iter().enumerate().skip(1).rev().fold(0.0, |acc, (j, &c)| acc * nu + j as f64 * c)
    }

    /// Coefficients `b_m` of `f(a²(1 + t)) − f(a²) = Σ_{m≥1} b_m t^m`.
    ///
    /// Expanding about the background circle avoids the cancellation that
    /// plagues the raw antiderivative near `|w| = 1`.
    pub fn shifted_increments(&self, a_sq: f64) -> Vec<f64> {
        let p = self.coeffs.len();
        let mut out = vec![0.0; p];
        for (j, &c) in self.coeffs.iter().enumerate() {
            let scaled = c * a_sq.powi(j as i32);
            let mut binom = 1.0;
            for (m, slot) in out.iter_mut().enumerate().take(j + 1) {
                if m > 0 {
                    binom = binom * (j + 1 - m) as f64 / m as f64;
                    *slot += scaled * binom;
                }
            }
        }
        out
    }
}

/// Plane wave `a e^{ikx + iωt}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWave {
    pub a: f64,
    pub k: f64,
    pub omega: f64,
}

impl PlaneWave {
    /// Validates `a > 0`, `(k, ω) ≠ (0, 0)` and the dispersion relation.
    pub fn new(a: f64, k: f64, omega: f64, f: &Nonlinearity) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidAmplitude(a));
        }
        if k == 0.0 && omega == 0.0 {
            return Err(Error::ZeroWave);
        }
        let expected = k * k + f.eval(a * a);
        let omega_sq = omega * omega;
        let scale = omega_sq.abs().max(k * k).max(f.eval(a * a).abs()).max(1.0);
        if (omega_sq - expected).abs() > DISPERSION_TOL * scale {
            return Err(Error::DispersionMismatch { omega_sq, expected });
        }
        Ok(Self { a, k, omega })
    }

    pub fn a_sq(&self) -> f64 {
        self.a * self.a
    }

    /// Wave speed `s = −ω/k`, undefined for standing waves.
    pub fn speed(&self) -> Option<f64> {
        (self.k != 0.0).then(|| -self.omega / self.k)
    }

    /// `f(a²)`, the effective mass of the linearization.
    pub fn mass(&self, f: &Nonlinearity) -> f64 {
        f.eval(self.a_sq())
    }

    /// `a² f′(a²)`.
    pub fn focusing_strength(&self, f: &Nonlinearity) -> f64 {
        self.a_sq() * f.derivative(self.a_sq())
    }
}

/// Positive dispersion root `ω = +√(k² + f(a²))`.
pub fn close_dispersion(a: f64, k: f64, f: &Nonlinearity) -> Result<PlaneWave> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidAmplitude(a));
    }
    let mass = f.eval(a * a);
    let mut radicand = k * k + mass;
    if radicand < 0.0 && radicand.abs() <= DISPERSION_TOL * (k * k).max(mass.abs()) {
        radicand = 0.0;
    }
    if radicand < 0.0 || (radicand == 0.0 && k == 0.0) {
        return Err(Error::NegativeRadicand { k, radicand });
    }
    Ok(PlaneWave { a, k, omega: radicand.sqrt() })
}

/// Inverse closure: the smallest `a > 0` with `f(a²) = ω² − k²`.
pub fn close_amplitude(k: f64, omega: f64, f: &Nonlinearity) -> Result<PlaneWave> {
    let target = omega * omega - k * k;
    let coeffs = f.coeffs();
    let nu = match coeffs.len() {
        1 => None,
        2 => Some((target - coeffs[0]) / coeffs[1]),
        _ => {
            let mut shifted: Vec<Complex64> = coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect();
            shifted[0] -= target;
            let candidates = roots::polynomial_roots(&shifted)?;
            candidates
                .iter()
                .filter(|r| r.im.abs() <= 1e-8 * (1.0 + r.re.abs()))
                .map(|r| polish_real(f, target, r.re))
                .filter(|&nu| nu > 0.0)
                .min_by(f64::total_cmp)
        }
    };
    match nu {
        Some(nu) if nu > 0.0 && nu.is_finite() => PlaneWave::new(nu.sqrt(), k, omega, f),
        _ => Err(Error::NoAmplitude { target }),
    }
}

fn polish_real(f: &Nonlinearity, target: f64, mut nu: f64) -> f64 {
    for _ in 0..4 {
        let d = f.derivative(nu);
        if d == 0.0 {
            break;
        }
        nu -= (f.eval(nu) - target) / d;
    }
    nu
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralCondition {
    pub satisfied: bool,
    /// `a² f′(a²) − 2 max{0, −f(a²)}`.
    pub margin: f64,
}

/// The spectral condition `a² f′(a²) > 2 max{0, −f(a²)}`. The boundary case
/// `margin == 0` is reported as not satisfied.
pub fn spectral_condition(pw: &PlaneWave, f: &Nonlinearity) -> SpectralCondition {
    let margin = pw.focusing_strength(f) - 2.0 * f64::max(0.0, -pw.mass(f));
    SpectralCondition { satisfied: margin > 0.0, margin }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    PositiveMass,
    ZeroMass,
    Tachyonic,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::PositiveMass => "positive_mass",
            Regime::ZeroMass => "zero_mass",
            Regime::Tachyonic => "tachyonic",
        }
    }
}

pub fn regime(pw: &PlaneWave, f: &Nonlinearity) -> Regime {
    let mass = pw.mass(f);
    if mass.abs() <= REGIME_TOL {
        Regime::ZeroMass
    } else if mass > 0.0 {
        Regime::PositiveMass
    } else {
        Regime::Tachyonic
    }
}

/// Cataloged initial phase modulations `θ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseModulation {
    Zero,
    /// `k x₋ (1 − tanh x)/2 + k x₊ (1 + tanh x)/2`.
    TanhFront {
        x_minus: f64,
        x_plus: f64,
        k: f64,
    },
    /// `(1 + ε⁴x²)^{1/8}`, unbounded; needs positive mass.
    Algebraic {
        epsilon: f64,
    },
}

impl PhaseModulation {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PhaseModulation::Zero => Ok(()),
            PhaseModulation::TanhFront { x_minus, x_plus, k } => {
                if [x_minus, x_plus, k].iter().all(|v| v.is_finite()) {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter { name: "tanh_front", reason: "parameters must be finite".into() })
                }
            }
            PhaseModulation::Algebraic { epsilon } => {
                if epsilon > 0.0 && epsilon < 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter {
                        name: "epsilon",
                        reason: format!("must lie in (0, 1), got {epsilon}"),
                    })
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, PhaseModulation::Zero)
    }

    pub fn theta(&self, x: f64) -> f64 {
        match *self {
            PhaseModulation::Zero => 0.0,
            PhaseModulation::TanhFront { x_minus, x_plus, k } => {
                let t = x.tanh();
                k * x_minus * 0.5 * (1.0 - t) + k * x_plus * 0.5 * (1.0 + t)
            }
            PhaseModulation::Algebraic { epsilon } => {
                let e4 = epsilon.powi(4);
                (1.0 + e4 * x * x).powf(0.125)
            }
        }
    }

    pub fn theta_prime(&self, x: f64) -> f64 {
        match *self {
            PhaseModulation::Zero => 0.0,
            PhaseModulation::TanhFront { x_minus, x_plus, k } => {
                let sech = 1.0 / x.cosh();
                0.5 * k * (x_plus - x_minus) * sech * sech
            }
            PhaseModulation::Algebraic { epsilon } => {
                let e4 = epsilon.powi(4);
                0.25 * e4 * x * (1.0 + e4 * x * x).powf(-0.875)
            }
        }
    }

    /// Whether the modulation is admissible for the given regime.
    pub fn admissible(&self, regime: Regime) -> bool {
        !matches!(self, PhaseModulation::Algebraic { .. }) || regime == Regime::PositiveMass
    }

    /// `‖θ∞′‖_{L²(ℝ)}` by truncated adaptive quadrature.
    pub fn derivative_l2(&self) -> f64 {
        match self {
            PhaseModulation::Zero => 0.0,
            _ => {
                let sq = |x: f64| self.theta_prime(x).powi(2);
                let right = quad::integrate_half_line(&sq, QUADRATURE_CUTOFF, 1e-15);
                let left = quad::integrate_half_line(&|x: f64| sq(-x), QUADRATURE_CUTOFF, 1e-15);
                (left + right).sqrt()
            }
        }
    }

    /// `‖θ∞′‖_{L¹(ℝ)}`; infinite for the algebraic profile.
    pub fn derivative_l1(&self) -> f64 {
        match self {
            PhaseModulation::Zero => 0.0,
            PhaseModulation::Algebraic { .. } => f64::INFINITY,
            PhaseModulation::TanhFront { .. } => {
                let abs = |x: f64| self.theta_prime(x).abs();
                let right = quad::integrate_half_line(&abs, QUADRATURE_CUTOFF, 1e-15);
                let left = quad::integrate_half_line(&|x: f64| abs(-x), QUADRATURE_CUTOFF, 1e-15);
                left + right
            }
        }
    }
}

/// Size `E∞` of an admissible phase modulation.
pub fn e_infty(pm: &PhaseModulation, regime: Regime) -> Result<f64> {
    pm.validate()?;
    if !pm.admissible(regime) {
        return Err(Error::InadmissibleModulation(format!(
            "algebraic modulation requires positive mass, regime is {}",
            regime.name()
        )));
    }
    let l2 = pm.derivative_l2();
    Ok(match regime {
        Regime::PositiveMass => l2,
        _ => l2 + pm.derivative_l1().sqrt(),
    })
}
