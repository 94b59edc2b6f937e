//! Conserved energy of a perturbed plane wave in a co-moving frame.
//!
//! Writing `u = a e^{i(kx + ωt)} W` and moving to `y = x − ct`, the rescaled
//! field obeys a wave equation whose energy
//!
//! ```text
//! E = ½∫|W_t + cW_x|² + ½(1 − c²)∫|W_x|² + ½∫U(|W|²) − (k + cω)∫Im(W conj(W_x))
//! ```
//!
//! is exactly conserved. Here `W_t + cW_x` is the time derivative at fixed
//! `y`. The phase modulation `θ∞` cancels out of every term, so the
//! functional is evaluated directly on `W`, which stays grid-periodic even
//! when `e^{iθ∞}` does not.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{wave_phase, PeriodicGrid, State};
use crate::model::{regime, spectral_condition, Nonlinearity, PlaneWave, Regime};

/// `U(s) = ∫₁^s [f(a²υ) − f(a²)] dυ`.
///
/// Stored as a Taylor expansion in `s − 1`, which keeps the near-quadratic
/// behaviour at the background circle free of cancellation.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    taylor: Vec<f64>,
}

impl Potential {
    pub fn new(f: &Nonlinearity, a: f64) -> Self {
        let b = f.shifted_increments(a * a);
        // U(1 + τ) = Σ_m b_m τ^{m+1} / (m + 1), stored with index m + 1
        let mut taylor = vec![0.0; b.len() + 1];
        for (m, &bm) in b.iter().enumerate().skip(1) {
            taylor[m + 1] = bm / (m + 1) as f64;
        }
        Self { taylor }
    }

    pub fn eval(&self, s: f64) -> f64 {
        let tau = s - 1.0;
        self.taylor.iter().rev().fold(0.0, |acc, &c| acc * tau + c)
    }
}

/// Convenience wrapper around [`Potential`].
pub fn potential_u(s: f64, a: f64, f: &Nonlinearity) -> f64 {
    Potential::new(f, a).eval(s)
}

/// Default `δ₂` for the zero-mass speed.
pub const DEFAULT_DELTA2: f64 = 0.05;

/// Co-moving speed chosen so that the energy controls the perturbation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CSelection {
    pub c: f64,
    pub regime: Regime,
    pub delta2: f64,
}

/// Regime-dependent speed: `−k/ω` for positive mass, `−ω/k` for tachyonic
/// mass and `−(k/ω)(1 − δ₂)` at zero mass.
///
/// At zero mass the Hermitian symbol of the linearization is only
/// semi-definite when `δ₂ ≤ 2G/(2k² + G)` with `G = a²f′(a²)`.
pub fn select_c(pw: &PlaneWave, f: &Nonlinearity, delta2: f64) -> Result<CSelection> {
    let sc = spectral_condition(pw, f);
    if !sc.satisfied {
        return Err(Error::ConditionViolated { margin: sc.margin });
    }
    if !(delta2 > 0.0 && delta2 < 1.0) {
        return Err(Error::InvalidParameter { name: "delta2", reason: format!("must lie in (0, 1), got {delta2}") });
    }
    let regime = regime(pw, f);
    let c = match regime {
        Regime::PositiveMass => {
            if pw.omega == 0.0 {
                return Err(Error::DegenerateWave("positive mass speed needs omega != 0"));
            }
            -pw.k / pw.omega
        }
        Regime::Tachyonic => {
            if pw.k == 0.0 {
                return Err(Error::DegenerateWave("tachyonic speed needs k != 0"));
            }
            -pw.omega / pw.k
        }
        Regime::ZeroMass => {
            if pw.omega == 0.0 {
                return Err(Error::DegenerateWave("zero-mass speed needs omega != 0"));
            }
            -(pw.k / pw.omega) * (1.0 - delta2)
        }
    };
    Ok(CSelection { c, regime, delta2 })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub t: f64,
    pub total: f64,
    pub kinetic: f64,
    pub gradient: f64,
    pub potential: f64,
    pub cross: f64,
}

/// Reusable evaluator for one background wave and speed.
#[derive(Debug, Clone)]
pub struct EnergyFunctional {
    pw: PlaneWave,
    c: f64,
    potential: Potential,
}

impl EnergyFunctional {
    pub fn new(pw: &PlaneWave, f: &Nonlinearity, c: f64) -> Result<Self> {
        if !(c.abs() < 1.0) {
            return Err(Error::InvalidParameter { name: "c", reason: format!("must satisfy |c| < 1, got {c}") });
        }
        Ok(Self { pw: *pw, c, potential: Potential::new(f, pw.a) })
    }

    /// `k + cω`, snapped to zero when it vanishes up to rounding so that the
    /// positive-mass choice `c = −k/ω` drops the cross term exactly.
    fn cross_factor(&self) -> f64 {
        let kc = self.pw.k + self.c * self.pw.omega;
        if kc.abs() <= 4.0 * f64::EPSILON * (self.pw.k.abs() + (self.c * self.pw.omega).abs()) {
            0.0
        } else {
            kc
        }
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn evaluate(&self, state: &State, grid: &PeriodicGrid) -> Result<EnergyReport> {
        state.check_grid(grid)?;
        let ux = grid.spectral_derivative(&state.u)?;
        Ok(self.assemble(state, grid, &ux))
    }

    /// Assembles the energy from `u`, `u_t` and a supplied `u_x`.
    pub fn assemble(&self, state: &State, grid: &PeriodicGrid, ux: &[Complex64]) -> EnergyReport {
        let PlaneWave { a, k, omega } = self.pw;
        let c = self.c;
        let (mut kin, mut grad, mut pot, mut cross) = (0.0, 0.0, 0.0, 0.0);
        for j in 0..grid.n() {
            let rot = Complex64::from_polar(1.0 / a, -(wave_phase(grid, k, j) + omega * state.t));
            let w = state.u[j] * rot;
            let wx = (ux[j] - Complex64::new(0.0, k) * state.u[j]) * rot;
            let wt = (state.ut[j] - Complex64::new(0.0, omega) * state.u[j]) * rot;
            kin += (wt + c * wx).norm_sqr();
            grad += wx.norm_sqr();
            pot += self.potential.eval(w.norm_sqr());
            cross += (w * wx.conj()).im;
        }
        let dx = grid.dx();
        let kinetic = 0.5 * dx * kin;
        let gradient = 0.5 * (1.0 - c * c) * dx * grad;
        let potential = 0.5 * dx * pot;
        let cross = -self.cross_factor() * dx * cross;
        EnergyReport { t: state.t, total: kinetic + gradient + potential + cross, kinetic, gradient, potential, cross }
    }
}

pub fn energy_of_state(
    state: &State,
    grid: &PeriodicGrid,
    pw: &PlaneWave,
    f: &Nonlinearity,
    c: f64,
) -> Result<EnergyReport> {
    EnergyFunctional::new(pw, f, c)?.evaluate(state, grid)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drift {
    pub max_rel_drift: f64,
    pub t_at_max: f64,
}

/// Relative drift `|E(t) − E(0)| / max(|E(0)|, 1)`.
pub fn relative_drift(e0: f64, e: f64) -> f64 {
    (e - e0).abs() / e0.abs().max(1.0)
}

pub fn drift(series: &[EnergyReport]) -> Result<Drift> {
    if series.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, found: series.len() });
    }
    let e0 = series[0].total;
    let mut best = Drift { max_rel_drift: 0.0, t_at_max: series[0].t };
    for r in series {
        let d = relative_drift(e0, r.total);
        if d > best.max_rel_drift {
            best = Drift { max_rel_drift: d, t_at_max: r.t };
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{build_initial, plane_wave_samples, Perturbation};
    use crate::model::{close_amplitude, close_dispersion, PhaseModulation};
    use proptest::prelude::*;
    use std::f64::consts::{PI, TAU};

    fn section6() -> (Nonlinearity, PlaneWave, PeriodicGrid, State) {
        let f = Nonlinearity::defocusing_cubic();
        let pw = close_amplitude(2.0 * PI, 10.0, &f).unwrap();
        let grid = PeriodicGrid::new(20.0, 2048).unwrap();
        let pert =
            Perturbation { w0: Complex64::new(4.0, 4.0), v0: Complex64::new(40.0, 40.0), width: 25.0, center: 10.0 };
        let state = build_initial(&grid, &pw, &PhaseModulation::Zero, &pert).unwrap();
        (f, pw, grid, state)
    }

    #[test]
    fn potential_examples() {
        let f = Nonlinearity::defocusing_cubic();
        let a = 1.7;
        assert_eq!(potential_u(1.0, a, &f), 0.0);
        assert!((potential_u(2.0, a, &f) - a * a / 2.0).abs() < 1e-14);

        let g = Nonlinearity::new(vec![0.5, -1.0, 0.3, 0.2]).unwrap();
        let p = Potential::new(&g, a);
        let h = 1e-4;
        let d1 = (p.eval(1.0 + h) - p.eval(1.0 - h)) / (2.0 * h);
        let d2 = (p.eval(1.0 + h) - 2.0 * p.eval(1.0) + p.eval(1.0 - h)) / (h * h);
        assert!(d1.abs() < 1e-6);
        assert!((d2 - a * a * g.derivative(a * a)).abs() < 1e-6);
    }

    #[test]
    fn potential_matches_raw_antiderivative() {
        let g = Nonlinearity::new(vec![0.5, -1.0, 0.3]).unwrap();
        let a: f64 = 0.8;
        let a2 = a * a;
        // ∫₁^s (c1 a² (υ−1) + c2 a⁴ (υ²−1)) dυ
        let raw = |s: f64| -a2 * (s * s / 2.0 - s + 0.5) + 0.3 * a2 * a2 * ((s.powi(3) - 1.0) / 3.0 - (s - 1.0));
        for &s in &[0.0, 0.4, 1.3, 3.0] {
            assert!((potential_u(s, a, &g) - raw(s)).abs() < 1e-13);
        }
    }

    #[test]
    fn speed_selection_examples() {
        let f = Nonlinearity::defocusing_cubic();
        let pw = close_amplitude(2.0 * PI, 10.0, &f).unwrap();
        let cs = select_c(&pw, &f, DEFAULT_DELTA2).unwrap();
        assert!((cs.c + 0.2 * PI).abs() < 1e-15);
        assert!((pw.k + cs.c * pw.omega).abs() < 1e-12);

        let standing = close_dispersion(1.0, 0.0, &f).unwrap();
        assert_eq!(select_c(&standing, &f, DEFAULT_DELTA2).unwrap().c, 0.0);

        // f(ν) = 2ν − 1 vanishes at a² = 1/2; ω = k = 1
        let g = Nonlinearity::new(vec![-1.0, 2.0]).unwrap();
        let pw = close_dispersion(0.5f64.sqrt(), 1.0, &g).unwrap();
        let cs = select_c(&pw, &g, 0.05).unwrap();
        assert_eq!(cs.regime, Regime::ZeroMass);
        assert!((cs.c + 0.95).abs() < 1e-12);

        // f(ν) = 3ν − 2 at a² = 0.5: f = −0.5, G = 1.5 > 1
        let h = Nonlinearity::new(vec![-2.0, 3.0]).unwrap();
        let pw = close_dispersion(0.5f64.sqrt(), 2.0, &h).unwrap();
        let cs = select_c(&pw, &h, 0.05).unwrap();
        assert_eq!(cs.regime, Regime::Tachyonic);
        assert!((cs.c + pw.omega / 2.0).abs() < 1e-15);
        assert!(cs.c.abs() < 1.0);

        let foc = Nonlinearity::focusing_cubic();
        let pw = close_dispersion(0.5, 1.0, &foc).unwrap();
        assert!(matches!(select_c(&pw, &foc, 0.05), Err(Error::ConditionViolated { .. })));
        let pw = close_dispersion(1.0, 0.0, &f).unwrap();
        assert!(select_c(&pw, &f, 1.0).is_err());
    }

    #[test]
    fn unperturbed_wave_has_zero_energy() {
        let (f, pw, grid, _) = section6();
        let u = plane_wave_samples(&grid, &pw, &PhaseModulation::Zero, 0.3);
        let ut: Vec<_> = u.iter().map(|v| Complex64::new(0.0, pw.omega) * v).collect();
        let state = State::new(u, ut, 0.3).unwrap();
        let c = select_c(&pw, &f, DEFAULT_DELTA2).unwrap().c;
        let e = energy_of_state(&state, &grid, &pw, &f, c).unwrap();
        assert!(e.total.abs() < 1e-10, "{e:?}");
    }

    /// Independent evaluation with an O(n²) DFT derivative and the raw
    /// cubic antiderivative.
    fn oracle_energy(state: &State, grid: &PeriodicGrid, pw: &PlaneWave, c: f64) -> f64 {
        let n = grid.n();
        let dx = grid.dx();
        let modes: Vec<Complex64> = (0..n)
            .map(|m| {
                (0..n).map(|j| state.u[j] * Complex64::from_polar(1.0, -TAU * ((j * m) % n) as f64 / n as f64)).sum()
            })
            .collect();
        let a2 = pw.a * pw.a;
        let mut total = 0.0;
        for j in 0..n {
            let x = j as f64 * dx;
            let ux: Complex64 = (0..n)
                .filter(|&m| m != n / 2)
                .map(|m| {
                    let mm = if m < n / 2 { m as f64 } else { m as f64 - n as f64 };
                    let xi = TAU * mm / grid.length();
                    modes[m]
                        * Complex64::new(0.0, xi)
                        * Complex64::from_polar(1.0, TAU * ((j * m) % n) as f64 / n as f64)
                })
                .sum::<Complex64>()
                / n as f64;
            let e = Complex64::from_polar(1.0 / pw.a, -(pw.k * x + pw.omega * state.t));
            let w = state.u[j] * e;
            let wx = (ux - Complex64::new(0.0, pw.k) * state.u[j]) * e;
            let wt = (state.ut[j] - Complex64::new(0.0, pw.omega) * state.u[j]) * e;
            let s = w.norm_sqr();
            let u_pot = a2 * (s - 1.0).powi(2) / 2.0;
            total += 0.5 * (wt + c * wx).norm_sqr() + 0.5 * (1.0 - c * c) * wx.norm_sqr() + 0.5 * u_pot
                - (pw.k + c * pw.omega) * (w * wx.conj()).im;
        }
        total * dx
    }

    #[test]
    fn section6_energy_matches_direct_oracle() {
        let (f, pw, grid, state) = section6();
        let c = select_c(&pw, &f, DEFAULT_DELTA2).unwrap().c;
        let e = energy_of_state(&state, &grid, &pw, &f, c).unwrap();
        let oracle = oracle_energy(&state, &grid, &pw, c);
        assert!(((e.total - oracle) / oracle).abs() < 1e-10, "{} vs {oracle}", e.total);
        assert_eq!(e.cross, 0.0);
        let sum = e.kinetic + e.gradient + e.potential + e.cross;
        assert!((sum - e.total).abs() <= 1e-12 * e.total.abs());
    }

    #[test]
    fn drift_contract() {
        let r =
            |t: f64, total: f64| EnergyReport { t, total, kinetic: total, gradient: 0.0, potential: 0.0, cross: 0.0 };
        assert!(matches!(drift(&[r(0.0, 1.0)]), Err(Error::InsufficientData { .. })));
        let d = drift(&[r(0.0, 5.0), r(1.0, 5.0), r(2.0, 5.0)]).unwrap();
        assert_eq!(d.max_rel_drift, 0.0);
        let d = drift(&[r(0.0, 4.0), r(1.0, 4.2), r(2.0, 3.0), r(3.0, 4.1)]).unwrap();
        assert_eq!(d.t_at_max, 2.0);
        assert!((d.max_rel_drift - 0.25).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn gauge_invariance(phi0 in -PI..PI, re in -1.0f64..1.0, im in -1.0f64..1.0) {
            let f = Nonlinearity::defocusing_cubic();
            let pw = close_dispersion(1.1, TAU * 3.0 / 10.0, &f).unwrap();
            let grid = PeriodicGrid::new(10.0, 128).unwrap();
            let pert = Perturbation { w0: Complex64::new(re, im), v0: Complex64::new(im, -re), width: 2.0, center: 5.0 };
            let s = build_initial(&grid, &pw, &PhaseModulation::Zero, &pert).unwrap();
            let rot = Complex64::from_polar(1.0, phi0);
            let r = State::new(s.u.iter().map(|v| v * rot).collect(), s.ut.iter().map(|v| v * rot).collect(), 0.0).unwrap();
            let func = EnergyFunctional::new(&pw, &f, 0.3).unwrap();
            let e0 = func.evaluate(&s, &grid).unwrap().total;
            let e1 = func.evaluate(&r, &grid).unwrap().total;
            prop_assert!((e0 - e1).abs() <= 1e-10 * e0.abs().max(1.0));
        }
    }
}
