//! Periodic grid, discrete fields and spectral calculus.
//!
//! Transform convention: the forward DFT is unnormalized,
//! `v̂_m = Σ_j v_j e^{−iξ_m x_j}`, and the inverse carries the `1/n`. Modes
//! are stored in the usual FFT order `m = 0, 1, …, n/2 − 1, −n/2, …, −1`.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::model::{PhaseModulation, PlaneWave};

/// Uniform periodic grid `x_j = jΔx` on `[0, L)` with cached FFT plans.
#[derive(Clone)]
pub struct PeriodicGrid {
    length: f64,
    n: usize,
    xi: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for PeriodicGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicGrid").field("length", &self.length).field("n", &self.n).finish()
    }
}

impl PartialEq for PeriodicGrid {
    fn eq(&self, other: &Self) -> bool {
        self.length == other.length && self.n == other.n
    }
}

impl PeriodicGrid {
    pub fn new(length: f64, n: usize) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidParameter { name: "length", reason: format!("must be positive, got {length}") });
        }
        if n < 16 || !n.is_multiple_of(2) {
            return Err(Error::InvalidParameter {
                name: "n",
                reason: format!("must be even and at least 16, got {n}"),
            });
        }
        let mut planner = FftPlanner::new();
        let xi = (0..n).map(|j| TAU * mode_index(j, n) as f64 / length).collect();
        Ok(Self { length, n, xi, forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.dx()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    /// Angular frequencies `ξ_m` in storage order.
    pub fn frequencies(&self) -> &[f64] {
        &self.xi
    }

    fn check(&self, values: &[Complex64]) -> Result<()> {
        if values.len() == self.n {
            Ok(())
        } else {
            Err(Error::LengthMismatch { expected: self.n, found: values.len() })
        }
    }

    pub fn dft(&self, values: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check(values)?;
        let mut buf = values.to_vec();
        self.forward.process(&mut buf);
        Ok(buf)
    }

    pub fn idft(&self, spectrum: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check(spectrum)?;
        let mut buf = spectrum.to_vec();
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|v| *v *= scale);
        Ok(buf)
    }

    /// In-place transforms on a scratch buffer of the right length.
    pub(crate) fn forward_in_place(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
    }

    pub(crate) fn inverse_in_place(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
        let scale = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|v| *v *= scale);
    }

    /// Derivative by multiplication with `iξ_m`. The Nyquist mode is zeroed
    /// since its derivative is not representable as a real-symmetric mode.
    pub fn spectral_derivative(&self, values: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check(values)?;
        let mut buf = values.to_vec();
        self.forward.process(&mut buf);
        for (m, v) in buf.iter_mut().enumerate() {
            *v = if m == self.n / 2 { Complex64::new(0.0, 0.0) } else { *v * Complex64::new(0.0, self.xi[m]) };
        }
        self.inverse_in_place(&mut buf);
        Ok(buf)
    }

    /// Second derivative by multiplication with `−ξ_m²`.
    pub fn spectral_laplacian(&self, values: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check(values)?;
        let mut buf = values.to_vec();
        self.forward.process(&mut buf);
        for (v, xi) in buf.iter_mut().zip(&self.xi) {
            *v *= -xi * xi;
        }
        self.inverse_in_place(&mut buf);
        Ok(buf)
    }

    /// Derivative of a real array.
    pub fn spectral_derivative_real(&self, values: &[f64]) -> Result<Vec<f64>> {
        let complex: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Ok(self.spectral_derivative(&complex)?.into_iter().map(|v| v.re).collect())
    }

    /// Rectangle-rule norm `√(Δx Σ|v_j|²)`.
    pub fn l2_norm(&self, values: &[Complex64]) -> f64 {
        (self.dx() * values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn l2_norm_real(&self, values: &[f64]) -> f64 {
        (self.dx() * values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }
}

/// Signed mode number stored at index `j`.
pub fn mode_index(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Forward DFT of arbitrary length, same convention as [`PeriodicGrid::dft`].
pub fn dft(values: &[Complex64]) -> Vec<Complex64> {
    let mut buf = values.to_vec();
    if !buf.is_empty() {
        FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    }
    buf
}

pub fn idft(spectrum: &[Complex64]) -> Vec<Complex64> {
    let mut buf = spectrum.to_vec();
    if !buf.is_empty() {
        FftPlanner::new().plan_fft_inverse(buf.len()).process(&mut buf);
        let scale = 1.0 / buf.len() as f64;
        buf.iter_mut().for_each(|v| *v *= scale);
    }
    buf
}

pub fn linf_norm(values: &[Complex64]) -> f64 {
    values.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

pub fn linf_norm_real(values: &[f64]) -> f64 {
    values.iter().map(|v| v.abs()).fold(0.0, f64::max)
}

/// Field values `(u, u_t)` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub u: Vec<Complex64>,
    pub ut: Vec<Complex64>,
    pub t: f64,
}

impl State {
    pub fn new(u: Vec<Complex64>, ut: Vec<Complex64>, t: f64) -> Result<Self> {
        if u.len() != ut.len() {
            return Err(Error::LengthMismatch { expected: u.len(), found: ut.len() });
        }
        let state = Self { u, ut, t };
        if !state.is_finite() {
            return Err(Error::NonFinite { t });
        }
        Ok(state)
    }

    pub fn zeros(n: usize) -> Self {
        Self { u: vec![Complex64::new(0.0, 0.0); n], ut: vec![Complex64::new(0.0, 0.0); n], t: 0.0 }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.u.iter().chain(&self.ut).all(|v| v.is_finite())
    }

    pub fn check_grid(&self, grid: &PeriodicGrid) -> Result<()> {
        if self.len() != grid.n() {
            return Err(Error::LengthMismatch { expected: grid.n(), found: self.len() });
        }
        Ok(())
    }
}

/// Gaussian bump added to the plane wave and its time derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation {
    pub w0: Complex64,
    pub v0: Complex64,
    /// Coefficient of `−(x − center)²` in the exponent.
    pub width: f64,
    pub center: f64,
}

impl Perturbation {
    pub fn none(center: f64) -> Self {
        Self { w0: Complex64::new(0.0, 0.0), v0: Complex64::new(0.0, 0.0), width: 1.0, center }
    }

    pub fn profile(&self, x: f64) -> f64 {
        (-self.width * (x - self.center).powi(2)).exp()
    }
}

/// `k x_j` reduced to `[0, 2π)`. For grid-commensurate `k` the reduction is
/// done in integer arithmetic, which keeps sampled plane waves free of the
/// phase rounding that spectral differentiation would otherwise amplify.
pub fn wave_phase(grid: &PeriodicGrid, k: f64, j: usize) -> f64 {
    let cycles = k * grid.length() / TAU;
    let p = cycles.round();
    if (cycles - p).abs() <= 1e-9 * cycles.abs().max(1.0) && p.abs() < 1e12 {
        let n = grid.n() as i128;
        let r = ((p as i128) * (j as i128)).rem_euclid(n);
        TAU * r as f64 / n as f64
    } else {
        k * grid.x(j)
    }
}

/// Samples of the modulated plane wave `a e^{ikx + iωt − iθ∞(x)}`.
pub fn plane_wave_samples(grid: &PeriodicGrid, pw: &PlaneWave, pm: &PhaseModulation, t: f64) -> Vec<Complex64> {
    (0..grid.n())
        .map(|j| {
            let x = grid.x(j);
            Complex64::from_polar(pw.a, wave_phase(grid, pw.k, j) + pw.omega * t - pm.theta(x))
        })
        .collect()
}

/// Checks that `kL/2π` is an integer so the wave is grid-periodic.
pub fn check_commensurate(grid: &PeriodicGrid, k: f64) -> Result<()> {
    let cycles = k * grid.length() / TAU;
    if (cycles - cycles.round()).abs() > 1e-9 * cycles.abs().max(1.0) {
        return Err(Error::IncompatibleWaveNumber { k, length: grid.length(), cycles });
    }
    Ok(())
}

/// Perturbed plane-wave initial data at `t = 0`.
pub fn build_initial(grid: &PeriodicGrid, pw: &PlaneWave, pm: &PhaseModulation, pert: &Perturbation) -> Result<State> {
    if !(pert.width > 0.0 && pert.width.is_finite()) {
        return Err(Error::InvalidParameter { name: "width", reason: format!("must be positive, got {}", pert.width) });
    }
    if !(pert.center >= 0.0 && pert.center < grid.length()) {
        return Err(Error::InvalidParameter {
            name: "center",
            reason: format!("must lie in [0, {}), got {}", grid.length(), pert.center),
        });
    }
    if !(pert.w0.is_finite() && pert.v0.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "amplitude",
            reason: "perturbation amplitudes must be finite".into(),
        });
    }
    pm.validate()?;
    check_commensurate(grid, pw.k)?;

    let base = plane_wave_samples(grid, pw, pm, 0.0);
    let i_omega = Complex64::new(0.0, pw.omega);
    let mut u = Vec::with_capacity(grid.n());
    let mut ut = Vec::with_capacity(grid.n());
    for (j, b) in base.iter().enumerate() {
        let g = pert.profile(grid.x(j));
        u.push(b + pert.w0 * g);
        ut.push(i_omega * b + pert.v0 * g);
    }
    State::new(u, ut, 0.0)
}
