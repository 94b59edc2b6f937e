//! Amplitude/phase decomposition of a perturbed plane wave.
//!
//! A state is written as `u = a e^{ikx + iωt − iθ∞(x)} e^{ρ + iθ}`. The
//! log-amplitude `ρ` and the unwrapped phase `θ` are the quantities whose
//! norms the stability theory controls. Spatial derivatives are taken from
//! `u_x / u = ik − iθ∞′ + ρ_x + iθ_x`, which sidesteps differentiating an
//! unwrapped phase.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{linf_norm_real, wave_phase, PeriodicGrid, State};
use crate::model::{PhaseModulation, PlaneWave};

/// Ratio `|u|/a` below which the decomposition is refused.
pub const COLLAPSE_RATIO: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct PolarField {
    pub t: f64,
    pub rho: Vec<f64>,
    pub theta: Vec<f64>,
    pub rho_x: Vec<f64>,
    pub theta_x: Vec<f64>,
    pub rho_t: Vec<f64>,
    pub theta_t: Vec<f64>,
}

/// Decomposes `state` relative to the modulated plane wave.
///
/// The phase is unwrapped along the grid starting at node 0. When
/// `previous` is given, the whole phase array is shifted by the multiple of
/// `2π` that keeps node 0 closest to its previous value.
pub fn decompose(
    state: &State,
    grid: &PeriodicGrid,
    pw: &PlaneWave,
    pm: &PhaseModulation,
    previous: Option<&PolarField>,
) -> Result<PolarField> {
    state.check_grid(grid)?;
    let n = grid.n();
    let t = state.t;

    let mut q = Vec::with_capacity(n);
    for (j, &u) in state.u.iter().enumerate() {
        let ratio = u.norm() / pw.a;
        if !(ratio >= COLLAPSE_RATIO) {
            return Err(Error::AmplitudeCollapse { index: j, t, ratio });
        }
        let x = grid.x(j);
        q.push(u * Complex64::from_polar(1.0 / pw.a, -(wave_phase(grid, pw.k, j) + pw.omega * t - pm.theta(x))));
    }

    let rho: Vec<f64> = state.u.iter().map(|u| (u.norm() / pw.a).ln()).collect();

    let mut theta = Vec::with_capacity(n);
    theta.push(q[0].arg());
    for j in 1..n {
        let step = (q[j] * q[j - 1].conj()).arg();
        theta.push(theta[j - 1] + step);
    }
    let closing = theta[n - 1] + (q[0] * q[n - 1].conj()).arg() - theta[0];
    let winding = (closing / TAU).round() as i64;
    if winding != 0 {
        return Err(Error::PhaseWinding { winding, t });
    }
    if let Some(prev) = previous {
        let shift = TAU * ((prev.theta[0] - theta[0]) / TAU).round();
        if shift != 0.0 {
            theta.iter_mut().for_each(|v| *v += shift);
        }
    }

    let ux = grid.spectral_derivative(&state.u)?;
    let mut rho_x = Vec::with_capacity(n);
    let mut theta_x = Vec::with_capacity(n);
    let mut rho_t = Vec::with_capacity(n);
    let mut theta_t = Vec::with_capacity(n);
    for j in 0..n {
        let x = grid.x(j);
        let r = ux[j] / state.u[j];
        rho_x.push(r.re);
        theta_x.push(r.im - pw.k + pm.theta_prime(x));
        let s = state.ut[j] / state.u[j];
        rho_t.push(s.re);
        theta_t.push(s.im - pw.omega);
    }

    Ok(PolarField { t, rho, theta, rho_x, theta_x, rho_t, theta_t })
}

/// Reassembles `u` from a polar field, the inverse of [`decompose`].
pub fn recompose(pf: &PolarField, grid: &PeriodicGrid, pw: &PlaneWave, pm: &PhaseModulation) -> Vec<Complex64> {
    (0..grid.n())
        .map(|j| {
            let x = grid.x(j);
            Complex64::from_polar(
                pw.a * pf.rho[j].exp(),
                wave_phase(grid, pw.k, j) + pw.omega * pf.t - pm.theta(x) + pf.theta[j],
            )
        })
        .collect()
}

/// Spatial window `[center − radius, center + radius]`, taken periodically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub center: f64,
    pub radius: f64,
}

impl Window {
    pub fn new(center: f64, radius: f64, grid: &PeriodicGrid) -> Result<Self> {
        if !(radius >= 0.0 && radius <= 0.5 * grid.length()) {
            return Err(Error::InvalidParameter {
                name: "window_radius",
                reason: format!("must lie in [0, {}], got {radius}", 0.5 * grid.length()),
            });
        }
        if !center.is_finite() {
            return Err(Error::InvalidParameter { name: "window_center", reason: "must be finite".into() });
        }
        Ok(Self { center, radius })
    }

    /// Grid node closest to the window center.
    pub fn center_node(&self, grid: &PeriodicGrid) -> usize {
        let j = (self.center / grid.dx()).round() as i64;
        j.rem_euclid(grid.n() as i64) as usize
    }

    pub fn contains(&self, x: f64, length: f64) -> bool {
        let d = (x - self.center).rem_euclid(length);
        let d = d.min(length - d);
        d <= self.radius * (1.0 + 1e-12)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarDiagnostics {
    pub t: f64,
    pub rho_l2: f64,
    pub rho_x_l2: f64,
    pub rho_linf: f64,
    pub theta_l2: f64,
    pub theta_x_l2: f64,
    pub theta_linf: f64,
    pub rho_t_l2: f64,
    pub theta_t_l2: f64,
    pub orbital_dist: f64,
    pub gamma: f64,
}

/// Reduces an angle to `(−π, π]`.
pub fn wrap_angle(phi: f64) -> f64 {
    let r = phi.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Norm bundle of a polar field plus the windowed orbital distance.
///
/// The phase shift `γ` is `θ − θ∞` read at the node nearest the window
/// center. The orbital distance is the discrete `H¹` norm over the window of
/// `u − a e^{ikx + iωt + iγ}`.
pub fn diagnostics(
    pf: &PolarField,
    grid: &PeriodicGrid,
    pw: &PlaneWave,
    pm: &PhaseModulation,
    window: &Window,
) -> PolarDiagnostics {
    let jc = window.center_node(grid);
    let psi = |j: usize| pf.theta[j] - pm.theta(grid.x(j));
    let gamma = wrap_angle(psi(jc));
    let e_gamma = Complex64::from_polar(1.0, gamma);
    let ik = Complex64::new(0.0, pw.k);

    // With u = a e^{iφ} e^{ρ + iψ}: d = a e^{iφ} D and d_x = a e^{iφ}(ik D + D_x)
    // where D = e^{ρ + iψ} − e^{iγ}.
    let mut acc = 0.0;
    for j in 0..grid.n() {
        if !window.contains(grid.x(j), grid.length()) {
            continue;
        }
        let w = Complex64::from_polar(pf.rho[j].exp(), psi(j));
        let big_d = w - e_gamma;
        let psi_x = pf.theta_x[j] - pm.theta_prime(grid.x(j));
        let big_dx = w * Complex64::new(pf.rho_x[j], psi_x);
        acc += big_d.norm_sqr() + (ik * big_d + big_dx).norm_sqr();
    }
    let orbital_dist = pw.a * (grid.dx() * acc).sqrt();

    PolarDiagnostics {
        t: pf.t,
        rho_l2: grid.l2_norm_real(&pf.rho),
        rho_x_l2: grid.l2_norm_real(&pf.rho_x),
        rho_linf: linf_norm_real(&pf.rho),
        theta_l2: grid.l2_norm_real(&pf.theta),
        theta_x_l2: grid.l2_norm_real(&pf.theta_x),
        theta_linf: linf_norm_real(&pf.theta),
        rho_t_l2: grid.l2_norm_real(&pf.rho_t),
        theta_t_l2: grid.l2_norm_real(&pf.theta_t),
        orbital_dist,
        gamma,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub samples: usize,
}

/// Minimum number of usable samples for [`loglog_fit`].
pub const MIN_FIT_SAMPLES: usize = 8;

/// Least-squares line through `(ln t, ln value)` over the trailing
/// `window_fraction` of the series. Samples with `t ≤ 0` are skipped since
/// their logarithm is undefined.
pub fn loglog_fit(series: &[(f64, f64)], window_fraction: f64) -> Result<PowerLawFit> {
    if !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "window_fraction",
            reason: format!("must lie in (0, 1], got {window_fraction}"),
        });
    }
    let take = ((window_fraction * series.len() as f64).ceil() as usize).min(series.len());
    let start = series.len() - take;
    let mut points = Vec::with_capacity(take);
    for (offset, &(t, v)) in series[start..].iter().enumerate() {
        if !(t > 0.0) {
            continue;
        }
        if !(v > 0.0) {
            return Err(Error::NonPositiveValue { index: start + offset, value: v });
        }
        points.push((t.ln(), v.ln()));
    }
    if points.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientData { needed: MIN_FIT_SAMPLES, found: points.len() });
    }

    let m = points.len() as f64;
    let xbar = points.iter().map(|p| p.0).sum::<f64>() / m;
    let ybar = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - xbar).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - xbar) * (p.1 - ybar)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData { needed: 2, found: 1 });
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let ss_tot: f64 = points.iter().map(|p| (p.1 - ybar).powi(2)).sum();
    let ss_res: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    // a flat series leaves only rounding noise in SS_tot
    let flat = ss_tot <= 1e-24 * points.iter().map(|p| p.1 * p.1).sum::<f64>();
    let r_squared = if ss_tot == 0.0 || flat { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(PowerLawFit { slope, intercept, r_squared, samples: points.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::plane_wave_samples;
    use crate::model::{close_dispersion, Nonlinearity};
    use proptest::prelude::*;

    fn setup() -> (PeriodicGrid, PlaneWave) {
        let f = Nonlinearity::defocusing_cubic();
        let grid = PeriodicGrid::new(20.0, 256).unwrap();
        let pw = close_dispersion(1.3, TAU * 2.0 / 20.0, &f).unwrap();
        (grid, pw)
    }

    fn state_from(u: Vec<Complex64>, ut: Vec<Complex64>, t: f64) -> State {
        State::new(u, ut, t).unwrap()
    }

    #[test]
    fn constant_offset_is_recovered() {
        let (grid, pw) = setup();
        let t = 0.7;
        let shift = Complex64::new(0.1, 0.2).exp();
        let u: Vec<_> = plane_wave_samples(&grid, &pw, &PhaseModulation::Zero, t).iter().map(|v| v * shift).collect();
        let ut: Vec<_> = u.iter().map(|v| v * Complex64::new(0.0, pw.omega)).collect();
        let pf = decompose(&state_from(u, ut, t), &grid, &pw, &PhaseModulation::Zero, None).unwrap();
        assert!(pf.rho.iter().all(|r| (r - 0.1).abs() < 1e-12));
        assert!(pf.theta.iter().all(|r| (r - 0.2).abs() < 1e-12));
        assert!(pf.rho_t.iter().chain(&pf.theta_t).all(|r| r.abs() < 1e-12));
        assert!(pf.rho_x.iter().chain(&pf.theta_x).all(|r| r.abs() < 1e-10));

        let window = Window::new(10.0, 5.0, &grid).unwrap();
        let d = diagnostics(&pf, &grid, &pw, &PhaseModulation::Zero, &window);
        assert!((d.gamma - 0.2).abs() < 1e-12);
    }

    #[test]
    fn constant_phase_is_absorbed_by_gamma() {
        let (grid, pw) = setup();
        let shift = Complex64::from_polar(1.0, 0.2);
        let u: Vec<_> = plane_wave_samples(&grid, &pw, &PhaseModulation::Zero, 0.4).iter().map(|v| v * shift).collect();
        let ut: Vec<_> = u.iter().map(|v| v * Complex64::new(0.0, pw.omega)).collect();
        let pf = decompose(&state_from(u, ut, 0.4), &grid, &pw, &PhaseModulation::Zero, None).unwrap();
        let d = diagnostics(&pf, &grid, &pw, &PhaseModulation::Zero, &Window::new(10.0, 5.0, &grid).unwrap());
        assert!((d.gamma - 0.2).abs() < 1e-12);
        assert!(d.orbital_dist < 1e-9, "{}", d.orbital_dist);
        assert!(d.rho_l2 < 1e-12);
    }

    #[test]
    fn unperturbed_wave_has_zero_diagnostics() {
        let (grid, pw) = setup();
        let pm = PhaseModulation::TanhFront { x_minus: 0.0, x_plus: 0.4, k: 1.0 };
        let u = plane_wave_samples(&grid, &pw, &pm, 0.0);
        let ut: Vec<_> = u.iter().map(|v| v * Complex64::new(0.0, pw.omega)).collect();
        let pf = decompose(&state_from(u, ut, 0.0), &grid, &pw, &pm, None).unwrap();
        assert!(pf.rho.iter().chain(&pf.theta).all(|r| r.abs() < 1e-12));
        let d = diagnostics(&pf, &grid, &pw, &pm, &Window::new(10.0, 5.0, &grid).unwrap());
        assert!(d.rho_l2 < 1e-12 && d.theta_l2 < 1e-12 && d.rho_t_l2 < 1e-12 && d.theta_t_l2 < 1e-12);
    }

    #[test]
    fn growth_rates_from_closed_form() {
        let (grid, pw) = setup();
        let (alpha, beta) = (0.3, -0.45);
        let t = 1.1;
        let growth = Complex64::new(alpha, beta);
        let u: Vec<_> =
            plane_wave_samples(&grid, &pw, &PhaseModulation::Zero, t).iter().map(|v| v * (growth * t).exp()).collect();
        let ut: Vec<_> = u.iter().map(|v| v * (Complex64::new(0.0, pw.omega) + growth)).collect();
        let pf = decompose(&state_from(u, ut, t), &grid, &pw, &PhaseModulation::Zero, None).unwrap();
        assert!(pf.rho_t.iter().all(|r| (r - alpha).abs() < 1e-12));
        assert!(pf.theta_t.iter().all(|r| (r - beta).abs() < 1e-12));
    }

    #[test]
    fn collapse_and_winding_are_errors() {
        let (grid, pw) = setup();
        let mut u = plane_wave_samples(&grid, &pw, &PhaseModulation::Zero, 0.0);
        u[5] *= 1e-9;
        let ut = u.clone();
        assert!(matches!(
            decompose(&state_from(u, ut, 0.0), &grid, &pw, &PhaseModulation::Zero, None),
            Err(Error::AmplitudeCollapse { index: 5, .. })
        ));

        let wound: Vec<_> =
            (0..grid.n()).map(|j| Complex64::from_polar(pw.a, (pw.k + TAU / grid.length()) * grid.x(j))).collect();
        let ut = wound.clone();
        assert!(matches!(
            decompose(&state_from(wound, ut, 0.0), &grid, &pw, &PhaseModulation::Zero, None),
            Err(Error::PhaseWinding { winding: 1, .. })
        ));
    }

    #[test]
    fn temporal_anchor_follows_previous_sample() {
        let (grid, pw) = setup();
        let shift = Complex64::from_polar(1.0, 3.0);
        let u: Vec<_> = plane_wave_samples(&grid, &pw, &PhaseModulation::Zero, 0.0).iter().map(|v| v * shift).collect();
        let ut = u.clone();
        let state = state_from(u, ut, 0.0);
        let mut prev = decompose(&state, &grid, &pw, &PhaseModulation::Zero, None).unwrap();
        prev.theta.iter_mut().for_each(|v| *v += TAU * 2.0 + 0.5);
        let pf = decompose(&state, &grid, &pw, &PhaseModulation::Zero, Some(&prev)).unwrap();
        assert!((pf.theta[0] - (3.0 + 2.0 * TAU)).abs() < 1e-12);
    }

    #[test]
    fn window_validation_and_membership() {
        let (grid, _) = setup();
        assert!(Window::new(10.0, 10.5, &grid).is_err());
        let w = Window::new(1.0, 2.0, &grid).unwrap();
        assert!(w.contains(19.5, 20.0));
        assert!(!w.contains(3.5, 20.0));
        assert_eq!(Window::new(19.99, 1.0, &grid).unwrap().center_node(&grid), 0);
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(7.0) - (7.0 - TAU)).abs() < 1e-15);
    }

    #[test]
    fn fit_exact_power_law() {
        let series: Vec<_> = (1..=100)
            .map(|i| {
                let t = i as f64 * 0.1;
                (t, 3.0 * t.sqrt())
            })
            .collect();
        let fit = loglog_fit(&series, 1.0).unwrap();
        assert!((fit.slope - 0.5).abs() < 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_constant_series() {
        let series: Vec<_> = (1..=40).map(|i| (i as f64, 2.5)).collect();
        let fit = loglog_fit(&series, 0.25).unwrap();
        assert!(fit.slope.abs() < 1e-12);
        assert_eq!(fit.samples, 10);
        assert_eq!(fit.r_squared, 1.0);
    }

    #[test]
    fn fit_errors() {
        let short: Vec<_> = (1..=7).map(|i| (i as f64, 1.0)).collect();
        assert!(matches!(loglog_fit(&short, 1.0), Err(Error::InsufficientData { .. })));
        let mut bad: Vec<_> = (1..=20).map(|i| (i as f64, 1.0)).collect();
        bad[18].1 = 0.0;
        assert!(matches!(loglog_fit(&bad, 0.5), Err(Error::NonPositiveValue { index: 18, .. })));
        // the t = 0 sample is ignored rather than rejected
        let with_origin: Vec<_> = (0..=10).map(|i| (i as f64, (i as f64).max(1.0))).collect();
        assert_eq!(loglog_fit(&with_origin, 1.0).unwrap().samples, 10);
        assert!(loglog_fit(&with_origin, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_and_gauge_equivariance(
            amp in prop::collection::vec((-0.3f64..0.3, -0.3f64..0.3), 4),
            phi0 in -3.0f64..3.0,
            t in 0.0f64..2.0,
        ) {
            let (grid, pw) = setup();
            let pm = PhaseModulation::Zero;
            let base = plane_wave_samples(&grid, &pw, &pm, t);
            let u: Vec<_> = base.iter().enumerate().map(|(j, b)| {
                let x = grid.x(j);
                let bump: Complex64 = amp.iter().enumerate()
                    .map(|(m, &(re, im))| Complex64::new(re, im) * (TAU * (m + 1) as f64 * x / grid.length()).sin())
                    .sum();
                b * bump.exp()
            }).collect();
            let ut: Vec<_> = u.iter().map(|v| v * Complex64::new(0.2, pw.omega + 0.1)).collect();
            let state = State::new(u.clone(), ut.clone(), t).unwrap();
            let pf = decompose(&state, &grid, &pw, &pm, None).unwrap();
            let back = recompose(&pf, &grid, &pw, &pm);
            for (a, b) in back.iter().zip(&u) {
                prop_assert!((a - b).norm() <= 1e-10 * b.norm());
            }

            let rot = Complex64::from_polar(1.0, phi0);
            let rotated = State::new(
                u.iter().map(|v| v * rot).collect(),
                ut.iter().map(|v| v * rot).collect(),
                t,
            ).unwrap();
            let pr = decompose(&rotated, &grid, &pw, &pm, None).unwrap();
            for j in 0..grid.n() {
                prop_assert!((pr.rho[j] - pf.rho[j]).abs() < 1e-10);
                prop_assert!(wrap_angle(pr.theta[j] - pf.theta[j] - phi0).abs() < 1e-10);
                prop_assert!((pr.rho_x[j] - pf.rho_x[j]).abs() < 1e-10);
                prop_assert!((pr.theta_x[j] - pf.theta_x[j]).abs() < 1e-10);
                prop_assert!((pr.rho_t[j] - pf.rho_t[j]).abs() < 1e-10);
                prop_assert!((pr.theta_t[j] - pf.theta_t[j]).abs() < 1e-10);
            }
            let window = Window::new(10.0, 5.0, &grid).unwrap();
            let d0 = diagnostics(&pf, &grid, &pw, &pm, &window);
            let d1 = diagnostics(&pr, &grid, &pw, &pm, &window);
            prop_assert!((d0.orbital_dist - d1.orbital_dist).abs() < 1e-10);
        }
    }
}
