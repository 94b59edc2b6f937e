//! Strang splitting for `u_tt − u_xx + f(|u|²)u = 0`.
//!
//! The equation is split as `u_tt = u_xx − m u` (solved exactly per Fourier
//! mode) plus the pointwise kick `u_tt = −(f(|u|²) − m) u`. With the default
//! mass `m = f(a²)` the background plane wave is an exact fixed point of
//! both substeps, so unperturbed runs do not drift.

use num_complex::Complex64;

use crate::energy::{relative_drift, EnergyFunctional, EnergyReport};
use crate::error::{Error, Result};
use crate::field::{build_initial, PeriodicGrid, Perturbation, State};
use crate::model::{Nonlinearity, PhaseModulation, PlaneWave};
use crate::polar::{decompose, diagnostics, PolarDiagnostics, PolarField, Window};

/// Largest `Ω̃·|dt|` tolerated by the hyperbolic branch of the linear flow.
pub const TACHYONIC_GUARD: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitConfig {
    pub dt: f64,
    pub t_end: f64,
    pub sample_every: usize,
    /// Splitting mass; `None` selects `f(a²)`.
    pub mass: Option<f64>,
}

impl SplitConfig {
    pub fn new(dt: f64, t_end: f64, sample_every: usize, mass: Option<f64>) -> Result<Self> {
        if !(dt > 0.0 && dt <= 0.1) {
            return Err(Error::InvalidParameter { name: "dt", reason: format!("must lie in (0, 0.1], got {dt}") });
        }
        if !(t_end >= 0.0 && t_end.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "t_end",
                reason: format!("must be non-negative, got {t_end}"),
            });
        }
        if sample_every == 0 {
            return Err(Error::InvalidParameter { name: "sample_every", reason: "must be at least 1".into() });
        }
        if let Some(m) = mass {
            if !m.is_finite() {
                return Err(Error::InvalidParameter { name: "mass", reason: "must be finite".into() });
            }
        }
        Ok(Self { dt, t_end, sample_every, mass })
    }

    /// Number of steps to reach `t_end`, rounding to the nearest step.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn mass_for(&self, pw: &PlaneWave, f: &Nonlinearity) -> f64 {
        self.mass.unwrap_or_else(|| pw.mass(f))
    }
}

/// Exact propagator of `u_tt = u_xx − m u` over one time step, stored as the
/// per-mode 2×2 matrices `[[p, q], [r, p]]` acting on `(û, û_t)`.
#[derive(Debug, Clone)]
pub struct LinearFlow {
    dt: f64,
    p: Vec<f64>,
    q: Vec<f64>,
    r: Vec<f64>,
}

impl LinearFlow {
    pub fn new(grid: &PeriodicGrid, mass: f64, dt: f64) -> Result<Self> {
        let n = grid.n();
        let (mut p, mut q, mut r) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        for &xi in grid.frequencies() {
            let omega_sq = xi * xi + mass;
            if omega_sq > 0.0 {
                let w = omega_sq.sqrt();
                let (s, c) = (w * dt).sin_cos();
                p.push(c);
                q.push(s / w);
                r.push(-w * s);
            } else if omega_sq < 0.0 {
                let w = (-omega_sq).sqrt();
                let growth = w * dt.abs();
                if growth > TACHYONIC_GUARD {
                    return Err(Error::TachyonicOverflow { growth });
                }
                let (s, c) = ((w * dt).sinh(), (w * dt).cosh());
                p.push(c);
                q.push(s / w);
                r.push(w * s);
            } else {
                p.push(1.0);
                q.push(dt);
                r.push(0.0);
            }
        }
        Ok(Self { dt, p, q, r })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Applies the flow in place and advances the clock.
    pub fn apply(&self, grid: &PeriodicGrid, state: &mut State) {
        grid.forward_in_place(&mut state.u);
        grid.forward_in_place(&mut state.ut);
        for m in 0..state.u.len() {
            let (u, v) = (state.u[m], state.ut[m]);
            state.u[m] = self.p[m] * u + self.q[m] * v;
            state.ut[m] = self.r[m] * u + self.p[m] * v;
        }
        grid.inverse_in_place(&mut state.u);
        grid.inverse_in_place(&mut state.ut);
        state.t += self.dt;
    }
}

pub fn linear_flow(state: &State, grid: &PeriodicGrid, mass: f64, dt: f64) -> Result<State> {
    state.check_grid(grid)?;
    let mut out = state.clone();
    LinearFlow::new(grid, mass, dt)?.apply(grid, &mut out);
    Ok(out)
}

/// `u_t ↦ u_t − dt (f(|u|²) − m) u` pointwise; the clock is not advanced.
pub fn nonlinear_kick(state: &mut State, f: &Nonlinearity, mass: f64, dt: f64) {
    for (u, ut) in state.u.iter().zip(state.ut.iter_mut()) {
        let g = f.eval(u.norm_sqr()) - mass;
        *ut -= dt * g * *u;
    }
}

/// Reusable Strang stepper for a fixed `(grid, f, m, dt)`.
#[derive(Debug, Clone)]
pub struct StrangStepper {
    flow: LinearFlow,
    f: Nonlinearity,
    mass: f64,
}

impl StrangStepper {
    pub fn new(grid: &PeriodicGrid, f: &Nonlinearity, mass: f64, dt: f64) -> Result<Self> {
        Ok(Self { flow: LinearFlow::new(grid, mass, dt)?, f: f.clone(), mass })
    }

    pub fn dt(&self) -> f64 {
        self.flow.dt()
    }

    /// One step `kick(dt/2) ∘ flow(dt) ∘ kick(dt/2)`.
    pub fn step(&self, grid: &PeriodicGrid, state: &mut State) -> Result<()> {
        let half = 0.5 * self.flow.dt();
        nonlinear_kick(state, &self.f, self.mass, half);
        self.flow.apply(grid, state);
        nonlinear_kick(state, &self.f, self.mass, half);
        if !state.is_finite() {
            return Err(Error::NonFinite { t: state.t });
        }
        Ok(())
    }
}

/// Single Strang step with an arbitrary (possibly negative) `dt`.
pub fn strang_step(state: &State, grid: &PeriodicGrid, f: &Nonlinearity, mass: f64, dt: f64) -> Result<State> {
    state.check_grid(grid)?;
    let mut out = state.clone();
    StrangStepper::new(grid, f, mass, dt)?.step(grid, &mut out)?;
    Ok(out)
}

/// Integrates `steps` Strang steps from `state`.
pub fn integrate(
    state: &State,
    grid: &PeriodicGrid,
    f: &Nonlinearity,
    mass: f64,
    dt: f64,
    steps: usize,
) -> Result<State> {
    state.check_grid(grid)?;
    let stepper = StrangStepper::new(grid, f, mass, dt)?;
    let mut out = state.clone();
    for _ in 0..steps {
        stepper.step(grid, &mut out)?;
    }
    Ok(out)
}

/// Background wave, modulation and perturbation of one experiment.
#[derive(Debug, Clone)]
pub struct Problem {
    pub grid: PeriodicGrid,
    pub f: Nonlinearity,
    pub pw: PlaneWave,
    pub pm: PhaseModulation,
    pub perturbation: Perturbation,
}

impl Problem {
    pub fn initial_state(&self) -> Result<State> {
        build_initial(&self.grid, &self.pw, &self.pm, &self.perturbation)
    }
}

/// Diagnostic settings applied at every sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monitor {
    pub window: Window,
    /// Co-moving speed of the energy functional.
    pub c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub step: usize,
    pub polar: PolarDiagnostics,
    pub energy: EnergyReport,
    pub energy_drift: f64,
}

/// A running simulation that exposes its state between samples.
#[derive(Debug)]
pub struct Simulation {
    problem: Problem,
    cfg: SplitConfig,
    monitor: Monitor,
    stepper: StrangStepper,
    energy: EnergyFunctional,
    state: State,
    step: usize,
    last_polar: Option<PolarField>,
    e0: Option<f64>,
}

impl Simulation {
    pub fn new(problem: Problem, cfg: SplitConfig, monitor: Monitor) -> Result<Self> {
        let state = problem.initial_state()?;
        let mass = cfg.mass_for(&problem.pw, &problem.f);
        let stepper = StrangStepper::new(&problem.grid, &problem.f, mass, cfg.dt)?;
        let energy = EnergyFunctional::new(&problem.pw, &problem.f, monitor.c)?;
        Ok(Self { problem, cfg, monitor, stepper, energy, state, step: 0, last_polar: None, e0: None })
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn config(&self) -> &SplitConfig {
        &self.cfg
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn total_steps(&self) -> usize {
        self.cfg.steps()
    }

    pub fn finished(&self) -> bool {
        self.step >= self.total_steps()
    }

    /// Advances by `count` steps, never past the final step.
    pub fn advance(&mut self, count: usize) -> Result<()> {
        let target = (self.step + count).min(self.total_steps());
        while self.step < target {
            self.stepper.step(&self.problem.grid, &mut self.state)?;
            self.step += 1;
            // keep the clock on the exact grid of step multiples
            self.state.t = self.step as f64 * self.cfg.dt;
        }
        Ok(())
    }

    /// Diagnostics of the current state.
    pub fn sample(&mut self) -> Result<Sample> {
        let p = &self.problem;
        let pf = decompose(&self.state, &p.grid, &p.pw, &p.pm, self.last_polar.as_ref())?;
        let polar = diagnostics(&pf, &p.grid, &p.pw, &p.pm, &self.monitor.window);
        let energy = self.energy.evaluate(&self.state, &p.grid)?;
        let e0 = *self.e0.get_or_insert(energy.total);
        self.last_polar = Some(pf);
        Ok(Sample { step: self.step, polar, energy, energy_drift: relative_drift(e0, energy.total) })
    }

    /// Runs to completion, handing every sample and the current state to
    /// `observer`. The initial state is always sampled.
    pub fn run_with<F>(&mut self, mut observer: F) -> Result<()>
    where
        F: FnMut(&Sample, &State) -> Result<()>,
    {
        if self.step == 0 {
            let s = self.sample()?;
            observer(&s, &self.state)?;
        }
        while !self.finished() {
            let next = ((self.step / self.cfg.sample_every) + 1) * self.cfg.sample_every;
            self.advance(next - self.step)?;
            if self.step.is_multiple_of(self.cfg.sample_every) || self.finished() {
                let s = self.sample()?;
                observer(&s, &self.state)?;
            }
        }
        Ok(())
    }
}

/// Runs a full simulation and collects the sample series.
pub fn simulate(problem: Problem, cfg: SplitConfig, monitor: Monitor) -> Result<Vec<Sample>> {
    let mut sim = Simulation::new(problem, cfg, monitor)?;
    let mut out = Vec::with_capacity(sim.total_steps() / cfg.sample_every + 2);
    sim.run_with(|s, _| {
        out.push(*s);
        Ok(())
    })?;
    Ok(out)
}

/// Discrete `l2` distance between two fields on the same grid.
pub fn field_distance(grid: &PeriodicGrid, a: &[Complex64], b: &[Complex64]) -> f64 {
    let diff: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    grid.l2_norm(&diff)
}
