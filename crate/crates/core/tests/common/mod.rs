//! Shared fixtures for the integration and acceptance tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use kgwave::field::{PeriodicGrid, Perturbation};
use kgwave::model::{close_amplitude, close_dispersion, Nonlinearity, PhaseModulation, PlaneWave};
use kgwave::polar::Window;
use kgwave::solver::{Monitor, Problem};
use kgwave::spectral::ClosedForm;
use num_complex::Complex64;
use rand::Rng;

/// The reference experiment: f = 1 + ν, ω = 10, k = 2π on a 20-unit
/// periodic domain with a complex Gaussian kick centered at x = 10.
pub fn reference_problem(perturbed: bool) -> Problem {
    let f = Nonlinearity::defocusing_cubic();
    let pw = close_amplitude(2.0 * PI, 10.0, &f).unwrap();
    let grid = PeriodicGrid::new(20.0, 2048).unwrap();
    let perturbation = if perturbed {
        Perturbation { w0: Complex64::new(4.0, 4.0), v0: Complex64::new(40.0, 40.0), width: 25.0, center: 10.0 }
    } else {
        Perturbation::none(10.0)
    };
    Problem { grid, f, pw, pm: PhaseModulation::Zero, perturbation }
}

pub fn reference_monitor(problem: &Problem) -> Monitor {
    Monitor { window: Window::new(10.0, 5.0, &problem.grid).unwrap(), c: -problem.pw.k / problem.pw.omega }
}

/// A parameter set with a linear nonlinearity and its expected class.
#[derive(Debug, Clone)]
pub struct ParamSet {
    pub label: &'static str,
    pub f: Nonlinearity,
    pub pw: PlaneWave,
    pub expected: ClosedForm,
}

/// Builds `f(ν) = α + βν` with prescribed `F = f(a²)` and `G = a²f′(a²)`.
fn linear_set(label: &'static str, a_sq: f64, mass: f64, g: f64, k: f64, expected: ClosedForm) -> Option<ParamSet> {
    let beta = g / a_sq;
    let alpha = mass - beta * a_sq;
    let f = Nonlinearity::new(vec![alpha, beta]).ok()?;
    let pw = close_dispersion(a_sq.sqrt(), k, &f).ok()?;
    Some(ParamSet { label, f, pw, expected })
}

/// Randomized parameter sets whose defining inequalities hold with margin at
/// least 0.1, cycling through every classified region. Frequencies stay
/// moderate so that instabilities grow measurably on the scan grid.
pub fn random_sets<R: Rng>(rng: &mut R, count: usize) -> Vec<ParamSet> {
    let mut out = Vec::with_capacity(count);
    let mut i = 0usize;
    while out.len() < count {
        let a_sq = rng.gen_range(0.25..2.0);
        let set = match i % 5 {
            0 => {
                let mass = rng.gen_range(0.2..2.0);
                let g = rng.gen_range(0.1..3.0);
                linear_set("stable, positive mass", a_sq, mass, g, rng.gen_range(0.0..2.0), ClosedForm::Stable)
            }
            1 => {
                let mass = -rng.gen_range(0.2..1.5);
                let g = -2.0 * mass + rng.gen_range(0.1..2.0);
                let k = (-mass + rng.gen_range(0.2f64..2.0)).sqrt();
                linear_set("stable, tachyonic", a_sq, mass, g, k, ClosedForm::Stable)
            }
            2 => {
                let mass = rng.gen_range(0.2..2.0);
                let g = -rng.gen_range(0.1..(2.0 * mass - 0.1));
                linear_set("unstable, positive mass", a_sq, mass, g, rng.gen_range(0.3..2.0), ClosedForm::Unstable)
            }
            3 => {
                let mass = -rng.gen_range(0.2..1.5);
                let g = rng.gen_range(0.1..(-2.0 * mass - 0.1));
                let k = (-mass + rng.gen_range(0.2f64..2.0)).sqrt();
                linear_set("unstable, tachyonic", a_sq, mass, g, k, ClosedForm::Unstable)
            }
            _ => {
                // a² = 1/2 keeps f(a²) = 0 exact in floating point
                let g = rng.gen_range(0.5..2.0);
                linear_set("stable, zero mass", 0.5, 0.0, g, rng.gen_range(0.5..1.5), ClosedForm::Stable)
            }
        };
        if let Some(s) = set {
            out.push(s);
        }
        i += 1;
    }
    out
}

/// The focusing example `f = 1 − ν`, `a² = 1/4`, `k = 1`.
pub fn focusing_example() -> ParamSet {
    let f = Nonlinearity::focusing_cubic();
    let pw = close_dispersion(0.5, 1.0, &f).unwrap();
    ParamSet { label: "focusing cubic", f, pw, expected: ClosedForm::Unstable }
}

/// Defocusing cubic waves over a range of amplitudes and wave numbers.
pub fn defocusing_sets<R: Rng>(rng: &mut R, count: usize) -> Vec<ParamSet> {
    let f = Nonlinearity::defocusing_cubic();
    (0..count)
        .map(|_| {
            let pw = close_dispersion(rng.gen_range(0.1..3.0), rng.gen_range(-3.0..3.0), &f).unwrap();
            ParamSet { label: "defocusing cubic", f: f.clone(), pw, expected: ClosedForm::Stable }
        })
        .collect()
}
