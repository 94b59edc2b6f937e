//! Simultaneous polynomial root finding.
//!
//! Aberth-Ehrlich iteration on the monic polynomial, followed by a Newton
//! polish of every root against the original coefficients. Exact zero roots
//! (vanishing trailing coefficients) are deflated before iterating so that
//! the gauge modes of the pencil come out as exact zeros.

use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_ITER: usize = 800;

/// Horner evaluation of `p(z) = Σ coeffs[j] z^j` and its derivative.
pub fn eval_with_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

pub fn eval(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// All roots of `Σ coeffs[j] z^j` (ascending powers), with multiplicity.
///
/// The highest-order coefficient must be nonzero.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let lead = *coeffs.last().ok_or(Error::DegenerateLeadingCoefficient)?;
    if lead == Complex64::new(0.0, 0.0) || !lead.is_finite() {
        return Err(Error::DegenerateLeadingCoefficient);
    }
    let zeros = coeffs.iter().take_while(|c| c.norm() == 0.0).count();
    let monic: Vec<Complex64> = coeffs[zeros..].iter().map(|&c| c / lead).collect();
    let degree = monic.len() - 1;

    let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
    if degree == 0 {
        return Ok(roots);
    }
    if degree == 1 {
        roots.push(-monic[0]);
        return Ok(roots);
    }

    let mut z = initial_guesses(&monic);
    aberth(&monic, &mut z);
    for r in z.iter_mut() {
        *r = polish(&monic, *r);
    }
    roots.extend(z);
    Ok(roots)
}

fn initial_guesses(monic: &[Complex64]) -> Vec<Complex64> {
    let degree = monic.len() - 1;
    // Fujiwara bound on the root moduli, halved for a tighter start.
    let bound = monic[..degree]
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let m = degree - j;
            let scale = if j == 0 { 0.5 } else { 1.0 };
            (scale * c.norm()).powf(1.0 / m as f64)
        })
        .fold(0.0_f64, f64::max);
    let radius = if bound > 0.0 { bound } else { 1.0 };
    (0..degree)
        .map(|i| {
            let angle = std::f64::consts::TAU * i as f64 / degree as f64 + 0.4;
            Complex64::from_polar(radius, angle)
        })
        .collect()
}

fn aberth(monic: &[Complex64], z: &mut [Complex64]) {
    let n = z.len();
    for _ in 0..MAX_ITER {
        let mut converged = true;
        for i in 0..n {
            let (p, dp) = eval_with_derivative(monic, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let newton = p / dp;
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let d = z[i] - z[j];
                    if d.norm() == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        d.inv()
                    }
                })
                .sum();
            let denom = Complex64::new(1.0, 0.0) - newton * repulsion;
            let step = if denom.is_finite() && denom.norm() > 0.0 && newton.is_finite() {
                newton / denom
            } else {
                continue;
            };
            if step.norm() > 4.0 * f64::EPSILON * z[i].norm().max(f64::MIN_POSITIVE) {
                converged = false;
            }
            z[i] -= step;
        }
        if converged {
            break;
        }
    }
}

fn polish(monic: &[Complex64], mut root: Complex64) -> Complex64 {
    let (mut p, _) = eval_with_derivative(monic, root);
    for _ in 0..3 {
        let (_, dp) = eval_with_derivative(monic, root);
        if dp.norm() == 0.0 {
            break;
        }
        let candidate = root - p / dp;
        let pc = eval(monic, candidate);
        if !(pc.norm() < p.norm()) {
            break;
        }
        root = candidate;
        p = pc;
    }
    root
}
