//! Spectral stability of plane waves through the quadratic operator pencil
//! `λ² + λJ_c + H_c` of the linearization in a frame moving with speed `c`.
//!
//! For each Fourier frequency `ℓ` the pencil reduces to 2×2 symbols whose
//! determinant is a quartic in `λ`. The wave is spectrally unstable when some
//! root has positive real part. Write `F = f(a²)` and `G = a²f′(a²)`. The
//! closed-form classification is stable if `G > 2 max(0, −F)`, and unstable
//! if `F > 0` with `−2F < G < 0` or `F < 0` with `0 < G < −2F`. Elsewhere it
//! is silent.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{regime, spectral_condition, Nonlinearity, PlaneWave, Regime};
use crate::roots::polynomial_roots;

/// `max Re λ` at or above which a scan reports instability.
pub const UNSTABLE_THRESHOLD: f64 = 1e-3;
/// `max Re λ` at or below which a scan may report stability.
pub const STABLE_THRESHOLD: f64 = 1e-8;

type Mat2 = [[Complex64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolMatrices {
    pub j: Mat2,
    pub h: Mat2,
    pub ell: f64,
    pub c: f64,
}

fn im(v: f64) -> Complex64 {
    Complex64::new(0.0, v)
}

fn re(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

/// Symbols `J_c(iℓ)` and `H_c(iℓ)` of the real-system linearization.
pub fn symbols(pw: &PlaneWave, f: &Nonlinearity, c: f64, ell: f64) -> SymbolMatrices {
    let g = pw.focusing_strength(f);
    let w = pw.omega;
    let s = (1.0 - c * c) * ell * ell;
    let off = 2.0 * (c * w + pw.k) * ell;
    SymbolMatrices {
        j: [[im(-2.0 * c * ell), re(-2.0 * w)], [re(2.0 * w), im(-2.0 * c * ell)]],
        h: [[re(s + 2.0 * g), im(off)], [im(-off), re(s)]],
        ell,
        c,
    }
}

/// `det(λ²I + λJ + H)`.
pub fn pencil_det(sym: &SymbolMatrices, lambda: Complex64) -> Complex64 {
    let l2 = lambda * lambda;
    let m = |a: usize, b: usize| {
        let diag = if a == b { l2 } else { Complex64::new(0.0, 0.0) };
        diag + lambda * sym.j[a][b] + sym.h[a][b]
    };
    m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0)
}

/// Coefficients of `det(λ²I + λJ + H)` in ascending powers of `λ`.
pub fn pencil_coefficients(sym: &SymbolMatrices) -> [Complex64; 5] {
    let (j, h) = (&sym.j, &sym.h);
    [
        h[0][0] * h[1][1] - h[0][1] * h[1][0],
        j[0][0] * h[1][1] + j[1][1] * h[0][0] - j[0][1] * h[1][0] - h[0][1] * j[1][0],
        h[0][0] + h[1][1] + j[0][0] * j[1][1] - j[0][1] * j[1][0],
        j[0][0] + j[1][1],
        re(1.0),
    ]
}

/// The four roots of a quartic given in ascending powers.
///
/// Uses Aberth iteration with Newton polishing; exact zero roots are
/// deflated first.
pub fn quartic_roots(coeffs: &[Complex64; 5]) -> Result<[Complex64; 4]> {
    let roots = polynomial_roots(coeffs)?;
    let mut out = [Complex64::new(0.0, 0.0); 4];
    out.copy_from_slice(&roots);
    Ok(out)
}

/// Coefficients of the real quartic `μ ↦ det(P₀(iμ))`, ascending.
pub fn real_quartic(pw: &PlaneWave, f: &Nonlinearity, ell: f64) -> [f64; 5] {
    let g = pw.focusing_strength(f);
    let (w, k) = (pw.omega, pw.k);
    let l2 = ell * ell;
    [l2 * l2 + 2.0 * g * l2 - 4.0 * k * k * l2, 8.0 * w * k * ell, -(2.0 * l2 + 2.0 * g + 4.0 * w * w), 0.0, 1.0]
}

/// Discriminant of `a μ⁴ + b μ³ + c μ² + d μ + e`.
pub fn quartic_discriminant(a: f64, b: f64, c: f64, d: f64, e: f64) -> f64 {
    256.0 * a.powi(3) * e.powi(3) - 192.0 * a * a * b * d * e * e - 128.0 * a * a * c * c * e * e
        + 144.0 * a * a * c * d * d * e
        - 27.0 * a * a * d.powi(4)
        + 144.0 * a * b * b * c * e * e
        - 6.0 * a * b * b * d * d * e
        - 80.0 * a * b * c * c * d * e
        + 18.0 * a * b * c * d.powi(3)
        + 16.0 * a * c.powi(4) * e
        - 4.0 * a * c.powi(3) * d * d
        - 27.0 * b.powi(4) * e * e
        + 18.0 * b.powi(3) * c * d * e
        - 4.0 * b.powi(3) * d.powi(3)
        - 4.0 * b * b * c.powi(3) * e
        + b * b * c * c * d * d
}

/// `Δ(ℓ)`, the discriminant of the real quartic in `μ`.
pub fn discriminant(pw: &PlaneWave, f: &Nonlinearity, ell: f64) -> f64 {
    let [e, d, c, b, a] = real_quartic(pw, f, ell);
    quartic_discriminant(a, b, c, d, e)
}

/// Closed form of `Δ″(0)`: `1024 G (2ω² + G)³ (2ω² − 2k² + G)`.
pub fn ddelta0_closed_form(pw: &PlaneWave, f: &Nonlinearity) -> f64 {
    let g = pw.focusing_strength(f);
    let w2 = pw.omega * pw.omega;
    1024.0 * g * (2.0 * w2 + g).powi(3) * (2.0 * w2 - 2.0 * pw.k * pw.k + g)
}

/// Smallest `ℓ > 0` on `(0, ell_max]` where `Δ` stops being negative,
/// located by a uniform scan followed by bisection. `None` if `Δ` is not
/// negative just above zero.
pub fn negative_discriminant_edge(pw: &PlaneWave, f: &Nonlinearity, ell_max: f64, n: usize) -> Option<f64> {
    let h = ell_max / n as f64;
    if !(discriminant(pw, f, 0.01 * h) < 0.0) {
        return None;
    }
    let mut lo = 0.01 * h;
    for i in 1..=n {
        let ell = i as f64 * h;
        if discriminant(pw, f, ell) >= 0.0 {
            let mut hi = ell;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if discriminant(pw, f, mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Some(0.5 * (lo + hi));
        }
        lo = ell;
    }
    Some(ell_max)
}

/// Smaller eigenvalue of a 2×2 Hermitian matrix.
///
/// The closed form `(p + r)/2 − √(((p − r)/2)² + |q|²)` cancels badly when
/// the matrix is nearly singular, so the product `det = λ_min λ_max` is used
/// whenever the larger eigenvalue is positive.
pub fn hermitian_min_eig(m: &Mat2) -> f64 {
    let (p, r) = (m[0][0].re, m[1][1].re);
    let q2 = m[0][1].norm_sqr();
    let half_sum = 0.5 * (p + r);
    let radius = (0.25 * (p - r) * (p - r) + q2).sqrt();
    let max = half_sum + radius;
    if max > 0.0 {
        (p * r - q2) / max
    } else {
        half_sum - radius
    }
}

/// Minimum over `ell_grid` of the smaller eigenvalue of `H_c(iℓ)`.
pub fn h_symbol_min_eig(pw: &PlaneWave, f: &Nonlinearity, c: f64, ell_grid: &[f64]) -> f64 {
    ell_grid.iter().map(|&ell| hermitian_min_eig(&symbols(pw, f, c, ell).h)).fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClosedForm {
    Stable,
    Unstable,
    Unclassified,
}

impl ClosedForm {
    pub fn name(self) -> &'static str {
        match self {
            ClosedForm::Stable => "stable",
            ClosedForm::Unstable => "unstable",
            ClosedForm::Unclassified => "unclassified",
        }
    }
}

/// Classification from the sign conditions on `F` and `G` alone.
pub fn closed_form_classification(pw: &PlaneWave, f: &Nonlinearity) -> ClosedForm {
    if spectral_condition(pw, f).satisfied {
        return ClosedForm::Stable;
    }
    let mass = pw.mass(f);
    let g = pw.focusing_strength(f);
    let unstable = match regime(pw, f) {
        Regime::PositiveMass => -2.0 * mass < g && g < 0.0,
        Regime::Tachyonic => 0.0 < g && g < -2.0 * mass,
        Regime::ZeroMass => false,
    };
    if unstable {
        ClosedForm::Unstable
    } else {
        ClosedForm::Unclassified
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumSample {
    pub ell: f64,
    pub roots: [Complex64; 4],
    pub max_re: f64,
    pub discriminant: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Stable,
    Unstable,
    Marginal,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Stable => "stable",
            Verdict::Unstable => "unstable",
            Verdict::Marginal => "marginal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityVerdict {
    pub verdict: Verdict,
    pub max_re: f64,
    /// Frequency attaining `max_re` when the verdict is unstable.
    pub witness_ell: Option<f64>,
    pub closed_form: ClosedForm,
    pub closed_form_agrees: bool,
    /// Largest `|ℓ|` of the unstable band around zero, if one was found.
    pub band_edge: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scan {
    pub samples: Vec<SpectrumSample>,
    pub verdict: StabilityVerdict,
}

/// Pencil roots and discriminant at one frequency.
pub fn spectrum_at(pw: &PlaneWave, f: &Nonlinearity, c: f64, ell: f64) -> Result<SpectrumSample> {
    let sym = symbols(pw, f, c, ell);
    let mut roots = quartic_roots(&pencil_coefficients(&sym))?;
    roots.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    let max_re = roots.iter().map(|r| r.re).fold(f64::NEG_INFINITY, f64::max);
    Ok(SpectrumSample { ell, roots, max_re, discriminant: discriminant(pw, f, ell) })
}

/// Uniform grid on `[−ell_max, ell_max]`, merged with an eightfold
/// refinement of `|ℓ| ≤ ell_max/16` where sideband instabilities live.
pub fn scan_grid(ell_max: f64, n_samples: usize) -> Result<Vec<f64>> {
    if !(ell_max > 0.0 && ell_max.is_finite()) {
        return Err(Error::InvalidParameter { name: "ell_max", reason: format!("must be positive, got {ell_max}") });
    }
    if n_samples < 64 {
        return Err(Error::InvalidParameter {
            name: "n_samples",
            reason: format!("must be at least 64, got {n_samples}"),
        });
    }
    let h = 2.0 * ell_max / (n_samples - 1) as f64;
    let mut grid: Vec<f64> = (0..n_samples).map(|i| -ell_max + i as f64 * h).collect();
    let inner = ell_max / 16.0;
    let fine = h / 8.0;
    let half = (inner / fine).floor() as i64;
    grid.extend((-half..=half).map(|i| i as f64 * fine));
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * ell_max);
    Ok(grid)
}

/// Default frequency range `4|k|`, or 4 for standing waves.
pub fn default_ell_max(pw: &PlaneWave) -> f64 {
    if pw.k == 0.0 {
        4.0
    } else {
        4.0 * pw.k.abs()
    }
}

pub const DEFAULT_SCAN_SAMPLES: usize = 512;

/// Scans the pencil spectrum over [`scan_grid`] in parallel and classifies.
pub fn scan(pw: &PlaneWave, f: &Nonlinearity, c: f64, ell_max: f64, n_samples: usize) -> Result<Scan> {
    let grid = scan_grid(ell_max, n_samples)?;
    scan_on(pw, f, c, &grid)
}

/// Scan over a caller-supplied frequency grid. Samples keep grid order.
pub fn scan_on(pw: &PlaneWave, f: &Nonlinearity, c: f64, ell_grid: &[f64]) -> Result<Scan> {
    let samples: Vec<SpectrumSample> =
        ell_grid.par_iter().map(|&ell| spectrum_at(pw, f, c, ell)).collect::<Result<_>>()?;
    let verdict = classify_samples(pw, f, &samples);
    Ok(Scan { samples, verdict })
}

fn classify_samples(pw: &PlaneWave, f: &Nonlinearity, samples: &[SpectrumSample]) -> StabilityVerdict {
    let closed_form = closed_form_classification(pw, f);
    let best = samples.iter().max_by(|a, b| a.max_re.total_cmp(&b.max_re));
    let max_re = best.map_or(f64::NEG_INFINITY, |s| s.max_re);
    let verdict = if max_re >= UNSTABLE_THRESHOLD {
        Verdict::Unstable
    } else if max_re <= STABLE_THRESHOLD && closed_form == ClosedForm::Stable {
        Verdict::Stable
    } else {
        Verdict::Marginal
    };
    let witness_ell = (verdict == Verdict::Unstable).then(|| best.map(|s| s.ell)).flatten();
    let closed_form_agrees = matches!(
        (verdict, closed_form),
        (Verdict::Stable, ClosedForm::Stable) | (Verdict::Unstable, ClosedForm::Unstable)
    );
    StabilityVerdict { verdict, max_re, witness_ell, closed_form, closed_form_agrees, band_edge: band_edge(samples) }
}

/// Extent of the unstable band touching `ℓ = 0`: starting from the sample
/// nearest zero on the positive side, the last frequency whose growth rate
/// still exceeds the stability threshold.
fn band_edge(samples: &[SpectrumSample]) -> Option<f64> {
    let mut positive: Vec<&SpectrumSample> = samples.iter().filter(|s| s.ell > 0.0).collect();
    positive.sort_by(|a, b| a.ell.total_cmp(&b.ell));
    let mut edge = None;
    for s in positive {
        if s.max_re > STABLE_THRESHOLD {
            edge = Some(s.ell);
        } else {
            break;
        }
    }
    edge
}
