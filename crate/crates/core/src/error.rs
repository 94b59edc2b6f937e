use thiserror::Error;

/// Errors raised by the toolkit. Variants carry enough context to tell the
/// user which quantity went wrong.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("nonlinearity needs at least one finite coefficient")]
    EmptyNonlinearity,

    #[error("amplitude must be positive and finite, got {0}")]
    InvalidAmplitude(f64),

    #[error("no admissible frequency: k^2 + f(a^2) = {radicand} (k = {k})")]
    NegativeRadicand { k: f64, radicand: f64 },

    #[error("dispersion relation violated: omega^2 = {omega_sq}, k^2 + f(a^2) = {expected}")]
    DispersionMismatch { omega_sq: f64, expected: f64 },

    #[error("wave number and frequency must not both vanish")]
    ZeroWave,

    #[error("no positive a^2 satisfies f(a^2) = {target}")]
    NoAmplitude { target: f64 },

    #[error("phase modulation not admissible: {0}")]
    InadmissibleModulation(String),

    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("array length {found} does not match grid size {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("wave number {k} is not commensurate with the domain length {length} (kL/2pi = {cycles})")]
    IncompatibleWaveNumber { k: f64, length: f64, cycles: f64 },

    #[error("non-finite field value at t = {t}")]
    NonFinite { t: f64 },

    #[error("tachyonic mode growth Omega*dt = {growth} exceeds the overflow guard")]
    TachyonicOverflow { growth: f64 },

    #[error("amplitude collapse at node {index}, t = {t}: |u|/a = {ratio}")]
    AmplitudeCollapse { index: usize, t: f64, ratio: f64 },

    #[error("phase winds {winding} times around the domain at t = {t}")]
    PhaseWinding { winding: i64, t: f64 },

    #[error("need at least {needed} usable samples, found {found}")]
    InsufficientData { needed: usize, found: usize },

    #[error("sample {index} has non-positive value {value}")]
    NonPositiveValue { index: usize, value: f64 },

    #[error("spectral condition violated (margin {margin})")]
    ConditionViolated { margin: f64 },

    #[error("degenerate wave: {0}")]
    DegenerateWave(&'static str),

    #[error("leading polynomial coefficient vanishes")]
    DegenerateLeadingCoefficient,
}

pub type Result<T> = std::result::Result<T, Error>;
