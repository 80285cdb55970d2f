//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by distribution construction, χ evaluation, bounds, and scans.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input distribution is empty")]
    EmptyInput,

    #[error("coefficient {value} is negative beyond tolerance")]
    NegativeCoefficient { value: f64 },

    #[error("coefficient {value} is not finite")]
    NonFiniteCoefficient { value: f64 },

    #[error("coefficients sum to {sum}, not 1 within tolerance {tol}")]
    NotNormalized { sum: f64, tol: f64 },

    #[error("no distribution with purity {p} fits in {s} Schmidt modes (S·P < 1)")]
    InfeasiblePurity { p: f64, s: usize },

    #[error("minus branch infeasible for purity {p} with {s} modes (lambda_1 would be negative)")]
    MinusBranchInfeasible { p: f64, s: usize },

    #[error("uniform distribution for purity {p} needs {l} modes, above the {max} cap")]
    TooManyModes { p: f64, l: usize, max: usize },

    #[error("need power sums up to order {needed}, only {available} available")]
    InsufficientPowerSums { needed: usize, available: usize },

    #[error("work guard exceeded: {detail}")]
    TooLarge { detail: String },

    #[error("chi_{n} vanishes; the ratio denominator is zero")]
    VanishingDenominator { n: usize },

    #[error("infeasible parameters: {detail}")]
    Infeasible { detail: String },

    #[error("stated purity {stated} differs from distribution purity {actual} by more than 1e-9")]
    PurityMismatch { stated: f64, actual: f64 },

    #[error("stated Schmidt count {stated} differs from distribution count {actual}")]
    SchmidtCountMismatch { stated: usize, actual: usize },

    #[error("n = {n} is not below the Schmidt count s = {s}")]
    InfeasibleN { n: usize, s: usize },

    #[error("triple indices ({j1}, {j2}, {j3}) are not strictly increasing within 0..{s}")]
    InvalidTriple { j1: usize, j2: usize, j3: usize, s: usize },

    #[error("need at least {needed} coefficients, distribution has {s}")]
    TooFewModes { s: usize, needed: usize },

    #[error("grid geometries differ; cannot merge")]
    GridGeometryMismatch,

    #[error("bound-chain violation at p={p}, n={n}, s={s}: ratio={ratio}, {detail}")]
    ChainViolation {
        p: f64,
        ratio: f64,
        n: usize,
        s: usize,
        detail: String,
    },

    #[error("line {line}: cannot parse '{token}' as a coefficient")]
    Parse { line: usize, token: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
