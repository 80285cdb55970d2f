//! Schmidt-coefficient distributions, power sums, and the extremal
//! (uniform/peaked) constructions.
//!
//! A [`SchmidtDistribution`] holds the squared Schmidt coefficients of a
//! two-fermion wavefunction: a probability vector, stored sorted in
//! non-increasing order. All downstream quantities — power sums, purity,
//! normalization factors — are functions of this vector alone. Distributions
//! are immutable after construction; every transform returns a new object.

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use serde::Serialize;

/// Tolerance on |sum(lambda) - 1| accepted at construction.
pub const DEFAULT_NORM_TOL: f64 = 1e-12;

/// Tolerance for recognizing 1/P as an integer in [`min_schmidt_number`].
/// Floating purities such as 1/7 must not round the mode count up.
pub const CEIL_TOL: f64 = 1e-9;

/// Absolute slack allowed on the power-sum sandwich constraints.
pub const CONSTRAINT_TOL: f64 = 1e-12;

/// Cap on the mode count allocated by [`SchmidtDistribution::uniform_for_purity`].
pub const MAX_MODES: usize = 100_000_000;

/// Positive S·P - 1 below this is treated as an exact uniform point, so the
/// +/- radical vanishes identically and the two extremal branches coincide
/// bit-for-bit at P = 1/S.
const RADICAL_SNAP_TOL: f64 = 1e-12;

/// A normalized, canonically sorted vector of squared Schmidt coefficients.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchmidtDistribution {
    lambdas: Vec<f64>,
}

impl SchmidtDistribution {
    /// Validate and canonicalize a raw coefficient vector.
    ///
    /// Entries in [-norm_tol, 0) are clipped to zero; anything more negative is
    /// rejected. The sum must be 1 within `norm_tol`. Nothing is renormalized
    /// silently: use [`Self::truncate_below`] for explicit floor-and-renorm.
    pub fn with_tolerance(raw: &[f64], norm_tol: f64) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut lambdas = Vec::with_capacity(raw.len());
        for &v in raw {
            if !v.is_finite() {
                return Err(Error::NonFiniteCoefficient { value: v });
            }
            if v < -norm_tol {
                return Err(Error::NegativeCoefficient { value: v });
            }
            lambdas.push(v.max(0.0));
        }
        let sum = crate::numeric::compensated_sum(&lambdas);
        if (sum - 1.0).abs() > norm_tol {
            return Err(Error::NotNormalized { sum, tol: norm_tol });
        }
        lambdas.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
        Ok(Self { lambdas })
    }

    /// [`Self::with_tolerance`] at the default tolerance.
    pub fn new(raw: &[f64]) -> Result<Self> {
        Self::with_tolerance(raw, DEFAULT_NORM_TOL)
    }

    /// Exactly uniform distribution over `s` modes.
    pub fn uniform(s: usize) -> Self {
        assert!(s >= 1, "mode count must be positive");
        Self {
            lambdas: vec![1.0 / s as f64; s],
        }
    }

    /// The two-parameter extremal family: one distinguished coefficient, the
    /// remaining S-1 equal. The plus branch peaks the first coefficient, the
    /// minus branch depresses it.
    pub fn extremal(p: f64, s: usize, branch: ExtremalBranch) -> Result<Self> {
        assert!(s >= 1, "mode count must be positive");
        let radicand = extremal_radicand(p, s)?;
        let root = radicand.sqrt();
        let sf = s as f64;
        let lambda_1 = match branch {
            ExtremalBranch::Plus => (1.0 + root) / sf,
            ExtremalBranch::Minus => {
                if radicand > 1.0 + RADICAL_SNAP_TOL {
                    return Err(Error::MinusBranchInfeasible { p, s });
                }
                (1.0 - root.min(1.0)) / sf
            }
        };
        if s == 1 {
            return Ok(Self { lambdas: vec![1.0] });
        }
        let rest = (1.0 - lambda_1) / (sf - 1.0);
        let mut lambdas = Vec::with_capacity(s);
        match branch {
            ExtremalBranch::Plus => {
                lambdas.push(lambda_1);
                lambdas.resize(s, rest);
            }
            ExtremalBranch::Minus => {
                lambdas.resize(s - 1, rest);
                lambdas.push(lambda_1);
            }
        }
        Ok(Self { lambdas })
    }

    /// The minimum-mode extremal state for purity `p`: all L = ceil(1/p)
    /// coefficients as equal as the purity constraint allows, with the
    /// distinguished coefficient the smallest.
    pub fn uniform_for_purity(p: f64) -> Result<Self> {
        let l = min_schmidt_number(p);
        if l > MAX_MODES {
            return Err(Error::TooManyModes {
                p,
                l,
                max: MAX_MODES,
            });
        }
        Self::extremal(p, l, ExtremalBranch::Minus)
    }

    /// The peaked extremal state for purity `p` on `s >= ceil(1/p)` modes; the
    /// distinguished coefficient is the largest and tends to sqrt(p) as s grows.
    pub fn peaked(p: f64, s: usize) -> Result<Self> {
        Self::extremal(p, s, ExtremalBranch::Plus)
    }

    /// Crate-internal constructor for vectors already known to be normalized.
    /// Sorts into canonical order; validation is a debug assertion only.
    pub(crate) fn from_unsorted_unchecked(mut lambdas: Vec<f64>) -> Self {
        lambdas.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
        let out = Self { lambdas };
        debug_assert!(
            (crate::numeric::compensated_sum(&out.lambdas) - 1.0).abs() < 1e-9,
            "internal constructor received unnormalized data"
        );
        out
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// Number of stored coefficients (the Schmidt count S).
    pub fn s(&self) -> usize {
        self.lambdas.len()
    }

    /// Number of strictly positive coefficients; chi_n vanishes identically
    /// beyond this count.
    pub fn nonzero_modes(&self) -> usize {
        // canonical order puts zeros at the tail
        self.lambdas.partition_point(|&v| v > 0.0)
    }

    /// Drop coefficients below `floor` and renormalize the remainder.
    /// This is the only renormalizing entry point, and it is explicit.
    pub fn truncate_below(&self, floor: f64) -> Result<Self> {
        let kept: Vec<f64> = self
            .lambdas
            .iter()
            .copied()
            .filter(|&v| v >= floor)
            .collect();
        if kept.is_empty() {
            return Err(Error::EmptyInput);
        }
        let sum = crate::numeric::compensated_sum(&kept);
        Ok(Self {
            lambdas: kept.into_iter().map(|v| v / sum).collect(),
        })
    }

    /// Power sums M(1..m_max), summed in descending coefficient order with
    /// compensated accumulation so 1e6-mode tails survive.
    pub fn power_sums(&self, m_max: usize) -> PowerSums {
        assert!(m_max >= 1, "m_max must be at least 1");
        let mut values = Vec::with_capacity(m_max);
        let mut powers: Vec<f64> = self.lambdas.clone();
        for m in 1..=m_max {
            if m > 1 {
                for (pw, l) in powers.iter_mut().zip(&self.lambdas) {
                    *pw *= l;
                }
            }
            let mut acc = CompensatedSum::new();
            for &pw in &powers {
                acc.add(pw);
            }
            values.push(acc.total());
        }
        PowerSums { values }
    }

    /// Purity P = M(2), the second power sum.
    pub fn purity(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        for &l in &self.lambdas {
            acc.add(l * l);
        }
        acc.total()
    }

    /// Renyi entropy of order m >= 2: ln(M(m)) / (1 - m), non-negative.
    pub fn renyi_entropy(&self, m: usize) -> f64 {
        assert!(m >= 2, "Renyi order must be at least 2");
        let mm = self.power_sums(m).value(m);
        (mm.ln() / (1.0 - m as f64)).max(0.0)
    }
}

/// Which extremal branch of the one-peaked-coefficient family to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremalBranch {
    Plus,
    Minus,
}

/// Power sums M(1..m_max) of a distribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerSums {
    values: Vec<f64>,
}

impl PowerSums {
    /// Wrap externally supplied power sums, validating the type invariants:
    /// M(1) = 1, values in (0, 1], non-increasing, and the Jensen/Holder
    /// sandwich M(k-1)^((k-1)/(k-2)) <= M(k) <= M(k-1)^(k/(k-1)).
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput);
        }
        if (values[0] - 1.0).abs() > DEFAULT_NORM_TOL {
            return Err(Error::NotNormalized {
                sum: values[0],
                tol: DEFAULT_NORM_TOL,
            });
        }
        for (i, &m) in values.iter().enumerate() {
            if !(m > 0.0 && m <= 1.0 + CONSTRAINT_TOL) {
                return Err(Error::Infeasible {
                    detail: format!("M({}) = {m} outside (0, 1]", i + 1),
                });
            }
            if i > 0 && m > values[i - 1] + CONSTRAINT_TOL {
                return Err(Error::Infeasible {
                    detail: format!("M({}) increases over M({})", i + 1, i),
                });
            }
        }
        let ps = Self { values };
        if let Some((k, lo, hi, m)) = ps.sandwich_violation(CONSTRAINT_TOL) {
            return Err(Error::Infeasible {
                detail: format!("M({k}) = {m} outside the sandwich [{lo}, {hi}]"),
            });
        }
        Ok(ps)
    }

    pub fn m_max(&self) -> usize {
        self.values.len()
    }

    /// M(m), 1-based.
    pub fn value(&self, m: usize) -> f64 {
        self.values[m - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The purity M(2); requires m_max >= 2.
    pub fn purity(&self) -> f64 {
        self.value(2)
    }

    /// First sandwich constraint violated beyond `tol`, if any,
    /// as (k, lower, upper, M(k)).
    pub fn sandwich_violation(&self, tol: f64) -> Option<(usize, f64, f64, f64)> {
        for k in 3..=self.m_max() {
            let prev = self.value(k - 1);
            let kf = k as f64;
            let lo = prev.powf((kf - 1.0) / (kf - 2.0));
            let hi = prev.powf(kf / (kf - 1.0));
            let m = self.value(k);
            if m < lo - tol || m > hi + tol {
                return Some((k, lo, hi, m));
            }
        }
        None
    }
}

/// L = ceil(1/P), the smallest number of Schmidt modes compatible with
/// purity P. When 1/P sits within [`CEIL_TOL`] of an integer, that integer is
/// returned, guarding against floating quotients like 1/(1/7) = 7.000...001.
pub fn min_schmidt_number(p: f64) -> usize {
    assert!(p > 0.0 && p <= 1.0, "purity must lie in (0, 1]");
    let inv = 1.0 / p;
    let nearest = inv.round();
    let l = if (inv - nearest).abs() <= CEIL_TOL {
        nearest
    } else {
        inv.ceil()
    };
    (l as usize).max(1)
}

/// Shared radicand (S-1)(S·P-1) of the extremal family and the closed-form
/// ratios. Snaps to exactly zero at (and within tolerance of) the uniform
/// point P = 1/S, so callers on both branches saturate bit-identically there.
pub(crate) fn extremal_radicand(p: f64, s: usize) -> Result<f64> {
    assert!(p > 0.0 && p <= 1.0, "purity must lie in (0, 1]");
    let sf = s as f64;
    let t = sf * p - 1.0;
    if t <= RADICAL_SNAP_TOL {
        // Covers rounding noise at P = 1/S and the CEIL_TOL regime where
        // L = round(1/P) leaves L*P marginally below 1.
        if t >= -CEIL_TOL {
            return Ok(0.0);
        }
        return Err(Error::InfeasiblePurity { p, s });
    }
    Ok((sf - 1.0) * t)
}
