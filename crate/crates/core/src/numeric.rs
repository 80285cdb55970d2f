//! Small numerical helpers: compensated summation, factorial tables, grids.

/// Neumaier-compensated accumulator. Tracks the running rounding error of a
/// plain sum so that long tails of tiny terms are not swallowed by a large head.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Compensated sum of a slice.
pub fn compensated_sum(values: &[f64]) -> f64 {
    let mut acc = CompensatedSum::new();
    for &v in values {
        acc.add(v);
    }
    acc.total()
}

/// Binomial coefficient as f64, exact while representable.
pub fn binomial(n: usize, mut k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    k = k.min(n - k);
    let mut result = 1.0f64;
    for i in 1..=k {
        result = result * ((n - k + i) as f64) / (i as f64);
    }
    result
}

/// Table of ln(k!) for k in 0..=n.
pub fn ln_factorial_table(n: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(n + 1);
    table.push(0.0);
    let mut acc = 0.0f64;
    for k in 1..=n {
        acc += (k as f64).ln();
        table.push(acc);
    }
    table
}

/// `points` log-spaced values over [min, max], endpoints included.
pub fn log_spaced_grid(min: f64, max: f64, points: usize) -> Vec<f64> {
    assert!(min > 0.0 && max > min && points >= 2);
    let (lo, hi) = (min.ln(), max.ln());
    let step = (hi - lo) / (points - 1) as f64;
    (0..points)
        .map(|i| {
            if i == points - 1 {
                max
            } else {
                (lo + step * i as f64).exp()
            }
        })
        .collect()
}

/// Value held as `mantissa * 2^(512 * exponent)` so products of many factors in
/// [0, 1] can be accumulated far below the f64 underflow threshold.
///
/// Mantissas are kept in [1, 2^512) (or exactly 0), which leaves headroom for a
/// multiply-accumulate before renormalizing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    pub mantissa: f64,
    pub exponent: i64,
}

/// 2^512 and 2^-512, the renormalization chunk.
const CHUNK: f64 = 1.3407807929942597e154;
const CHUNK_INV: f64 = 7.458340731200207e-155;

impl Scaled {
    pub const ZERO: Scaled = Scaled {
        mantissa: 0.0,
        exponent: 0,
    };
    pub const ONE: Scaled = Scaled {
        mantissa: 1.0,
        exponent: 0,
    };

    fn normalize(&mut self) {
        if self.mantissa == 0.0 {
            self.exponent = 0;
            return;
        }
        while self.mantissa >= CHUNK {
            self.mantissa *= CHUNK_INV;
            self.exponent += 1;
        }
        while self.mantissa < 1.0 {
            self.mantissa *= CHUNK;
            self.exponent -= 1;
        }
    }

    /// self += factor * other, with factor a plain non-negative f64.
    ///
    /// Terms smaller than ~2^-1024 relative to self are dropped; they are far
    /// below any tolerance this crate works to.
    pub fn add_scaled(&mut self, factor: f64, other: Scaled) {
        if other.mantissa == 0.0 || factor == 0.0 {
            return;
        }
        if self.mantissa == 0.0 {
            self.mantissa = factor * other.mantissa;
            self.exponent = other.exponent;
            self.normalize();
            return;
        }
        // Values only grow during accumulation and chi_k <= chi_{k-1}, so
        // other.exponent >= self.exponent holds for the DP recurrence.
        let diff = other.exponent - self.exponent;
        if diff == 0 {
            self.mantissa += factor * other.mantissa;
        } else if diff == 1 {
            self.mantissa = self.mantissa * CHUNK_INV + factor * other.mantissa;
            self.exponent = other.exponent;
        } else if diff >= 2 {
            self.mantissa = factor * other.mantissa;
            self.exponent = other.exponent;
        } else {
            // diff < 0: other is negligible relative to self.
            if diff == -1 {
                self.mantissa += factor * other.mantissa * CHUNK_INV;
            }
        }
        self.normalize();
    }

    /// Natural log of the held value; -inf for zero.
    pub fn ln(&self) -> f64 {
        if self.mantissa == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.mantissa.ln() + (self.exponent as f64) * 512.0 * std::f64::consts::LN_2
        }
    }

    /// Collapse to f64 (0.0 when far below the underflow threshold).
    pub fn to_f64(&self) -> f64 {
        if self.mantissa == 0.0 || self.exponent < -3 {
            return 0.0;
        }
        match self.exponent {
            0 => self.mantissa,
            e if e > 0 => f64::INFINITY,
            -1 => self.mantissa * CHUNK_INV,
            -2 => self.mantissa * CHUNK_INV * CHUNK_INV,
            _ => self.mantissa * CHUNK_INV * CHUNK_INV * CHUNK_INV,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_tiny_tail() {
        let mut acc = CompensatedSum::new();
        acc.add(1.0);
        for _ in 0..1000 {
            acc.add(1e-18);
        }
        assert!((acc.total() - (1.0 + 1e-15)).abs() < 1e-19);
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(8, 4), 70.0);
        assert_eq!(binomial(5, 0), 1.0);
        assert_eq!(binomial(5, 6), 0.0);
        assert_eq!(binomial(365, 2), 66430.0);
    }

    #[test]
    fn ln_factorial_matches_direct() {
        let table = ln_factorial_table(20);
        let direct: f64 = (1..=20).map(|k| (k as f64).ln()).sum();
        assert!((table[20] - direct).abs() < 1e-12);
        assert_eq!(table[0], 0.0);
        assert_eq!(table[1], 0.0);
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_spaced_grid(1e-9, 1.0, 200);
        assert_eq!(g.len(), 200);
        assert_eq!(g[0], 1e-9);
        assert_eq!(g[199], 1.0);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn scaled_tracks_deep_underflow() {
        // 0.5^3000 is far below f64 range; the log must stay exact.
        let mut x = Scaled::ONE;
        for _ in 0..3000 {
            let prev = x;
            x = Scaled::ZERO;
            x.add_scaled(0.5, prev);
        }
        let expected = 3000.0 * 0.5f64.ln();
        assert!((x.ln() - expected).abs() < 1e-9 * expected.abs());
        assert_eq!(x.to_f64(), 0.0);
    }

    #[test]
    fn scaled_roundtrip_moderate() {
        let mut x = Scaled::ZERO;
        x.add_scaled(0.25, Scaled::ONE);
        x.add_scaled(0.5, Scaled::ONE);
        assert!((x.to_f64() - 0.75).abs() < 1e-16);
        assert!((x.ln() - 0.75f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn chunk_constants_consistent() {
        assert_eq!(CHUNK, 2f64.powi(512));
        assert_eq!(CHUNK_INV, 2f64.powi(-512));
        assert_eq!(CHUNK * CHUNK_INV, 1.0);
    }
}
