//! The normalization factor chi_N = N! e_N(lambda) and its ratio, by several
//! mutually checking routes.
//!
//! chi_N is the probability that N independent draws from the Schmidt
//! distribution are pairwise distinct (a birthday problem with non-uniform
//! probabilities). The workhorse here is [`chi_dp`], an all-positive prefix
//! recurrence on chi_k = k! e_k directly: every term is non-negative, so
//! nothing cancels, and the values stay in [0, 1] where f64 is comfortable.
//! The power-sum recursion ([`chi_newton`]) and the subset enumeration
//! ([`chi_bruteforce`]) are kept as independent implementations for
//! cross-validation, and [`chi_dc`] evaluates the same polynomial by blocked
//! divide and conquer for multicore runs on very wide spectra.

use crate::error::{Error, Result};
use crate::numeric::{binomial, ln_factorial_table, CompensatedSum, Scaled};
use crate::schmidt::{extremal_radicand, min_schmidt_number, PowerSums, SchmidtDistribution};
use rand::distributions::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Linear chi values below this trigger the scaled log-domain recomputation.
pub const UNDERFLOW_FLOOR: f64 = 1e-300;

/// Subset-enumeration work cap for [`chi_bruteforce`].
const BRUTE_FORCE_GUARD: f64 = 2e7;

/// Assignment-enumeration cap for [`birthday_probability`].
const ENUMERATE_GUARD: f64 = 1e8;

/// Which algorithm produced a [`NormalizationSequence`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ChiMethod {
    Dp,
    Newton,
    Brute,
}

/// chi_0..chi_n_max with parallel natural logs.
///
/// `log_chi` is finite wherever the true value is positive, even when the
/// linear entry has underflowed to zero; it is -inf exactly for the structural
/// zeros n > s.
#[derive(Debug, Clone, Serialize)]
pub struct NormalizationSequence {
    chi: Vec<f64>,
    log_chi: Vec<f64>,
    method: ChiMethod,
}

impl NormalizationSequence {
    fn from_linear(chi: Vec<f64>, method: ChiMethod) -> Self {
        let log_chi = chi.iter().map(|&c| c.ln()).collect();
        Self {
            chi,
            log_chi,
            method,
        }
    }

    pub fn n_max(&self) -> usize {
        self.chi.len() - 1
    }

    pub fn chi(&self) -> &[f64] {
        &self.chi
    }

    pub fn log_chi(&self) -> &[f64] {
        &self.log_chi
    }

    pub fn method(&self) -> ChiMethod {
        self.method
    }

    /// chi_n in the linear domain (0.0 when underflowed).
    pub fn value(&self, n: usize) -> f64 {
        self.chi[n]
    }

    /// ln(chi_n); -inf for exact zeros.
    pub fn log_value(&self, n: usize) -> f64 {
        self.log_chi[n]
    }

    /// chi_{n+1}/chi_n, evaluated in the log domain so it survives underflowed
    /// chi values. Requires n + 1 <= n_max.
    pub fn ratio(&self, n: usize) -> Result<f64> {
        assert!(n + 1 <= self.n_max(), "sequence too short for ratio at n");
        let den = self.log_chi[n];
        if den == f64::NEG_INFINITY {
            return Err(Error::VanishingDenominator { n });
        }
        let num = self.log_chi[n + 1];
        if num == f64::NEG_INFINITY {
            return Ok(0.0);
        }
        Ok((num - den).exp().min(1.0))
    }
}

/// chi_0..chi_n_max by the stable all-positive prefix recurrence
/// chi_k <- chi_k + k lambda_j chi_{k-1}, folding coefficients in one at a
/// time. Cost O(s n_max). Exact zeros for n beyond the nonzero mode count are
/// produced structurally by the loop bound, never left to underflow; values
/// that underflow the linear domain are recomputed with scaled accumulation so
/// the log entries stay accurate.
pub fn chi_dp(d: &SchmidtDistribution, n_max: usize) -> NormalizationSequence {
    let lambdas = d.lambdas();
    let nonzero = d.nonzero_modes();
    let reach = n_max.min(nonzero);

    let mut chi = vec![0.0f64; n_max + 1];
    chi[0] = 1.0;
    let mut folded = 0usize;
    for &lam in &lambdas[..nonzero] {
        folded += 1;
        let top = folded.min(n_max);
        for k in (1..=top).rev() {
            chi[k] += (k as f64) * lam * chi[k - 1];
        }
    }

    let underflowed = chi[..=reach].iter().any(|&c| c < UNDERFLOW_FLOOR);
    if !underflowed {
        return NormalizationSequence::from_linear(chi, ChiMethod::Dp);
    }

    // Scaled rerun: same recurrence on (mantissa, exponent) pairs.
    let mut scaled = vec![Scaled::ZERO; n_max + 1];
    scaled[0] = Scaled::ONE;
    let mut folded = 0usize;
    for &lam in &lambdas[..nonzero] {
        folded += 1;
        let top = folded.min(n_max);
        for k in (1..=top).rev() {
            let prev = scaled[k - 1];
            scaled[k].add_scaled((k as f64) * lam, prev);
        }
    }
    let chi = scaled.iter().map(Scaled::to_f64).collect();
    let log_chi = scaled.iter().map(Scaled::ln).collect();
    NormalizationSequence {
        chi,
        log_chi,
        method: ChiMethod::Dp,
    }
}

/// Leaf width for [`chi_dc`].
const DC_LEAF: usize = 512;

/// chi by divide and conquer over coefficient blocks: each block contributes
/// the chi sequence of its mass-normalized sub-distribution, and two blocks
/// combine by a binomially weighted convolution in which every term is a
/// probability in [0, 1]. Block pairs merge through `rayon::join`, so wide
/// spectra spread over all cores while the result stays independent of the
/// worker count. Agrees with [`chi_dp`] to better than 1e-10 relative.
pub fn chi_dc(d: &SchmidtDistribution, n_max: usize) -> NormalizationSequence {
    let lambdas = &d.lambdas()[..d.nonzero_modes()];
    let ln_fact = ln_factorial_table(n_max.max(1));
    let (mass, mut chi) = dc_recurse(lambdas, n_max, &ln_fact);
    // Undo the root normalization: chi_k(lambda) = mass^k chi'_k(lambda/mass).
    // mass is 1 up to the construction tolerance, but applying it keeps the
    // identity exact rather than approximately right.
    if mass > 0.0 && mass != 1.0 {
        let mut scale = 1.0f64;
        for (k, c) in chi.iter_mut().enumerate() {
            if k > 0 {
                scale *= mass;
            }
            *c *= scale;
        }
    }
    chi.resize(n_max + 1, 0.0);
    NormalizationSequence::from_linear(chi, ChiMethod::Dp)
}

/// Returns (block mass, chi'_0..chi'_deg of the block normalized by its mass).
fn dc_recurse(lambdas: &[f64], n_max: usize, ln_fact: &[f64]) -> (f64, Vec<f64>) {
    if lambdas.len() <= DC_LEAF {
        return dc_leaf(lambdas, n_max);
    }
    let mid = lambdas.len() / 2;
    let (left, right) = lambdas.split_at(mid);
    let ((mass_a, chi_a), (mass_b, chi_b)) = rayon::join(
        || dc_recurse(left, n_max, ln_fact),
        || dc_recurse(right, n_max, ln_fact),
    );
    dc_merge(mass_a, &chi_a, mass_b, &chi_b, n_max, ln_fact)
}

fn dc_leaf(lambdas: &[f64], n_max: usize) -> (f64, Vec<f64>) {
    let mass = crate::numeric::compensated_sum(lambdas);
    if mass <= 0.0 {
        return (0.0, vec![1.0]);
    }
    let deg = lambdas.len().min(n_max);
    let mut chi = vec![0.0f64; deg + 1];
    chi[0] = 1.0;
    let inv = 1.0 / mass;
    let mut folded = 0usize;
    for &lam in lambdas {
        let nl = lam * inv;
        folded += 1;
        let top = folded.min(deg);
        for k in (1..=top).rev() {
            chi[k] += (k as f64) * nl * chi[k - 1];
        }
    }
    (mass, chi)
}

/// Combine two normalized blocks: with w the mass fraction of block A,
/// chi'_k(AB) = sum_m Binom(k, m; w) chi'_m(A) chi'_{k-m}(B). Each binomial
/// weight is a pmf value, so all terms lie in [0, 1] and the sum cannot
/// overflow regardless of degree. Weight rows are generated outward from the
/// mode to keep the recurrence start well inside the representable range.
fn dc_merge(
    mass_a: f64,
    chi_a: &[f64],
    mass_b: f64,
    chi_b: &[f64],
    n_max: usize,
    ln_fact: &[f64],
) -> (f64, Vec<f64>) {
    let mass = mass_a + mass_b;
    if mass_a <= 0.0 {
        return (mass, chi_b.to_vec());
    }
    if mass_b <= 0.0 {
        return (mass, chi_a.to_vec());
    }
    let w = mass_a / mass;
    if w == 0.0 {
        return (mass, chi_b.to_vec());
    }
    if w == 1.0 {
        return (mass, chi_a.to_vec());
    }
    let deg_a = chi_a.len() - 1;
    let deg_b = chi_b.len() - 1;
    let deg = (deg_a + deg_b).min(n_max);
    let (ln_w, ln_1w) = (w.ln(), (1.0 - w).ln());
    let mut out = vec![0.0f64; deg + 1];
    out[0] = 1.0;

    let mut weights = vec![0.0f64; deg + 1];
    for (k, out_k) in out.iter_mut().enumerate().skip(1) {
        let lo = k.saturating_sub(deg_b);
        let hi = deg_a.min(k);
        // pmf row Binom(k, m; w) for m in lo..=hi, from the mode outward
        let mode = (((k + 1) as f64) * w).floor().max(lo as f64).min(hi as f64) as usize;
        let ln_mode = ln_fact[k] - ln_fact[mode] - ln_fact[k - mode]
            + (mode as f64) * ln_w
            + ((k - mode) as f64) * ln_1w;
        weights[mode] = ln_mode.exp();
        let odds = w / (1.0 - w);
        for m in mode..hi {
            weights[m + 1] = weights[m] * ((k - m) as f64 / (m + 1) as f64) * odds;
        }
        for m in (lo..mode).rev() {
            weights[m] = weights[m + 1] * ((m + 1) as f64 / (k - m) as f64) / odds;
        }
        let mut acc = 0.0f64;
        for m in lo..=hi {
            acc += weights[m] * chi_a[m] * chi_b[k - m];
        }
        *out_k = acc;
    }
    (mass, out)
}

/// Cancellation report from [`chi_newton`]: the alternating power-sum
/// recursion lost `digits_lost` decimal digits at order `n`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StabilityWarning {
    pub n: usize,
    pub digits_lost: f64,
}

/// Result of the power-sum recursion together with its stability flags.
#[derive(Debug, Clone)]
pub struct NewtonNormalization {
    pub seq: NormalizationSequence,
    pub warnings: Vec<StabilityWarning>,
}

/// chi by the recursion
/// chi_N = (N-1)! sum_{m=1}^{N} (-1)^(1+m) / (N-m)! M(m) chi_{N-m},
/// with the factorial ratio carried incrementally. The terms alternate in
/// sign, so this route cancels catastrophically for large N*P; a
/// [`StabilityWarning`] is attached whenever more than six decimal digits are
/// lost. Kept as an independent cross-check of [`chi_dp`].
pub fn chi_newton(ps: &PowerSums, n_max: usize) -> Result<NewtonNormalization> {
    if ps.m_max() < n_max {
        return Err(Error::InsufficientPowerSums {
            needed: n_max,
            available: ps.m_max(),
        });
    }
    let mut chi = vec![0.0f64; n_max + 1];
    chi[0] = 1.0;
    let mut warnings = Vec::new();
    for n in 1..=n_max {
        let mut positive = 0.0f64;
        let mut negative = 0.0f64;
        // coeff carries (n-1)!/(n-m)! across the m loop
        let mut coeff = 1.0f64;
        for m in 1..=n {
            let term = coeff * ps.value(m) * chi[n - m];
            if m % 2 == 1 {
                positive += term;
            } else {
                negative += term;
            }
            coeff *= (n - m) as f64;
        }
        let value = positive - negative;
        let magnitude = positive.max(negative);
        if !value.is_finite() || (value <= 0.0 && magnitude > 0.0) {
            warnings.push(StabilityWarning {
                n,
                digits_lost: f64::INFINITY,
            });
            chi[n] = if value.is_finite() { 0.0 } else { f64::NAN };
            continue;
        }
        if magnitude > 0.0 && value > 0.0 {
            let digits_lost = (magnitude / value).log10();
            if digits_lost > 6.0 {
                warnings.push(StabilityWarning { n, digits_lost });
            }
        }
        chi[n] = value;
    }
    Ok(NewtonNormalization {
        seq: NormalizationSequence::from_linear(chi, ChiMethod::Newton),
        warnings,
    })
}

/// chi by direct enumeration of index subsets: exact by construction, used as
/// the oracle in tests and `verify`. Guarded by total enumeration work; the
/// guard is a hard error, never a silent fallback.
pub fn chi_bruteforce(d: &SchmidtDistribution, n_max: usize) -> Result<NormalizationSequence> {
    let s = d.s();
    let reach = n_max.min(s);
    let work: f64 = (0..=reach).map(|k| binomial(s, k)).sum();
    if work > BRUTE_FORCE_GUARD {
        return Err(Error::TooLarge {
            detail: format!(
                "brute force over {work:.3e} subsets exceeds the {BRUTE_FORCE_GUARD:.0e} cap"
            ),
        });
    }
    let lambdas = d.lambdas();
    let mut chi = vec![0.0f64; n_max + 1];
    chi[0] = 1.0;
    let mut factorial = 1.0f64;
    for (k, chi_k) in chi.iter_mut().enumerate().skip(1) {
        factorial *= k as f64;
        if k > s {
            break;
        }
        let mut acc = CompensatedSum::new();
        subset_products(lambdas, k, 0, 1.0, &mut acc);
        *chi_k = factorial * acc.total();
    }
    Ok(NormalizationSequence::from_linear(chi, ChiMethod::Brute))
}

fn subset_products(lambdas: &[f64], k: usize, start: usize, prod: f64, acc: &mut CompensatedSum) {
    if k == 0 {
        acc.add(prod);
        return;
    }
    for i in start..=(lambdas.len() - k) {
        subset_products(lambdas, k - 1, i + 1, prod * lambdas[i], acc);
    }
}

/// How [`birthday_probability`] estimates the all-distinct probability.
#[derive(Debug, Clone, Copy)]
pub enum BirthdayMode {
    /// Exact enumeration of all ordered distinct assignments (s^n guarded).
    Enumerate,
    /// Monte Carlo estimate with the given trial count and seed.
    MonteCarlo { trials: u64, seed: u64 },
}

/// Estimate with the standard error of the mean when sampled.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BirthdayEstimate {
    pub probability: f64,
    pub std_err: Option<f64>,
}

/// Probability that `n` independent draws from the distribution are pairwise
/// distinct. This is chi_n restated combinatorially, and the two agree: the
/// enumeration matches [`chi_dp`] to float round-off, the Monte Carlo estimate
/// to a few standard errors.
pub fn birthday_probability(
    d: &SchmidtDistribution,
    n: usize,
    mode: BirthdayMode,
) -> Result<BirthdayEstimate> {
    assert!(n >= 1, "draw count must be positive");
    let s = d.s();
    match mode {
        BirthdayMode::Enumerate => {
            if (s as f64).powi(n as i32) > ENUMERATE_GUARD {
                return Err(Error::TooLarge {
                    detail: format!(
                        "enumeration over {s}^{n} assignments exceeds the {ENUMERATE_GUARD:.0e} cap"
                    ),
                });
            }
            if n > s {
                return Ok(BirthdayEstimate {
                    probability: 0.0,
                    std_err: None,
                });
            }
            let mut used = vec![false; s];
            let mut acc = CompensatedSum::new();
            distinct_assignments(d.lambdas(), &mut used, n, 1.0, &mut acc);
            Ok(BirthdayEstimate {
                probability: acc.total(),
                std_err: None,
            })
        }
        BirthdayMode::MonteCarlo { trials, seed } => {
            assert!(trials > 0, "trial count must be positive");
            let mut cdf = Vec::with_capacity(s);
            let mut acc = 0.0f64;
            for &l in d.lambdas() {
                acc += l;
                cdf.push(acc);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let uniform = rand::distributions::Uniform::new(0.0f64, 1.0f64);
            let mut hits = 0u64;
            let mut draws = vec![0usize; n];
            for _ in 0..trials {
                for slot in draws.iter_mut() {
                    let u = uniform.sample(&mut rng);
                    *slot = cdf.partition_point(|&c| c < u).min(s - 1);
                }
                draws.sort_unstable();
                if draws.windows(2).all(|w| w[0] != w[1]) {
                    hits += 1;
                }
            }
            let p = hits as f64 / trials as f64;
            let std_err = (p * (1.0 - p) / trials as f64).sqrt();
            Ok(BirthdayEstimate {
                probability: p,
                std_err: Some(std_err),
            })
        }
    }
}

fn distinct_assignments(
    lambdas: &[f64],
    used: &mut [bool],
    remaining: usize,
    prod: f64,
    acc: &mut CompensatedSum,
) {
    if remaining == 0 {
        acc.add(prod);
        return;
    }
    for j in 0..lambdas.len() {
        if !used[j] {
            used[j] = true;
            distinct_assignments(lambdas, used, remaining - 1, prod * lambdas[j], acc);
            used[j] = false;
        }
    }
}

/// Algorithm choice for [`chi_ratio`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioMethod {
    Dp,
    Newton,
}

/// chi_{n+1}/chi_n, computed in the log domain. Errors when chi_n vanishes
/// (n beyond the nonzero mode count); a vanishing numerator gives ratio 0.
pub fn chi_ratio(d: &SchmidtDistribution, n: usize, method: RatioMethod) -> Result<f64> {
    assert!(n >= 1, "ratio index must be positive");
    match method {
        RatioMethod::Dp => chi_dp(d, n + 1).ratio(n),
        RatioMethod::Newton => {
            let ps = d.power_sums(n + 1);
            chi_newton(&ps, n + 1)?.seq.ratio(n)
        }
    }
}

/// Expectation of the commutator [c, c+] in an N-coboson state:
/// 2 chi_{N+1}/chi_N - 1, which is 1 for ideal bosons.
pub fn commutator_expectation(d: &SchmidtDistribution, n: usize) -> Result<f64> {
    Ok(2.0 * chi_ratio(d, n, RatioMethod::Dp)? - 1.0)
}

/// Closed form for the peaked distribution in its wide limit:
/// chi_N = (1 - sqrt(P))^(N-1) (1 + (N-1) sqrt(P)).
pub fn chi_peaked_closed(p: f64, n: usize) -> f64 {
    chi_peaked_closed_log(p, n).exp()
}

/// ln of [`chi_peaked_closed`]; stays finite long after the linear value
/// underflows.
pub fn chi_peaked_closed_log(p: f64, n: usize) -> f64 {
    assert!(p > 0.0 && p <= 1.0, "purity must lie in (0, 1]");
    if n == 0 {
        return 0.0;
    }
    let sq = p.sqrt();
    if sq == 1.0 {
        return if n == 1 { 0.0 } else { f64::NEG_INFINITY };
    }
    let nm1 = (n - 1) as f64;
    nm1 * (-sq).ln_1p() + (1.0 + nm1 * sq).ln()
}

/// Closed form for the uniform distribution over L modes:
/// chi_N = L!/((L-N)! L^N), evaluated as prod_{k<N} (1 - k/L) in the log
/// domain. Zero for N > L.
pub fn chi_uniform_closed(l: usize, n: usize) -> f64 {
    chi_uniform_closed_log(l, n).exp()
}

/// ln of [`chi_uniform_closed`]; -inf for the structural zeros n > L.
pub fn chi_uniform_closed_log(l: usize, n: usize) -> f64 {
    if n > l {
        return f64::NEG_INFINITY;
    }
    let lf = l as f64;
    let mut log_sum = 0.0f64;
    for k in 1..n {
        log_sum += (-(k as f64) / lf).ln_1p();
    }
    log_sum
}

/// Normalization ratio of the peaked extremal distribution at finite S,
/// evaluated verbatim from its closed form. Requires S P >= 1 and n < S.
pub fn ratio_peaked(p: f64, s: usize, n: usize) -> Result<f64> {
    assert!(n >= 1, "ratio index must be positive");
    if n >= s {
        return Err(Error::Infeasible {
            detail: format!("peaked ratio needs n < S, got n = {n}, S = {s}"),
        });
    }
    let radicand = extremal_radicand(p, s)?;
    Ok(extremal_ratio_signed(p, s, n, radicand.sqrt()))
}

/// Normalization ratio of the uniform extremal distribution with
/// L = ceil(1/P) modes. Reduces exactly to 1 - N P at fractional purities
/// P = 1/L. Requires n < L.
pub fn ratio_uniform(p: f64, n: usize) -> Result<f64> {
    assert!(n >= 1, "ratio index must be positive");
    let l = min_schmidt_number(p);
    if n >= l {
        return Err(Error::Infeasible {
            detail: format!("uniform ratio needs n < L, got n = {n}, L = {l}"),
        });
    }
    let radicand = extremal_radicand(p, l)?;
    Ok(extremal_ratio_signed(p, l, n, -radicand.sqrt()))
}

/// Shared closed form behind [`ratio_peaked`] and [`ratio_uniform`]: the two
/// differ only in the sign carried by the radical, so at P = 1/S (radical
/// zero) they saturate bit-identically.
fn extremal_ratio_signed(p: f64, s: usize, n: usize, signed_root: f64) -> f64 {
    let sf = s as f64;
    let nf = n as f64;
    let numerator = (sf - nf) * (1.0 - p) * (sf - 1.0 + nf * signed_root);
    let denominator = (sf - 1.0) * (sf + sf * (nf - 1.0) * p - nf * (1.0 - signed_root));
    numerator / denominator
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn dist(raw: &[f64]) -> SchmidtDistribution {
        SchmidtDistribution::new(raw).unwrap()
    }

    #[test]
    fn chi_dp_uniform_three() {
        let seq = chi_dp(&SchmidtDistribution::uniform(3), 3);
        let expected = [1.0, 1.0, 2.0 / 3.0, 2.0 / 9.0];
        for (c, e) in seq.chi().iter().zip(expected) {
            assert_relative_eq!(c, &e, epsilon = 1e-15);
        }
    }

    #[test]
    fn chi_dp_chi1_is_one() {
        let seq = chi_dp(&dist(&[0.5, 0.3, 0.2]), 1);
        assert_relative_eq!(seq.value(1), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn chi_dp_pauli_blocked_above_s() {
        let seq = chi_dp(&SchmidtDistribution::uniform(2), 3);
        assert_eq!(seq.value(3), 0.0);
        assert_eq!(seq.log_value(3), f64::NEG_INFINITY);
    }

    #[test]
    fn chi_dp_scaled_path_survives_underflow() {
        // chi_800 of the uniform 800-mode state is ~1e-346, past linear f64;
        // the closed-form log is the independent oracle.
        let d = SchmidtDistribution::uniform(800);
        let seq = chi_dp(&d, 800);
        assert_eq!(seq.value(800), 0.0);
        let lg = seq.log_value(800);
        let oracle = chi_uniform_closed_log(800, 800);
        assert!(lg.is_finite());
        assert!(
            (lg - oracle).abs() <= 1e-12 * oracle.abs(),
            "log {lg} vs oracle {oracle}"
        );
        // Values still in linear range must match the closed form too.
        for n in [1usize, 2, 100, 400] {
            assert_relative_eq!(seq.value(n), chi_uniform_closed(800, n), max_relative = 1e-12);
        }
    }

    #[test]
    fn chi_newton_matches_dp_uniform_three() {
        let d = SchmidtDistribution::uniform(3);
        let ps = d.power_sums(3);
        assert_relative_eq!(ps.value(3), 1.0 / 9.0, epsilon = 1e-15);
        let newton = chi_newton(&ps, 3).unwrap();
        let dp = chi_dp(&d, 3);
        for n in 0..=3 {
            assert_relative_eq!(newton.seq.value(n), dp.value(n), epsilon = 1e-14);
        }
        assert!(newton.warnings.is_empty());
    }

    #[test]
    fn chi_newton_chi2_identity() {
        let d = dist(&[0.4, 0.35, 0.15, 0.1]);
        let ps = d.power_sums(2);
        let newton = chi_newton(&ps, 2).unwrap();
        assert_relative_eq!(newton.seq.value(2), 1.0 - ps.value(2), epsilon = 1e-15);
    }

    #[test]
    fn chi_newton_pure_state_vanishes() {
        let ps = PowerSums::new(vec![1.0; 6]).unwrap();
        let newton = chi_newton(&ps, 6).unwrap();
        for n in 2..=6 {
            assert!(newton.seq.value(n).abs() < 1e-12, "chi_{n} should vanish");
        }
    }

    #[test]
    fn chi_newton_rejects_short_power_sums() {
        let ps = PowerSums::new(vec![1.0, 0.5]).unwrap();
        assert!(matches!(
            chi_newton(&ps, 3),
            Err(Error::InsufficientPowerSums { .. })
        ));
    }

    #[test]
    fn chi_bruteforce_examples() {
        let d = dist(&[0.5, 0.3, 0.2]);
        let seq = chi_bruteforce(&d, 3).unwrap();
        assert_relative_eq!(seq.value(2), 0.62, epsilon = 1e-15);
        assert_relative_eq!(seq.value(2), 1.0 - d.purity(), epsilon = 1e-15);
        assert_relative_eq!(seq.value(3), 0.18, epsilon = 1e-15);

        let seq = chi_bruteforce(&SchmidtDistribution::uniform(4), 2).unwrap();
        assert_relative_eq!(seq.value(2), 0.75, epsilon = 1e-15);
    }

    #[test]
    fn chi_bruteforce_guard_trips() {
        let d = SchmidtDistribution::uniform(64);
        assert!(matches!(
            chi_bruteforce(&d, 32),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn chi_dc_matches_dp_moderate() {
        let mut raw: Vec<f64> = (1..=1500u32).map(|k| 1.0 / (k as f64).powf(1.3)).collect();
        let sum: f64 = raw.iter().sum();
        raw.iter_mut().for_each(|v| *v /= sum);
        let d = SchmidtDistribution::new(&raw).unwrap();
        let dp = chi_dp(&d, 40);
        let dc = chi_dc(&d, 40);
        for n in 0..=40 {
            assert_relative_eq!(dc.value(n), dp.value(n), max_relative = 1e-10);
        }
    }

    #[test]
    fn chi_dc_handles_degree_shorter_than_blocks() {
        let d = SchmidtDistribution::uniform(2000);
        let dp = chi_dp(&d, 5);
        let dc = chi_dc(&d, 5);
        for n in 0..=5 {
            assert_relative_eq!(dc.value(n), dp.value(n), max_relative = 1e-12);
        }
    }

    #[test]
    fn birthday_enumerate_uniform_pair() {
        let d = SchmidtDistribution::uniform(2);
        let est = birthday_probability(&d, 2, BirthdayMode::Enumerate).unwrap();
        assert_relative_eq!(est.probability, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn birthday_single_draw_is_certain() {
        let d = dist(&[0.5, 0.3, 0.2]);
        let est = birthday_probability(&d, 1, BirthdayMode::Enumerate).unwrap();
        assert_relative_eq!(est.probability, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn birthday_enumerate_matches_chi_dp() {
        let d = dist(&[0.4, 0.25, 0.2, 0.1, 0.05]);
        let seq = chi_dp(&d, 4);
        for n in 1..=4 {
            let est = birthday_probability(&d, n, BirthdayMode::Enumerate).unwrap();
            assert!((est.probability - seq.value(n)).abs() <= 1e-12);
        }
    }

    #[test]
    fn birthday_enumerate_guard() {
        let d = SchmidtDistribution::uniform(365);
        assert!(matches!(
            birthday_probability(&d, 23, BirthdayMode::Enumerate),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn birthday_monte_carlo_within_four_sigma() {
        let d = SchmidtDistribution::uniform(10);
        let exact = chi_dp(&d, 4).value(4);
        let est = birthday_probability(
            &d,
            4,
            BirthdayMode::MonteCarlo {
                trials: 200_000,
                seed: 7,
            },
        )
        .unwrap();
        let se = est.std_err.unwrap();
        assert!((est.probability - exact).abs() <= 4.0 * se);
    }

    #[test]
    fn ratio_uniform_three_at_n2() {
        let d = SchmidtDistribution::uniform(3);
        let r = chi_ratio(&d, 2, RatioMethod::Dp).unwrap();
        assert_relative_eq!(r, 1.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn ratio_pauli_blocked_is_zero() {
        let d = SchmidtDistribution::uniform(2);
        let r = chi_ratio(&d, 2, RatioMethod::Dp).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn ratio_vanishing_denominator() {
        let d = SchmidtDistribution::uniform(2);
        assert!(matches!(
            chi_ratio(&d, 3, RatioMethod::Dp),
            Err(Error::VanishingDenominator { .. })
        ));
    }

    #[test]
    fn ratio_first_step_equals_chi2() {
        let d = dist(&[0.5, 0.3, 0.2]);
        let r = chi_ratio(&d, 1, RatioMethod::Dp).unwrap();
        assert_relative_eq!(r, 0.62, epsilon = 1e-14);
    }

    #[test]
    fn commutator_examples() {
        let d = SchmidtDistribution::uniform(3);
        assert_relative_eq!(
            commutator_expectation(&d, 2).unwrap(),
            -1.0 / 3.0,
            epsilon = 1e-14
        );

        let wide = SchmidtDistribution::uniform(1_000_000);
        let c = commutator_expectation(&wide, 1).unwrap();
        assert_relative_eq!(c, 1.0 - 2e-6, epsilon = 1e-12);

        let single = dist(&[1.0]);
        assert_relative_eq!(
            commutator_expectation(&single, 1).unwrap(),
            -1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn chi_peaked_closed_examples() {
        assert_relative_eq!(chi_peaked_closed(0.25, 2), 0.75, epsilon = 1e-15);
        assert_relative_eq!(chi_peaked_closed(0.25, 3), 0.5, epsilon = 1e-15);
        assert_eq!(chi_peaked_closed(0.7, 1), 1.0);
        assert_eq!(chi_peaked_closed(0.7, 0), 1.0);
    }

    #[test]
    fn chi_peaked_closed_matches_wide_dp() {
        let d = SchmidtDistribution::peaked(0.25, 1_000_000).unwrap();
        let dp = chi_dp(&d, 3);
        assert!((dp.value(3) - chi_peaked_closed(0.25, 3)).abs() < 1e-4);
    }

    #[test]
    fn chi_uniform_closed_examples() {
        let birthday: f64 = (1..23).map(|k| 1.0 - k as f64 / 365.0).product();
        assert!((chi_uniform_closed(365, 23) - birthday).abs() < 1e-14);
        assert_relative_eq!(chi_uniform_closed(3, 3), 2.0 / 9.0, epsilon = 1e-14);
        assert_eq!(chi_uniform_closed(5, 6), 0.0);
    }

    #[test]
    fn chi_uniform_decays_faster_than_peaked() {
        for l in [3usize, 5, 10, 40] {
            let p = 1.0 / l as f64;
            for n in 0..=l {
                assert!(chi_uniform_closed(l, n) <= chi_peaked_closed(p, n) + 1e-15);
            }
        }
    }

    #[test]
    fn ratio_peaked_reduces_to_uniform_at_sp_one() {
        let r = ratio_peaked(0.5, 2, 1).unwrap();
        assert_relative_eq!(r, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn ratio_peaked_matches_distribution() {
        let d = SchmidtDistribution::peaked(0.2, 16).unwrap();
        let direct = chi_ratio(&d, 2, RatioMethod::Dp).unwrap();
        let closed = ratio_peaked(0.2, 16, 2).unwrap();
        assert!((direct - closed).abs() <= 1e-12);
    }

    #[test]
    fn ratio_peaked_approaches_upper_bound() {
        let u5 = 1.0 - 0.04 * 5.0 / (1.0 + 4.0 * 0.04f64.sqrt());
        let r = ratio_peaked(0.04, 100_000_000, 5).unwrap();
        assert!((r - u5).abs() < 1e-6);
    }

    #[test]
    fn ratio_uniform_saturates_lower_bound() {
        let r = ratio_uniform(1.0 / 3.0, 2).unwrap();
        assert_relative_eq!(r, 1.0 / 3.0, epsilon = 1e-13);

        // P = 0.25, n = 3, L = 4: exactly 1 - 3/4
        let r = ratio_uniform(0.25, 3).unwrap();
        assert_relative_eq!(r, 0.25, epsilon = 1e-13);
    }

    #[test]
    fn ratio_uniform_matches_distribution() {
        let d = SchmidtDistribution::uniform_for_purity(0.3).unwrap();
        let direct = chi_ratio(&d, 2, RatioMethod::Dp).unwrap();
        let closed = ratio_uniform(0.3, 2).unwrap();
        assert!((direct - closed).abs() <= 1e-12);
    }

    #[test]
    fn ratio_uniform_infeasible_at_n_ge_l() {
        assert!(matches!(
            ratio_uniform(0.5, 2),
            Err(Error::Infeasible { .. })
        ));
    }

    #[test]
    fn newton_maclaurin_ratio_non_increasing() {
        let d = dist(&[0.35, 0.25, 0.2, 0.12, 0.08]);
        let seq = chi_dp(&d, 5);
        let mut prev = f64::INFINITY;
        for n in 1..5 {
            let r = seq.ratio(n).unwrap();
            assert!(r <= prev + 1e-14);
            prev = r;
        }
    }
}
