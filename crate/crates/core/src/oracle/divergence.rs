#[allow(unused_imports)] // unused when std is linked and its inherent methods take over
use num_traits::Float;

use super::histogram::{check_budget, enumerate_histograms, ln_multinomial_pmf};
use super::lemmas::in_tilde_set;
use super::{ln_power_mean, HistogramDistribution, OracleError};
use crate::numerics::BinomialLogPmf;

/// Largest `n` accepted by [`exact_2rr_renyi`].
pub const MAX_2RR_CLIENTS: u64 = 10_000_000;
/// Largest `m` for the two-bin binomial path of [`special_case_divergence`].
pub const MAX_SPECIAL_BINOMIAL_CLIENTS: u32 = 10_000;
/// Up to this many clients the binomial sums visit every `k`.
const FULL_SUMMATION_CLIENTS: u64 = 100_000;

fn check_order(lambda: f64) -> Result<(), OracleError> {
    if lambda.is_finite() && lambda > 1.0 {
        Ok(())
    } else {
        Err(OracleError::InvalidInput("order must be a finite real above 1"))
    }
}

/// `ln E_{h~Q}[(P(h)/Q(h))^lambda]`.
pub fn ln_power_expectation(
    p: &HistogramDistribution,
    q: &HistogramDistribution,
    lambda: f64,
) -> Result<f64, OracleError> {
    if p.n() != q.n() || p.bins() != q.bins() {
        return Err(OracleError::InvalidInput("distributions differ in n or bin count"));
    }
    if p.iter().any(|(h, m)| m > 0.0 && q.mass(h) == 0.0) {
        return Err(OracleError::SupportViolation);
    }
    let terms = q
        .iter()
        .filter(|&(_, qm)| qm > 0.0)
        .map(|(h, qm)| (qm.ln(), p.mass(h).ln() - qm.ln()));
    Ok(ln_power_mean(terms, lambda))
}

/// Order-`lambda` Renyi divergence `D_lambda(P || Q)`.
///
/// Rounding can make the exact sum dip a few ulp below zero; the result is
/// clamped at 0.
pub fn renyi_divergence(
    p: &HistogramDistribution,
    q: &HistogramDistribution,
    lambda: f64,
) -> Result<f64, OracleError> {
    check_order(lambda)?;
    Ok((ln_power_expectation(p, q, lambda)? / (lambda - 1.0)).max(0.0))
}

/// Which way round [`exact_2rr_renyi`] takes the divergence, for
/// `D = (0, ..., 0)` and `D' = (0, ..., 0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `D_lambda(M(D) || M(D'))`.
    DToDprime,
    /// `D_lambda(M(D') || M(D))`.
    DprimeToD,
}

/// Exact Renyi divergence of binary randomized response shuffled over `n`
/// clients, between the all-zero dataset and its neighbour with the last bit
/// set.
///
/// With `k ~ Bin(n, p)`, `p = 1/(e^eps0 + 1)`, the likelihood ratio is
/// `M(D')(k)/M(D)(k) = 1 + (e^{2 eps0} - 1)/(n e^eps0) (k - np)`, and the
/// divergence is a single sum over `k`.
pub fn exact_2rr_renyi(eps0: f64, n: u64, lambda: u32, direction: Direction) -> Result<f64, OracleError> {
    if !(eps0.is_finite() && eps0 >= 0.0) {
        return Err(OracleError::InvalidInput("eps0 must be finite and >= 0"));
    }
    if n == 0 || n > MAX_2RR_CLIENTS {
        return Err(OracleError::BudgetExceeded("n must lie in 1..=10^7"));
    }
    if lambda < 2 {
        return Err(OracleError::InvalidInput("order must be an integer >= 2"));
    }
    if eps0 == 0.0 {
        return Ok(0.0);
    }
    let lambda = f64::from(lambda);
    let nf = n as f64;
    let p = 1.0 / (eps0.exp() + 1.0);
    let slope = (2.0 * eps0).exp_m1() / (nf * eps0.exp());
    let mean = nf * p;
    let pmf = if n <= FULL_SUMMATION_CLIENTS {
        BinomialLogPmf::full(n, p)
    } else {
        BinomialLogPmf::with_tail_drop(n, p, lambda as u32, 2.0 * lambda * eps0)
    };
    let terms = pmf
        .iter()
        .map(|(k, lp)| (lp, (slope * (k as f64 - mean)).ln_1p()));
    // D -> D' weighs (M(D)/M(D'))^lambda by M(D'), i.e. r^{1 - lambda} by M(D)
    let exponent = match direction {
        Direction::DprimeToD => lambda,
        Direction::DToDprime => 1.0 - lambda,
    };
    Ok((ln_power_mean(terms, exponent) / (lambda - 1.0)).max(0.0))
}

/// `ln E_{h~MN(m,p)}[(sum_j (p'_j/p_j) h_j / m)^lambda]`: the order-`lambda`
/// power expectation between `m` clients with row `p` and the same dataset
/// with its last client switched to `p'`.
pub fn special_case_ln_expectation(
    m: u32,
    p: &[f64],
    p_prime: &[f64],
    lambda: f64,
) -> Result<f64, OracleError> {
    if m == 0 {
        return Err(OracleError::InvalidInput("m must be >= 1"));
    }
    if p.len() != p_prime.len() || p.is_empty() {
        return Err(OracleError::InvalidInput("p and p' must have equal nonzero length"));
    }
    let mf = f64::from(m);
    let excess: alloc::vec::Vec<f64> = p.iter().zip(p_prime).map(|(&a, &b)| (b - a) / a).collect();
    if check_budget(m as usize, p.len()).is_ok() {
        let terms = enumerate_histograms(m, p.len())?.into_iter().map(|h| {
            let dev: f64 = h
                .counts()
                .iter()
                .zip(&excess)
                .map(|(&c, &e)| f64::from(c) * e)
                .sum();
            (ln_multinomial_pmf(p, &h), (dev / mf).ln_1p())
        });
        return Ok(ln_power_mean(terms, lambda));
    }
    if p.len() == 2 && m <= MAX_SPECIAL_BINOMIAL_CLIENTS {
        let pmf = BinomialLogPmf::full(u64::from(m), p[1]);
        let terms = pmf.iter().map(|(k, lp)| {
            let k = k as f64;
            (lp, (((mf - k) * excess[0] + k * excess[1]) / mf).ln_1p())
        });
        return Ok(ln_power_mean(terms, lambda));
    }
    Err(OracleError::BudgetExceeded("special case needs m <= 12 or two bins with m <= 10^4"))
}

/// Renyi divergence of the special neighbouring pair: `m - 1` clients with
/// row `p` plus a last client with row `p'`, against `m` clients with row `p`.
pub fn special_case_divergence(
    eps0: f64,
    m: u32,
    p: &[f64],
    p_prime: &[f64],
    lambda: f64,
) -> Result<f64, OracleError> {
    check_order(lambda)?;
    if !in_tilde_set(p, p_prime, eps0) {
        return Err(OracleError::InvalidInput("(p, p') is not an eps0-bounded pair"));
    }
    Ok((special_case_ln_expectation(m, p, p_prime, lambda)? / (lambda - 1.0)).max(0.0))
}
