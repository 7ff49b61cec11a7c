//! Exact, enumeration-based divergences for small shuffled instances.
//!
//! Everything here is brute force on purpose: these routines exist to
//! certify the closed forms in [`crate::bounds`] and the structural facts
//! the bounds rest on, so they favour transparency over speed and refuse
//! inputs beyond a fixed enumeration budget.

mod divergence;
mod histogram;
mod lemmas;
mod mechanism;

use alloc::vec::Vec;

#[allow(unused_imports)] // unused when std is linked and its inherent methods take over
use num_traits::Float;

use crate::numerics::NeumaierSum;

pub use divergence::{
    exact_2rr_renyi, ln_power_expectation, renyi_divergence, special_case_divergence,
    special_case_ln_expectation, Direction, MAX_2RR_CLIENTS, MAX_SPECIAL_BINOMIAL_CLIENTS,
};
pub use histogram::{
    enumerate_histograms, histogram_count, ln_multinomial_pmf, shuffle_dist, Histogram,
    HistogramDistribution,
};
pub use lemmas::{
    e_m_sequence, in_tilde_set, mixture_decomposition_check, mixture_decomposition_error,
    moment_identities_check, monotonicity_check, random_feasible_pair, random_vertex,
    reduction_check, sup_variance_vertex, two_bin_vertex, variance_functional, MomentReport,
    MonotonicityReport, ReductionReport,
};
pub use mechanism::DiscreteMechanism;

/// Largest dataset [`shuffle_dist`] will enumerate.
pub const MAX_ENUMERATED_CLIENTS: usize = 12;
/// Largest number of histograms any enumeration may visit.
pub const MAX_HISTOGRAMS: usize = 1_000_000;
/// Largest dataset for the subset enumeration in the mixture and reduction checks.
pub const MAX_MIXTURE_CLIENTS: usize = 6;
/// Largest dataset for [`monotonicity_check`].
pub const MAX_MONOTONICITY_CLIENTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[non_exhaustive]
pub enum OracleError {
    #[error("invalid mechanism: {0}")]
    InvalidMechanism(&'static str),
    #[error("mechanism is {actual}-LDP, not {declared}-LDP as declared")]
    NotLdp { declared: f64, actual: f64 },
    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(&'static str),
    #[error("support of P is not contained in support of Q")]
    SupportViolation,
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
}

/// `ln( sum_k w_k r_k^lambda / sum_k w_k )` from pairs `(ln w_k, ln r_k)`.
///
/// When no `r_k^lambda` can overflow, the sum is formed as
/// `ln_1p(sum w (r^lambda - 1) / sum w)` so results near zero keep their
/// relative precision; otherwise it falls back to log-sum-exp.
pub(crate) fn ln_power_mean<I>(terms: I, lambda: f64) -> f64
where
    I: IntoIterator<Item = (f64, f64)>,
{
    let terms: Vec<(f64, f64)> = terms
        .into_iter()
        .filter(|&(lw, _)| lw > f64::NEG_INFINITY)
        .collect();
    let lw_max = terms.iter().fold(f64::NEG_INFINITY, |m, &(lw, _)| m.max(lw));
    let exp_max = terms
        .iter()
        .fold(f64::NEG_INFINITY, |m, &(_, lr)| m.max(lambda * lr));
    if exp_max <= 600.0 {
        let mut num = NeumaierSum::new();
        let mut den = NeumaierSum::new();
        for &(lw, lr) in &terms {
            let w = (lw - lw_max).exp();
            num.add(w * (lambda * lr).exp_m1());
            den.add(w);
        }
        (num.total() / den.total()).ln_1p()
    } else {
        let mut num = crate::numerics::LogSumAccumulator::new();
        let mut den = crate::numerics::LogSumAccumulator::new();
        for &(lw, lr) in &terms {
            num.push(lw + lambda * lr);
            den.push(lw);
        }
        num.total().ln() - den.total().ln()
    }
}
