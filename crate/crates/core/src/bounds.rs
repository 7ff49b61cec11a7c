//! Closed-form upper and lower bounds on the RDP curve of the shuffled model.
//!
//! All bounds take the LDP parameter `eps0` of the local randomizer and the
//! number of clients `n` through [`ShuffleParams`] and an order through
//! [`RdpOrder`]. Inner sums are evaluated in the log domain so orders in the
//! thousands and client counts in the millions stay finite.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

#[allow(unused_imports)] // unused when std is linked and its inherent methods take over
use num_traits::Float;

use crate::numerics::{
    binom_scaled_central_moment, ln_binomial, ln_gamma, log_add_exp, log_sum_exp,
    BinomialLogPmf, LogReal, LogSumAccumulator, MomentSpec, NeumaierSum, SummationWindow,
};

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[non_exhaustive]
pub enum BoundError {
    #[error("invalid shuffle parameters: {0}")]
    InvalidParams(&'static str),
    #[error("RDP order must be a finite real above 1, got {0}")]
    OrderTooSmall(f64),
    #[error("order {0} is not an integer >= 2; use rdp_real_order for real orders")]
    NonIntegerOrder(f64),
    #[error("precondition violated: {0}")]
    Precondition(&'static str),
    #[error("invalid RDP curve: {0}")]
    InvalidCurve(&'static str),
}

/// Default Chernoff slack.
pub const DEFAULT_GAMMA: f64 = 0.5;

/// A shuffled deployment: `n` clients, each running an `eps0`-LDP randomizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShuffleParams {
    eps0: f64,
    n: u64,
    gamma: f64,
}

impl ShuffleParams {
    pub fn new(eps0: f64, n: u64) -> Result<Self, BoundError> {
        if !eps0.is_finite() || eps0 < 0.0 {
            return Err(BoundError::InvalidParams("eps0 must be finite and >= 0"));
        }
        if n == 0 {
            return Err(BoundError::InvalidParams("n must be >= 1"));
        }
        Ok(Self {
            eps0,
            n,
            gamma: DEFAULT_GAMMA,
        })
    }

    /// Replaces the Chernoff slack (default 1/2).
    pub fn with_gamma(self, gamma: f64) -> Result<Self, BoundError> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(BoundError::InvalidParams("gamma must lie in (0, 1)"));
        }
        Ok(Self { gamma, ..self })
    }

    pub fn eps0(&self) -> f64 {
        self.eps0
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Mixture weight `q = e^{-eps0}`.
    pub fn q(&self) -> f64 {
        (-self.eps0).exp()
    }

    /// Effective client count `floor((1 - gamma)(n - 1) / e^{eps0}) + 1`.
    pub fn n_bar(&self) -> u64 {
        let scaled = (1.0 - self.gamma) * (self.n - 1) as f64 * self.q();
        scaled.floor() as u64 + 1
    }

    /// Log of the Chernoff tail term, `eps0 * lambda - gamma^2 (n - 1) / (2 e^{eps0})`.
    pub fn chernoff_log_term(&self, lambda: f64) -> f64 {
        self.eps0 * lambda - self.gamma * self.gamma * (self.n - 1) as f64 * self.q() / 2.0
    }
}

/// An RDP order `lambda > 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct RdpOrder(f64);

impl RdpOrder {
    pub fn new(value: f64) -> Result<Self, BoundError> {
        if value.is_finite() && value > 1.0 {
            Ok(Self(value))
        } else {
            Err(BoundError::OrderTooSmall(value))
        }
    }

    pub fn integer(value: u32) -> Result<Self, BoundError> {
        if value >= 2 {
            Ok(Self(f64::from(value)))
        } else {
            Err(BoundError::OrderTooSmall(f64::from(value)))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_integer(self) -> bool {
        self.0 >= 2.0 && self.0.fract() == 0.0
    }

    pub fn as_integer(self) -> Option<u32> {
        (self.is_integer() && self.0 <= f64::from(u32::MAX)).then(|| self.0 as u32)
    }
}

impl fmt::Display for RdpOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// RDP parameters `eps(lambda)` on a strictly increasing grid of orders.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RdpCurve {
    entries: Vec<(RdpOrder, f64)>,
}

impl RdpCurve {
    pub fn new(entries: Vec<(RdpOrder, f64)>) -> Result<Self, BoundError> {
        if entries.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(BoundError::InvalidCurve("orders must be strictly increasing"));
        }
        if entries.iter().any(|&(_, e)| !(e.is_finite() && e >= 0.0)) {
            return Err(BoundError::InvalidCurve("epsilons must be finite and >= 0"));
        }
        Ok(Self { entries })
    }

    /// Evaluates `f` on every order, dropping orders where it fails or is
    /// not finite.
    pub fn from_fn<F>(orders: &[RdpOrder], mut f: F) -> Result<Self, BoundError>
    where
        F: FnMut(RdpOrder) -> Result<f64, BoundError>,
    {
        let entries = orders
            .iter()
            .filter_map(|&o| match f(o) {
                Ok(e) if e.is_finite() => Some((o, e.max(0.0))),
                _ => None,
            })
            .collect();
        Self::new(entries)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(RdpOrder, f64)] {
        &self.entries
    }

    pub fn orders(&self) -> impl Iterator<Item = RdpOrder> + '_ {
        self.entries.iter().map(|&(o, _)| o)
    }

    pub fn epsilon_at(&self, order: RdpOrder) -> Option<f64> {
        self.entries
            .iter()
            .find(|&&(o, _)| o == order)
            .map(|&(_, e)| e)
    }

    /// Every epsilon multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            entries: self.entries.iter().map(|&(o, e)| (o, e * factor)).collect(),
        }
    }
}

fn integer_order(lambda: RdpOrder) -> Result<u32, BoundError> {
    lambda
        .as_integer()
        .ok_or(BoundError::NonIntegerOrder(lambda.value()))
}

/// First upper bound, valid for integer orders `lambda >= 2` and `n >= 2`:
///
/// `1/(lambda-1) * log(1 + C(lambda,2) (e^eps0 - 1)^2 / (nbar e^eps0)
///   + sum_{i=3}^{lambda} C(lambda,i) i Gamma(i/2) ((e^{2 eps0} - 1)^2 / (2 e^{2 eps0} nbar))^{i/2}
///   + e^{eps0 lambda - (n-1)/(8 e^eps0)})`
///
/// With a non-default `gamma` the generalised `nbar` and Chernoff exponent
/// from [`ShuffleParams`] are used.
pub fn ub1(params: &ShuffleParams, lambda: RdpOrder) -> Result<f64, BoundError> {
    let order = integer_order(lambda)?;
    if params.n < 2 {
        return Err(BoundError::Precondition("ub1 requires n >= 2"));
    }
    let eps0 = params.eps0;
    let ln_nbar = (params.n_bar() as f64).ln();
    let lambda_f = f64::from(order);
    let ln_em1 = eps0.exp_m1().ln();
    // ln((e^{2 eps0} - 1)^2 / (2 e^{2 eps0} nbar))
    let ln_ratio = 2.0 * (2.0 * eps0).exp_m1().ln() - core::f64::consts::LN_2 - 2.0 * eps0 - ln_nbar;

    let mut terms = Vec::with_capacity(order as usize + 1);
    terms.push(LogReal::ONE);
    terms.push(LogReal::from_ln(
        ln_binomial(u64::from(order), 2).ln() + 2.0 * ln_em1 - ln_nbar - eps0,
    ));
    for i in 3..=order {
        let i_f = f64::from(i);
        let lg = ln_gamma(i_f / 2.0).expect("i / 2 > 0");
        terms.push(LogReal::from_ln(
            ln_binomial(u64::from(order), u64::from(i)).ln() + i_f.ln() + lg + 0.5 * i_f * ln_ratio,
        ));
    }
    terms.push(LogReal::from_ln(params.chernoff_log_term(lambda_f)));
    let total = log_sum_exp(&terms).expect("nonempty");
    Ok(total.ln() / (lambda_f - 1.0))
}

/// Simplified first upper bound `1/(lambda-1) log(1 + C(lambda,2) 4 (e^eps0 - 1)^2 / n)`.
///
/// Only valid when `lambda^4 e^{5 eps0} < n / 9`; otherwise returns
/// [`BoundError::Precondition`].
pub fn ub1_simplified(params: &ShuffleParams, lambda: RdpOrder) -> Result<f64, BoundError> {
    let order = integer_order(lambda)?;
    let lambda_f = f64::from(order);
    let lhs = 4.0 * lambda_f.ln() + 5.0 * params.eps0;
    let rhs = (params.n as f64 / 9.0).ln();
    if !(lhs < rhs) {
        return Err(BoundError::Precondition("lambda^4 * e^(5 eps0) < n / 9"));
    }
    let pairs = lambda_f * (lambda_f - 1.0) / 2.0;
    let em1 = params.eps0.exp_m1();
    Ok((pairs * 4.0 * em1 * em1 / params.n as f64).ln_1p() / (lambda_f - 1.0))
}

/// Second upper bound, valid for every real order:
/// `1/(lambda-1) log(e^{lambda^2 (e^eps0 - 1)^2 / nbar} + e^{eps0 lambda - (n-1)/(8 e^eps0)})`.
pub fn ub2(params: &ShuffleParams, lambda: RdpOrder) -> Result<f64, BoundError> {
    let l = lambda.value();
    let em1 = params.eps0.exp_m1();
    let quadratic = l * l * em1 * em1 / params.n_bar() as f64;
    let total = log_add_exp(quadratic, params.chernoff_log_term(l));
    Ok(total / (l - 1.0))
}

/// Orders up to this use the central-moment expansion in [`lower_bound`].
pub const LOWER_BOUND_EXPANSION_MAX_ORDER: u32 = 64;

/// Ratio of the absolute term sum to the signed sum above which the moment
/// expansion is considered ill-conditioned.
const EXPANSION_CONDITION_LIMIT: f64 = 1e4;

/// Lower bound for integer orders, realised by binary randomized response:
///
/// `1/(lambda-1) log(1 + C(lambda,2) (e^eps0 - 1)^2 / (n e^eps0)
///   + sum_{i=3}^{lambda} C(lambda,i) ((e^{2 eps0} - 1) / (n e^eps0))^i E[(k - n/(e^eps0 + 1))^i])`
///
/// with `k ~ Bin(n, 1/(e^eps0 + 1))`. Up to
/// [`LOWER_BOUND_EXPANSION_MAX_ORDER`] the central moments are summed
/// directly. Higher orders, or expansions whose alternating terms cancel
/// badly, evaluate the same polynomial in closed form as
/// `E[(1 + a (k - np))^lambda]`.
pub fn lower_bound(params: &ShuffleParams, lambda: RdpOrder) -> Result<f64, BoundError> {
    let order = integer_order(lambda)?;
    let lambda_f = f64::from(order);
    let eps0 = params.eps0;
    if eps0 == 0.0 {
        return Ok(0.0);
    }
    let n = params.n;
    let nf = n as f64;
    let p = 1.0 / (eps0.exp() + 1.0);
    let scale = (2.0 * eps0).exp_m1() / (nf * eps0.exp());
    let em1 = eps0.exp_m1();
    let quadratic = lambda_f * (lambda_f - 1.0) / 2.0 * em1 * em1 / (nf * eps0.exp());

    if order <= LOWER_BOUND_EXPANSION_MAX_ORDER {
        let mut signed = NeumaierSum::new();
        let mut absolute = NeumaierSum::new();
        signed.add(quadratic);
        absolute.add(quadratic);
        for i in 3..=order {
            let spec = MomentSpec::new(n, p, i).expect("p in (0, 1), i >= 3");
            let moment = binom_scaled_central_moment(&spec, scale, SummationWindow::Default);
            let coeff = ln_binomial(u64::from(order), u64::from(i)).to_linear();
            let term = coeff * moment;
            signed.add(term);
            absolute.add(term.abs());
        }
        let s = signed.total();
        let conditioned = absolute.total() <= EXPANSION_CONDITION_LIMIT * s.abs();
        if s.is_finite() && s > -1.0 && absolute.total().is_finite() && conditioned {
            return Ok(s.ln_1p().max(0.0) / (lambda_f - 1.0));
        }
    }
    Ok(tilted_ratio_log_moment(n, eps0, lambda_f).max(0.0) / (lambda_f - 1.0))
}

/// `ln E[(1 + a (k - np))^lambda]` for `k ~ Bin(n, p)`, `p = 1/(e^eps0 + 1)`,
/// `a = (e^{2 eps0} - 1)/(n e^eps0)`, summed in the log domain.
fn tilted_ratio_log_moment(n: u64, eps0: f64, lambda: f64) -> f64 {
    let nf = n as f64;
    let p = 1.0 / (eps0.exp() + 1.0);
    let scale = (2.0 * eps0).exp_m1() / (nf * eps0.exp());
    let mean = nf * p;
    // ratio lies in [e^-eps0, e^eps0], so the tilt moves mass by at most 2 lambda eps0 nats
    let pmf = BinomialLogPmf::with_tail_drop(n, p, 20, 2.0 * lambda * eps0);
    let mut acc = LogSumAccumulator::new();
    for (k, lp) in pmf.iter() {
        let ln_ratio = (scale * (k as f64 - mean)).ln_1p();
        acc.push(lp + lambda * ln_ratio);
    }
    acc.total().ln()
}

/// Simplified lower bound `1/(lambda-1) log(1 + C(lambda,2) (e^eps0 - 1)^2 / (n e^eps0))`.
pub fn lower_bound_simplified(params: &ShuffleParams, lambda: RdpOrder) -> Result<f64, BoundError> {
    let order = integer_order(lambda)?;
    let lambda_f = f64::from(order);
    let em1 = params.eps0.exp_m1();
    let x = lambda_f * (lambda_f - 1.0) / 2.0 * em1 * em1 / (params.n as f64 * params.eps0.exp());
    Ok(x.ln_1p() / (lambda_f - 1.0))
}

/// Baseline obtained by converting the approximate-DP amplification result:
/// `lambda * 2 e^{4 eps0} (e^eps0 - 1)^2 / n`.
pub fn erlingsson_baseline(params: &ShuffleParams, lambda: RdpOrder) -> f64 {
    let em1 = params.eps0.exp_m1();
    lambda.value() * 2.0 * (4.0 * params.eps0).exp() * em1 * em1 / params.n as f64
}

/// Which integer-order upper bound [`rdp_real_order`] interpolates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpperMethod {
    Ub1,
    Best,
}

fn integer_upper(params: &ShuffleParams, order: u32, method: UpperMethod) -> Result<f64, BoundError> {
    let lambda = RdpOrder::integer(order)?;
    match method {
        UpperMethod::Ub1 => ub1(params, lambda),
        UpperMethod::Best => Ok(best_upper(params, lambda)),
    }
}

/// Upper bound at a real order via convexity of `(lambda - 1) eps(lambda)`:
/// `(a (floor - 1) eps(floor) + (1 - a)(ceil - 1) eps(ceil)) / (lambda - 1)`
/// with `a = ceil - lambda`. Integer orders pass through; orders in (1, 2)
/// return the order-2 bound, which dominates since Renyi divergence is
/// non-decreasing in the order.
pub fn rdp_real_order(params: &ShuffleParams, lambda: f64, method: UpperMethod) -> Result<f64, BoundError> {
    let order = RdpOrder::new(lambda)?;
    if let Some(k) = order.as_integer() {
        return integer_upper(params, k, method);
    }
    if lambda < 2.0 {
        return integer_upper(params, 2, method);
    }
    let lo = lambda.floor();
    let hi = lambda.ceil();
    let weight = hi - lambda;
    let eps_lo = integer_upper(params, lo as u32, method)?;
    let eps_hi = integer_upper(params, hi as u32, method)?;
    Ok((weight * (lo - 1.0) * eps_lo + (1.0 - weight) * (hi - 1.0) * eps_hi) / (lambda - 1.0))
}

/// Pointwise minimum of the valid upper bounds: the first bound (interpolated
/// at real orders), the second bound and the pure-DP cap `eps0`.
pub fn best_upper(params: &ShuffleParams, lambda: RdpOrder) -> f64 {
    let mut best = params.eps0;
    if params.n >= 2 {
        let first = match lambda.as_integer() {
            Some(_) => ub1(params, lambda),
            None => rdp_real_order(params, lambda.value(), UpperMethod::Ub1),
        };
        if let Ok(v) = first {
            best = best.min(v);
        }
    }
    if let Ok(v) = ub2(params, lambda) {
        best = best.min(v);
    }
    best
}

/// A named bound, as selected on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundMethod {
    Ub1,
    Ub1Simplified,
    Ub2,
    Lower,
    LowerSimplified,
    Erlingsson,
    Best,
}

impl BoundMethod {
    pub const ALL: [BoundMethod; 7] = [
        BoundMethod::Ub1,
        BoundMethod::Ub1Simplified,
        BoundMethod::Ub2,
        BoundMethod::Lower,
        BoundMethod::LowerSimplified,
        BoundMethod::Erlingsson,
        BoundMethod::Best,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundMethod::Ub1 => "ub1",
            BoundMethod::Ub1Simplified => "ub1_simple",
            BoundMethod::Ub2 => "ub2",
            BoundMethod::Lower => "lb",
            BoundMethod::LowerSimplified => "lb_simple",
            BoundMethod::Erlingsson => "erlingsson",
            BoundMethod::Best => "best",
        }
    }

    /// Evaluates the bound. Integer-only bounds reject real orders except
    /// `Ub1`, which falls back to [`rdp_real_order`].
    pub fn evaluate(self, params: &ShuffleParams, lambda: RdpOrder) -> Result<f64, BoundError> {
        match self {
            BoundMethod::Ub1 if !lambda.is_integer() => {
                rdp_real_order(params, lambda.value(), UpperMethod::Ub1)
            }
            BoundMethod::Ub1 => ub1(params, lambda),
            BoundMethod::Ub1Simplified => ub1_simplified(params, lambda),
            BoundMethod::Ub2 => ub2(params, lambda),
            BoundMethod::Lower => lower_bound(params, lambda),
            BoundMethod::LowerSimplified => lower_bound_simplified(params, lambda),
            BoundMethod::Erlingsson => Ok(erlingsson_baseline(params, lambda)),
            BoundMethod::Best => Ok(best_upper(params, lambda)),
        }
    }
}

impl fmt::Display for BoundMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundMethod {
    type Err = BoundError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BoundMethod::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or(BoundError::InvalidParams("unknown bound method"))
    }
}
