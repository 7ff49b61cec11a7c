//! Log-domain scalar arithmetic and the special functions the bounds are
//! evaluated with.
//!
//! Every bound in this crate multiplies quantities such as `e^{eps0 * lambda}`,
//! binomial coefficients and gamma-function values that overflow `f64` long
//! before the orders and client counts of interest are reached. [`LogReal`]
//! keeps such nonnegative quantities as natural logarithms; signed sums
//! (odd central moments) stay in the linear domain and go through
//! [`NeumaierSum`].

use alloc::vec::Vec;
use core::ops::{Add, AddAssign, Div, Mul};

#[allow(unused_imports)] // unused when std is linked and its inherent methods take over
use num_traits::Float;

/// Errors reported by the numerics primitives.
#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[non_exhaustive]
pub enum NumericsError {
    #[error("log-sum-exp of an empty sequence")]
    EmptySum,
    #[error("ln_gamma is undefined at z = {0}")]
    GammaDomain(f64),
    #[error("invalid moment specification: {0}")]
    InvalidMoment(&'static str),
}

/// Compensated (Kahan-Babuska-Neumaier) summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub const fn new() -> Self {
        Self {
            sum: 0.0,
            compensation: 0.0,
        }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl Extend<f64> for NeumaierSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        s.extend(iter);
        s
    }
}

/// A nonnegative real number stored as its natural logarithm.
///
/// `LogReal::ZERO` is `ln 0 = -inf`. Addition is log-sum-exp, multiplication
/// adds logarithms.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogReal(f64);

impl LogReal {
    pub const ZERO: LogReal = LogReal(f64::NEG_INFINITY);
    pub const ONE: LogReal = LogReal(0.0);

    /// Wraps a value that is already a natural logarithm.
    #[inline]
    pub fn from_ln(ln: f64) -> Self {
        debug_assert!(!ln.is_nan(), "LogReal from NaN");
        LogReal(ln)
    }

    /// Takes the logarithm of a nonnegative linear-domain value.
    #[inline]
    pub fn from_linear(x: f64) -> Self {
        debug_assert!(x >= 0.0, "LogReal encodes nonnegative values only");
        LogReal(x.ln())
    }

    #[inline]
    pub fn ln(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn to_linear(self) -> f64 {
        self.0.exp()
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    /// `self^exponent`; `x^0 = 1` for every `x`, including zero.
    #[inline]
    pub fn powf(self, exponent: f64) -> Self {
        if exponent == 0.0 {
            Self::ONE
        } else {
            LogReal(self.0 * exponent)
        }
    }
}

impl Add for LogReal {
    type Output = LogReal;

    #[inline]
    fn add(self, rhs: LogReal) -> LogReal {
        LogReal(log_add_exp(self.0, rhs.0))
    }
}

impl AddAssign for LogReal {
    #[inline]
    fn add_assign(&mut self, rhs: LogReal) {
        *self = *self + rhs;
    }
}

impl Mul for LogReal {
    type Output = LogReal;

    #[inline]
    fn mul(self, rhs: LogReal) -> LogReal {
        if self.is_zero() || rhs.is_zero() {
            Self::ZERO
        } else {
            LogReal(self.0 + rhs.0)
        }
    }
}

impl Div for LogReal {
    type Output = LogReal;

    #[inline]
    fn div(self, rhs: LogReal) -> LogReal {
        if self.is_zero() {
            Self::ZERO
        } else {
            LogReal(self.0 - rhs.0)
        }
    }
}

/// `ln(e^a + e^b)`.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        hi
    } else if hi == f64::INFINITY {
        hi
    } else {
        hi + (lo - hi).exp().ln_1p()
    }
}

/// `ln sum_i exp(terms_i)` with a max shift.
///
/// The largest term is kept out of the compensated sum of the rest, so a
/// dominant `ln 1 = 0` plus tiny corrections is evaluated as `ln_1p` of the
/// corrections.
pub fn log_sum_exp(terms: &[LogReal]) -> Result<LogReal, NumericsError> {
    let (argmax, max) = terms
        .iter()
        .enumerate()
        .fold(None::<(usize, f64)>, |best, (i, t)| match best {
            Some((_, m)) if m >= t.0 => best,
            _ => Some((i, t.0)),
        })
        .ok_or(NumericsError::EmptySum)?;
    if max == f64::NEG_INFINITY || max == f64::INFINITY {
        return Ok(LogReal(max));
    }
    let rest: NeumaierSum = terms
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != argmax)
        .map(|(_, t)| (t.0 - max).exp())
        .collect();
    Ok(LogReal(max + rest.total().ln_1p()))
}

/// Streaming log-sum-exp for sequences too long to materialise.
#[derive(Debug, Clone, Copy)]
pub struct LogSumAccumulator {
    max: f64,
    scaled: NeumaierSum,
}

impl Default for LogSumAccumulator {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSumAccumulator {
    pub const fn new() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            scaled: NeumaierSum::new(),
        }
    }

    pub fn push(&mut self, term: f64) {
        if term == f64::NEG_INFINITY {
            return;
        }
        if term > self.max {
            let rescale = (self.max - term).exp();
            let old = self.scaled.total() * rescale;
            self.scaled = NeumaierSum::new();
            self.scaled.add(old);
            self.max = term;
        }
        self.scaled.add((term - self.max).exp());
    }

    pub fn total(&self) -> LogReal {
        if self.max == f64::NEG_INFINITY {
            LogReal::ZERO
        } else {
            LogReal(self.max + self.scaled.total().ln())
        }
    }
}

const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

// B_{2k} / (2k (2k - 1)) for k = 1..8
const STIRLING_COEFFS: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

const STIRLING_MIN: f64 = 15.0;

/// `ln Gamma(z)` for `z > 0`.
///
/// Arguments below 15 are shifted up with the recurrence
/// `Gamma(z + 1) = z Gamma(z)`; the Stirling series with eight Bernoulli
/// corrections is then accurate to well below one ulp.
pub fn ln_gamma(z: f64) -> Result<f64, NumericsError> {
    if z.is_nan() || z <= 0.0 {
        return Err(NumericsError::GammaDomain(z));
    }
    if z.is_infinite() {
        return Ok(f64::INFINITY);
    }
    if z == 1.0 || z == 2.0 {
        return Ok(0.0);
    }
    let mut x = z;
    let mut product = 1.0;
    while x < STIRLING_MIN {
        product *= x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv_sq = inv * inv;
    let mut series = 0.0;
    let mut power = inv;
    for c in STIRLING_COEFFS {
        series += c * power;
        power *= inv_sq;
    }
    let stirling = (x - 0.5) * x.ln() - x + HALF_LN_TWO_PI + series;
    Ok(stirling - product.ln())
}

/// `ln C(n, k)`; `k > n` gives `LogReal::ZERO`.
///
/// Computed on `min(k, n - k)`, so `ln_binomial(n, k) == ln_binomial(n, n - k)`
/// holds bit for bit.
pub fn ln_binomial(n: u64, k: u64) -> LogReal {
    if k > n {
        return LogReal::ZERO;
    }
    let k = k.min(n - k);
    if k == 0 {
        return LogReal::ONE;
    }
    if k <= 64 {
        let base = (n - k) as f64;
        let s: NeumaierSum = (1..=k)
            .map(|i| ((base + i as f64) / i as f64).ln())
            .collect();
        return LogReal(s.total());
    }
    // Arguments are >= 65, so ln_gamma cannot fail.
    let lg = |x: u64| ln_gamma(x as f64 + 1.0).unwrap_or(f64::NAN);
    LogReal(lg(n) - lg(k) - lg(n - k))
}

/// Parameters of a central moment `E[(k - np)^order]` with `k ~ Bin(n, p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSpec {
    n: u64,
    p: f64,
    order: u32,
}

impl MomentSpec {
    pub fn new(n: u64, p: f64, order: u32) -> Result<Self, NumericsError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(NumericsError::InvalidMoment("p must lie in [0, 1]"));
        }
        if order == 0 {
            return Err(NumericsError::InvalidMoment("order must be at least 1"));
        }
        Ok(Self { n, p, order })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn order(&self) -> u32 {
        self.order
    }
}

/// Which part of the support a binomial summation visits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SummationWindow {
    /// `np +- W sigma` with `W = max(20, order)`, widened until the log-pmf
    /// at each edge is at least [`TAIL_DROP`] nats below the mode.
    #[default]
    Default,
    /// Every `k` in `0..=n`.
    Full,
}

/// Log-pmf drop (nats) below the mode that the default window must reach at
/// each edge it does not clip at 0 or n. `e^-75 < 1e-32`.
pub const TAIL_DROP: f64 = 75.0;

/// Normalised log-pmf of `Bin(n, p)` over a contiguous range of `k`.
///
/// Values are produced by the ratio recurrence outward from the mode and
/// then renormalised, which keeps neighbouring entries consistent to a few
/// ulp even when `ln C(n, k)` itself is large.
#[derive(Debug, Clone)]
pub struct BinomialLogPmf {
    start: u64,
    log_pmf: Vec<f64>,
}

impl BinomialLogPmf {
    /// Log-pmf over `0..=n`.
    pub fn full(n: u64, p: f64) -> Self {
        Self::over(n, p, 0, n)
    }

    /// Log-pmf over the window a moment of the given order needs.
    pub fn windowed(n: u64, p: f64, order: u32) -> Self {
        Self::with_tail_drop(n, p, order, 0.0)
    }

    /// Like [`windowed`](Self::windowed), but the window keeps growing until
    /// the edges sit `TAIL_DROP + extra_drop` nats below the mode. Useful when
    /// the summand reweights the tails by up to `extra_drop` nats.
    pub fn with_tail_drop(n: u64, p: f64, order: u32, extra_drop: f64) -> Self {
        if p <= 0.0 || p >= 1.0 || n == 0 {
            return Self::full(n, p);
        }
        let nf = n as f64;
        let mean = nf * p;
        let sigma = (nf * p * (1.0 - p)).sqrt();
        let width = f64::from(order.max(20)) * sigma;
        let lo = (mean - width).floor().max(0.0) as u64;
        let hi = ((mean + width).ceil().min(nf) as u64).max(lo);
        let (lo, hi) = widen_to_tail(n, p, lo, hi, TAIL_DROP + extra_drop.max(0.0));
        Self::over(n, p, lo, hi)
    }

    fn over(n: u64, p: f64, lo: u64, hi: u64) -> Self {
        if p <= 0.0 || p >= 1.0 {
            let point = if p <= 0.0 { 0 } else { n };
            let log_pmf = (lo..=hi)
                .map(|k| if k == point { 0.0 } else { f64::NEG_INFINITY })
                .collect();
            return Self { start: lo, log_pmf };
        }
        let mode = binomial_mode(n, p).clamp(lo, hi);
        let log_odds = p.ln() - (-p).ln_1p();
        let len = (hi - lo + 1) as usize;
        let mut log_pmf = alloc::vec![0.0; len];
        let anchor = (mode - lo) as usize;
        log_pmf[anchor] = raw_log_pmf(n, p, mode);
        for k in mode..hi {
            let idx = (k - lo) as usize;
            let step = ((n - k) as f64 / (k + 1) as f64).ln() + log_odds;
            log_pmf[idx + 1] = log_pmf[idx] + step;
        }
        for k in (lo + 1..=mode).rev() {
            let idx = (k - lo) as usize;
            let step = (k as f64 / (n - k + 1) as f64).ln() - log_odds;
            log_pmf[idx - 1] = log_pmf[idx] + step;
        }
        let mut acc = LogSumAccumulator::new();
        for &v in &log_pmf {
            acc.push(v);
        }
        let norm = acc.total().ln();
        for v in &mut log_pmf {
            *v -= norm;
        }
        Self { start: lo, log_pmf }
    }

    pub fn start(&self) -> u64 {
        self.start
    }

    /// `(k, ln P[K = k])` pairs in increasing `k`.
    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.log_pmf
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.start + i as u64, v))
    }
}

fn binomial_mode(n: u64, p: f64) -> u64 {
    (((n as f64 + 1.0) * p).floor() as u64).min(n)
}

fn raw_log_pmf(n: u64, p: f64, k: u64) -> f64 {
    ln_binomial(n, k).ln() + k as f64 * p.ln() + (n - k) as f64 * (-p).ln_1p()
}

fn widen_to_tail(n: u64, p: f64, mut lo: u64, mut hi: u64, drop: f64) -> (u64, u64) {
    let peak = raw_log_pmf(n, p, binomial_mode(n, p));
    let mut step = ((hi - lo) / 4).max(1);
    while lo > 0 && raw_log_pmf(n, p, lo) > peak - drop {
        lo = lo.saturating_sub(step);
        step *= 2;
    }
    let mut step = ((hi - lo) / 4).max(1);
    while hi < n && raw_log_pmf(n, p, hi) > peak - drop {
        hi = (hi + step).min(n);
        step *= 2;
    }
    (lo, hi)
}

/// `E[(k - np)^i]` for `k ~ Bin(n, p)`, summed over the default window.
pub fn binom_central_moment(spec: &MomentSpec) -> f64 {
    binom_scaled_central_moment(spec, 1.0, SummationWindow::Default)
}

/// `E[(scale * (k - np))^i]` for `k ~ Bin(n, p)`.
///
/// Each term is formed as `sign * exp(ln pmf + i ln|scale (k - np)|)` and
/// accumulated with compensated summation, so high orders do not overflow
/// intermediate powers.
pub fn binom_scaled_central_moment(spec: &MomentSpec, scale: f64, window: SummationWindow) -> f64 {
    let pmf = match window {
        SummationWindow::Default => BinomialLogPmf::windowed(spec.n, spec.p, spec.order),
        SummationWindow::Full => BinomialLogPmf::full(spec.n, spec.p),
    };
    let mean = spec.n as f64 * spec.p;
    let order = spec.order;
    let mut acc = NeumaierSum::new();
    for (k, lp) in pmf.iter() {
        let dev = scale * (k as f64 - mean);
        if dev == 0.0 || lp == f64::NEG_INFINITY {
            continue;
        }
        let magnitude = (lp + f64::from(order) * dev.abs().ln()).exp();
        if dev < 0.0 && order % 2 == 1 {
            acc.add(-magnitude);
        } else {
            acc.add(magnitude);
        }
    }
    acc.total()
}

/// Whether `C(lambda, k) * k * Gamma(k / 2) <= lambda^k`, evaluated in the
/// log domain. Inputs outside `3 <= k` or `lambda == 0` return `false`.
pub fn gamma_inequality_holds(lambda: u32, k: u32) -> bool {
    if k < 3 || lambda == 0 {
        return false;
    }
    let lhs_binom = ln_binomial(u64::from(lambda), u64::from(k));
    if lhs_binom.is_zero() {
        return true;
    }
    let Ok(lg) = ln_gamma(f64::from(k) / 2.0) else {
        return false;
    };
    let lhs = lhs_binom.ln() + f64::from(k).ln() + lg;
    let rhs = f64::from(k) * f64::from(lambda).ln();
    lhs <= rhs
}
