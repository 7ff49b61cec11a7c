//! RDP composition and conversion to approximate `(eps, delta)`-DP.

use alloc::vec::Vec;

#[allow(unused_imports)] // unused when std is linked and its inherent methods take over
use num_traits::Float;

use crate::bounds::{best_upper, BoundError, RdpCurve, RdpOrder, ShuffleParams};

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[non_exhaustive]
pub enum AccountantError {
    #[error("curve has no orders")]
    EmptyCurve,
    #[error("delta must lie in (0, 1), got {0}")]
    InvalidDelta(f64),
    #[error("eps must be finite and > 0, got {0}")]
    InvalidEps(f64),
    #[error("composition needs at least one round")]
    ZeroRounds,
    #[error("curves in a heterogeneous plan must share one order grid")]
    MisalignedGrid,
    #[error(transparent)]
    Bound(#[from] BoundError),
}

/// An `(eps, delta)` approximate-DP guarantee.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpGuarantee {
    eps: f64,
    delta: f64,
}

impl DpGuarantee {
    pub fn new(eps: f64, delta: f64) -> Result<Self, AccountantError> {
        if !(eps.is_finite() && eps >= 0.0) {
            return Err(AccountantError::InvalidEps(eps));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(AccountantError::InvalidDelta(delta));
        }
        Ok(Self { eps, delta })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// Rounds of an adaptive composition.
#[derive(Debug, Clone, PartialEq)]
pub enum CompositionPlan {
    /// `rounds` repetitions of the same mechanism.
    Identical { rounds: u64, curve: RdpCurve },
    /// One curve per round, all on the same order grid.
    Heterogeneous(Vec<RdpCurve>),
}

/// Sums the per-round curves order by order.
pub fn compose(plan: &CompositionPlan) -> Result<RdpCurve, AccountantError> {
    match plan {
        CompositionPlan::Identical { rounds: 0, .. } => Err(AccountantError::ZeroRounds),
        CompositionPlan::Identical { rounds, curve } => Ok(curve.scaled(*rounds as f64)),
        CompositionPlan::Heterogeneous(curves) => {
            let (first, rest) = curves.split_first().ok_or(AccountantError::ZeroRounds)?;
            let mut sums: Vec<(RdpOrder, f64)> = first.entries().to_vec();
            for curve in rest {
                if curve.len() != sums.len() {
                    return Err(AccountantError::MisalignedGrid);
                }
                for (acc, &(order, eps)) in sums.iter_mut().zip(curve.entries()) {
                    if acc.0 != order {
                        return Err(AccountantError::MisalignedGrid);
                    }
                    acc.1 += eps;
                }
            }
            Ok(RdpCurve::new(sums)?)
        }
    }
}

/// Result of [`eps_given_delta`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsConversion {
    pub eps: f64,
    pub delta: f64,
    /// Order attaining the minimum.
    pub order: RdpOrder,
    /// Set when the raw minimum was negative and has been clamped to 0.
    pub clamped: bool,
}

impl EpsConversion {
    pub fn guarantee(&self) -> DpGuarantee {
        DpGuarantee {
            eps: self.eps,
            delta: self.delta,
        }
    }
}

/// Result of [`delta_given_eps`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaConversion {
    pub delta: f64,
    pub order: RdpOrder,
    /// Set when the raw minimum fell outside `(0, 1]` and was clamped.
    pub clamped: bool,
}

/// `eps(lambda) + (ln(1/delta) + (lambda-1) ln(1-1/lambda) - ln lambda) / (lambda-1)`
fn eps_candidate(order: RdpOrder, rdp_eps: f64, ln_inv_delta: f64) -> f64 {
    let l = order.value();
    let lm1 = l - 1.0;
    rdp_eps + (ln_inv_delta + lm1 * (-1.0 / l).ln_1p() - l.ln()) / lm1
}

/// `ln` of `exp((lambda-1)(eps(lambda) - eps)) / (lambda-1) * (1-1/lambda)^lambda`
fn ln_delta_candidate(order: RdpOrder, rdp_eps: f64, eps: f64) -> f64 {
    let l = order.value();
    let lm1 = l - 1.0;
    lm1 * (rdp_eps - eps) - lm1.ln() + l * (-1.0 / l).ln_1p()
}

/// Smallest `eps` such that the curve implies `(eps, delta)`-DP, minimised
/// over the curve's orders. Ties go to the smaller order.
pub fn eps_given_delta(curve: &RdpCurve, delta: f64) -> Result<EpsConversion, AccountantError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(AccountantError::InvalidDelta(delta));
    }
    let ln_inv_delta = -delta.ln();
    let (order, raw) = curve
        .entries()
        .iter()
        .map(|&(o, e)| (o, eps_candidate(o, e, ln_inv_delta)))
        .fold(None, |best: Option<(RdpOrder, f64)>, cand| match best {
            Some(b) if b.1 <= cand.1 => Some(b),
            _ => Some(cand),
        })
        .ok_or(AccountantError::EmptyCurve)?;
    Ok(EpsConversion {
        eps: raw.max(0.0),
        delta,
        order,
        clamped: raw < 0.0,
    })
}

/// Smallest `delta` such that the curve implies `(eps, delta)`-DP, minimised
/// over the curve's orders and clamped into `[f64::MIN_POSITIVE, 1]`.
pub fn delta_given_eps(curve: &RdpCurve, eps: f64) -> Result<DeltaConversion, AccountantError> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(AccountantError::InvalidEps(eps));
    }
    let (order, ln_delta) = curve
        .entries()
        .iter()
        .map(|&(o, e)| (o, ln_delta_candidate(o, e, eps)))
        .fold(None, |best: Option<(RdpOrder, f64)>, cand| match best {
            Some(b) if b.1 <= cand.1 => Some(b),
            _ => Some(cand),
        })
        .ok_or(AccountantError::EmptyCurve)?;
    let raw = ln_delta.exp();
    let delta = raw.clamp(f64::MIN_POSITIVE, 1.0);
    Ok(DeltaConversion {
        delta,
        order,
        clamped: delta != raw,
    })
}

/// Default order grid: every integer in `2..=256` plus 384, 512, 768 and 1024.
pub fn default_order_grid() -> Vec<RdpOrder> {
    (2..=256u32)
        .chain([384, 512, 768, 1024])
        .map(|k| RdpOrder::integer(k).expect("k >= 2"))
        .collect()
}

/// Integer orders `2..=lambda_max`.
pub fn integer_order_grid(lambda_max: u32) -> Vec<RdpOrder> {
    (2..=lambda_max)
        .map(|k| RdpOrder::integer(k).expect("k >= 2"))
        .collect()
}

/// Per-round curve from [`best_upper`] on `grid`, composed over `rounds`
/// identical rounds and converted at `delta`.
pub fn compose_and_convert(
    params: &ShuffleParams,
    rounds: u64,
    delta: f64,
    grid: &[RdpOrder],
) -> Result<EpsConversion, AccountantError> {
    if rounds == 0 {
        return Err(AccountantError::ZeroRounds);
    }
    let curve = RdpCurve::from_fn(grid, |o| Ok(best_upper(params, o)))?;
    let composed = compose(&CompositionPlan::Identical { rounds, curve })?;
    eps_given_delta(&composed, delta)
}
