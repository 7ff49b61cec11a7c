//! Renyi-differential-privacy accounting for the shuffled model of local
//! differential privacy.
//!
//! The crate is `no_std` (it needs `alloc`) and purely computational:
//!
//! - [`numerics`]: log-domain arithmetic, `ln Gamma`, binomial coefficients
//!   and binomial central moments.
//! - [`bounds`]: closed-form upper and lower bounds on the RDP curve of an
//!   `eps0`-LDP randomizer behind a shuffler with `n` clients.
//! - [`accountant`]: RDP to `(eps, delta)` conversion and composition.
//! - [`oracle`]: exact, enumeration-based divergences of small shuffled
//!   instances, used to certify the bounds.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod accountant;
pub mod bounds;
pub mod numerics;
pub mod oracle;

pub use accountant::{
    compose, compose_and_convert, default_order_grid, delta_given_eps, eps_given_delta,
    integer_order_grid, AccountantError, CompositionPlan, DeltaConversion, DpGuarantee, EpsConversion,
};
pub use bounds::{
    best_upper, erlingsson_baseline, lower_bound, lower_bound_simplified, rdp_real_order, ub1,
    ub1_simplified, ub2, BoundError, BoundMethod, RdpCurve, RdpOrder, ShuffleParams, UpperMethod,
};
pub use numerics::{LogReal, MomentSpec, NumericsError};
