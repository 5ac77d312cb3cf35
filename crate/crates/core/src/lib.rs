//! Numerics for stochastic Volterra equations `dX = A (g_α ⋆ dX) + Ψ dW`
//! with a diagonal generator: Mittag-Leffler and Wright functions,
//! product-integration quadrature, α-times resolvent families, Q-Wiener
//! noise and stochastic convolutions.

// NaN must fail every validity check, so `!(x > 0.0)` is intended
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// reference values are quoted at full published precision
#![allow(clippy::excessive_precision)]

pub mod error;
pub mod fracquad;
pub mod noise;
pub mod operators;
pub mod quad;
pub mod resolvent;
pub mod specfun;
pub mod stats;
pub mod stochconv;

pub use error::{Error, Result};
