//! Distributed saddle-point optimization under second-order similarity.
//!
//! The crate simulates a star network (one server, `n - 1` clients) solving
//!
//! ```text
//! min_{x in X} max_{y in Y}  f(x, y) = (1/n) sum_i f_i(x, y)
//! ```
//!
//! through the stacked monotone operators `F_i(z) = [grad_x f_i; -grad_y f_i]`.
//! It provides:
//!
//! * [`problem`]: operator families, constraint sets and constant estimation;
//! * [`netsim`]: client sampling plus an exact ledger of communication and
//!   local gradient calls;
//! * [`algorithms`]: stochastic variance-reduced optimistic gradient sliding
//!   (SVOGS) with automatic parameters, extragradient and full-batch optimistic
//!   gradient sliding baselines;
//! * [`hardinstances`]: chain-structured lower-bound instances and zero-chain
//!   verification;
//! * [`metrics`]: duality gap, gradient mapping, Lyapunov potential and
//!   reference solutions.
//!
//! Node index `0` is the server throughout; the conventional 1-based label of
//! node `i` is `i + 1`.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod algorithms;
pub mod constraint;
pub mod data;
pub mod hardinstances;
pub mod linalg;
pub mod metrics;
pub mod netsim;
pub mod point;
pub mod problem;
pub mod rng;

mod error;

pub use error::Error;
pub use point::Point;

pub type Result<T> = core::result::Result<T, Error>;
