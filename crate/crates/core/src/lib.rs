//! Monte-Carlo solver for fractional semilinear problems on a ball,
//!
//! ```text
//! Δ_s u(x) + Σ_l c_l(x) u(x)^l = u(x),  x ∈ B(0, R),     u = φ outside,
//! ```
//!
//! based on a branching `(2s)`-stable particle system: `u(x)` is the mean of a
//! multiplicative functional over random trees rooted at `x`.
//!
//! * [`special`]: gamma, Gauss hypergeometric, benchmark data `Φ_{k,s}`, `Ψ_{k,s}`.
//! * [`stable`]: subordinator and stable-increment sampling, reproducible streams.
//! * [`walk`]: one particle's path until its clock rings or it leaves the ball.
//! * [`branching`]: problem definitions, tree simulation, estimates of `u`.
//! * [`wellposed`]: existence criteria (small data, `L^p` bound).
//! * [`driver`]: JSON run configurations, CSV profiles, JSON reports.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod branching;
pub mod driver;
pub mod error;
pub mod selftest;
pub mod special;
pub mod stable;
pub mod stats;
pub mod walk;
pub mod wellposed;

pub use error::{Error, Result};
