//! Service-curve estimation for closed-loop window flow control.
//!
//! The crate bundles a min-plus calculus toolkit, a packet-level simulator of a
//! window-controlled connection, the statistical tests used to decide whether
//! a probe run reached steady state, and the probing estimator that turns
//! constant-rate delay measurements into an ε-effective service curve.

pub mod calculus;
pub mod stats;
pub mod rng;
pub mod sim;
pub mod traffic;
pub mod estimator;
pub mod scenarios;
