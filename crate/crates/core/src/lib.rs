//! Study toolkit for two interconnector cost-benefit questions:
//!
//! * zonal day-ahead clearing with interconnector losses internalized as
//!   linear or piecewise-linear loss factors ([`market`], [`loss`]);
//! * frequency-security remedial actions for low-inertia hours, sized by a
//!   single-machine frequency model and priced per strategy ([`freq`],
//!   [`planning`], [`cost`]).
//!
//! Batch work (market years, sizing sweeps, bootstrap replicates) goes through
//! [`exec`], which runs on rayon when the `parallel` feature is enabled and
//! sequentially otherwise. Results never depend on the worker count.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cost;
pub mod exec;
pub mod freq;
pub mod loss;
pub mod lp;
pub mod market;
pub mod model;
pub mod planning;
pub mod rng;
pub mod synth;

pub use exec::Execution;
