//! Discrete and continuous bursting gene-expression models: stationary laws,
//! transient evolution, stochastic simulation, the post-jump transition
//! operator, inverse rate estimation and mode analysis.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod continuous;
pub mod discrete;
pub mod io;
pub mod models;
pub mod numerics;
pub mod par;
