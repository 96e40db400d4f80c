//! Cores of sparse random digraphs.
//!
//! A `(k1,k2)`-core is the largest sub-digraph in which every vertex has
//! in-degree at least `k1` and out-degree at least `k2`. This crate computes
//! the density `c*` at which such a core appears in a uniformly random
//! digraph with `cn` arcs, predicts its size above `c*`, and checks both
//! against exact peeling, a randomized deletion process and the deterministic
//! ODE that tracks that process.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod digraph;
pub mod error;
pub mod experiment;
pub mod ode;
pub mod poisson;
pub mod rng;
pub mod threshold;

pub use digraph::{
    brute_force_core, peel_core, run_random_deletion, sample_digraph, sample_sequence_model, state_of,
    DetailedState, Digraph, MultiDigraphSeq,
};
pub use error::{Error, Result};
pub use ode::{conservation_report, initial_state, integrate, OdeOptions, OdeOutcome, OdeState, OdeVerdict};
pub use poisson::{invert_psi, phi, poisson_pmf, poisson_tail, psi, trunc_var, TruncSpec};
pub use threshold::{
    alpha_bound, asymptotic_cstar, big_h, compute_cstar, constraint_zo, fixed_point, predict_core,
    psi_objective, AsymptoticVariant, CoreParams, CorePrediction, FixedPointOutcome,
    Supercritical, ThresholdResult,
};
