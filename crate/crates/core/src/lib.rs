//! Iterative regularization with convex penalties for nonlinear ill-posed
//! problems, applied to potential identification in `-Δu + cu = f`.
//!
//! The crate provides two outer iterations, a homotopy-perturbation scheme
//! (HPICP) and a Landweber scheme (LICP), both run in a Banach-space setting
//! `F: L^2 -> L^r` and stopped by the discrepancy principle.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod banach;
pub mod error;
pub mod experiment;
pub mod forward;
pub mod iterate;
pub mod mesh;
pub mod penalty;
pub mod selftest;

pub use banach::{bregman_distance, duality_map, lr_norm, pairing, relative_error, Exponents, GridFunction};
pub use error::{Error, Result};
pub use forward::{ForwardModel, LinearSolver, Linearization};
pub use iterate::{run, IterationState, Method, NuRule, RunHistory, SolverConfig, StepRule, StopReason};
pub use mesh::{Layout, Mesh};
pub use penalty::{conjugate_grad, ConjugateMap, PenaltyKind, PenaltySpec, TvSolver};
