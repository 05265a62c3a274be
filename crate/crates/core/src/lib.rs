//! Proximal sampler toolkit.
//!
//! The proximal sampler alternates a Gaussian forward step
//! `y ~ N(x, εηI)` with a restricted Gaussian oracle backward step
//! `x ~ π_ε^{X|Y}(· | y)`. This crate provides:
//!
//! - [`potential`]: target potentials and their regularity metadata,
//! - [`rgo`]: the oracle via inner minimization and rejection sampling,
//! - [`sampler`]: ensembles of independent chains,
//! - [`gaussian`]: exact Gaussian dynamics and closed-form divergences,
//! - [`density1d`]: a deterministic 1-D grid oracle,
//! - [`rates`]: convergence-rate bounds as functions of the iteration,
//! - [`proxopt`]: the proximal point method and Moreau envelope,
//! - [`config`], [`experiment`], [`report`]: the experiment harness behind
//!   the `proxsampler` binary.

pub mod config;
pub mod density1d;
pub mod error;
pub mod experiment;
pub mod gaussian;
pub mod potential;
pub mod proxopt;
pub mod rates;
pub mod report;
pub mod sampler;
pub mod rgo;

pub use error::{Error, Result};
