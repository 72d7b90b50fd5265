//! Layer-potential solvers for the Dirichlet problem for the Laplace equation
//! in a domain with a small hole `Ω(ε) = Ω^o \ ε·cl Ω^i`, and a laboratory for
//! testing whether solution families continue analytically across ε = 0.
//!
//! * [`kernels`]: fundamental solution, zonal harmonics, sphere eigenvalues.
//! * [`spectral`]: exact mode-by-mode solver for concentric spheres, any n ≥ 3.
//! * [`mesh3`] and [`bem3`]: triangulated geometry and a collocation solver in n = 3.
//! * [`continuation`]: signed ε sweeps, power-series fits and verdicts.
//! * [`convergence`]: mesh refinement studies against the mode solver or Richardson extrapolation.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use serde::{Deserialize, Serialize};

pub mod bem3;
pub mod continuation;
pub mod convergence;
pub mod exec;
pub mod kernels;
pub mod linalg;
pub mod mesh3;
pub mod poly;
pub mod quadrature;
pub mod spectral;

pub use exec::Execution;
pub use kernels::{Dimension, Point};
pub use poly::EpsPoly;

/// Where a field is observed: at fixed `p` (macroscopic) or at `ε·q` for
/// fixed `q` (microscopic).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    Macroscopic,
    Microscopic,
}
