//! Exact and floating-point moments of rank-one Wishart matrices `𝒳 = XXᵀ`
//! with `X ~ N(0, P)`.
//!
//! The symbolic engine ([`moments::MomentEngine`]) produces matrix product
//! moments as polynomials in `P` with coefficients in the power traces
//! `t_k = tr(P^k)`. These are evaluated in a [`CovarianceContext`] over exact
//! rationals or `f64`. The [`oracles`] module provides independent
//! routes (permutation sums, Monte Carlo, polarization, Laplace transforms)
//! and [`inequalities`] checks the Loewner-order estimates built on top.

pub mod central;
pub mod combinatorics;
pub mod error;
pub mod inequalities;
pub mod limits;
pub mod matrix;
pub mod moments;
pub mod oracles;
pub mod scalar;
pub mod trace_algebra;
pub mod verify;

pub use combinatorics::{CycleDecomposition, MultiIndex};
pub use error::{Error, Result};
pub use limits::Limits;
pub use matrix::Matrix;
pub use moments::{Aggregates, MomentEngine, NormMethod, PowerMethod, TraceArray};
pub use scalar::{Rational, Ring, Scalar};
pub use trace_algebra::{
    ContextOptions, CovarianceContext, CovarianceInput, MatrixPolynomial, TraceMonomial,
    TracePolynomial,
};
