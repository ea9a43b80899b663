//! Independent routes to the same moments, used to cross-check the
//! symbolic engine.

pub mod laplace;
pub mod letac;
pub mod monte_carlo;
pub mod polarization;
