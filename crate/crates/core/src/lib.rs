//! Numerical toolkit for `C^r` surface dynamics: orbit and derivative
//! evaluation, Lyapunov and exterior-power growth, separated-set entropy
//! estimates, defect-sequence combinatorics, curve volume growth and an
//! affine-chart reparametrization engine for curves in Bowen balls.

pub mod combinatorics;
pub mod constants;
pub mod curve_engine;
pub mod dynamics;
pub mod entropy;
pub mod error;
pub mod geometry;
pub mod lyapunov;
pub mod reparametrization;
pub mod reports;

pub use error::{Error, Result};
