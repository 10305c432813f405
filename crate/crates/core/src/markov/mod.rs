//! Stochastic-matrix algebra: characteristic polynomials, unit-root
//! deflation, Cesàro limiting matrices and recurrent/transient
//! decomposition.
//!
//! Three routes to the limiting matrix `Q* = lim (1/n) Σ Q^m` are offered.
//! [`cesaro_structural`] builds it from class structure and is the default
//! everywhere; [`cesaro_lazari`] follows the characteristic-polynomial
//! construction and [`cesaro_averaging`] the defining partial averages.
//! They are independent of one another and serve as mutual oracles.

mod cesaro;
mod chain;
mod matrix;
mod poly;

use thiserror::Error;

pub use cesaro::{
    cesaro, cesaro_averaging, cesaro_lazari, cesaro_structural, projection_residual,
    CesaroDiagnostics, CesaroMethod, CesaroOptions, CesaroResult, AVERAGING_MAX_TERMS,
    AVERAGING_TOL, PROJECTION_TOL, ROWSUM_TOL,
};
pub use chain::{decompose_chain, ChainDecomposition, EDGE_TOL};
pub use matrix::{Square, StochasticMatrix};
pub use poly::{char_poly, deflate_unit_root, Polynomial, DEFLATION_TOL, LAZARI_MAX_N};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MarkovError {
    #[error("matrix is empty")]
    Empty,
    #[error("row {row} has {len} entries, expected {n}")]
    NotSquare { row: usize, len: usize, n: usize },
    #[error("entry ({row}, {col}) = {value} is negative or not finite")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("row {row} sums to {sum}, not 1")]
    NotStochastic { row: usize, sum: f64 },
    #[error("dimension {n} exceeds {max} for the characteristic-polynomial method; use the structural method")]
    TooLarge { n: usize, max: usize },
    #[error("input not stochastic-like: characteristic polynomial at 1 is {residual}")]
    NoUnitRoot { residual: f64 },
    #[error("ill-conditioned multiplicity: after removing {m1} unit roots the quotient at 1 is {t_one}; use the structural method")]
    IllConditioned { m1: usize, t_one: f64 },
    #[error("lazari normalization failed: row sums of T(Q) spread {spread} around {row_sum}; use the structural method")]
    NormalizationFailed { spread: f64, row_sum: f64 },
    #[error("numerically degenerate chain")]
    Degenerate,
}
