//! Zero-sum two-person perfect-information semi-Markov games under the
//! limiting ratio-average (undiscounted) payoff.
//!
//! A game is solved per initial state by enumerating pure stationary
//! strategies of both players, evaluating every pair through the Cesàro
//! limit of its induced chain, and locating a pure saddle point of the
//! resulting payoff matrix. Collecting the saddle strategies over initial
//! states yields optimal pure semi-stationary strategies and the value
//! vector.
//!
//! ```
//! use pismg::{parse_game, solve, SolveOptions, EXAMPLE_S5};
//!
//! let game = parse_game(EXAMPLE_S5).unwrap();
//! let report = solve(&game, &SolveOptions::default()).unwrap();
//! assert!((report.value[2] - 2.9).abs() < 1e-12);
//! ```

pub mod corpus;
pub mod game;
pub mod markov;
pub mod simulator;
pub mod solver;
pub mod strategy;

pub use game::{
    expected_sojourn, parse_game, validate, Game, GameError, Player, Sojourn, ValidationReport,
    EXAMPLE_S5,
};
pub use markov::{CesaroMethod, CesaroOptions, StochasticMatrix};
pub use simulator::{estimate_payoff, simulate, PayoffEstimate, TrajectoryStats};
pub use solver::{
    build_payoff_matrix, check_all_2x2, find_pure_saddle, payoff_vector, solve, Certificate,
    PayoffMatrix, SaddleResult, SolveError, SolveOptions, SolveReport,
};
pub use strategy::{
    enumerate_pure, induce, InducedChain, PureStrategy, SemiStationaryStrategy, StrategySpace,
};
