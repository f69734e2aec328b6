//! Solving finite and one-counter parity games.

pub mod bmc;
pub mod cycles;
pub mod finite;
pub mod solver;
pub mod strategy;

pub use bmc::{bmc_check, BmcBounds, BmcVerdict};
pub use cycles::{find_bad_run, Config, ConfigLasso};
pub use finite::{FiniteParityGame, FiniteSolution};
pub use solver::{
    certificate_id, solve_one_counter, solve_one_counter_observed, winner_of, SolveOptions,
    SolveStats, WinnerReport,
};
pub use strategy::{
    replay_refutation, verify_regular_strategy, Refutation, RegularStrategy, StrategyVerdict,
};
