#![allow(clippy::needless_range_loop)]

pub mod automata;
pub mod error;
pub mod formula;
pub mod game;
pub mod nmso;
pub mod pairs;
pub mod par;
pub mod solve;
pub mod synth;

pub use error::{Error, Result};
