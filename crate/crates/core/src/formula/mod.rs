//! Weak monadic second-order logic over the successor structure of ℕ.

pub mod ast;
pub mod compile;
pub mod eval;
pub mod parse;

pub use ast::{Formula, Quantifier, Sort, Span, Term};
pub use compile::{check_functional, compile, compile_typed, decide_sentence, TrackAutomaton};
pub use eval::{evaluate, Assignment, Value};
pub use parse::{parse_formula, parse_formula_in};
