//! Automata over ℕ with a register, and their transducers.

pub mod examples;
pub mod format;
pub mod model;
pub mod ops;
pub mod parity;

pub use format::{automaton_dot, parse_nmso, to_nmso};
pub use model::{
    run_transducer, Acceptance, Configuration, NmsoAutomaton, NmsoTransducer, OutputTiming,
    Transition,
};
pub use ops::{membership_finite, nonempty_finite, validate, ValidationReport};
pub use parity::{certify_run, nonempty_parity, ParityWitness};
