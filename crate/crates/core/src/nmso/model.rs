//! Automata and transducers over ℕ with one natural-number register.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::automata::epset::EpSet;
use crate::automata::relation::UnaryRelation;
use crate::error::{Error, Result};
use crate::formula::{compile, parse_formula_in, Formula};

/// Variables of a transition formula: old register, letter, new register.
pub const TRANSITION_VARS: [&str; 3] = ["x", "z", "y"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Acceptance {
    Final(BTreeSet<usize>),
    Colors(Vec<u32>),
}

/// A transition relation over `(x, z, y)`, with its source formula when known.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub formula: Option<String>,
    pub relation: UnaryRelation,
}

impl Transition {
    pub fn from_formula(text: &str) -> Result<Self> {
        let f = parse_formula_in(text, &TRANSITION_VARS)?;
        Self::compiled(&f, Some(text.trim().to_string()))
    }

    pub fn compiled(f: &Formula, text: Option<String>) -> Result<Self> {
        let relation = compile(f, &TRANSITION_VARS)?.to_relation()?;
        Ok(Transition {
            formula: Some(text.unwrap_or_else(|| f.to_string())),
            relation,
        })
    }

    pub fn from_relation(relation: UnaryRelation) -> Result<Self> {
        if relation.arity() != 3 {
            return Err(Error::ArityMismatch {
                expected: 3,
                found: relation.arity(),
            });
        }
        Ok(Transition {
            formula: None,
            relation,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Configuration {
    pub state: usize,
    pub memory: u64,
}

impl Configuration {
    pub fn new(state: usize, memory: u64) -> Self {
        Configuration { state, memory }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NmsoAutomaton {
    pub name: String,
    pub states: Vec<String>,
    pub initial: usize,
    #[serde(with = "crate::pairs")]
    pub transitions: BTreeMap<(usize, usize), Transition>,
    pub acceptance: Acceptance,
    pub deterministic: bool,
}

impl NmsoAutomaton {
    /// Builds an automaton from transition formulas given by state names.
    pub fn from_formulas(
        name: &str,
        states: &[&str],
        initial: &str,
        transitions: &[(&str, &str, &str)],
        acceptance: Acceptance,
        deterministic: bool,
    ) -> Result<Self> {
        let states: Vec<String> = states.iter().map(|s| s.to_string()).collect();
        let mut a = NmsoAutomaton {
            name: name.to_string(),
            initial: 0,
            states,
            transitions: BTreeMap::new(),
            acceptance,
            deterministic,
        };
        a.initial = a.state_index(initial)?;
        for (p, q, f) in transitions {
            let key = (a.state_index(p)?, a.state_index(q)?);
            let t = Transition::from_formula(f)?;
            match a.transitions.get_mut(&key) {
                Some(existing) => {
                    existing.relation = existing.relation.union(&t.relation)?;
                    existing.formula = match (&existing.formula, &t.formula) {
                        (Some(a), Some(b)) => Some(format!("({a}) | ({b})")),
                        _ => None,
                    };
                }
                None => {
                    a.transitions.insert(key, t);
                }
            }
        }
        Ok(a)
    }

    pub fn state_index(&self, name: &str) -> Result<usize> {
        self.states
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| Error::UnknownState(name.to_string()))
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    /// The `(x, z, y)` relation for `p → q`; absent entries are empty.
    pub fn relation(&self, p: usize, q: usize) -> UnaryRelation {
        self.transitions
            .get(&(p, q))
            .map_or_else(|| UnaryRelation::empty(3), |t| t.relation.clone())
    }

    pub fn formula(&self, p: usize, q: usize) -> Option<&str> {
        self.transitions
            .get(&(p, q))
            .and_then(|t| t.formula.as_deref())
    }

    pub fn colors(&self) -> Result<&[u32]> {
        match &self.acceptance {
            Acceptance::Colors(c) => Ok(c),
            Acceptance::Final(_) => Err(Error::WrongAcceptance { expected: "parity" }),
        }
    }

    pub fn finals(&self) -> Result<&BTreeSet<usize>> {
        match &self.acceptance {
            Acceptance::Final(f) => Ok(f),
            Acceptance::Colors(_) => Err(Error::WrongAcceptance {
                expected: "final-state",
            }),
        }
    }

    pub fn max_color(&self) -> Option<u32> {
        match &self.acceptance {
            Acceptance::Colors(c) => c.iter().copied().max(),
            Acceptance::Final(_) => None,
        }
    }

    /// Successor configurations per target state as sets of register values.
    pub fn step_sets(&self, cfg: Configuration, letter: u64) -> Result<Vec<(usize, EpSet)>> {
        let mut out = Vec::new();
        for q in 0..self.num_states() {
            if let Some(t) = self.transitions.get(&(cfg.state, q)) {
                let s = t
                    .relation
                    .section(&[Some(cfg.memory), Some(letter), None])?;
                if !s.is_empty() {
                    out.push((q, s));
                }
            }
        }
        Ok(out)
    }

    /// All successor configurations; fails if there are infinitely many.
    pub fn step(&self, cfg: Configuration, letter: u64) -> Result<BTreeSet<Configuration>> {
        let mut out = BTreeSet::new();
        for (q, s) in self.step_sets(cfg, letter)? {
            let members = s.finite_members().ok_or_else(|| {
                Error::Validation(format!(
                    "infinitely many successors of ({}, {}) on {letter}",
                    self.states[cfg.state], cfg.memory
                ))
            })?;
            out.extend(members.into_iter().map(|j| Configuration::new(q, j)));
        }
        Ok(out)
    }

    /// The unique successor of a deterministic automaton.
    pub fn step_det(&self, cfg: Configuration, letter: u64) -> Result<Configuration> {
        let next = self.step(cfg, letter)?;
        let mut it = next.iter();
        match (it.next(), it.next()) {
            (Some(&c), None) => Ok(c),
            _ => Err(Error::Inconsistent(format!(
                "{} successors of ({}, {}) on {letter}",
                next.len(),
                self.states[cfg.state],
                cfg.memory
            ))),
        }
    }

    pub fn initial_configuration(&self) -> Configuration {
        Configuration::new(self.initial, 0)
    }

    /// Runs a deterministic automaton over a finite word.
    pub fn run_det(&self, word: &[u64]) -> Result<Vec<Configuration>> {
        let mut run = vec![self.initial_configuration()];
        for &m in word {
            let last = *run.last().expect("nonempty");
            run.push(self.step_det(last, m)?);
        }
        Ok(run)
    }
}

/// When a transducer produces its outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputTiming {
    /// One output after each input letter; the initial configuration is silent.
    AfterInput,
    /// An output at every configuration, starting with the initial one.
    OutputsFirst,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NmsoTransducer {
    pub name: String,
    pub states: Vec<String>,
    pub initial: usize,
    #[serde(with = "crate::pairs")]
    pub transitions: BTreeMap<(usize, usize), UnaryRelation>,
    /// Per state, a relation `(register, output)`.
    pub outputs: Vec<UnaryRelation>,
    pub timing: OutputTiming,
}

impl NmsoTransducer {
    pub fn relation(&self, p: usize, q: usize) -> UnaryRelation {
        self.transitions
            .get(&(p, q))
            .cloned()
            .unwrap_or_else(|| UnaryRelation::empty(3))
    }

    /// Checks that transitions and outputs are functional.
    pub fn validate(&self) -> Result<()> {
        if self.outputs.len() != self.states.len() || self.initial >= self.states.len() {
            return Err(Error::Validation(
                "transducer tables do not match its states".into(),
            ));
        }
        for (p, _) in self.states.iter().enumerate() {
            let rels: Vec<UnaryRelation> = (0..self.states.len())
                .map(|q| self.relation(p, q))
                .collect();
            if let Some(w) = super::ops::determinism_witness(&rels)? {
                if w.kind != super::ops::WitnessKind::Uncovered {
                    return Err(Error::Validation(format!(
                        "transitions from `{}` are not functional at x={}, z={}",
                        self.states[p], w.x, w.z
                    )));
                }
            }
            let out = &self.outputs[p];
            if out.arity() != 2 {
                return Err(Error::ArityMismatch {
                    expected: 2,
                    found: out.arity(),
                });
            }
            if let Some(w) = out.functionality_witness()? {
                return Err(Error::Validation(format!(
                    "output of `{}` is not functional at register {}",
                    self.states[p], w[0]
                )));
            }
        }
        Ok(())
    }

    pub fn output(&self, cfg: Configuration) -> Result<u64> {
        let s = self.outputs[cfg.state].section(&[Some(cfg.memory), None])?;
        s.least().ok_or_else(|| {
            Error::Inconsistent(format!(
                "no output defined at ({}, {})",
                self.states[cfg.state], cfg.memory
            ))
        })
    }

    pub fn step(&self, cfg: Configuration, letter: u64) -> Result<Configuration> {
        let mut found = None;
        for q in 0..self.states.len() {
            if let Some(r) = self.transitions.get(&(cfg.state, q)) {
                if let Some(j) = r.section(&[Some(cfg.memory), Some(letter), None])?.least() {
                    found = Some(Configuration::new(q, j));
                    break;
                }
            }
        }
        found.ok_or_else(|| {
            Error::Inconsistent(format!(
                "transducer has no move from ({}, {}) on {letter}",
                self.states[cfg.state], cfg.memory
            ))
        })
    }

    pub fn initial_configuration(&self) -> Configuration {
        Configuration::new(self.initial, 0)
    }

    /// Outputs on a finite input word: one per letter, plus a leading one
    /// for transducers that move first.
    pub fn run(&self, input: &[u64]) -> Result<Vec<u64>> {
        let mut cfg = self.initial_configuration();
        let mut out = Vec::with_capacity(input.len() + 1);
        if self.timing == OutputTiming::OutputsFirst {
            out.push(self.output(cfg)?);
        }
        for &m in input {
            cfg = self.step(cfg, m)?;
            out.push(self.output(cfg)?);
        }
        Ok(out)
    }
}

/// Runs a transducer after validating it.
pub fn run_transducer(c: &NmsoTransducer, input: &[u64]) -> Result<Vec<u64>> {
    c.validate()?;
    c.run(input)
}
