//! Bounded brute-force evaluation of formulas.
//!
//! First-order quantifiers range over `0..=bound` and set quantifiers over
//! subsets of `0..=bound`. This is exact whenever every witness can be
//! chosen inside the bound, which test formulas are written to ensure.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::ast::{Formula, Quantifier, Term};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Num(u64),
    Set(BTreeSet<u64>),
}

pub type Assignment = BTreeMap<String, Value>;

#[derive(Clone, Copy)]
enum Val {
    Num(u64),
    Set(u128),
}

const MAX_SET_ELEMENT: u64 = 127;

pub fn evaluate(f: &Formula, assignment: &Assignment, bound: u64) -> Result<bool> {
    if bound > MAX_SET_ELEMENT {
        return Err(Error::Validation(format!(
            "evaluation bound must be at most {MAX_SET_ELEMENT}"
        )));
    }
    for (v, _) in f.free_variables()? {
        if !assignment.contains_key(&v) {
            return Err(Error::MissingAssignment(v));
        }
    }
    let mut env: HashMap<String, Vec<Val>> = HashMap::new();
    for (k, v) in assignment {
        let val = match v {
            Value::Num(n) => Val::Num(*n),
            Value::Set(s) => {
                let mut mask = 0u128;
                for &e in s {
                    if e > MAX_SET_ELEMENT {
                        return Err(Error::Validation(format!(
                            "set element {e} exceeds {MAX_SET_ELEMENT}"
                        )));
                    }
                    mask |= 1 << e;
                }
                Val::Set(mask)
            }
        };
        env.insert(k.clone(), vec![val]);
    }
    Ok(Eval { env, bound }.formula(f))
}

/// Convenience for assignments of numbers only.
pub fn numbers(pairs: &[(&str, u64)]) -> Assignment {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), Value::Num(*v)))
        .collect()
}

struct Eval {
    env: HashMap<String, Vec<Val>>,
    bound: u64,
}

impl Eval {
    fn lookup(&self, name: &str) -> Val {
        *self.env[name].last().expect("bound variable")
    }

    fn term(&self, t: &Term) -> u64 {
        match t.flatten() {
            (Some(v), k) => match self.lookup(v) {
                Val::Num(n) => n + k,
                Val::Set(_) => unreachable!("sorts checked"),
            },
            (None, k) => k,
        }
    }

    fn set(&self, name: &str) -> u128 {
        match self.lookup(name) {
            Val::Set(s) => s,
            Val::Num(_) => unreachable!("sorts checked"),
        }
    }

    fn with<T>(&mut self, name: &str, v: Val, f: impl FnOnce(&mut Self) -> T) -> T {
        self.env.entry(name.to_string()).or_default().push(v);
        let r = f(self);
        self.env.get_mut(name).expect("pushed").pop();
        r
    }

    fn formula(&mut self, f: &Formula) -> bool {
        match f {
            Formula::True => true,
            Formula::False => false,
            Formula::Eq(a, b) => self.term(a) == self.term(b),
            Formula::Less(a, b) => self.term(a) < self.term(b),
            Formula::In(t, s, _) => {
                let n = self.term(t);
                n <= MAX_SET_ELEMENT && self.set(s) >> n & 1 == 1
            }
            Formula::Sub(a, b, _) => self.set(a) & !self.set(b) == 0,
            Formula::Not(g) => !self.formula(g),
            Formula::And(a, b) => self.formula(a) && self.formula(b),
            Formula::Or(a, b) => self.formula(a) || self.formula(b),
            Formula::Implies(a, b) => !self.formula(a) || self.formula(b),
            Formula::Iff(a, b) => self.formula(a) == self.formula(b),
            Formula::Quant(q, v, _, body) => {
                let bound = self.bound;
                match q {
                    Quantifier::Exists1 => {
                        (0..=bound).any(|n| self.with(v, Val::Num(n), |e| e.formula(body)))
                    }
                    Quantifier::Forall1 => {
                        (0..=bound).all(|n| self.with(v, Val::Num(n), |e| e.formula(body)))
                    }
                    Quantifier::ExistsUnique => {
                        (0..=bound)
                            .filter(|&n| self.with(v, Val::Num(n), |e| e.formula(body)))
                            .count()
                            == 1
                    }
                    Quantifier::Exists2 => {
                        subsets(bound).any(|m| self.with(v, Val::Set(m), |e| e.formula(body)))
                    }
                    Quantifier::Forall2 => {
                        subsets(bound).all(|m| self.with(v, Val::Set(m), |e| e.formula(body)))
                    }
                }
            }
        }
    }
}

fn subsets(bound: u64) -> impl Iterator<Item = u128> {
    0..(1u128 << (bound + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse::parse_formula;

    fn holds(src: &str, asg: &[(&str, u64)]) -> bool {
        evaluate(&parse_formula(src).unwrap(), &numbers(asg), 16).unwrap()
    }

    #[test]
    fn successor() {
        assert!(holds("y = succ(x)", &[("x", 3), ("y", 4)]));
        assert!(!holds("y = succ(x)", &[("x", 2), ("y", 2)]));
        assert!(holds("(x = 0) & (y = z)", &[("x", 0), ("z", 7), ("y", 7)]));
    }

    #[test]
    fn missing_assignment() {
        let f = parse_formula("y = succ(x)").unwrap();
        assert_eq!(
            evaluate(&f, &numbers(&[("x", 1)]), 4),
            Err(Error::MissingAssignment("y".into()))
        );
    }

    #[test]
    fn sets_and_quantifiers() {
        let f = parse_formula("ex2 X. 0 in X & x in X & all1 t. (t in X & t < x) -> succ(t) in X")
            .unwrap();
        assert!(evaluate(&f, &numbers(&[("x", 4)]), 6).unwrap());
        let mut asg = numbers(&[("x", 2)]);
        asg.insert("Y".into(), Value::Set([1, 2].into()));
        let g = parse_formula("x in Y & !(0 in Y)").unwrap();
        assert!(evaluate(&g, &asg, 4).unwrap());
        assert!(holds("exu y. y = succ(x)", &[("x", 3)]));
    }
}
