//! Abstract syntax of weak MSO formulas over `(ℕ, succ)`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Byte range in the source text.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sort {
    /// A natural number.
    First,
    /// A finite set of natural numbers.
    Set,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Term {
    Var(String, Span),
    Zero,
    Succ(Box<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string(), Span::default())
    }

    pub fn succ(t: Term) -> Term {
        Term::Succ(Box::new(t))
    }

    /// `(variable or None for 0, offset)`
    pub fn flatten(&self) -> (Option<&str>, u64) {
        match self {
            Term::Var(v, _) => (Some(v), 0),
            Term::Zero => (None, 0),
            Term::Succ(t) => {
                let (v, k) = t.flatten();
                (v, k + 1)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quantifier {
    Exists1,
    Forall1,
    Exists2,
    Forall2,
    ExistsUnique,
}

impl Quantifier {
    pub fn sort(&self) -> Sort {
        match self {
            Quantifier::Exists2 | Quantifier::Forall2 => Sort::Set,
            _ => Sort::First,
        }
    }

    fn keyword(&self) -> &'static str {
        match self {
            Quantifier::Exists1 => "ex1",
            Quantifier::Forall1 => "all1",
            Quantifier::Exists2 => "ex2",
            Quantifier::Forall2 => "all2",
            Quantifier::ExistsUnique => "exu",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Formula {
    True,
    False,
    Eq(Term, Term),
    Less(Term, Term),
    In(Term, String, Span),
    Sub(String, String, Span),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Quant(Quantifier, String, Span, Box<Formula>),
}

impl Formula {
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn quant(q: Quantifier, var: &str, body: Formula) -> Formula {
        Formula::Quant(q, var.to_string(), Span::default(), Box::new(body))
    }

    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Eq(a, b)
    }

    pub fn conj(items: impl IntoIterator<Item = Formula>) -> Formula {
        items
            .into_iter()
            .reduce(Formula::and)
            .unwrap_or(Formula::True)
    }

    pub fn disj(items: impl IntoIterator<Item = Formula>) -> Formula {
        items
            .into_iter()
            .reduce(Formula::or)
            .unwrap_or(Formula::False)
    }

    /// Free variables with their sorts, in order of first occurrence.
    pub fn free_variables(&self) -> Result<Vec<(String, Sort)>> {
        let mut out: Vec<(String, Sort)> = Vec::new();
        let mut bound: Vec<(String, Sort)> = Vec::new();
        self.collect_free(&mut bound, &mut out)?;
        Ok(out)
    }

    fn collect_free(
        &self,
        bound: &mut Vec<(String, Sort)>,
        out: &mut Vec<(String, Sort)>,
    ) -> Result<()> {
        let mut note = |name: &str, sort: Sort, bound: &Vec<(String, Sort)>| -> Result<()> {
            let found = bound.iter().rev().find(|(n, _)| n == name).map(|(_, s)| *s);
            let found = found.or_else(|| out.iter().find(|(n, _)| n == name).map(|(_, s)| *s));
            match found {
                Some(s) if s != sort => Err(Error::Validation(format!(
                    "variable `{name}` used both as a number and as a set"
                ))),
                Some(_) => Ok(()),
                None => {
                    out.push((name.to_string(), sort));
                    Ok(())
                }
            }
        };
        match self {
            Formula::True | Formula::False => Ok(()),
            Formula::Eq(a, b) | Formula::Less(a, b) => {
                for t in [a, b] {
                    if let (Some(v), _) = t.flatten() {
                        note(v, Sort::First, bound)?;
                    }
                }
                Ok(())
            }
            Formula::In(t, set, _) => {
                if let (Some(v), _) = t.flatten() {
                    note(v, Sort::First, bound)?;
                }
                note(set, Sort::Set, bound)
            }
            Formula::Sub(a, b, _) => {
                note(a, Sort::Set, bound)?;
                note(b, Sort::Set, bound)
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => {
                a.collect_free(bound, out)?;
                b.collect_free(bound, out)
            }
            Formula::Quant(q, v, _, body) => {
                bound.push((v.clone(), q.sort()));
                let r = body.collect_free(bound, out);
                bound.pop();
                r
            }
        }
    }

    /// All variable names occurring anywhere.
    pub fn all_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_names(&mut |n| {
            out.insert(n.to_string());
        });
        out
    }

    fn visit_names(&self, f: &mut impl FnMut(&str)) {
        let term = |t: &Term, f: &mut dyn FnMut(&str)| {
            if let (Some(v), _) = t.flatten() {
                f(v)
            }
        };
        match self {
            Formula::True | Formula::False => {}
            Formula::Eq(a, b) | Formula::Less(a, b) => {
                term(a, f);
                term(b, f);
            }
            Formula::In(t, s, _) => {
                term(t, f);
                f(s);
            }
            Formula::Sub(a, b, _) => {
                f(a);
                f(b);
            }
            Formula::Not(g) => g.visit_names(f),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => {
                a.visit_names(f);
                b.visit_names(f);
            }
            Formula::Quant(_, v, _, body) => {
                f(v);
                body.visit_names(f);
            }
        }
    }

    /// Renames free occurrences of `from` to `to`; `to` must not be
    /// captured by a binder inside the formula.
    pub fn rename_free(&self, from: &str, to: &str) -> Formula {
        let term = |t: &Term| rename_term(t, from, to);
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Eq(a, b) => Formula::Eq(term(a), term(b)),
            Formula::Less(a, b) => Formula::Less(term(a), term(b)),
            Formula::In(t, s, sp) => {
                Formula::In(term(t), if s == from { to.into() } else { s.clone() }, *sp)
            }
            Formula::Sub(a, b, sp) => {
                let r = |s: &String| if s == from { to.to_string() } else { s.clone() };
                Formula::Sub(r(a), r(b), *sp)
            }
            Formula::Not(g) => Formula::not(g.rename_free(from, to)),
            Formula::And(a, b) => Formula::and(a.rename_free(from, to), b.rename_free(from, to)),
            Formula::Or(a, b) => Formula::or(a.rename_free(from, to), b.rename_free(from, to)),
            Formula::Implies(a, b) => {
                Formula::implies(a.rename_free(from, to), b.rename_free(from, to))
            }
            Formula::Iff(a, b) => Formula::Iff(
                Box::new(a.rename_free(from, to)),
                Box::new(b.rename_free(from, to)),
            ),
            Formula::Quant(q, v, sp, body) => {
                if v == from {
                    self.clone()
                } else {
                    Formula::Quant(
                        q.clone(),
                        v.clone(),
                        *sp,
                        Box::new(body.rename_free(from, to)),
                    )
                }
            }
        }
    }

    /// A name of the form `base`, `base'`, `base''`, … not occurring in `self`.
    pub fn fresh_name(&self, base: &str) -> String {
        let names = self.all_names();
        let mut n = base.to_string();
        while names.contains(&n) {
            n.push('\'');
        }
        n
    }

    /// The same formula with every source span reset.
    pub fn strip_spans(&self) -> Formula {
        let d = Span::default();
        let term = |t: &Term| strip_term(t);
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Eq(a, b) => Formula::Eq(term(a), term(b)),
            Formula::Less(a, b) => Formula::Less(term(a), term(b)),
            Formula::In(t, s, _) => Formula::In(term(t), s.clone(), d),
            Formula::Sub(a, b, _) => Formula::Sub(a.clone(), b.clone(), d),
            Formula::Not(g) => Formula::not(g.strip_spans()),
            Formula::And(a, b) => Formula::and(a.strip_spans(), b.strip_spans()),
            Formula::Or(a, b) => Formula::or(a.strip_spans(), b.strip_spans()),
            Formula::Implies(a, b) => Formula::implies(a.strip_spans(), b.strip_spans()),
            Formula::Iff(a, b) => {
                Formula::Iff(Box::new(a.strip_spans()), Box::new(b.strip_spans()))
            }
            Formula::Quant(q, v, _, body) => {
                Formula::Quant(q.clone(), v.clone(), d, Box::new(body.strip_spans()))
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Quant(..) => 0,
            Formula::Iff(..) => 1,
            Formula::Implies(..) => 2,
            Formula::Or(..) => 3,
            Formula::And(..) => 4,
            Formula::Not(..) => 5,
            _ => 6,
        }
    }
}

fn strip_term(t: &Term) -> Term {
    match t {
        Term::Var(v, _) => Term::var(v),
        Term::Zero => Term::Zero,
        Term::Succ(inner) => Term::succ(strip_term(inner)),
    }
}

fn rename_term(t: &Term, from: &str, to: &str) -> Term {
    match t {
        Term::Var(v, sp) if v == from => Term::Var(to.to_string(), *sp),
        Term::Var(..) | Term::Zero => t.clone(),
        Term::Succ(inner) => Term::succ(rename_term(inner, from, to)),
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v, _) => write!(f, "{v}"),
            Term::Zero => write!(f, "0"),
            Term::Succ(t) => write!(f, "succ({t})"),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // operands with lower or equal precedence are parenthesized, except
        // on the right of the right-associative `->`
        let wrap = |g: &Formula, min: u8, f: &mut fmt::Formatter<'_>| -> fmt::Result {
            if g.precedence() < min {
                write!(f, "({g})")
            } else {
                write!(f, "{g}")
            }
        };
        let p = self.precedence();
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Eq(a, b) => write!(f, "{a} = {b}"),
            Formula::Less(a, b) => write!(f, "{a} < {b}"),
            Formula::In(t, s, _) => write!(f, "{t} in {s}"),
            Formula::Sub(a, b, _) => write!(f, "{a} sub {b}"),
            Formula::Not(g) => {
                write!(f, "!")?;
                wrap(g, p, f)
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Iff(a, b) => {
                let op = match self {
                    Formula::And(..) => "&",
                    Formula::Or(..) => "|",
                    _ => "<->",
                };
                wrap(a, p, f)?;
                write!(f, " {op} ")?;
                wrap(b, p + 1, f)
            }
            Formula::Implies(a, b) => {
                wrap(a, p + 1, f)?;
                write!(f, " -> ")?;
                wrap(b, p, f)
            }
            Formula::Quant(q, v, _, body) => write!(f, "{} {v}. {body}", q.keyword()),
        }
    }
}
