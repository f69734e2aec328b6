//! Compilation of weak MSO formulas to minimal track automata.
//!
//! A first-order variable with value `n` occupies a track with a single `1`
//! at position `n`; a set variable's track has a `1` at each member. Words
//! may be padded with all-zero columns.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ast::{Formula, Quantifier, Sort, Term};
use super::eval::{Assignment, Value};
use crate::automata::dfa::{Column, Dfa, MAX_TRACKS};
use crate::automata::relation::UnaryRelation;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrackAutomaton {
    pub vars: Vec<(String, Sort)>,
    pub dfa: Dfa,
}

impl TrackAutomaton {
    /// Column word for an assignment, of length one past the largest value.
    pub fn encode(&self, assignment: &Assignment) -> Result<Vec<Column>> {
        let mut len = 0u64;
        for (v, _) in &self.vars {
            match assignment.get(v) {
                Some(Value::Num(n)) => len = len.max(n + 1),
                Some(Value::Set(s)) => len = len.max(s.iter().next_back().map_or(0, |m| m + 1)),
                None => return Err(Error::MissingAssignment(v.clone())),
            }
        }
        Ok((0..len)
            .map(|pos| {
                self.vars.iter().enumerate().fold(0, |acc, (i, (v, _))| {
                    let bit = match &assignment[v] {
                        Value::Num(n) => *n == pos,
                        Value::Set(s) => s.contains(&pos),
                    };
                    acc | (u32::from(bit) << i)
                })
            })
            .collect())
    }

    pub fn accepts(&self, assignment: &Assignment) -> Result<bool> {
        Ok(self.dfa.accepts(self.encode(assignment)?))
    }

    pub fn num_states(&self) -> usize {
        self.dfa.num_states()
    }

    /// The relation on numbers defined by an automaton over first-order
    /// variables only.
    pub fn to_relation(&self) -> Result<UnaryRelation> {
        if let Some((v, _)) = self.vars.iter().find(|(_, s)| *s == Sort::Set) {
            return Err(Error::Validation(format!(
                "set variable `{v}` cannot become a relation track"
            )));
        }
        Ok(UnaryRelation::from_position_dfa(&self.dfa))
    }
}

/// Compiles `f` over the ordered variable list `vars`; sorts are inferred
/// from the formula, unused variables are first-order.
pub fn compile(f: &Formula, vars: &[&str]) -> Result<TrackAutomaton> {
    let free = f.free_variables()?;
    for (v, _) in &free {
        if !vars.contains(&v.as_str()) {
            return Err(Error::UnboundVariable(v.clone()));
        }
    }
    let typed: Vec<(String, Sort)> = vars
        .iter()
        .map(|v| {
            let sort = free
                .iter()
                .find(|(n, _)| n == v)
                .map_or(Sort::First, |(_, s)| *s);
            (v.to_string(), sort)
        })
        .collect();
    compile_typed(f, &typed)
}

pub fn compile_typed(f: &Formula, vars: &[(String, Sort)]) -> Result<TrackAutomaton> {
    let mut ctx = vars.to_vec();
    let dfa = Compiler.formula(f, &mut ctx)?;
    Ok(TrackAutomaton {
        vars: vars.to_vec(),
        dfa,
    })
}

/// Truth of a sentence in `(ℕ, succ)` under weak set semantics.
pub fn decide_sentence(f: &Formula) -> Result<bool> {
    if let Some((v, _)) = f.free_variables()?.into_iter().next() {
        return Err(Error::FreeVariable(v));
    }
    let a = compile_typed(f, &[])?;
    Ok(a.dfa.is_accepting(a.dfa.initial()))
}

/// Decides whether a transition family over `(x, z, y)` is deterministic:
/// for every source state and every `x`, `z` there is exactly one target
/// state and exactly one `y`.
pub fn check_functional(
    states: &[String],
    family: &BTreeMap<(String, String), Formula>,
) -> Result<bool> {
    decide_sentence(&functionality_sentence(states, family)?)
}

pub fn functionality_sentence(
    states: &[String],
    family: &BTreeMap<(String, String), Formula>,
) -> Result<Formula> {
    let get = |p: &String, q: &String| {
        family
            .get(&(p.clone(), q.clone()))
            .cloned()
            .unwrap_or(Formula::False)
    };
    for ((p, q), f) in family {
        for (v, _) in f.free_variables()? {
            if !["x", "z", "y"].contains(&v.as_str()) {
                return Err(Error::Validation(format!(
                    "transition {p} -> {q} uses variable `{v}`"
                )));
            }
        }
    }
    let mut per_source = Vec::new();
    for p in states {
        let mut options = Vec::new();
        for q in states {
            let mut parts = vec![Formula::quant(Quantifier::ExistsUnique, "y", get(p, q))];
            for r in states.iter().filter(|r| *r != q) {
                let phi = get(p, r);
                let t = phi.fresh_name("t");
                let t = if ["x", "y", "z"].contains(&t.as_str()) {
                    format!("{t}_")
                } else {
                    t
                };
                parts.push(Formula::quant(
                    Quantifier::Forall1,
                    &t,
                    Formula::not(phi.rename_free("y", &t)),
                ));
            }
            options.push(Formula::conj(parts));
        }
        let body = Formula::disj(options);
        per_source.push(Formula::quant(
            Quantifier::Forall1,
            "x",
            Formula::quant(Quantifier::Forall1, "z", body),
        ));
    }
    Ok(Formula::conj(per_source))
}

struct Compiler;

impl Compiler {
    fn formula(&self, f: &Formula, ctx: &mut Vec<(String, Sort)>) -> Result<Dfa> {
        if ctx.len() > MAX_TRACKS {
            return Err(Error::Validation(format!(
                "more than {MAX_TRACKS} simultaneous variables"
            )));
        }
        Ok(match f {
            Formula::True => valid(ctx),
            Formula::False => Dfa::empty(ctx.len()),
            Formula::Eq(a, b) => self.compare(a, b, ctx, |d, e| d == e)?,
            Formula::Less(a, b) => self.compare(a, b, ctx, |d, e| d > e)?,
            Formula::In(t, set, _) => {
                let s = lookup(ctx, set, Sort::Set)?;
                match t.flatten() {
                    (Some(v), a) => {
                        let x = lookup(ctx, v, Sort::First)?;
                        embed(&member_atom(a), &[x, s], ctx)
                    }
                    (None, b) => embed(&const_member_atom(b), &[s], ctx),
                }
            }
            Formula::Sub(a, b, _) => {
                let x = lookup(ctx, a, Sort::Set)?;
                let y = lookup(ctx, b, Sort::Set)?;
                let sub = Dfa::explore(2, true, |&ok, c| ok && c != 1, |&ok| ok);
                embed(&sub, &[x, y], ctx)
            }
            Formula::Not(g) => valid(ctx).difference(&self.formula(g, ctx)?),
            Formula::And(a, b) => self.formula(a, ctx)?.intersect(&self.formula(b, ctx)?),
            Formula::Or(a, b) => self.formula(a, ctx)?.union(&self.formula(b, ctx)?),
            Formula::Implies(a, b) => {
                let na = valid(ctx).difference(&self.formula(a, ctx)?);
                na.union(&self.formula(b, ctx)?)
            }
            Formula::Iff(a, b) => {
                let fa = self.formula(a, ctx)?;
                let fb = self.formula(b, ctx)?;
                fa.product(&fb, |x, y| x == y).intersect(&valid(ctx))
            }
            Formula::Quant(q, v, _, body) => match q {
                Quantifier::Exists1 | Quantifier::Exists2 => self.exists(v, q.sort(), body, ctx)?,
                Quantifier::Forall1 | Quantifier::Forall2 => {
                    let neg = Formula::not((**body).clone());
                    let e = self.exists(v, q.sort(), &neg, ctx)?;
                    valid(ctx).difference(&e)
                }
                Quantifier::ExistsUnique => self.formula(&desugar_unique(v, body), ctx)?,
            },
        })
    }

    fn exists(
        &self,
        v: &str,
        sort: Sort,
        body: &Formula,
        ctx: &mut Vec<(String, Sort)>,
    ) -> Result<Dfa> {
        ctx.push((v.to_string(), sort));
        let inner = self.formula(body, ctx);
        ctx.pop();
        Ok(inner?.project(ctx.len()))
    }

    /// Atoms `a ⋈ b` on terms; `pred(d, e)` decides `v_b - v_a` against
    /// `e = off_a - off_b`.
    fn compare(
        &self,
        a: &Term,
        b: &Term,
        ctx: &[(String, Sort)],
        pred: impl Fn(i64, i64) -> bool + Copy,
    ) -> Result<Dfa> {
        let (va, ka) = a.flatten();
        let (vb, kb) = b.flatten();
        let e = ka as i64 - kb as i64;
        Ok(match (va, vb) {
            (None, None) => {
                if pred(0, e) {
                    valid(ctx)
                } else {
                    Dfa::empty(ctx.len())
                }
            }
            (Some(x), Some(y)) if x == y => {
                lookup(ctx, x, Sort::First)?;
                if pred(0, e) {
                    valid(ctx)
                } else {
                    Dfa::empty(ctx.len())
                }
            }
            (Some(x), Some(y)) => {
                let xi = lookup(ctx, x, Sort::First)?;
                let yi = lookup(ctx, y, Sort::First)?;
                embed(
                    &difference_atom(move |d| pred(d, e), e.unsigned_abs() + 1),
                    &[xi, yi],
                    ctx,
                )
            }
            // v_a + ka ⋈ kb : with v_b = 0, d = -v_a
            (Some(x), None) => {
                let xi = lookup(ctx, x, Sort::First)?;
                let cap = e.unsigned_abs() + 1;
                embed(&value_atom(move |v| pred(-(v as i64), e), cap), &[xi], ctx)
            }
            (None, Some(y)) => {
                let yi = lookup(ctx, y, Sort::First)?;
                let cap = e.unsigned_abs() + 1;
                embed(&value_atom(move |v| pred(v as i64, e), cap), &[yi], ctx)
            }
        })
    }
}

/// `∃y (φ ∧ ∀t (φ[t/y] → t = y))`
fn desugar_unique(v: &str, body: &Formula) -> Formula {
    let t = body.fresh_name(&format!("{v}_"));
    let other = body.rename_free(v, &t);
    let only = Formula::quant(
        Quantifier::Forall1,
        &t,
        Formula::implies(other, Formula::eq(Term::var(&t), Term::var(v))),
    );
    Formula::quant(Quantifier::Exists1, v, Formula::and(body.clone(), only))
}

fn lookup(ctx: &[(String, Sort)], name: &str, sort: Sort) -> Result<usize> {
    match ctx.iter().rposition(|(n, _)| n == name) {
        Some(i) if ctx[i].1 == sort => Ok(i),
        Some(_) => Err(Error::Validation(format!(
            "variable `{name}` used with the wrong sort"
        ))),
        None => Err(Error::UnboundVariable(name.to_string())),
    }
}

/// Words whose first-order tracks each carry exactly one `1`.
fn valid(ctx: &[(String, Sort)]) -> Dfa {
    let fo: Column = ctx
        .iter()
        .enumerate()
        .filter(|(_, (_, s))| *s == Sort::First)
        .fold(0, |acc, (i, _)| acc | (1 << i));
    Dfa::explore(
        ctx.len(),
        Some(0 as Column),
        |s: &Option<Column>, c| match *s {
            Some(seen) if c & fo & seen == 0 => Some(seen | (c & fo)),
            _ => None,
        },
        |s| *s == Some(fo),
    )
}

fn embed(small: &Dfa, positions: &[usize], ctx: &[(String, Sort)]) -> Dfa {
    small
        .cylindrify(ctx.len(), positions)
        .intersect(&valid(ctx))
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum Cmp {
    Start,
    XAhead(u64),
    YAhead(u64),
    Done(bool),
    Dead,
}

/// Two position tracks `x` (bit 0) and `y` (bit 1) with `pred(v_y - v_x)`;
/// `pred` must be constant beyond `±cap`.
fn difference_atom(pred: impl Fn(i64) -> bool, cap: u64) -> Dfa {
    let bump = |k: u64| (k + 1).min(cap + 1);
    Dfa::explore(
        2,
        Cmp::Start,
        |s, c| match (s, c) {
            (Cmp::Start, 0) => Cmp::Start,
            (Cmp::Start, 1) => Cmp::XAhead(1),
            (Cmp::Start, 2) => Cmp::YAhead(1),
            (Cmp::Start, 3) => Cmp::Done(pred(0)),
            (Cmp::XAhead(k), 0) => Cmp::XAhead(bump(*k)),
            (Cmp::XAhead(k), 2) => Cmp::Done(pred(*k as i64)),
            (Cmp::YAhead(k), 0) => Cmp::YAhead(bump(*k)),
            (Cmp::YAhead(k), 1) => Cmp::Done(pred(-(*k as i64))),
            (Cmp::Done(b), 0) => Cmp::Done(*b),
            _ => Cmp::Dead,
        },
        |s| *s == Cmp::Done(true),
    )
    .minimize()
}

/// One position track with `pred(v)`, constant beyond `cap`.
fn value_atom(pred: impl Fn(u64) -> bool, cap: u64) -> Dfa {
    Dfa::explore(
        1,
        Cmp::XAhead(0),
        |s, c| match (s, c) {
            (Cmp::XAhead(k), 0) => Cmp::XAhead((k + 1).min(cap + 1)),
            (Cmp::XAhead(k), 1) => Cmp::Done(pred(*k)),
            (Cmp::Done(b), 0) => Cmp::Done(*b),
            _ => Cmp::Dead,
        },
        |s| *s == Cmp::Done(true),
    )
    .minimize()
}

/// Position track `x` (bit 0) and set track `X` (bit 1) with `x + a ∈ X`.
fn member_atom(a: u64) -> Dfa {
    // YAhead(r): x seen, r more columns before the target column
    Dfa::explore(
        2,
        Cmp::Start,
        |s, c| {
            let (xb, sb) = (c & 1 == 1, c & 2 == 2);
            match s {
                Cmp::Start if !xb => Cmp::Start,
                Cmp::Start if a == 0 => Cmp::Done(sb),
                Cmp::Start => Cmp::YAhead(a - 1),
                Cmp::YAhead(_) | Cmp::Done(_) if xb => Cmp::Dead,
                Cmp::YAhead(0) => Cmp::Done(sb),
                Cmp::YAhead(r) => Cmp::YAhead(r - 1),
                Cmp::Done(b) => Cmp::Done(*b),
                _ => Cmp::Dead,
            }
        },
        |s| *s == Cmp::Done(true),
    )
    .minimize()
}

/// Set track with `b ∈ X`.
fn const_member_atom(b: u64) -> Dfa {
    Dfa::explore(
        1,
        Cmp::XAhead(0),
        |s, c| match s {
            Cmp::XAhead(k) if *k == b => Cmp::Done(c == 1),
            Cmp::XAhead(k) => Cmp::XAhead(k + 1),
            Cmp::Done(v) => Cmp::Done(*v),
            _ => Cmp::Dead,
        },
        |s| *s == Cmp::Done(true),
    )
    .minimize()
}
