//! The `.nmso` text format.
//!
//! ```text
//! automaton L1 {
//!   states: q0, q, r;
//!   initial: q0;
//!   accept: F(q);              # or colors(q0->1, q->2)
//!   det: true;
//!   trans q0 -> q : (x = 0) & (y = z);
//! }
//! ```
//! `#` starts a comment running to the end of the line.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::model::{Acceptance, NmsoAutomaton, Transition};
use crate::error::{Error, Result};
use crate::formula::parse::syntax_error;
use crate::formula::parse_formula_in;

use super::model::TRANSITION_VARS;

/// Parses one automaton from `.nmso` text.
pub fn parse_nmso(src: &str) -> Result<NmsoAutomaton> {
    // blank out comments, keeping offsets intact
    let clean: String = src
        .lines()
        .map(|l| match l.find('#') {
            Some(i) => format!("{}{}", &l[..i], " ".repeat(l.len() - i)),
            None => l.to_string(),
        })
        .collect::<Vec<_>>()
        .join("\n");
    let err = |off: usize, msg: &str| syntax_error(src, off, msg);
    let open = clean
        .find('{')
        .ok_or_else(|| err(0, "expected `automaton NAME {`"))?;
    let header: Vec<&str> = clean[..open].split_whitespace().collect();
    let name = match header.as_slice() {
        ["automaton", name] if is_ident(name) => name.to_string(),
        _ => return Err(err(0, "expected `automaton NAME {`")),
    };
    let close = clean
        .rfind('}')
        .ok_or_else(|| err(clean.len(), "missing closing `}`"))?;
    if !clean[close + 1..].trim().is_empty() {
        return Err(err(close + 1, "unexpected text after closing `}`"));
    }
    let body = &clean[open + 1..close];
    let body_off = open + 1;

    let mut states: Option<Vec<String>> = None;
    let mut initial: Option<(String, usize)> = None;
    let mut accept: Option<(String, usize)> = None;
    let mut det: Option<bool> = None;
    let mut trans: Vec<(String, String, String, usize)> = Vec::new();

    let mut start = 0;
    for piece in body.split_inclusive(';') {
        let stmt_off = body_off + start;
        start += piece.len();
        let Some(stmt) = piece.strip_suffix(';') else {
            if piece.trim().is_empty() {
                continue;
            }
            return Err(err(stmt_off + leading_ws(piece), "missing `;`"));
        };
        if stmt.trim().is_empty() {
            continue;
        }
        let off = stmt_off + leading_ws(stmt);
        let stmt = stmt.trim();
        if let Some(rest) = stmt.strip_prefix("trans") {
            let colon = rest
                .find(':')
                .ok_or_else(|| err(off, "expected `trans p -> q : FORMULA`"))?;
            let arrow: Vec<&str> = rest[..colon].split("->").map(str::trim).collect();
            let [p, q] = arrow.as_slice() else {
                return Err(err(off, "expected `trans p -> q : FORMULA`"));
            };
            let f_off = off + "trans".len() + colon + 1;
            trans.push((
                p.to_string(),
                q.to_string(),
                rest[colon + 1..].to_string(),
                f_off,
            ));
            continue;
        }
        let (key, value) = stmt
            .split_once(':')
            .ok_or_else(|| err(off, "expected `key: value`"))?;
        let value = value.trim();
        match key.trim() {
            "states" => {
                let list: Vec<String> = value.split(',').map(|s| s.trim().to_string()).collect();
                if list.iter().any(|s| !is_ident(s)) {
                    return Err(err(off, "state names must be identifiers"));
                }
                states = Some(list);
            }
            "initial" => initial = Some((value.to_string(), off)),
            "accept" => accept = Some((value.to_string(), off)),
            "det" => {
                det = Some(match value {
                    "true" => true,
                    "false" => false,
                    _ => return Err(err(off, "det must be `true` or `false`")),
                })
            }
            other => return Err(err(off, &format!("unknown key `{other}`"))),
        }
    }
    let states = states.ok_or_else(|| err(open, "missing `states:`"))?;
    let index = |s: &str, off: usize| {
        states
            .iter()
            .position(|x| x == s)
            .ok_or_else(|| match err(off, "") {
                Error::Syntax { line, column, .. } => Error::Syntax {
                    line,
                    column,
                    offset: off,
                    message: format!("unknown state `{s}`"),
                },
                e => e,
            })
    };
    let (init_name, init_off) = initial.ok_or_else(|| err(open, "missing `initial:`"))?;
    let init = index(&init_name, init_off)?;
    let (acc_text, acc_off) = accept.ok_or_else(|| err(open, "missing `accept:`"))?;
    let acceptance = if let Some(inner) = acc_text
        .strip_prefix("F(")
        .and_then(|s| s.strip_suffix(')'))
    {
        let mut set = BTreeSet::new();
        for s in inner.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            set.insert(index(s, acc_off)?);
        }
        Acceptance::Final(set)
    } else if let Some(inner) = acc_text
        .strip_prefix("colors(")
        .and_then(|s| s.strip_suffix(')'))
    {
        let mut colors: Vec<Option<u32>> = vec![None; states.len()];
        for item in inner.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (s, c) = item
                .split_once("->")
                .ok_or_else(|| err(acc_off, "expected `state->color`"))?;
            let c: u32 = c
                .trim()
                .parse()
                .map_err(|_| err(acc_off, "color must be a number"))?;
            colors[index(s.trim(), acc_off)?] = Some(c);
        }
        let colors: Option<Vec<u32>> = colors.into_iter().collect();
        Acceptance::Colors(colors.ok_or_else(|| err(acc_off, "every state needs a color"))?)
    } else {
        return Err(err(acc_off, "accept must be `F(...)` or `colors(...)`"));
    };
    let mut a = NmsoAutomaton {
        name,
        states: states.clone(),
        initial: init,
        transitions: Default::default(),
        acceptance,
        deterministic: det.ok_or_else(|| err(open, "missing `det:`"))?,
    };
    for (p, q, text, f_off) in trans {
        let key = (index(&p, f_off)?, index(&q, f_off)?);
        let f = parse_formula_in(&text, &TRANSITION_VARS).map_err(|e| match e {
            Error::Syntax {
                offset, message, ..
            } => syntax_error(src, f_off + offset, &message),
            other => other,
        })?;
        let t = Transition::compiled(&f, Some(text.trim().to_string()))?;
        match a.transitions.get_mut(&key) {
            Some(existing) => {
                existing.relation = existing.relation.union(&t.relation)?;
                existing.formula = Some(format!(
                    "({}) | ({})",
                    existing.formula.clone().unwrap_or_default(),
                    text.trim()
                ));
            }
            None => {
                a.transitions.insert(key, t);
            }
        }
    }
    Ok(a)
}

fn leading_ws(s: &str) -> usize {
    s.len() - s.trim_start().len()
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

/// Renders an automaton whose transitions all carry formulas.
pub fn to_nmso(a: &NmsoAutomaton) -> Result<String> {
    let mut s = String::new();
    let _ = writeln!(s, "automaton {} {{", a.name);
    let _ = writeln!(s, "  states: {};", a.states.join(", "));
    let _ = writeln!(s, "  initial: {};", a.states[a.initial]);
    match &a.acceptance {
        Acceptance::Final(f) => {
            let names: Vec<&str> = f.iter().map(|&i| a.states[i].as_str()).collect();
            let _ = writeln!(s, "  accept: F({});", names.join(", "));
        }
        Acceptance::Colors(c) => {
            let items: Vec<String> = c
                .iter()
                .enumerate()
                .map(|(i, c)| format!("{}->{c}", a.states[i]))
                .collect();
            let _ = writeln!(s, "  accept: colors({});", items.join(", "));
        }
    }
    let _ = writeln!(s, "  det: {};", a.deterministic);
    for (&(p, q), t) in &a.transitions {
        let f = t.formula.as_ref().ok_or_else(|| {
            Error::Validation(format!(
                "transition {} -> {} has no formula",
                a.states[p], a.states[q]
            ))
        })?;
        let _ = writeln!(s, "  trans {} -> {} : {};", a.states[p], a.states[q], f);
    }
    s.push_str("}\n");
    Ok(s)
}

/// Graphviz rendering of the control structure, edges labelled by their
/// formulas.
pub fn automaton_dot(a: &NmsoAutomaton) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "digraph \"{}\" {{", a.name);
    let _ = writeln!(s, "  rankdir=LR;");
    let _ = writeln!(s, "  init [shape=point];");
    for (i, name) in a.states.iter().enumerate() {
        let (shape, label) = match &a.acceptance {
            Acceptance::Final(f) if f.contains(&i) => ("doublecircle", name.clone()),
            Acceptance::Final(_) => ("circle", name.clone()),
            Acceptance::Colors(c) => ("circle", format!("{name} / {}", c[i])),
        };
        let _ = writeln!(
            s,
            "  q{i} [shape={shape}, label=\"{}\"];",
            label.replace('"', "\\\"")
        );
    }
    let _ = writeln!(s, "  init -> q{};", a.initial);
    for (&(p, q), t) in &a.transitions {
        let label = t.formula.clone().unwrap_or_else(|| "relation".into());
        let _ = writeln!(
            s,
            "  q{p} -> q{q} [label=\"{}\"];",
            label.replace('"', "\\\"")
        );
    }
    s.push_str("}\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const SRC: &str = "automaton demo {\n  states: a, b;\n  initial: a;\n  accept: colors(a->0, b->1); # comment\n  det: true;\n  trans a -> b : y = z;\n  trans b -> a : y = 0;\n}\n";

    #[test]
    fn parses_and_renders() {
        let a = parse_nmso(SRC).unwrap();
        assert_eq!(a.states, vec!["a", "b"]);
        assert_eq!(a.acceptance, Acceptance::Colors(vec![0, 1]));
        let again = parse_nmso(&to_nmso(&a).unwrap()).unwrap();
        assert_eq!(again, a);
    }

    #[test]
    fn formula_errors_point_into_file() {
        let bad = SRC.replace("y = 0;", "y = ;");
        match parse_nmso(&bad) {
            Err(Error::Syntax { line, .. }) => assert_eq!(line, 7),
            other => panic!("{other:?}"),
        }
        let unknown = SRC.replace("b -> a", "b -> c");
        assert!(matches!(parse_nmso(&unknown), Err(Error::Syntax { .. })));
    }
}
