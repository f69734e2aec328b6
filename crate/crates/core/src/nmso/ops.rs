//! Validation, membership and finite-word non-emptiness.

use serde::{Deserialize, Serialize};

use super::model::{Acceptance, Configuration, NmsoAutomaton};
use crate::automata::epset::EpSet;
use crate::automata::reach::{image_family, reach_closure, TaggedEdge};
use crate::automata::relation::UnaryRelation;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    /// No transition applies.
    Uncovered,
    /// Two target states apply.
    Overlap,
    /// One target state admits two register values.
    NotFunctional,
}

/// A source state, register and letter at which determinism fails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeterminismWitness {
    pub kind: WitnessKind,
    pub state: usize,
    pub x: u64,
    pub z: u64,
    pub targets: Vec<usize>,
}

/// Smallest violation of "exactly one `(q, y)`" among relations indexed by
/// target state. The `state` field is left at 0 for the caller to fill in.
pub fn determinism_witness(rels: &[UnaryRelation]) -> Result<Option<DeterminismWitness>> {
    let domains: Vec<UnaryRelation> = rels.iter().map(|r| r.project(2)).collect::<Result<_>>()?;
    let covered = domains
        .iter()
        .try_fold(UnaryRelation::empty(2), |acc, d| acc.union(d))?;
    let mk = |kind, t: &[u64], targets| DeterminismWitness {
        kind,
        state: 0,
        x: t[0],
        z: t[1],
        targets,
    };
    if let Some(t) = covered.complement().smallest() {
        return Ok(Some(mk(WitnessKind::Uncovered, &t, vec![])));
    }
    let mut best: Option<DeterminismWitness> = None;
    let mut consider = |w: DeterminismWitness| {
        let key = |w: &DeterminismWitness| (w.x + w.z, w.x, w.z);
        if best.as_ref().is_none_or(|b| key(&w) < key(b)) {
            best = Some(w);
        }
    };
    for q in 0..domains.len() {
        for r in q + 1..domains.len() {
            if let Some(t) = domains[q].intersect(&domains[r])?.smallest() {
                consider(mk(WitnessKind::Overlap, &t, vec![q, r]));
            }
        }
    }
    for (q, rel) in rels.iter().enumerate() {
        let a = rel.cylindrify(4, &[0, 1, 2])?;
        let b = rel.cylindrify(4, &[0, 1, 3])?;
        let same = UnaryRelation::identity().cylindrify(4, &[2, 3])?;
        if let Some(t) = a.intersect(&b)?.difference(&same)?.smallest() {
            consider(mk(WitnessKind::NotFunctional, &t, vec![q]));
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub determinism_witness: Option<DeterminismWitness>,
    /// Whether the transition table is deterministic, regardless of the flag.
    pub is_deterministic: bool,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn validate(a: &NmsoAutomaton) -> Result<ValidationReport> {
    let mut checks = Vec::new();
    let n = a.num_states();
    let bad_entries: Vec<String> = a
        .transitions
        .iter()
        .filter(|((p, q), t)| {
            *p >= n || *q >= n || t.relation.arity() != 3 || t.relation.validate().is_err()
        })
        .map(|((p, q), _)| format!("{p}->{q}"))
        .collect();
    checks.push(Check {
        name: "table".into(),
        passed: bad_entries.is_empty() && a.initial < n,
        detail: (!bad_entries.is_empty())
            .then(|| format!("malformed entries: {}", bad_entries.join(", "))),
    });
    let acc_detail = match &a.acceptance {
        Acceptance::Final(f) => f
            .iter()
            .find(|&&s| s >= n)
            .map(|s| format!("final state {s} out of range")),
        Acceptance::Colors(c) if c.len() != n => Some(format!("{} colors for {n} states", c.len())),
        Acceptance::Colors(_) => None,
    };
    checks.push(Check {
        name: "acceptance".into(),
        passed: acc_detail.is_none(),
        detail: acc_detail,
    });

    let mut witness = None;
    for p in 0..n {
        let rels: Vec<UnaryRelation> = (0..n).map(|q| a.relation(p, q)).collect();
        if let Some(mut w) = determinism_witness(&rels)? {
            w.state = p;
            witness = Some(w);
            break;
        }
    }
    let det_detail = witness.as_ref().map(|w| {
        format!(
            "{:?} at state {}, x = {}, z = {}",
            w.kind, a.states[w.state], w.x, w.z
        )
    });
    checks.push(Check {
        name: "determinism".into(),
        passed: !a.deterministic || witness.is_none(),
        detail: if a.deterministic {
            det_detail
        } else {
            Some("not required".into())
        },
    });
    Ok(ValidationReport {
        checks,
        is_deterministic: witness.is_none(),
        determinism_witness: witness,
    })
}

/// Requires a validated deterministic automaton.
pub fn require_deterministic(a: &NmsoAutomaton) -> Result<()> {
    let report = validate(a)?;
    if !report.passed() || !report.is_deterministic {
        let why = report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{}: {}", c.name, c.detail.clone().unwrap_or_default()))
            .collect::<Vec<_>>()
            .join("; ");
        let why = if why.is_empty() {
            "transition table is not deterministic".to_string()
        } else {
            why
        };
        return Err(Error::Validation(why));
    }
    Ok(())
}

/// `(x, y)` pairs of a transition on a fixed letter.
fn on_letter(rel: &UnaryRelation, letter: u64) -> Result<UnaryRelation> {
    let fixed =
        UnaryRelation::from_epset(&EpSet::singleton(letter as usize)).cylindrify(3, &[1])?;
    rel.intersect(&fixed)?.project(1)
}

/// Finite-word membership; returns an accepting run if there is one.
pub fn membership_finite(a: &NmsoAutomaton, word: &[u64]) -> Result<Option<Vec<Configuration>>> {
    let finals = a.finals()?.clone();
    let n = a.num_states();
    let mut layers: Vec<Vec<EpSet>> = vec![vec![EpSet::empty(); n]];
    layers[0][a.initial] = EpSet::singleton(0);
    let mut letter_rels = Vec::with_capacity(word.len());
    for &m in word {
        let rels: Vec<(usize, usize, UnaryRelation)> = a
            .transitions
            .iter()
            .map(|(&(p, q), t)| Ok((p, q, on_letter(&t.relation, m)?)))
            .collect::<Result<_>>()?;
        let edges: Vec<TaggedEdge> = rels
            .iter()
            .map(|(p, q, r)| TaggedEdge {
                from: *p,
                to: *q,
                relation: r,
            })
            .collect();
        let next = image_family(layers.last().expect("nonempty"), &edges)?;
        layers.push(next);
        letter_rels.push(rels);
    }
    let last = layers.last().expect("nonempty");
    let Some((f, j)) = finals
        .iter()
        .filter_map(|&f| last[f].least().map(|j| (f, j)))
        .min_by_key(|&(f, j)| (j, f))
    else {
        return Ok(None);
    };
    let mut run = vec![Configuration::new(f, j)];
    for k in (0..word.len()).rev() {
        let cur = *run.last().expect("nonempty");
        let prev = letter_rels[k]
            .iter()
            .filter(|(_, q, _)| *q == cur.state)
            .filter_map(|(p, _, r)| {
                let pre = r.preimage(&EpSet::singleton(cur.memory as usize)).ok()?;
                pre.intersect(&layers[k][*p]).least().map(|i| (*p, i))
            })
            .min_by_key(|&(p, i)| (i, p))
            .ok_or_else(|| Error::Inconsistent("backward run reconstruction failed".into()))?;
        run.push(Configuration::new(prev.0, prev.1));
    }
    run.reverse();
    Ok(Some(run))
}

/// A finite word accepted by the automaton, or `None` if its language is
/// empty. Every witness is re-checked with [`membership_finite`].
pub fn nonempty_finite(a: &NmsoAutomaton, cap: usize) -> Result<Option<Vec<u64>>> {
    let finals = a.finals()?.clone();
    let n = a.num_states();
    let edge_rels: Vec<(usize, usize, UnaryRelation)> = a
        .transitions
        .iter()
        .map(|(&(p, q), t)| Ok((p, q, t.relation.project(1)?)))
        .collect::<Result<_>>()?;
    let edges: Vec<TaggedEdge> = edge_rels
        .iter()
        .map(|(p, q, r)| TaggedEdge {
            from: *p,
            to: *q,
            relation: r,
        })
        .collect();
    let mut init = vec![EpSet::empty(); n];
    init[a.initial] = EpSet::singleton(0);
    let reach = reach_closure(&init, &edges, cap)?;
    if finals.iter().all(|&f| reach[f].is_empty()) {
        return Ok(None);
    }
    // forward layers until a final state is hit
    let mut layers = vec![init];
    loop {
        let cur = layers.last().expect("nonempty");
        if finals.iter().any(|&f| !cur[f].is_empty()) {
            break;
        }
        if layers.len() > cap {
            return Err(Error::IterationCap {
                cap,
                diagnostic: "no accepting configuration within the layer bound".into(),
            });
        }
        let next = image_family(cur, &edges)?;
        layers.push(next);
    }
    let last = layers.last().expect("nonempty");
    let (mut state, mut memory) = finals
        .iter()
        .filter_map(|&f| last[f].least().map(|j| (f, j)))
        .min_by_key(|&(f, j)| (j, f))
        .expect("some final state reached");
    let mut word = Vec::new();
    for k in (1..layers.len()).rev() {
        let (p, i) = edge_rels
            .iter()
            .filter(|(_, q, _)| *q == state)
            .filter_map(|(p, _, r)| {
                let pre = r.preimage(&EpSet::singleton(memory as usize)).ok()?;
                pre.intersect(&layers[k - 1][*p]).least().map(|i| (*p, i))
            })
            .min_by_key(|&(p, i)| (i, p))
            .ok_or_else(|| Error::Inconsistent("backward chaining failed".into()))?;
        let letter = a
            .relation(p, state)
            .section(&[Some(i), None, Some(memory)])?
            .least()
            .ok_or_else(|| Error::Inconsistent("no letter for a reachable edge".into()))?;
        word.push(letter);
        state = p;
        memory = i;
    }
    word.reverse();
    if membership_finite(a, &word)?.is_none() {
        return Err(Error::Inconsistent(format!(
            "witness {word:?} is not accepted"
        )));
    }
    Ok(Some(word))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{check_functional, parse_formula};
    use crate::nmso::examples;
    use std::collections::BTreeMap;

    fn formula_family(a: &NmsoAutomaton) -> BTreeMap<(String, String), crate::formula::Formula> {
        a.transitions
            .iter()
            .map(|(&(p, q), t)| {
                let f = parse_formula(t.formula.as_deref().unwrap()).unwrap();
                ((a.states[p].clone(), a.states[q].clone()), f)
            })
            .collect()
    }

    #[test]
    fn l1_determinism() {
        let l1 = examples::l1();
        let r = validate(&l1).unwrap();
        assert!(r.passed() && r.is_deterministic, "{r:?}");
        assert!(check_functional(&l1.states, &formula_family(&l1)).unwrap());

        let inc = examples::l1_incomplete();
        let r = validate(&inc).unwrap();
        assert!(!r.passed());
        let w = r.determinism_witness.unwrap();
        assert_eq!(
            (w.kind, inc.states[w.state].as_str(), w.x, w.z),
            (WitnessKind::Uncovered, "q0", 1, 0)
        );
        assert!(!check_functional(&inc.states, &formula_family(&inc)).unwrap());
    }

    #[test]
    fn two_targets_are_not_functional() {
        let states = vec!["p".to_string(), "a".to_string(), "b".to_string()];
        let mut fam = BTreeMap::new();
        for (p, q) in [("p", "a"), ("p", "b"), ("a", "a"), ("b", "b")] {
            fam.insert(
                (p.to_string(), q.to_string()),
                parse_formula("y = 0").unwrap(),
            );
        }
        assert!(!check_functional(&states, &fam).unwrap());
    }

    #[test]
    fn nondeterministic_flag_is_respected() {
        let r = validate(&examples::repeated_number_nfa()).unwrap();
        assert!(r.passed());
        assert!(!r.is_deterministic);
        for a in [
            examples::unbounded(),
            examples::eventually_zero(),
            examples::echo(),
            examples::all_odd(),
        ] {
            let r = validate(&a).unwrap();
            assert!(r.passed() && r.is_deterministic, "{}: {r:?}", a.name);
        }
    }

    #[test]
    fn steps() {
        let l1 = examples::l1();
        let q = l1.state_index("q").unwrap();
        let c = |s, m| Configuration::new(s, m);
        assert_eq!(l1.step(c(0, 0), 4).unwrap(), [c(q, 4)].into());
        assert_eq!(l1.step(c(q, 4), 5).unwrap(), [c(q, 5)].into());
        let inc = examples::l1_incomplete();
        assert!(inc.step(c(1, 4), 9).unwrap().is_empty());
    }

    #[test]
    fn membership() {
        let l1 = examples::l1();
        assert!(membership_finite(&l1, &[4, 5, 6]).unwrap().is_some());
        assert!(membership_finite(&l1, &[4, 6]).unwrap().is_none());
        assert!(membership_finite(&l1, &[]).unwrap().is_none());
        let nfa = crate::nmso::examples::plus_one();
        let run = membership_finite(&nfa, &[3]).unwrap().unwrap();
        assert_eq!(run.last().unwrap().memory, 4);
    }

    #[test]
    fn finite_nonemptiness() {
        let w = nonempty_finite(&examples::l1(), 10_000).unwrap().unwrap();
        assert!(membership_finite(&examples::l1(), &w).unwrap().is_some());
        assert_eq!(w, vec![0]);
        assert_eq!(
            nonempty_finite(&examples::empty_finite(), 10_000).unwrap(),
            None
        );
        assert_eq!(
            nonempty_finite(&examples::plus_one(), 10_000).unwrap(),
            Some(vec![0])
        );
        assert!(matches!(
            nonempty_finite(&examples::unbounded(), 10),
            Err(Error::WrongAcceptance { .. })
        ));
    }
}
