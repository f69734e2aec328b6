//! Non-emptiness of parity automata over ω-words, through a one-counter game
//! in which a single player builds the run.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::model::{Configuration, NmsoAutomaton};
use crate::automata::lasso::{AffineLassoWord, CycleEntry};
use crate::error::{Error, Result};
use crate::game::graph::complete_dead_ends;
use crate::game::{build_pushdown, extract_uvw, Player, PrefixGameGraph};
use crate::solve::{verify_regular_strategy, Config, Refutation, StrategyVerdict};
use crate::synth::play::{certified_word_verdict, Verdict};
use crate::synth::{inspector_strategy, vertex_lasso};

/// An accepted ω-word together with an accepting run on it: `prefix`, then
/// `cycle` forever with every memory value growing by `drift` per pass.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityWitness {
    pub word: AffineLassoWord,
    pub prefix: Vec<Configuration>,
    pub cycle: Vec<Configuration>,
    pub drift: u64,
}

/// How many members of a letter set are tried before giving up on an
/// affine choice.
const LETTER_CANDIDATES: usize = 16;

/// The game graph in which Player II picks every letter.
fn solitaire_graph(a: &NmsoAutomaton) -> Result<PrefixGameGraph> {
    let colors = a.colors()?.to_vec();
    let n = a.num_states();
    let mut g = PrefixGameGraph {
        names: a.states.clone(),
        owners: vec![Player::II; n],
        colors,
        base: (0..n).map(Some).collect(),
        edges: BTreeMap::new(),
        initial: a.initial,
    };
    for (&(p, q), t) in &a.transitions {
        let rel = t.relation.project(1)?;
        if !rel.is_empty() {
            g.edges.insert((p, q), rel);
        }
    }
    complete_dead_ends(&mut g)?;
    Ok(g)
}

/// Returns an accepted ω-word, or `None` if the automaton accepts nothing.
pub fn nonempty_parity(a: &NmsoAutomaton, cap: usize) -> Result<Option<ParityWitness>> {
    let g = solitaire_graph(a)?;
    let h = build_pushdown(&g, &extract_uvw(&g)?)?;
    let inspector = inspector_strategy(&h, Player::I);
    let lasso = match verify_regular_strategy(&h, &inspector, (h.initial, 0), cap)? {
        StrategyVerdict::Winning => return Ok(None),
        StrategyVerdict::Refuted(Refutation::Cycle(l)) => l,
        StrategyVerdict::Refuted(Refutation::Stuck { path }) => {
            return Err(Error::Inconsistent(format!(
                "inspection got stuck at {:?}",
                path.last()
            )))
        }
    };
    let (prefix, cycle, drift) = vertex_lasso(&h, &lasso);
    if cycle.is_empty()
        || cycle
            .iter()
            .chain(&prefix)
            .any(|&(q, _)| q >= a.num_states())
    {
        return Err(Error::Inconsistent(
            "accepting lasso leaves the automaton".into(),
        ));
    }
    let w = letters(a, &prefix, &cycle, drift)?;
    let cfg = |&(q, l): &Config| Configuration::new(q, l);
    let witness = ParityWitness {
        word: w,
        prefix: prefix.iter().map(cfg).collect(),
        cycle: cycle.iter().map(cfg).collect(),
        drift,
    };
    if !certify_run(a, &witness)? {
        return Err(Error::Inconsistent(
            "witness run failed its certificate".into(),
        ));
    }
    if a.deterministic {
        let horizon = 4 * (witness.prefix.len() + 8 * witness.cycle.len() + a.num_states()) + 64;
        let t = certified_word_verdict(a, &witness.word, horizon)?;
        if t.verdict != Verdict::AcceptCertified {
            return Err(Error::Inconsistent(format!(
                "witness word got {:?}",
                t.verdict
            )));
        }
    }
    Ok(Some(witness))
}

/// Letters realizing each step of the lasso, affine along the cycle.
fn letters(
    a: &NmsoAutomaton,
    prefix: &[Config],
    cycle: &[Config],
    drift: u64,
) -> Result<AffineLassoWord> {
    let letter = |(p, x): Config, (q, y): Config| -> Result<u64> {
        a.relation(p, q)
            .section(&[Some(x), None, Some(y)])?
            .least()
            .ok_or_else(|| Error::Inconsistent(format!("no letter from ({p}, {x}) to ({q}, {y})")))
    };
    let mut word = Vec::with_capacity(prefix.len());
    for (i, &c) in prefix.iter().enumerate() {
        let next = prefix.get(i + 1).copied().unwrap_or(cycle[0]);
        word.push(letter(c, next)?);
    }
    let mut entries = Vec::with_capacity(cycle.len());
    for (i, &(p, x)) in cycle.iter().enumerate() {
        let (q, y) = match cycle.get(i + 1) {
            Some(&c) => c,
            None => (cycle[0].0, cycle[0].1 + drift),
        };
        let rel = a.relation(p, q);
        let options = rel.section(&[Some(x), None, Some(y)])?;
        let entry = options
            .members_below(x.max(y) + (options.threshold() + options.period()) as u64 + 64)
            .take(LETTER_CANDIDATES)
            .find_map(|z| {
                if rel.holds_on_ray(&[x, z, y], &[drift, 0, drift]) {
                    Some(CycleEntry::fixed(z))
                } else if drift > 0 && rel.holds_on_ray(&[x, z, y], &[drift, drift, drift]) {
                    Some(CycleEntry::drifting(z))
                } else {
                    None
                }
            });
        entries.push(entry.ok_or_else(|| {
            Error::ResourceCap(format!(
                "no affine letter choice from ({p}, {x}) to ({q}, {y})"
            ))
        })?);
    }
    Ok(AffineLassoWord::new(word, entries, drift))
}

/// Checks the witness run step by step, along every repetition of its cycle,
/// and checks that the cycle's largest color is even.
pub fn certify_run(a: &NmsoAutomaton, w: &ParityWitness) -> Result<bool> {
    let colors = a.colors()?;
    let Some(&first) = w.cycle.first() else {
        return Ok(false);
    };
    let mut path = w.prefix.clone();
    path.push(first);
    if path[0] != a.initial_configuration()
        || w.word.prefix.len() != w.prefix.len()
        || w.word.cycle.len() != w.cycle.len()
    {
        return Ok(false);
    }
    for (i, pair) in path.windows(2).enumerate() {
        let (c, d) = (pair[0], pair[1]);
        if !a
            .relation(c.state, d.state)
            .contains(&[c.memory, w.word.prefix[i], d.memory])
        {
            return Ok(false);
        }
    }
    let delta = if w.word.drift == 0 { 0 } else { w.drift };
    if w.word.drift != 0 && w.word.drift != w.drift {
        return Ok(false);
    }
    for (i, &c) in w.cycle.iter().enumerate() {
        let d = w
            .cycle
            .get(i + 1)
            .copied()
            .unwrap_or(Configuration::new(first.state, first.memory + w.drift));
        let e = w.word.cycle[i];
        let dz = if e.drifting { delta } else { 0 };
        if !a
            .relation(c.state, d.state)
            .holds_on_ray(&[c.memory, e.base, d.memory], &[w.drift, dz, w.drift])
        {
            return Ok(false);
        }
    }
    let top = w
        .cycle
        .iter()
        .map(|c| colors[c.state])
        .max()
        .expect("nonempty cycle");
    Ok(top % 2 == 0)
}
