//! The prefix-recognizable game graph of a deterministic parity automaton.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Player;
use crate::automata::epset::EpSet;
use crate::automata::relation::UnaryRelation;
use crate::error::{Error, Result};
use crate::nmso::model::NmsoAutomaton;
use crate::nmso::ops::require_deterministic;

/// Vertices are `1^i s` for a control state `s`; edges between control
/// states are binary relations on the exponent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrefixGameGraph {
    pub names: Vec<String>,
    pub owners: Vec<Player>,
    pub colors: Vec<u32>,
    /// Automaton state behind each control state, if any.
    pub base: Vec<Option<usize>>,
    #[serde(with = "crate::pairs")]
    pub edges: BTreeMap<(usize, usize), UnaryRelation>,
    pub initial: usize,
}

impl PrefixGameGraph {
    pub fn num_states(&self) -> usize {
        self.names.len()
    }

    /// Control state for automaton state `q` owned by `owner`.
    pub fn tagged(&self, q: usize, owner: Player) -> usize {
        2 * q + usize::from(owner == Player::II)
    }

    pub fn edge(&self, p: usize, q: usize) -> UnaryRelation {
        self.edges
            .get(&(p, q))
            .cloned()
            .unwrap_or_else(|| UnaryRelation::empty(2))
    }

    /// Successor vertices of `1^i p`.
    pub fn successors(&self, p: usize, i: u64) -> Result<Vec<(usize, EpSet)>> {
        let mut out = Vec::new();
        for (&(from, to), rel) in self.edges.range((p, 0)..(p + 1, 0)) {
            debug_assert_eq!(from, p);
            let s = rel.section(&[Some(i), None])?;
            if !s.is_empty() {
                out.push((to, s));
            }
        }
        Ok(out)
    }

    /// Levels at which a control state has at least one successor.
    pub fn domain(&self, p: usize) -> Result<EpSet> {
        let mut d = EpSet::empty();
        for (_, rel) in self.edges.range((p, 0)..(p + 1, 0)) {
            d = d.union(&rel.domain()?);
        }
        Ok(d)
    }
}

/// Builds the game graph: Player I supplies the letters at I-states and
/// Player II at II-states; Player II wins iff the play is accepted.
pub fn build_game_graph(a: &NmsoAutomaton) -> Result<PrefixGameGraph> {
    require_deterministic(a)?;
    let colors = a.colors()?.to_vec();
    let n = a.num_states();
    let mut names = Vec::with_capacity(2 * n);
    let mut owners = Vec::with_capacity(2 * n);
    let mut gcolors = Vec::with_capacity(2 * n);
    let mut base = Vec::with_capacity(2 * n);
    for (q, name) in a.states.iter().enumerate() {
        for owner in [Player::I, Player::II] {
            names.push(format!("{name}_{owner}"));
            owners.push(owner);
            gcolors.push(colors[q]);
            base.push(Some(q));
        }
    }
    let mut g = PrefixGameGraph {
        names,
        owners,
        colors: gcolors,
        base,
        edges: BTreeMap::new(),
        initial: 0,
    };
    g.initial = g.tagged(a.initial, Player::I);
    for (&(p, q), t) in &a.transitions {
        let rel = t.relation.project(1)?;
        if rel.is_empty() {
            continue;
        }
        for owner in [Player::I, Player::II] {
            g.edges.insert(
                (g.tagged(p, owner), g.tagged(q, owner.opponent())),
                rel.clone(),
            );
        }
    }
    complete_dead_ends(&mut g)?;
    Ok(g)
}

/// Sends vertices without successors to a sink that is losing for their owner.
pub(crate) fn complete_dead_ends(g: &mut PrefixGameGraph) -> Result<()> {
    let mut sinks: [Option<usize>; 2] = [None, None];
    for p in 0..g.num_states() {
        let missing = g.domain(p)?.complement();
        if missing.is_empty() {
            continue;
        }
        let owner = g.owners[p];
        let idx = usize::from(owner == Player::II);
        let sink = match sinks[idx] {
            Some(s) => s,
            None => {
                let s = g.num_states();
                g.names.push(format!("stuck_{owner}"));
                g.owners.push(owner);
                g.colors.push(owner.losing_color());
                g.base.push(None);
                g.edges.insert((s, s), UnaryRelation::identity());
                sinks[idx] = Some(s);
                s
            }
        };
        let rel = UnaryRelation::identity()
            .intersect(&UnaryRelation::product_of(&[missing, EpSet::full()]))?;
        g.edges.insert((p, sink), rel);
    }
    Ok(())
}

/// Checks that every vertex has a successor.
pub fn check_total(g: &PrefixGameGraph) -> Result<()> {
    for p in 0..g.num_states() {
        if !g.domain(p)?.is_full() {
            return Err(Error::Validation(format!(
                "control state {} has dead ends",
                g.names[p]
            )));
        }
    }
    Ok(())
}
