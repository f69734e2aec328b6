//! The one-counter game simulating a prefix game graph.
//!
//! Each rule becomes a gadget: the mover pops a suffix from `pop`, hands
//! over to the opponent who may inspect the remaining stack against
//! `context`, then the mover pushes a suffix from `push`. Stalling inside a
//! gadget is losing for whoever stalls.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::graph::PrefixGameGraph;
use super::uvw::UvwRule;
use super::Player;
use crate::automata::counter::{Action, CounterRule, CounterSystem};
use crate::automata::epset::{next_class, EpSet};
use crate::error::{Error, Result};

/// Role of a control state of the one-counter game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HState {
    /// A control state of the game graph.
    Vertex(usize),
    Pop {
        rule: usize,
        class: usize,
    },
    Handover {
        rule: usize,
    },
    Inspect {
        rule: usize,
        class: usize,
    },
    Push {
        rule: usize,
        class: usize,
    },
    /// Absorbing state won by the given player.
    Won(Player),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OneCounterGameSystem {
    pub names: Vec<String>,
    pub owners: Vec<Player>,
    pub colors: Vec<u32>,
    pub roles: Vec<HState>,
    pub system: CounterSystem,
    pub initial: usize,
    /// The rules the gadgets were built from, indexed as in `roles`.
    pub gadgets: Vec<UvwRule>,
}

impl OneCounterGameSystem {
    pub fn new() -> Self {
        OneCounterGameSystem {
            names: Vec::new(),
            owners: Vec::new(),
            colors: Vec::new(),
            roles: Vec::new(),
            system: CounterSystem::new(0),
            initial: 0,
            gadgets: Vec::new(),
        }
    }

    pub fn num_states(&self) -> usize {
        self.names.len()
    }

    pub fn add_state(&mut self, name: String, owner: Player, color: u32, role: HState) -> usize {
        self.names.push(name);
        self.owners.push(owner);
        self.colors.push(color);
        self.roles.push(role);
        self.system.add_state()
    }

    pub fn add_rule(&mut self, from: usize, to: usize, action: Action, guard: EpSet) {
        self.system
            .add_rule(CounterRule::new(from, to, action, guard));
    }

    pub fn rules(&self) -> &[CounterRule] {
        &self.system.rules
    }

    /// Indices of the rules usable at `(state, level)`.
    pub fn enabled_rules(&self, state: usize, level: u64) -> impl Iterator<Item = usize> + '_ {
        self.system
            .rules
            .iter()
            .enumerate()
            .filter(move |(_, r)| r.from == state && r.enabled(level))
            .map(|(i, _)| i)
    }

    pub fn max_color(&self) -> u32 {
        self.colors.iter().copied().max().unwrap_or(0)
    }

    /// Fails if some configuration has no move.
    pub fn check_no_deadlock(&self) -> Result<()> {
        let (t, p) = self.system.regime();
        for s in 0..self.num_states() {
            for level in 0..(t + p) as u64 {
                if self.enabled_rules(s, level).next().is_none() {
                    return Err(Error::Validation(format!(
                        "state {} has no move at level {level}",
                        self.names[s]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Adds `k` to every color.
    pub fn shift_colors(&mut self, k: u32) {
        for c in &mut self.colors {
            *c += k;
        }
    }

    /// The explicit game restricted to counters up to `max_counter`.
    pub fn to_dot(&self, max_counter: u64) -> String {
        let mut s = String::from("digraph H {\n  rankdir=LR;\n");
        for st in 0..self.num_states() {
            let shape = if self.owners[st] == Player::II {
                "box"
            } else {
                "ellipse"
            };
            for l in 0..=max_counter {
                let _ = writeln!(
                    s,
                    "  \"{}@{l}\" [shape={shape}, label=\"{} {l} c{}\"];",
                    self.names[st], self.names[st], self.colors[st]
                );
            }
        }
        for r in self.rules() {
            for l in 0..=max_counter {
                if let Some(next) = r
                    .action
                    .apply(l)
                    .filter(|&n| n <= max_counter && r.enabled(l))
                {
                    let _ = writeln!(
                        s,
                        "  \"{}@{l}\" -> \"{}@{next}\";",
                        self.names[r.from], self.names[r.to]
                    );
                }
            }
        }
        s.push_str("}\n");
        s
    }
}

impl Default for OneCounterGameSystem {
    fn default() -> Self {
        Self::new()
    }
}

/// Builds the one-counter game for a graph and its rules. Control states of
/// the graph keep their indices; their colors are raised by 2 so that the
/// gadget colors 0 and 1 never dominate a play through the graph.
pub fn build_pushdown(g: &PrefixGameGraph, rules: &[UvwRule]) -> Result<OneCounterGameSystem> {
    let mut h = OneCounterGameSystem::new();
    for p in 0..g.num_states() {
        h.add_state(
            g.names[p].clone(),
            g.owners[p],
            g.colors[p] + 2,
            HState::Vertex(p),
        );
    }
    h.initial = g.initial;
    h.gadgets = rules.to_vec();
    let won: BTreeMap<Player, usize> = [Player::I, Player::II]
        .into_iter()
        .map(|pl| {
            let s = h.add_state(format!("won_{pl}"), pl, pl.winning_color(), HState::Won(pl));
            (pl, s)
        })
        .collect();
    for &s in won.values() {
        h.add_rule(s, s, Action::Stay, EpSet::full());
    }
    for (ri, r) in rules.iter().enumerate() {
        if r.from >= g.num_states() || r.to >= g.num_states() {
            return Err(Error::Validation(format!(
                "rule {ri} refers to an unknown control state"
            )));
        }
        let mover = g.owners[r.from];
        let opp = mover.opponent();
        let zero = EpSet::singleton(0);
        let tag = format!("{}>{}#{ri}", g.names[r.from], g.names[r.to]);

        // push phase, ending in the target
        let push_entry = if r.push == zero {
            r.to
        } else {
            let (t, p) = (r.push.threshold(), r.push.period());
            let vs: Vec<usize> = (0..t + p)
                .map(|c| {
                    h.add_state(
                        format!("{tag}.push{c}"),
                        mover,
                        mover.losing_color(),
                        HState::Push { rule: ri, class: c },
                    )
                })
                .collect();
            for (c, &v) in vs.iter().enumerate() {
                h.add_rule(v, vs[next_class(t, p, c)], Action::Push, EpSet::full());
                if r.push.class_member(c) {
                    h.add_rule(v, r.to, Action::Stay, EpSet::full());
                }
            }
            vs[0]
        };

        // handover with optional inspection of the remaining stack
        let after_pop = if r.context.is_full() {
            push_entry
        } else {
            let hand = h.add_state(
                format!("{tag}.hand"),
                opp,
                opp.losing_color(),
                HState::Handover { rule: ri },
            );
            let (t, p) = (r.context.threshold(), r.context.period());
            let is: Vec<usize> = (0..t + p)
                .map(|c| {
                    h.add_state(
                        format!("{tag}.inspect{c}"),
                        opp,
                        opp.losing_color(),
                        HState::Inspect { rule: ri, class: c },
                    )
                })
                .collect();
            for (c, &i) in is.iter().enumerate() {
                h.add_rule(i, is[next_class(t, p, c)], Action::Pop, EpSet::full());
                let winner = if r.context.class_member(c) {
                    mover
                } else {
                    opp
                };
                h.add_rule(i, won[&winner], Action::Stay, zero.clone());
            }
            h.add_rule(hand, is[0], Action::Stay, EpSet::full());
            h.add_rule(hand, push_entry, Action::Stay, EpSet::full());
            hand
        };

        // pop phase
        let entry = if r.pop == zero {
            after_pop
        } else {
            let (t, p) = (r.pop.threshold(), r.pop.period());
            let us: Vec<usize> = (0..t + p)
                .map(|c| {
                    h.add_state(
                        format!("{tag}.pop{c}"),
                        mover,
                        mover.losing_color(),
                        HState::Pop { rule: ri, class: c },
                    )
                })
                .collect();
            for (c, &u) in us.iter().enumerate() {
                h.add_rule(u, us[next_class(t, p, c)], Action::Pop, EpSet::full());
                h.add_rule(u, u, Action::Stay, zero.clone());
                if r.pop.class_member(c) {
                    h.add_rule(u, after_pop, Action::Stay, EpSet::full());
                }
            }
            us[0]
        };
        h.add_rule(r.from, entry, Action::Stay, EpSet::full());
    }
    Ok(h)
}

/// Outcome of the opponent's inspection at a handover state and level.
pub fn inspection_passes(h: &OneCounterGameSystem, hand: usize, level: u64) -> bool {
    let mover = h.owners[hand].opponent();
    let Some(mut s) = h
        .rules()
        .iter()
        .find(|r| r.from == hand && matches!(h.roles[r.to], HState::Inspect { .. }))
        .map(|r| r.to)
    else {
        return true;
    };
    let mut l = level;
    loop {
        let r = h
            .rules()
            .iter()
            .find(|r| r.from == s && r.enabled(l))
            .expect("inspection is deterministic and total");
        if let HState::Won(p) = h.roles[r.to] {
            return p == mover;
        }
        s = r.to;
        l = r.action.apply(l).expect("enabled");
    }
}

/// Graph vertices reachable from `1^level from` by gadget paths that survive
/// inspection, staying within `max_counter` and `max_len` steps.
pub fn micro_targets(
    h: &OneCounterGameSystem,
    from: usize,
    level: u64,
    max_counter: u64,
    max_len: usize,
) -> BTreeSet<(usize, u64)> {
    let mut out = BTreeSet::new();
    let mut seen = BTreeSet::new();
    let mut stack: Vec<(usize, u64, usize)> = Vec::new();
    for r in h
        .rules()
        .iter()
        .filter(|r| r.from == from && r.enabled(level))
    {
        if let Some(l) = r.action.apply(level) {
            stack.push((r.to, l, 1));
        }
    }
    while let Some((s, l, len)) = stack.pop() {
        if l > max_counter || len > max_len || !seen.insert((s, l)) {
            continue;
        }
        match h.roles[s] {
            HState::Vertex(q) => {
                out.insert((q, l));
                continue;
            }
            HState::Won(_) | HState::Inspect { .. } => continue,
            HState::Handover { .. } if !inspection_passes(h, s, l) => continue,
            _ => {}
        }
        for r in h.rules().iter().filter(|r| r.from == s && r.enabled(l)) {
            if matches!(h.roles[r.to], HState::Inspect { .. }) {
                continue;
            }
            if let Some(n) = r.action.apply(l) {
                stack.push((r.to, n, len + 1));
            }
        }
    }
    out
}

/// Bounded check that gadget paths between graph vertices are exactly the
/// graph's edges, for counters up to `max_counter`.
pub fn check_micro_steps(
    g: &PrefixGameGraph,
    h: &OneCounterGameSystem,
    max_counter: u64,
    max_len: usize,
) -> Result<()> {
    for p in 0..g.num_states() {
        for i in 0..=max_counter {
            let got = micro_targets(h, p, i, max_counter, max_len);
            let mut want = BTreeSet::new();
            for (q, set) in g.successors(p, i)? {
                want.extend(set.members_below(max_counter + 1).map(|j| (q, j)));
            }
            if got != want {
                let extra = got.difference(&want).next();
                let missing = want.difference(&got).next();
                return Err(Error::Inconsistent(format!(
                    "gadgets at ({}, {i}) disagree with the graph: extra {extra:?}, missing {missing:?}",
                    g.names[p]
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::graph::build_game_graph;
    use crate::game::uvw::extract_uvw;
    use crate::nmso::examples;

    #[test]
    fn gadgets_simulate_edges() {
        for a in [
            examples::unbounded(),
            examples::echo(),
            examples::eventually_zero(),
            examples::trivial(),
        ] {
            let g = build_game_graph(&a).unwrap();
            let h = build_pushdown(&g, &extract_uvw(&g).unwrap()).unwrap();
            h.check_no_deadlock().unwrap();
            check_micro_steps(&g, &h, 6, 64).unwrap();
        }
    }

    #[test]
    fn inspection_punishes_wrong_context() {
        let mut g = build_game_graph(&examples::trivial()).unwrap();
        g.edges.clear();
        let rule = UvwRule {
            from: 0,
            to: 1,
            pop: EpSet::singleton(1),
            context: EpSet::singleton(2),
            push: EpSet::singleton(0),
        };
        let h = build_pushdown(&g, &[rule]).unwrap();
        assert_eq!(micro_targets(&h, 0, 3, 6, 64), BTreeSet::from([(1, 2)]));
        assert!(micro_targets(&h, 0, 4, 6, 64).is_empty());
    }
}
