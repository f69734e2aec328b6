//! Memoryless strategies on the game graph, given as binary relations per
//! pair of control states.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::solitaire::{inspector_strategy, vertex_lasso};
use crate::automata::epset::{lcm, EpSet};
use crate::automata::relation::UnaryRelation;
use crate::error::{Error, Result};
use crate::game::graph::complete_dead_ends;
use crate::game::{
    build_pushdown, extract_uvw, HState, OneCounterGameSystem, Player, PrefixGameGraph,
};
use crate::solve::{verify_regular_strategy, Config, Refutation, RegularStrategy, StrategyVerdict};

/// `(m, n) ∈ moves[(p, q)]`: from `1^m p` the owner moves to `1^n q`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GStrategy {
    pub owner: Player,
    #[serde(with = "crate::pairs")]
    pub moves: BTreeMap<(usize, usize), UnaryRelation>,
    /// Counters at which the strategy is defined, per owned control state.
    pub domain: BTreeMap<usize, EpSet>,
}

impl GStrategy {
    /// The move from `1^m p`, if defined.
    pub fn next(&self, p: usize, m: u64) -> Result<Option<Config>> {
        for (&(_, q), rel) in self.moves.range((p, 0)..(p + 1, 0)) {
            if let Some(n) = rel.section(&[Some(m), None])?.least() {
                return Ok(Some((q, n)));
            }
        }
        Ok(None)
    }
}

/// Follows `s` through the gadgets from `1^m p` to the next graph vertex.
/// The opponent always lets the mover continue at handovers.
fn simulate(
    h: &OneCounterGameSystem,
    s: &RegularStrategy,
    p: usize,
    m: u64,
    cap: usize,
) -> Option<Config> {
    let (mut st, mut level) = (p, m);
    for step in 0..cap {
        if step > 0 {
            match h.roles[st] {
                HState::Vertex(q) => return Some((q, level)),
                HState::Won(_) | HState::Inspect { .. } => return None,
                _ => {}
            }
        }
        let ri = if h.owners[st] == s.player {
            s.choose(st, level)
                .filter(|&ri| h.rules()[ri].enabled(level))?
        } else {
            let mut moves = h
                .enabled_rules(st, level)
                .filter(|&ri| !matches!(h.roles[h.rules()[ri].to], HState::Inspect { .. }));
            let ri = moves.next()?;
            if moves.next().is_some() {
                return None;
            }
            ri
        };
        let r = &h.rules()[ri];
        st = r.to;
        level = r.action.apply(level)?;
    }
    None
}

enum Fit {
    Gap,
    Shift(usize, i64),
    Constant(usize, u64),
}

/// Reads a graph strategy off a one-counter strategy by simulating its moves
/// on a window of counters and closing the result periodically.
pub fn transfer_strategy(
    h: &OneCounterGameSystem,
    s: &RegularStrategy,
    g: &PrefixGameGraph,
) -> Result<GStrategy> {
    let (ht, hp) = h.system.regime();
    let mut period = lcm(s.period, hp);
    let mut thresh = s.threshold.max(ht);
    for r in &h.gadgets {
        for e in [&r.pop, &r.push, &r.context] {
            period = lcm(period, e.period());
            thresh = thresh.max(e.threshold());
        }
    }
    let owned: Vec<usize> = (0..g.num_states())
        .filter(|&p| g.owners[p] == s.player)
        .collect();
    let mut start = thresh + period + 1;
    for _ in 0..4 {
        if let Some(gs) = transfer_window(h, s, &owned, start as u64, period as u64)? {
            return Ok(gs);
        }
        start *= 2;
    }
    Err(Error::Inconsistent(
        "strategy moves do not close periodically".into(),
    ))
}

fn transfer_window(
    h: &OneCounterGameSystem,
    s: &RegularStrategy,
    owned: &[usize],
    m0: u64,
    per: u64,
) -> Result<Option<GStrategy>> {
    let cap = |m: u64| 64 + 8 * (m as usize + s.threshold + s.period) * (h.num_states() + 1);
    let sim = |p: usize, m: u64| simulate(h, s, p, m, cap(m));
    let mut moves: BTreeMap<(usize, usize), UnaryRelation> = BTreeMap::new();
    let mut domain = BTreeMap::new();
    for &p in owned {
        let mut finite: BTreeMap<usize, Vec<Vec<u64>>> = BTreeMap::new();
        for m in 0..m0 {
            if let Some((q, n)) = sim(p, m) {
                finite.entry(q).or_default().push(vec![m, n]);
            }
        }
        let mut pieces: BTreeMap<usize, UnaryRelation> = BTreeMap::new();
        for (q, tuples) in finite {
            pieces.insert(q, UnaryRelation::from_tuples(2, &tuples));
        }
        for r in 0..per {
            let m1 = m0 + r;
            let samples: Vec<Option<Config>> = (0..4).map(|k| sim(p, m1 + k * per)).collect();
            let fit = match samples.as_slice() {
                s if s.iter().all(Option::is_none) => Fit::Gap,
                [Some(a), rest @ ..] if rest.iter().all(|x| x.map(|c| c.0) == Some(a.0)) => {
                    let ns: Vec<u64> = samples.iter().map(|x| x.expect("checked").1).collect();
                    if ns.windows(2).all(|w| w[1] == w[0] + per) {
                        Fit::Shift(a.0, a.1 as i64 - m1 as i64)
                    } else if ns.windows(2).all(|w| w[1] == w[0]) {
                        Fit::Constant(a.0, a.1)
                    } else {
                        return Ok(None);
                    }
                }
                _ => return Ok(None),
            };
            let starts = EpSet::residue((m1 % per) as usize, per as usize)
                .intersect(&EpSet::at_least(m1 as usize));
            let (q, rel) = match fit {
                Fit::Gap => continue,
                Fit::Shift(q, e) => (
                    q,
                    UnaryRelation::shift(e)
                        .intersect(&UnaryRelation::product_of(&[starts, EpSet::full()]))?,
                ),
                Fit::Constant(q, n) => (
                    q,
                    UnaryRelation::product_of(&[starts, EpSet::singleton(n as usize)]),
                ),
            };
            let entry = pieces.entry(q).or_insert_with(|| UnaryRelation::empty(2));
            *entry = entry.union(&rel)?;
        }
        let mut dom = EpSet::empty();
        for (q, rel) in pieces {
            dom = dom.union(&rel.domain()?);
            moves.insert((p, q), rel);
        }
        domain.insert(p, dom);
    }
    let gs = GStrategy {
        owner: s.player,
        moves,
        domain,
    };
    // cross-check past the fitted window
    for &p in owned {
        for m in m0..m0 + 6 * per {
            if gs.next(p, m)? != sim(p, m) {
                return Ok(None);
            }
        }
    }
    Ok(Some(gs))
}

/// Why a graph strategy is rejected.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GRefutation {
    NotAnEdge {
        from: usize,
        to: usize,
        pair: (u64, u64),
    },
    NotFunctional {
        state: usize,
        counter: u64,
    },
    /// A play consistent with the strategy that its owner loses, as graph
    /// configurations: `prefix`, then `cycle` repeated with `drift`.
    Play {
        prefix: Vec<Config>,
        cycle: Vec<Config>,
        drift: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GVerdict {
    Certified,
    Refuted(GRefutation),
}

/// Decides whether `sigma` wins every play from `start`.
pub fn verify_g_strategy(
    g: &PrefixGameGraph,
    sigma: &GStrategy,
    start: Config,
    cap: usize,
) -> Result<GVerdict> {
    let x = sigma.owner;
    let y = x.opponent();
    for (&(p, q), rel) in &sigma.moves {
        if p >= g.num_states() || q >= g.num_states() || g.owners[p] != x {
            return Err(Error::Validation(format!(
                "strategy entry ({p}, {q}) is not an owned move"
            )));
        }
        if let Some(t) = rel.difference(&g.edge(p, q))?.smallest() {
            return Ok(GVerdict::Refuted(GRefutation::NotAnEdge {
                from: p,
                to: q,
                pair: (t[0], t[1]),
            }));
        }
        if let Some(w) = rel.functionality_witness()? {
            return Ok(GVerdict::Refuted(GRefutation::NotFunctional {
                state: p,
                counter: w[0],
            }));
        }
    }
    let entries: Vec<(&(usize, usize), &UnaryRelation)> = sigma.moves.iter().collect();
    for (i, (&(p, _), r1)) in entries.iter().enumerate() {
        for (&(p2, _), r2) in &entries[i + 1..] {
            if p != p2 {
                continue;
            }
            if let Some(m) = r1.domain()?.intersect(&r2.domain()?).least() {
                return Ok(GVerdict::Refuted(GRefutation::NotFunctional {
                    state: p,
                    counter: m,
                }));
            }
        }
    }
    // the opponent drives everything; the owner's moves are fixed by `sigma`
    let mut solo = g.clone();
    solo.edges.retain(|&(p, _), _| g.owners[p] != x);
    let undefined = solo.num_states();
    solo.names.push("undefined".into());
    solo.owners.push(y);
    solo.colors.push(x.losing_color());
    solo.base.push(None);
    solo.edges
        .insert((undefined, undefined), UnaryRelation::identity());
    for p in (0..g.num_states()).filter(|&p| g.owners[p] == x) {
        let mut dom = EpSet::empty();
        for (&(_, q), rel) in sigma.moves.range((p, 0)..(p + 1, 0)) {
            dom = dom.union(&rel.domain()?);
            if !rel.is_empty() {
                solo.edges.insert((p, q), rel.clone());
            }
        }
        let gap = dom.complement();
        if !gap.is_empty() {
            let rel = UnaryRelation::identity()
                .intersect(&UnaryRelation::product_of(&[gap, EpSet::full()]))?;
            solo.edges.insert((p, undefined), rel);
        }
        solo.owners[p] = y;
    }
    complete_dead_ends(&mut solo)?;
    let h = build_pushdown(&solo, &extract_uvw(&solo)?)?;
    let inspector = inspector_strategy(&h, x);
    match verify_regular_strategy(&h, &inspector, start, cap)? {
        StrategyVerdict::Winning => Ok(GVerdict::Certified),
        StrategyVerdict::Refuted(Refutation::Cycle(lasso)) => {
            let (prefix, cycle, drift) = vertex_lasso(&h, &lasso);
            Ok(GVerdict::Refuted(GRefutation::Play {
                prefix,
                cycle,
                drift,
            }))
        }
        StrategyVerdict::Refuted(Refutation::Stuck { path }) => Err(Error::Inconsistent(format!(
            "inspection got stuck at {:?}",
            path.last()
        ))),
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::game::build_game_graph;
    use crate::nmso::examples;
    use crate::solve::{solve_one_counter, SolveOptions};

    pub(crate) fn winning(a: &crate::nmso::model::NmsoAutomaton) -> (PrefixGameGraph, GStrategy) {
        let g = build_game_graph(a).unwrap();
        let h = build_pushdown(&g, &extract_uvw(&g).unwrap()).unwrap();
        let rep = solve_one_counter(&h, (h.initial, 0), &SolveOptions::default()).unwrap();
        let sigma = transfer_strategy(&h, &rep.strategy, &g).unwrap();
        (g, sigma)
    }

    #[test]
    fn transferred_strategies_are_certified() {
        for a in [
            examples::unbounded(),
            examples::echo(),
            examples::eventually_zero(),
            examples::trivial(),
        ] {
            let (g, sigma) = winning(&a);
            let v = verify_g_strategy(&g, &sigma, (g.initial, 0), 100_000).unwrap();
            assert_eq!(v, GVerdict::Certified, "{}", a.name);
        }
    }

    #[test]
    fn corrupted_moves_are_refuted() {
        let (g, mut sigma) = winning(&examples::echo());
        let key = *sigma
            .moves
            .keys()
            .find(|k| !sigma.moves[k].is_empty())
            .unwrap();
        let bumped = sigma.moves[&key].compose(&UnaryRelation::shift(1)).unwrap();
        sigma.moves.insert(key, bumped);
        let v = verify_g_strategy(&g, &sigma, (g.initial, 0), 100_000).unwrap();
        assert!(matches!(v, GVerdict::Refuted(_)), "{v:?}");
    }
}
