//! Bounded explicit-state search for plays that defeat a strategy. Used as an
//! independent cross-check of the exact verifier.

use std::collections::HashMap;

use super::cycles::Config;
use super::finite::sccs;
use super::strategy::RegularStrategy;
use crate::game::OneCounterGameSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BmcBounds {
    pub max_counter: u64,
    pub max_depth: usize,
}

impl Default for BmcBounds {
    fn default() -> Self {
        BmcBounds {
            max_counter: 50,
            max_depth: 500,
        }
    }
}

/// Outcome of the bounded search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BmcVerdict {
    /// No defeating play stays within the bounds.
    NoCounterexample,
    /// The strategy has no move at a reachable configuration.
    Stuck(Config),
    /// A reachable cycle within the bounds is won by the opponent.
    BadCycle(Config),
}

pub fn bmc_check(
    h: &OneCounterGameSystem,
    s: &RegularStrategy,
    start: Config,
    bounds: BmcBounds,
) -> BmcVerdict {
    let mut index: HashMap<Config, usize> = HashMap::new();
    let mut nodes: Vec<Config> = Vec::new();
    let mut succ: Vec<Vec<usize>> = Vec::new();
    let mut frontier = vec![start];
    index.insert(start, 0);
    nodes.push(start);
    succ.push(Vec::new());
    for _ in 0..bounds.max_depth {
        let mut next = Vec::new();
        for cfg in frontier {
            let id = index[&cfg];
            let own = h.owners[cfg.0] == s.player;
            let moves: Vec<usize> = if own {
                s.choose(cfg.0, cfg.1)
                    .filter(|&ri| h.rules()[ri].enabled(cfg.1))
                    .into_iter()
                    .collect()
            } else {
                h.enabled_rules(cfg.0, cfg.1).collect()
            };
            if own && moves.is_empty() {
                return BmcVerdict::Stuck(cfg);
            }
            for ri in moves {
                let r = &h.rules()[ri];
                let to = (r.to, r.action.apply(cfg.1).expect("enabled"));
                if to.1 > bounds.max_counter {
                    continue;
                }
                let tid = *index.entry(to).or_insert_with(|| {
                    nodes.push(to);
                    succ.push(Vec::new());
                    next.push(to);
                    nodes.len() - 1
                });
                if !succ[id].contains(&tid) {
                    succ[id].push(tid);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    let colors: Vec<u32> = nodes.iter().map(|&(st, _)| h.colors[st]).collect();
    let mut bad: Vec<u32> = colors
        .iter()
        .copied()
        .filter(|&c| !s.player.wins_with(c))
        .collect();
    bad.sort_unstable();
    bad.dedup();
    for d in bad {
        let keep: Vec<bool> = colors.iter().map(|&c| c <= d).collect();
        let comp = sccs(&succ, &keep);
        for v in 0..nodes.len() {
            if keep[v] && colors[v] == d && succ[v].iter().any(|&w| keep[w] && comp[w] == comp[v]) {
                return BmcVerdict::BadCycle(nodes[v]);
            }
        }
    }
    BmcVerdict::NoCounterexample
}
