//! One-counter systems in which a single player chooses, the other player
//! only inspecting stack contexts at handovers.

use std::collections::BTreeMap;

use crate::automata::epset::{class_index, lcm};
use crate::game::pushdown::inspection_passes;
use crate::game::{HState, OneCounterGameSystem, Player};
use crate::solve::{Config, ConfigLasso, RegularStrategy};

/// The inspector inspects exactly when the remaining stack violates the
/// context, and otherwise lets the mover continue. Every other state it owns
/// has a unique move.
pub fn inspector_strategy(h: &OneCounterGameSystem, inspector: Player) -> RegularStrategy {
    let (mut t, mut p) = h.system.regime();
    for r in &h.gadgets {
        t = t.max(r.context.threshold());
        p = lcm(p, r.context.period());
    }
    let mut choices = BTreeMap::new();
    for s in (0..h.num_states()).filter(|&s| h.owners[s] == inspector) {
        let row: Vec<Option<usize>> = (0..t + p)
            .map(|c| {
                let level = c as u64;
                debug_assert_eq!(class_index(t, p, level), c);
                let mut moves = h.enabled_rules(s, level);
                if let HState::Handover { .. } = h.roles[s] {
                    let inspect = !inspection_passes(h, s, level);
                    h.enabled_rules(s, level).find(|&ri| {
                        matches!(h.roles[h.rules()[ri].to], HState::Inspect { .. }) == inspect
                    })
                } else {
                    moves.next()
                }
            })
            .collect();
        choices.insert(s, row);
    }
    RegularStrategy {
        player: inspector,
        threshold: t,
        period: p,
        choices,
    }
}

/// Graph-vertex configurations along a lasso of the one-counter system:
/// `(prefix, cycle, drift)` with the same repetition structure.
pub fn vertex_lasso(
    h: &OneCounterGameSystem,
    lasso: &ConfigLasso,
) -> (Vec<Config>, Vec<Config>, u64) {
    let keep = |v: &Vec<Config>| -> Vec<Config> {
        v.iter()
            .filter_map(|&(s, l)| match h.roles[s] {
                HState::Vertex(q) => Some((q, l)),
                _ => None,
            })
            .collect()
    };
    (keep(&lasso.prefix), keep(&lasso.cycle), lasso.drift)
}
