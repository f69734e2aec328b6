//! Edges as pop-inspect-push rules: `1^(w+u) p → 1^(w+v) q` with
//! `u ∈ pop`, `w ∈ context` and `v ∈ push`.

use serde::{Deserialize, Serialize};

use super::graph::PrefixGameGraph;
use crate::automata::canon::{shift_pieces, Direction};
use crate::automata::epset::EpSet;
use crate::automata::relation::UnaryRelation;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct UvwRule {
    pub from: usize,
    pub to: usize,
    /// Lengths of the popped suffix.
    pub pop: EpSet,
    /// Lengths of the remaining stack, checked by the opponent.
    pub context: EpSet,
    /// Lengths of the pushed suffix.
    pub push: EpSet,
}

impl UvwRule {
    pub fn contains(&self, m: u64, n: u64) -> bool {
        let w_max = m.min(n);
        (0..=w_max).any(|w| {
            self.context.contains(w) && self.pop.contains(m - w) && self.push.contains(n - w)
        })
    }

    /// The binary relation `{(w + u, w + v)}` denoted by the rule.
    pub fn relation(&self) -> Result<UnaryRelation> {
        let zero = EpSet::singleton(0);
        if self.pop == zero {
            return Ok(UnaryRelation::up_piece(&self.context, &self.push));
        }
        if self.push == zero {
            return Ok(UnaryRelation::down_piece(&self.context, &self.pop));
        }
        // tracks (m, n, w)
        let popped = UnaryRelation::up_piece(&self.context, &self.pop).cylindrify(3, &[2, 0])?;
        let pushed = UnaryRelation::up_piece(&EpSet::full(), &self.push).cylindrify(3, &[2, 1])?;
        popped.intersect(&pushed)?.project(2)
    }
}

/// Decomposes every edge of the graph into rules whose union reproduces it
/// exactly.
pub fn extract_uvw(g: &PrefixGameGraph) -> Result<Vec<UvwRule>> {
    let mut out = Vec::new();
    for (&(from, to), rel) in &g.edges {
        let rules: Vec<UvwRule> = shift_pieces(rel)
            .into_iter()
            .map(|piece| match piece.direction {
                Direction::Up => UvwRule {
                    from,
                    to,
                    pop: EpSet::singleton(0),
                    context: piece.starts,
                    push: piece.deltas,
                },
                Direction::Down => UvwRule {
                    from,
                    to,
                    pop: piece.deltas,
                    context: piece.starts,
                    push: EpSet::singleton(0),
                },
            })
            .collect();
        if !recompose(&rules)?.equivalent(rel) {
            return Err(Error::Recomposition {
                from: g.names[from].clone(),
                to: g.names[to].clone(),
            });
        }
        out.extend(rules);
    }
    Ok(out)
}

/// Union of the relations of a set of rules.
pub fn recompose(rules: &[UvwRule]) -> Result<UnaryRelation> {
    let mut acc = UnaryRelation::empty(2);
    for r in rules {
        acc = acc.union(&r.relation()?)?;
    }
    Ok(acc)
}

/// Rules from `from` to `to` only.
pub fn rules_between(rules: &[UvwRule], from: usize, to: usize) -> Vec<UvwRule> {
    rules
        .iter()
        .filter(|r| r.from == from && r.to == to)
        .cloned()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::graph::build_game_graph;
    use crate::nmso::examples;

    #[test]
    fn general_rule_matches_bruteforce() {
        let r = UvwRule {
            from: 0,
            to: 0,
            pop: EpSet::residue(1, 2),
            context: EpSet::at_least(2),
            push: EpSet::finite([0, 3]),
        };
        let rel = r.relation().unwrap();
        for m in 0..14 {
            for n in 0..14 {
                assert_eq!(rel.contains(&[m, n]), r.contains(m, n), "({m}, {n})");
            }
        }
    }

    #[test]
    fn examples_recompose() {
        for a in [
            examples::unbounded(),
            examples::echo(),
            examples::eventually_zero(),
        ] {
            let g = build_game_graph(&a).unwrap();
            let rules = extract_uvw(&g).unwrap();
            for (&(p, q), rel) in &g.edges {
                let back = recompose(&rules_between(&rules, p, q)).unwrap();
                assert!(back.equivalent(rel));
            }
        }
    }
}
