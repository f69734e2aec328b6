//! Images and reachability closures of tagged EP set families under
//! binary unary relations.

use super::canon::shift_pieces;
use super::counter::{Action, CounterRule, CounterSystem};
use super::epset::EpSet;
use super::relation::UnaryRelation;
use crate::error::Result;

/// A labelled edge relation between tags.
#[derive(Debug, Clone)]
pub struct TaggedEdge<'a> {
    pub from: usize,
    pub to: usize,
    pub relation: &'a UnaryRelation,
}

/// One application of every edge: `out[to] = ⋃ image(family[from], R)`.
pub fn image_family(family: &[EpSet], edges: &[TaggedEdge<'_>]) -> Result<Vec<EpSet>> {
    let mut out = vec![EpSet::empty(); family.len()];
    for e in edges {
        if family[e.from].is_empty() {
            continue;
        }
        let img = e.relation.image(&family[e.from])?;
        out[e.to] = out[e.to].union(&img);
    }
    Ok(out)
}

/// Least family containing `init` and closed under every edge.
///
/// Each relation is split into shift pieces and wired into a one-counter
/// system; the reachable levels of that system are computed exactly.
/// `cap` bounds the number of levels explored before a repetition.
pub fn reach_closure(init: &[EpSet], edges: &[TaggedEdge<'_>], cap: usize) -> Result<Vec<EpSet>> {
    let tags = init.len();
    let mut sys = CounterSystem::new(tags + 1);
    let source = tags;
    // the source climbs freely and drops into each tag at its initial levels
    sys.add_rule(CounterRule::new(
        source,
        source,
        Action::Push,
        EpSet::full(),
    ));
    for (tag, set) in init.iter().enumerate() {
        if !set.is_empty() {
            sys.add_rule(CounterRule::new(source, tag, Action::Stay, set.clone()));
        }
    }
    for e in edges {
        sys.add_relation_gadget(e.from, e.to, &shift_pieces(e.relation));
    }
    let reach = sys.reachable(source, 0, cap)?;
    Ok(reach.into_iter().take(tags).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn image_of_singleton() {
        let r = UnaryRelation::shift(2);
        let e = [TaggedEdge {
            from: 0,
            to: 0,
            relation: &r,
        }];
        assert_eq!(
            image_family(&[EpSet::singleton(0)], &e).unwrap()[0],
            EpSet::singleton(2)
        );
    }

    #[test]
    fn closure_matches_kleene_prefix() {
        let up = UnaryRelation::shift(3);
        let down = UnaryRelation::shift(-2);
        let edges = [
            TaggedEdge {
                from: 0,
                to: 1,
                relation: &up,
            },
            TaggedEdge {
                from: 1,
                to: 0,
                relation: &down,
            },
        ];
        let init = [EpSet::singleton(0), EpSet::empty()];
        let closed = reach_closure(&init, &edges, 10_000).unwrap();
        // brute force Kleene iteration on a bounded window
        let mut a = vec![vec![false; 200]; 2];
        a[0][0] = true;
        for _ in 0..200 {
            for i in 0..200 {
                if a[0][i] && i + 3 < 200 {
                    a[1][i + 3] = true;
                }
                if a[1][i] && i >= 2 {
                    a[0][i - 2] = true;
                }
            }
        }
        for tag in 0..2 {
            for i in 0..150 {
                assert_eq!(
                    closed[tag].contains(i as u64),
                    a[tag][i],
                    "tag {tag} level {i}"
                );
            }
        }
    }
}
