//! Canonical eventually periodic presentations of unary relations.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::dfa::{Column, Dfa, StateId};
use super::epset::{class_index, next_class, EpSet};
use super::relation::{lasso, UnaryRelation};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    /// `{(i, i + d)}`
    Up,
    /// `{(j + d, j)}`
    Down,
}

/// One piece of a binary relation: pairs at offset `d ∈ deltas` from a
/// start `i ∈ starts` in the given direction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ShiftPiece {
    pub direction: Direction,
    pub starts: EpSet,
    pub deltas: EpSet,
}

impl ShiftPiece {
    pub fn contains(&self, a: u64, b: u64) -> bool {
        let (lo, hi) = match self.direction {
            Direction::Up => (a, b),
            Direction::Down => (b, a),
        };
        hi >= lo && self.starts.contains(lo) && self.deltas.contains(hi - lo)
    }

    pub fn to_relation(&self) -> UnaryRelation {
        match self.direction {
            Direction::Up => UnaryRelation::up_piece(&self.starts, &self.deltas),
            Direction::Down => UnaryRelation::down_piece(&self.starts, &self.deltas),
        }
    }
}

/// Tuples whose distinct values, in increasing order, are reached by
/// consecutive gaps from `gaps`; `blocks[l]` lists the tracks taking the
/// `l`-th value. Only the first gap may be zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PhasePiece {
    pub blocks: Vec<Vec<usize>>,
    pub gaps: Vec<EpSet>,
}

impl PhasePiece {
    pub fn contains(&self, tuple: &[u64]) -> bool {
        let mut value = 0u64;
        let mut seen = 0usize;
        for (l, block) in self.blocks.iter().enumerate() {
            let later = self.blocks[l + 1..].iter().flatten();
            let next = block.first().map(|&t| tuple[t]);
            let Some(v) = next else { return false };
            if v < value || !self.gaps[l].contains(v - value) || (l > 0 && v == value) {
                return false;
            }
            if block.iter().any(|&t| tuple[t] != v) || later.clone().any(|&t| tuple[t] <= v) {
                return false;
            }
            value = v;
            seen += block.len();
        }
        seen == tuple.len()
    }

    pub fn to_relation(&self, arity: usize) -> UnaryRelation {
        #[derive(Clone, PartialEq, Eq, Hash)]
        enum St {
            Phase(usize, usize),
            Ended,
            Dead,
        }
        let r = self.blocks.len();
        let mut active: Vec<Column> = Vec::with_capacity(r + 1);
        let mut mask: Column = (1 << arity) - 1;
        for block in &self.blocks {
            active.push(mask);
            for &t in block {
                mask &= !(1 << t);
            }
        }
        active.push(mask);
        if r == 0 {
            return UnaryRelation::full(arity);
        }
        let gaps = &self.gaps;
        let dfa = Dfa::explore(
            arity,
            St::Phase(0, 0),
            |s, c| match *s {
                St::Phase(l, cls) => {
                    let g = &gaps[l];
                    if c == active[l] {
                        St::Phase(l, next_class(g.threshold(), g.period(), cls))
                    } else if c == active[l + 1] && g.class_member(cls) {
                        if l + 1 == r {
                            St::Ended
                        } else {
                            let h = &gaps[l + 1];
                            St::Phase(l + 1, class_index(h.threshold(), h.period(), 1))
                        }
                    } else {
                        St::Dead
                    }
                }
                St::Ended if c == 0 => St::Ended,
                _ => St::Dead,
            },
            |s| match *s {
                St::Phase(l, cls) => l + 1 == r && gaps[l].class_member(cls),
                St::Ended => true,
                St::Dead => false,
            },
        );
        UnaryRelation::from_dfa(dfa.minimize())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Presentation {
    Set(EpSet),
    Pairs(Vec<ShiftPiece>),
    Phases(Vec<PhasePiece>),
}

impl Presentation {
    pub fn contains(&self, tuple: &[u64]) -> bool {
        match self {
            Presentation::Set(s) => s.contains(tuple[0]),
            Presentation::Pairs(ps) => ps.iter().any(|p| p.contains(tuple[0], tuple[1])),
            Presentation::Phases(ps) => ps.iter().any(|p| p.contains(tuple)),
        }
    }

    pub fn rebuild(&self, arity: usize) -> UnaryRelation {
        match self {
            Presentation::Set(s) => UnaryRelation::from_epset(s),
            Presentation::Pairs(ps) => ps.iter().fold(UnaryRelation::empty(2), |acc, p| {
                acc.union(&p.to_relation()).expect("binary pieces")
            }),
            Presentation::Phases(ps) => ps.iter().fold(UnaryRelation::empty(arity), |acc, p| {
                acc.union(&p.to_relation(arity)).expect("same arity")
            }),
        }
    }
}

/// Canonical presentation of a relation of arity 1, 2 or 3, checked for
/// exact equivalence with the input.
pub fn canonicalize(rel: &UnaryRelation) -> Result<Presentation> {
    let p = match rel.arity() {
        1 => Presentation::Set(rel.to_epset()?),
        2 => Presentation::Pairs(shift_pieces(rel)),
        3 => Presentation::Phases(phase_pieces(rel)),
        k => return Err(Error::UnsupportedArity(k)),
    };
    if !p.rebuild(rel.arity()).equivalent(rel) {
        return Err(Error::Inconsistent(
            "canonical presentation differs from relation".into(),
        ));
    }
    Ok(p)
}

/// Decomposes a binary relation along the states visited on the diagonal.
pub fn shift_pieces(rel: &UnaryRelation) -> Vec<ShiftPiece> {
    let dfa = rel.dfa();
    let (diag, t, p) = lasso(dfa, dfa.initial(), 3);
    let mut starts: HashMap<StateId, EpSet> = HashMap::new();
    for (c, &s) in diag.iter().enumerate() {
        let e = EpSet::from_fn(t, p, |i| class_index(t, p, i as u64) == c);
        let entry = starts.entry(s).or_insert_with(EpSet::empty);
        *entry = entry.union(&e);
    }
    let deltas = |s: StateId, col: Column, from: usize| {
        let (chain, dt, dp) = lasso(dfa, s, col);
        EpSet::from_fn(dt.max(from), dp, |d| {
            d >= from && dfa.is_accepting(chain[class_index(dt, dp, d as u64)])
        })
    };
    let mut grouped: BTreeMap<(Direction, EpSet), EpSet> = BTreeMap::new();
    let mut states: Vec<_> = starts.into_iter().collect();
    states.sort_by_key(|(s, _)| *s);
    for (s, e) in states {
        for (dir, col, from) in [(Direction::Up, 2, 0), (Direction::Down, 1, 1)] {
            let d = deltas(s, col, from);
            if d.is_empty() {
                continue;
            }
            let entry = grouped.entry((dir, d)).or_insert_with(EpSet::empty);
            *entry = entry.union(&e);
        }
    }
    grouped
        .into_iter()
        .map(|((direction, deltas), starts)| ShiftPiece {
            direction,
            starts,
            deltas,
        })
        .collect()
}

/// Generic decomposition by the order in which tracks are padded.
pub fn phase_pieces(rel: &UnaryRelation) -> Vec<PhasePiece> {
    let dfa = rel.dfa();
    let full: Column = (1 << rel.arity()) - 1;
    let mut memo = HashMap::new();
    let raw = phases_from(dfa, dfa.initial(), full, true, &mut memo);
    raw.into_iter()
        .map(|(masks, gaps)| PhasePiece {
            blocks: masks
                .into_iter()
                .map(|m| (0..rel.arity()).filter(|&t| m >> t & 1 == 1).collect())
                .collect(),
            gaps,
        })
        .collect()
}

type RawPiece = (Vec<Column>, Vec<EpSet>);

fn phases_from(
    dfa: &Dfa,
    s: StateId,
    active: Column,
    first: bool,
    memo: &mut HashMap<(StateId, Column, bool), Vec<RawPiece>>,
) -> Vec<RawPiece> {
    if let Some(v) = memo.get(&(s, active, first)) {
        return v.clone();
    }
    if active == 0 {
        let v = if dfa.is_accepting(s) {
            vec![(vec![], vec![])]
        } else {
            vec![]
        };
        memo.insert((s, active, first), v.clone());
        return v;
    }
    let (chain, t, p) = lasso(dfa, s, active);
    let mut grouped: BTreeMap<(Vec<Column>, Vec<EpSet>), EpSet> = BTreeMap::new();
    for (c, &state) in chain.iter().enumerate() {
        let gap = EpSet::from_fn(t, p, |g| {
            class_index(t, p, g as u64) == c && (first || g >= 1)
        });
        if gap.is_empty() {
            continue;
        }
        // every nonempty subset of the active tracks may end here
        let mut ending = active;
        loop {
            if ending != 0 {
                for (masks, gaps) in phases_from(dfa, state, active & !ending, false, memo) {
                    let mut m = vec![ending];
                    m.extend(masks);
                    let entry = grouped.entry((m, gaps)).or_insert_with(EpSet::empty);
                    *entry = entry.union(&gap);
                }
            }
            if ending == 0 {
                break;
            }
            ending = (ending - 1) & active;
        }
    }
    let v: Vec<RawPiece> = grouped
        .into_iter()
        .map(|((masks, rest), first_gap)| {
            let mut gaps = vec![first_gap];
            gaps.extend(rest);
            (masks, gaps)
        })
        .collect();
    memo.insert((s, active, first), v.clone());
    v
}
