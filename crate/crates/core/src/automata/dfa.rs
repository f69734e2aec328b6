//! Complete deterministic automata over bit-vector columns.
//!
//! A column over `k` tracks is a `u32` whose bit `i` is the letter on track
//! `i`. Every automaton here is complete: each state has a successor for each
//! of the `2^k` columns. After [`Dfa::minimize`] states are numbered in
//! breadth-first order from the initial state (which is state 0), so two
//! minimal automata for the same language are structurally equal.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

pub type Column = u32;
pub type StateId = u32;

/// Upper bound on tracks; the column alphabet has `2^MAX_TRACKS` letters.
pub const MAX_TRACKS: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dfa {
    tracks: usize,
    /// Row-major: `trans[state * columns + column]`.
    trans: Vec<StateId>,
    accepting: Vec<bool>,
}

impl Dfa {
    pub fn columns_for(tracks: usize) -> usize {
        assert!(tracks <= MAX_TRACKS, "too many tracks: {tracks}");
        1usize << tracks
    }

    /// Builds from an explicit table; state 0 is initial.
    pub fn from_table(tracks: usize, trans: Vec<StateId>, accepting: Vec<bool>) -> Self {
        let cols = Self::columns_for(tracks);
        assert_eq!(trans.len(), accepting.len() * cols, "table shape");
        assert!(!accepting.is_empty());
        assert!(trans.iter().all(|&t| (t as usize) < accepting.len()));
        Dfa {
            tracks,
            trans,
            accepting,
        }
    }

    /// Explores `step` from `init` and builds the reachable automaton.
    pub fn explore<S, F, A>(tracks: usize, init: S, mut step: F, mut accept: A) -> Self
    where
        S: Clone + Eq + std::hash::Hash,
        F: FnMut(&S, Column) -> S,
        A: FnMut(&S) -> bool,
    {
        let cols = Self::columns_for(tracks);
        let mut index: HashMap<S, StateId> = HashMap::new();
        let mut order: Vec<S> = Vec::new();
        index.insert(init.clone(), 0);
        order.push(init);
        let mut trans = Vec::new();
        let mut accepting = Vec::new();
        let mut next = 0;
        while next < order.len() {
            let s = order[next].clone();
            accepting.push(accept(&s));
            for c in 0..cols as Column {
                let t = step(&s, c);
                let id = match index.get(&t) {
                    Some(&id) => id,
                    None => {
                        let id = order.len() as StateId;
                        index.insert(t.clone(), id);
                        order.push(t);
                        id
                    }
                };
                trans.push(id);
            }
            next += 1;
        }
        Dfa {
            tracks,
            trans,
            accepting,
        }
    }

    pub fn universal(tracks: usize) -> Self {
        Self::from_table(tracks, vec![0; Self::columns_for(tracks)], vec![true])
    }

    pub fn empty(tracks: usize) -> Self {
        Self::from_table(tracks, vec![0; Self::columns_for(tracks)], vec![false])
    }

    pub fn tracks(&self) -> usize {
        self.tracks
    }

    pub fn columns(&self) -> usize {
        1usize << self.tracks
    }

    pub fn num_states(&self) -> usize {
        self.accepting.len()
    }

    pub fn initial(&self) -> StateId {
        0
    }

    #[inline]
    pub fn next(&self, s: StateId, c: Column) -> StateId {
        self.trans[s as usize * self.columns() + c as usize]
    }

    pub fn is_accepting(&self, s: StateId) -> bool {
        self.accepting[s as usize]
    }

    pub fn run<I: IntoIterator<Item = Column>>(&self, from: StateId, word: I) -> StateId {
        word.into_iter().fold(from, |s, c| self.next(s, c))
    }

    pub fn accepts<I: IntoIterator<Item = Column>>(&self, word: I) -> bool {
        self.is_accepting(self.run(0, word))
    }

    pub fn complement(&self) -> Self {
        Dfa {
            tracks: self.tracks,
            trans: self.trans.clone(),
            accepting: self.accepting.iter().map(|a| !a).collect(),
        }
    }

    /// Synchronous product; `op` combines acceptance.
    pub fn product(&self, other: &Dfa, op: impl Fn(bool, bool) -> bool) -> Self {
        assert_eq!(
            self.tracks, other.tracks,
            "product of automata with different track counts"
        );
        Dfa::explore(
            self.tracks,
            (0u32, 0u32),
            |&(a, b), c| (self.next(a, c), other.next(b, c)),
            |&(a, b)| op(self.is_accepting(a), other.is_accepting(b)),
        )
        .minimize()
    }

    pub fn intersect(&self, other: &Dfa) -> Self {
        self.product(other, |a, b| a && b)
    }

    pub fn union(&self, other: &Dfa) -> Self {
        self.product(other, |a, b| a || b)
    }

    pub fn difference(&self, other: &Dfa) -> Self {
        self.product(other, |a, b| a && !b)
    }

    fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        let mut queue = VecDeque::from([0u32]);
        seen[0] = true;
        while let Some(s) = queue.pop_front() {
            for c in 0..self.columns() as Column {
                let t = self.next(s, c);
                if !seen[t as usize] {
                    seen[t as usize] = true;
                    queue.push_back(t);
                }
            }
        }
        seen
    }

    pub fn is_empty(&self) -> bool {
        let seen = self.reachable();
        !seen.iter().zip(&self.accepting).any(|(r, a)| *r && *a)
    }

    /// Moore partition refinement followed by canonical BFS renumbering.
    pub fn minimize(&self) -> Self {
        let cols = self.columns();
        let seen = self.reachable();
        let live: Vec<StateId> = (0..self.num_states() as StateId)
            .filter(|&s| seen[s as usize])
            .collect();
        let mut block = vec![0usize; self.num_states()];
        for &s in &live {
            block[s as usize] = usize::from(self.accepting[s as usize]);
        }
        let mut blocks = {
            let mut kinds: Vec<usize> = live.iter().map(|&s| block[s as usize]).collect();
            kinds.sort_unstable();
            kinds.dedup();
            kinds.len()
        };
        loop {
            let mut sig_index: HashMap<Vec<usize>, usize> = HashMap::new();
            let mut new_block = vec![0usize; self.num_states()];
            for &s in &live {
                let mut sig = Vec::with_capacity(cols + 1);
                sig.push(block[s as usize]);
                for c in 0..cols as Column {
                    sig.push(block[self.next(s, c) as usize]);
                }
                let n = sig_index.len();
                new_block[s as usize] = *sig_index.entry(sig).or_insert(n);
            }
            let count = sig_index.len();
            block = new_block;
            if count == blocks {
                break;
            }
            blocks = count;
        }
        // Canonical renumbering by BFS over block representatives.
        let mut rep: HashMap<usize, StateId> = HashMap::new();
        for &s in &live {
            rep.entry(block[s as usize]).or_insert(s);
        }
        Dfa::explore(
            self.tracks,
            block[0],
            |&b, c| block[self.next(rep[&b], c) as usize],
            |&b| self.accepting[rep[&b] as usize],
        )
    }

    /// Relabels columns: existing track `i` becomes track `positions[i]` of a
    /// `total`-track automaton; the remaining tracks are unconstrained.
    pub fn cylindrify(&self, total: usize, positions: &[usize]) -> Self {
        assert_eq!(positions.len(), self.tracks);
        assert!(positions.iter().all(|&p| p < total));
        let cols = Self::columns_for(total);
        let mut trans = Vec::with_capacity(self.num_states() * cols);
        for s in 0..self.num_states() as StateId {
            for c in 0..cols as Column {
                let old = gather(c, positions);
                trans.push(self.next(s, old));
            }
        }
        Dfa {
            tracks: total,
            trans,
            accepting: self.accepting.clone(),
        }
        .minimize()
    }

    /// Existentially removes `track`. Acceptance is closed under appending
    /// columns that are zero on the remaining tracks, so witnesses on the
    /// removed track may extend beyond the word.
    pub fn project(&self, track: usize) -> Self {
        assert!(track < self.tracks);
        let new_tracks = self.tracks - 1;
        let bit = 1u32 << track;
        let low_mask = bit - 1;
        let expand =
            |c: Column, b: u32| -> Column { (c & low_mask) | ((c & !low_mask) << 1) | (b * bit) };
        let det = Dfa::explore(
            new_tracks,
            vec![0u32],
            |set: &Vec<StateId>, c| {
                let mut out: Vec<StateId> = set
                    .iter()
                    .flat_map(|&s| [self.next(s, expand(c, 0)), self.next(s, expand(c, 1))])
                    .collect();
                out.sort_unstable();
                out.dedup();
                out
            },
            |set| set.iter().any(|&s| self.is_accepting(s)),
        );
        det.saturate_padding().minimize()
    }

    /// Marks a state accepting when an accepting state is reachable through
    /// all-zero columns.
    pub fn saturate_padding(&self) -> Self {
        let mut acc = self.accepting.clone();
        loop {
            let mut changed = false;
            for s in 0..self.num_states() {
                if !acc[s] && acc[self.next(s as StateId, 0) as usize] {
                    acc[s] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        Dfa {
            tracks: self.tracks,
            trans: self.trans.clone(),
            accepting: acc,
        }
    }

    pub fn equivalent(&self, other: &Dfa) -> bool {
        self.tracks == other.tracks && self.product(other, |a, b| a != b).is_empty()
    }

    /// A shortest accepted word, breaking ties by smallest columns.
    pub fn shortest_accepted(&self) -> Option<Vec<Column>> {
        let n = self.num_states();
        let mut parent: Vec<Option<(StateId, Column)>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut queue = VecDeque::from([0u32]);
        while let Some(s) = queue.pop_front() {
            if self.is_accepting(s) {
                let mut word = Vec::new();
                let mut cur = s;
                while let Some((p, c)) = parent[cur as usize] {
                    word.push(c);
                    cur = p;
                }
                word.reverse();
                return Some(word);
            }
            for c in 0..self.columns() as Column {
                let t = self.next(s, c);
                if !seen[t as usize] {
                    seen[t as usize] = true;
                    parent[t as usize] = Some((s, c));
                    queue.push_back(t);
                }
            }
        }
        None
    }

    /// Graphviz rendering; `label` prints a column.
    pub fn to_dot(&self, name: &str, label: impl Fn(Column) -> String) -> String {
        let mut out =
            format!("digraph \"{name}\" {{\n  rankdir=LR;\n  init [shape=point];\n  init -> s0;\n");
        for s in 0..self.num_states() {
            let shape = if self.accepting[s] {
                "doublecircle"
            } else {
                "circle"
            };
            out.push_str(&format!("  s{s} [shape={shape}];\n"));
        }
        for s in 0..self.num_states() as StateId {
            let mut grouped: BTreeMap<StateId, Vec<String>> = BTreeMap::new();
            for c in 0..self.columns() as Column {
                grouped.entry(self.next(s, c)).or_default().push(label(c));
            }
            for (t, labels) in grouped {
                out.push_str(&format!(
                    "  s{s} -> s{t} [label=\"{}\"];\n",
                    labels.join(",")
                ));
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Picks bits of `c` at `positions` into a compact column.
pub fn gather(c: Column, positions: &[usize]) -> Column {
    positions
        .iter()
        .enumerate()
        .fold(0, |acc, (i, &p)| acc | (((c >> p) & 1) << i))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ends_with_one() -> Dfa {
        // one track; accepts words whose last letter is 1
        Dfa::from_table(1, vec![0, 1, 0, 1], vec![false, true])
    }

    #[test]
    fn minimize_merges_equivalent_states() {
        let d = Dfa::from_table(1, vec![1, 2, 1, 2, 1, 2], vec![false, false, true]);
        let m = d.minimize();
        assert_eq!(m.num_states(), 2);
        assert!(m.equivalent(&ends_with_one()));
        assert_eq!(m.minimize(), m);
    }

    #[test]
    fn boolean_algebra() {
        let a = ends_with_one();
        let u = a.union(&a.complement());
        assert!(u.equivalent(&Dfa::universal(1)));
        assert!(a.intersect(&a.complement()).is_empty());
        assert_eq!(a.shortest_accepted(), Some(vec![1]));
    }

    #[test]
    fn projection_saturates_padding() {
        // two tracks; accept iff track 1 has a 1 somewhere
        let d = Dfa::from_table(2, vec![0, 0, 1, 1, 1, 1, 1, 1], vec![false, true]);
        let p = d.project(1);
        assert!(p.accepts([]));
        assert!(p.accepts([0, 1]));
    }

    #[test]
    fn gather_picks_positions() {
        assert_eq!(gather(0b101, &[0, 2]), 0b11);
        assert_eq!(gather(0b101, &[1]), 0);
    }
}
