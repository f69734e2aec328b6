//! Synchronized unary relations on ℕ.
//!
//! A tuple `(n_0, …, n_{k-1})` is written as a word of columns where track `i`
//! reads `1^{n_i}` followed by padding (`#`, bit 0). The column at position
//! `pos` therefore has bit `i` set iff `pos < n_i`. Languages are kept
//! restricted to padding-valid words and closed under appending all-padding
//! columns.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::dfa::{Column, Dfa, StateId};
use super::epset::{class_index, lcm, next_class, EpSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UnaryRelation {
    arity: usize,
    dfa: Dfa,
}

/// Automaton accepting exactly the padding-valid words over `k` tracks.
pub fn padding_valid(k: usize) -> Dfa {
    let full: u32 = (1u32 << k) - 1;
    // state: Some(mask of tracks already padded) or None for dead
    Dfa::explore(
        k,
        Some(0u32),
        |s: &Option<u32>, c| match s {
            Some(ended) if c & ended == 0 => Some(ended | (!c & full)),
            _ => None,
        },
        |s| s.is_some(),
    )
}

impl UnaryRelation {
    /// Wraps an automaton, restricting it to padding-valid words. The caller
    /// guarantees closure under padding.
    pub fn from_dfa(dfa: Dfa) -> Self {
        let arity = dfa.tracks();
        let dfa = dfa.intersect(&padding_valid(arity));
        UnaryRelation { arity, dfa }
    }

    /// Checks the structural invariants of a deserialized relation.
    pub fn validate(&self) -> Result<()> {
        if self.dfa.tracks() != self.arity {
            return Err(Error::Artifact(
                "relation arity does not match its automaton".into(),
            ));
        }
        if !self.dfa.difference(&padding_valid(self.arity)).is_empty() {
            return Err(Error::Artifact(
                "relation accepts padding-invalid words".into(),
            ));
        }
        if !self.dfa.equivalent(&self.dfa.saturate_padding()) {
            return Err(Error::Artifact(
                "relation is not closed under padding".into(),
            ));
        }
        Ok(())
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn dfa(&self) -> &Dfa {
        &self.dfa
    }

    pub fn empty(arity: usize) -> Self {
        UnaryRelation {
            arity,
            dfa: Dfa::empty(arity),
        }
    }

    pub fn full(arity: usize) -> Self {
        UnaryRelation::from_dfa(Dfa::universal(arity))
    }

    pub fn column_at(tuple: &[u64], pos: u64) -> Column {
        tuple
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &v)| acc | (u32::from(pos < v) << i))
    }

    pub fn encode(tuple: &[u64]) -> Vec<Column> {
        let len = tuple.iter().copied().max().unwrap_or(0);
        (0..len).map(|pos| Self::column_at(tuple, pos)).collect()
    }

    pub fn contains(&self, tuple: &[u64]) -> bool {
        assert_eq!(tuple.len(), self.arity, "tuple arity");
        let len = tuple.iter().copied().max().unwrap_or(0);
        let mut s = self.dfa.initial();
        for pos in 0..len {
            s = self.dfa.next(s, Self::column_at(tuple, pos));
        }
        self.dfa.is_accepting(s)
    }

    fn check_arity(&self, other: &UnaryRelation) -> Result<()> {
        if self.arity != other.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: other.arity,
            });
        }
        Ok(())
    }

    pub fn intersect(&self, other: &UnaryRelation) -> Result<Self> {
        self.check_arity(other)?;
        Ok(UnaryRelation {
            arity: self.arity,
            dfa: self.dfa.intersect(&other.dfa),
        })
    }

    pub fn union(&self, other: &UnaryRelation) -> Result<Self> {
        self.check_arity(other)?;
        Ok(UnaryRelation {
            arity: self.arity,
            dfa: self.dfa.union(&other.dfa),
        })
    }

    pub fn difference(&self, other: &UnaryRelation) -> Result<Self> {
        self.check_arity(other)?;
        Ok(UnaryRelation {
            arity: self.arity,
            dfa: self.dfa.difference(&other.dfa),
        })
    }

    /// Complement relative to the padding-valid universe.
    pub fn complement(&self) -> Self {
        UnaryRelation::from_dfa(self.dfa.complement())
    }

    /// Drops one track by existential quantification.
    pub fn project(&self, track: usize) -> Result<Self> {
        if track >= self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: track + 1,
            });
        }
        Ok(UnaryRelation {
            arity: self.arity - 1,
            dfa: self.dfa.project(track),
        })
    }

    /// Embeds into a `total`-ary relation; track `i` moves to `positions[i]`.
    pub fn cylindrify(&self, total: usize, positions: &[usize]) -> Result<Self> {
        if positions.len() != self.arity || positions.iter().any(|&p| p >= total) {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: positions.len(),
            });
        }
        Ok(UnaryRelation::from_dfa(
            self.dfa.cylindrify(total, positions),
        ))
    }

    /// `{(a, c) : ∃b (a,b) ∈ self ∧ (b,c) ∈ other}`
    pub fn compose(&self, other: &UnaryRelation) -> Result<Self> {
        if self.arity != 2 || other.arity != 2 {
            return Err(Error::UnsupportedArity(self.arity.max(other.arity)));
        }
        let left = self.cylindrify(3, &[0, 1])?;
        let right = other.cylindrify(3, &[1, 2])?;
        left.intersect(&right)?.project(1)
    }

    pub fn inverse(&self) -> Result<Self> {
        if self.arity != 2 {
            return Err(Error::UnsupportedArity(self.arity));
        }
        self.cylindrify(2, &[1, 0])
    }

    pub fn equivalent(&self, other: &UnaryRelation) -> bool {
        self.arity == other.arity && self.dfa.equivalent(&other.dfa)
    }

    pub fn is_empty(&self) -> bool {
        self.dfa.is_empty()
    }

    pub fn is_subset(&self, other: &UnaryRelation) -> bool {
        self.arity == other.arity && self.dfa.difference(&other.dfa).is_empty()
    }

    // ---- unary sets ------------------------------------------------------

    pub fn from_epset(set: &EpSet) -> Self {
        let (t, p) = (set.threshold(), set.period());
        // Some((class, running)) or None (dead)
        let dfa = Dfa::explore(
            1,
            Some((0usize, true)),
            |s: &Option<(usize, bool)>, c| match *s {
                Some((k, true)) if c == 1 => Some((next_class(t, p, k), true)),
                Some((k, _)) if c == 0 => Some((k, false)),
                _ => None,
            },
            |s| s.is_some_and(|(k, _)| set.class_member(k)),
        );
        UnaryRelation {
            arity: 1,
            dfa: dfa.minimize(),
        }
    }

    /// The set denoted by a unary relation.
    pub fn to_epset(&self) -> Result<EpSet> {
        if self.arity != 1 {
            return Err(Error::UnsupportedArity(self.arity));
        }
        let (chain, t, p) = lasso(&self.dfa, self.dfa.initial(), 1);
        Ok(EpSet::from_fn(t, p, |n| {
            self.dfa.is_accepting(chain[class_index(t, p, n as u64)])
        }))
    }

    // ---- binary building blocks -----------------------------------------

    /// `{(i, i + d) : i ∈ starts, d ∈ deltas}`
    pub fn up_piece(starts: &EpSet, deltas: &EpSet) -> Self {
        Self::piece(starts, deltas, false)
    }

    /// `{(j + d, j) : j ∈ starts, d ∈ deltas}`
    pub fn down_piece(starts: &EpSet, deltas: &EpSet) -> Self {
        Self::piece(starts, deltas, true)
    }

    fn piece(starts: &EpSet, deltas: &EpSet, down: bool) -> Self {
        #[derive(Clone, PartialEq, Eq, Hash)]
        enum St {
            Diag(usize),
            Tail(usize, usize),
            Ended(bool),
            Dead,
        }
        let (et, ep) = (starts.threshold(), starts.period());
        let (dt, dp) = (deltas.threshold(), deltas.period());
        let tail_col: Column = if down { 1 } else { 2 };
        let dfa = Dfa::explore(
            2,
            St::Diag(0),
            |s, c| match (s, c) {
                (St::Diag(e), 3) => St::Diag(next_class(et, ep, *e)),
                (St::Diag(e), 0) => St::Ended(starts.class_member(*e) && deltas.contains(0)),
                (St::Diag(e), c) if c == tail_col => St::Tail(*e, class_index(dt, dp, 1)),
                (St::Tail(e, d), c) if c == tail_col => St::Tail(*e, next_class(dt, dp, *d)),
                (St::Tail(e, d), 0) => {
                    St::Ended(starts.class_member(*e) && deltas.class_member(*d))
                }
                (St::Ended(a), 0) => St::Ended(*a),
                _ => St::Dead,
            },
            |s| match s {
                St::Diag(e) => starts.class_member(*e) && deltas.contains(0),
                St::Tail(e, d) => starts.class_member(*e) && deltas.class_member(*d),
                St::Ended(a) => *a,
                St::Dead => false,
            },
        );
        UnaryRelation {
            arity: 2,
            dfa: dfa.minimize(),
        }
    }

    pub fn identity() -> Self {
        Self::up_piece(&EpSet::full(), &EpSet::singleton(0))
    }

    /// `{(m, m + e)}` for possibly negative `e`.
    pub fn shift(e: i64) -> Self {
        if e >= 0 {
            Self::up_piece(&EpSet::full(), &EpSet::singleton(e as usize))
        } else {
            Self::down_piece(&EpSet::full(), &EpSet::singleton((-e) as usize))
        }
    }

    /// `{(a, b) : a < b}`
    pub fn less_than() -> Self {
        Self::up_piece(&EpSet::full(), &EpSet::at_least(1))
    }

    /// The single tuple `t`.
    pub fn from_tuple(t: &[u64]) -> Self {
        let k = t.len();
        let len = t.iter().copied().max().unwrap_or(0);
        let dfa = Dfa::explore(
            k,
            Some(0u64),
            |s: &Option<u64>, c| match *s {
                Some(pos) if pos < len && c == Self::column_at(t, pos) => Some(pos + 1),
                Some(pos) if pos >= len && c == 0 => Some(pos),
                _ => None,
            },
            |s| *s == Some(len),
        );
        UnaryRelation {
            arity: k,
            dfa: dfa.minimize(),
        }
    }

    pub fn from_tuples(arity: usize, tuples: &[Vec<u64>]) -> Self {
        tuples.iter().fold(Self::empty(arity), |acc, t| {
            acc.union(&Self::from_tuple(t)).expect("same arity")
        })
    }

    /// Cartesian product of unary sets.
    pub fn product_of(sets: &[EpSet]) -> Self {
        let k = sets.len();
        sets.iter().enumerate().fold(Self::full(k), |acc, (i, s)| {
            let cyl = Self::from_epset(s).cylindrify(k, &[i]).expect("in range");
            acc.intersect(&cyl).expect("same arity")
        })
    }

    // ---- derived queries --------------------------------------------------

    /// `{ j : ∃ i ∈ set, (i, j) ∈ R }`
    pub fn image(&self, set: &EpSet) -> Result<EpSet> {
        if self.arity != 2 {
            return Err(Error::UnsupportedArity(self.arity));
        }
        let cyl = Self::from_epset(set).cylindrify(2, &[0])?;
        self.intersect(&cyl)?.project(0)?.to_epset()
    }

    /// `{ i : ∃ j ∈ set, (i, j) ∈ R }`
    pub fn preimage(&self, set: &EpSet) -> Result<EpSet> {
        if self.arity != 2 {
            return Err(Error::UnsupportedArity(self.arity));
        }
        let cyl = Self::from_epset(set).cylindrify(2, &[1])?;
        self.intersect(&cyl)?.project(1)?.to_epset()
    }

    pub fn domain(&self) -> Result<EpSet> {
        self.preimage(&EpSet::full())
    }

    pub fn range(&self) -> Result<EpSet> {
        self.image(&EpSet::full())
    }

    /// `{(i, m) ∈ R : no m' < m with (i, m') ∈ R}`
    pub fn least_partner(&self) -> Result<Self> {
        if self.arity != 2 {
            return Err(Error::UnsupportedArity(self.arity));
        }
        let earlier = self.cylindrify(3, &[0, 2])?;
        let less = Self::less_than().cylindrify(3, &[2, 1])?;
        let beaten = earlier.intersect(&less)?.project(2)?;
        self.difference(&beaten)
    }

    /// True iff every `i` has at most one partner.
    pub fn is_functional(&self) -> Result<bool> {
        Ok(self.functionality_witness()?.is_none())
    }

    /// Some `(i, a, b)` with `a ≠ b` and both pairs in the relation.
    pub fn functionality_witness(&self) -> Result<Option<Vec<u64>>> {
        if self.arity != 2 {
            return Err(Error::UnsupportedArity(self.arity));
        }
        let a = self.cylindrify(3, &[0, 1])?;
        let b = self.cylindrify(3, &[0, 2])?;
        let same = Self::identity().cylindrify(3, &[1, 2])?;
        let clash = a.intersect(&b)?.difference(&same)?;
        Ok(clash.smallest())
    }

    /// The members for which all other tracks are fixed: exactly one entry
    /// of `fixed` must be `None`.
    pub fn section(&self, fixed: &[Option<u64>]) -> Result<EpSet> {
        if fixed.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: fixed.len(),
            });
        }
        let free: Vec<usize> = (0..self.arity).filter(|&i| fixed[i].is_none()).collect();
        if free.len() != 1 {
            return Err(Error::Validation(
                "section needs exactly one free track".into(),
            ));
        }
        let free = free[0];
        let free_bit: Column = 1 << free;
        let len = fixed.iter().flatten().copied().max().unwrap_or(0) as usize;
        let col = |pos: usize| -> Column {
            fixed.iter().enumerate().fold(0, |acc, (i, v)| {
                acc | (u32::from(v.is_some_and(|v| (pos as u64) < v)) << i)
            })
        };
        let n = self.dfa.num_states();
        // ok_from[p][s]: reading columns p..len with the free track padded accepts
        let mut ok_from = vec![vec![false; n]; len + 1];
        for s in 0..n {
            ok_from[len][s] = self.dfa.is_accepting(s as StateId);
        }
        for p in (0..len).rev() {
            let c = col(p);
            for s in 0..n {
                ok_from[p][s] = ok_from[p + 1][self.dfa.next(s as StateId, c) as usize];
            }
        }
        let mut low = Vec::with_capacity(len);
        let mut s = self.dfa.initial();
        for (p, ok) in ok_from.iter().enumerate().take(len) {
            low.push(ok[s as usize]);
            s = self.dfa.next(s, col(p) | free_bit);
        }
        let (chain, t, per) = lasso(&self.dfa, s, free_bit);
        Ok(EpSet::from_fn(len + t, per, |y| {
            if y < len {
                low[y]
            } else {
                self.dfa
                    .is_accepting(chain[class_index(t, per, (y - len) as u64)])
            }
        }))
    }

    /// A smallest member in the order (sum, then lexicographic).
    pub fn smallest(&self) -> Option<Vec<u64>> {
        let word = self.dfa.shortest_accepted()?;
        let bound = word.len() as u64;
        let k = self.arity;
        for sum in 0..=(bound * k as u64) {
            let mut found = None;
            enumerate_with_sum(k, sum, bound, &mut |t| {
                if found.is_none() && self.contains(t) {
                    found = Some(t.to_vec());
                }
            });
            if found.is_some() {
                return found;
            }
        }
        // shortest word witness is itself a member
        let mut tuple = vec![0u64; k];
        for (pos, c) in word.iter().enumerate() {
            for (i, v) in tuple.iter_mut().enumerate() {
                if c >> i & 1 == 1 {
                    *v = pos as u64 + 1;
                }
            }
        }
        Some(tuple)
    }

    /// True iff the relation holds at `base + t * step` for every `t ≥ 0`.
    ///
    /// Beyond the last crossing of the coordinate lines, each segment between
    /// consecutive coordinates has length affine in `t` and the automaton's
    /// action on a segment is eventually periodic in its length, so acceptance
    /// is eventually periodic in `t`; it suffices to test one full period past
    /// the stabilisation point.
    pub fn holds_on_ray(&self, base: &[u64], step: &[u64]) -> bool {
        assert_eq!(base.len(), self.arity);
        assert_eq!(step.len(), self.arity);
        let k = self.arity;
        let mut t_order = 0u64;
        for i in 0..k {
            for j in 0..k {
                if step[i] > step[j] && base[i] < base[j] {
                    let d = base[j] - base[i];
                    let s = step[i] - step[j];
                    t_order = t_order.max(d.div_ceil(s) + 1);
                }
            }
        }
        let at = |t: u64| -> Vec<u64> { (0..k).map(|i| base[i] + t * step[i]).collect() };
        // Sorted distinct coordinates at a point past all crossings.
        let probe = at(t_order);
        let mut idx: Vec<usize> = (0..k).collect();
        idx.sort_by_key(|&i| (probe[i], step[i]));
        let n = self.dfa.num_states() as u64;
        let mut t_stable = t_order;
        let mut period = 1usize;
        let mut prev: Option<usize> = None;
        for &i in &idx {
            if let Some(p) = prev {
                if base[i] == base[p] && step[i] == step[p] {
                    continue;
                }
            }
            let (lo_b, lo_s) = prev.map_or((0, 0), |p| (base[p], step[p]));
            let alpha = base[i] as i128 - lo_b as i128;
            let beta = step[i] as i128 - lo_s as i128;
            if beta > 0 {
                // segment column is the set of tracks with coordinate ≥ this one
                let c: Column = (0..k).fold(0, |acc, j| {
                    acc | (u32::from((probe[j], step[j]) >= (probe[i], step[i])) << j)
                });
                let cyc = transformation_cycle_lcm(&self.dfa, c);
                let need = (n as i128 - alpha).max(0);
                let t_seg = ((need + beta - 1) / beta) as u64;
                t_stable = t_stable.max(t_seg);
                let b = beta as usize;
                period = lcm(period, cyc / super::epset::gcd(cyc, b));
            }
            prev = Some(i);
        }
        (0..t_stable + period as u64).all(|t| self.contains(&at(t)))
    }

    pub fn to_dot(&self, name: &str) -> String {
        let k = self.arity;
        self.dfa.to_dot(name, |c| {
            (0..k)
                .map(|i| if c >> i & 1 == 1 { '1' } else { '#' })
                .collect()
        })
    }

    /// Converts a position-encoded automaton (track `i` carries a single `1`
    /// at position `n_i`) to the unary encoding.
    pub fn from_position_dfa(pos: &Dfa) -> Self {
        let k = pos.tracks();
        let full: u32 = (1u32 << k) - 1;
        let dfa = Dfa::explore(
            k,
            (pos.initial(), full),
            |&(q, prev), c| (pos.next(q, prev & !c), c),
            |&(q, prev)| pos.is_accepting(pos.next(q, prev)),
        );
        UnaryRelation::from_dfa(dfa)
    }
}

/// The states reached from `from` by repeating column `c`, as a lasso:
/// `(chain, threshold, period)` with `chain.len() == threshold + period`.
pub fn lasso(dfa: &Dfa, from: StateId, c: Column) -> (Vec<StateId>, usize, usize) {
    let mut seen: HashMap<StateId, usize> = HashMap::new();
    let mut chain = Vec::new();
    let mut s = from;
    loop {
        if let Some(&i) = seen.get(&s) {
            let t = i;
            let p = chain.len() - i;
            return (chain, t, p);
        }
        seen.insert(s, chain.len());
        chain.push(s);
        s = dfa.next(s, c);
    }
}

/// Least common multiple of the cycle lengths of the map `s ↦ δ(s, c)`.
fn transformation_cycle_lcm(dfa: &Dfa, c: Column) -> usize {
    let mut result = 1;
    for s in 0..dfa.num_states() as StateId {
        let (_, _, p) = lasso(dfa, s, c);
        result = lcm(result, p);
    }
    result
}

fn enumerate_with_sum(k: usize, sum: u64, bound: u64, f: &mut impl FnMut(&[u64])) {
    fn go(prefix: &mut Vec<u64>, k: usize, rest: u64, bound: u64, f: &mut impl FnMut(&[u64])) {
        if prefix.len() + 1 == k {
            if rest <= bound {
                prefix.push(rest);
                f(prefix);
                prefix.pop();
            }
            return;
        }
        for v in 0..=rest.min(bound) {
            prefix.push(v);
            go(prefix, k, rest - v, bound, f);
            prefix.pop();
        }
    }
    if k == 0 {
        if sum == 0 {
            f(&[]);
        }
        return;
    }
    go(&mut Vec::new(), k, sum, bound, f);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn succ() -> UnaryRelation {
        UnaryRelation::shift(1)
    }

    #[test]
    fn encoding_matches_membership() {
        let r = succ();
        assert!(r.contains(&[3, 4]));
        assert!(!r.contains(&[3, 3]));
        assert!(!r.contains(&[4, 3]));
        assert!(r.contains(&[0, 1]));
    }

    #[test]
    fn compose_successor_twice() {
        let two = succ().compose(&succ()).unwrap();
        assert!(two.equivalent(&UnaryRelation::shift(2)));
    }

    #[test]
    fn complement_is_involutive() {
        let r = UnaryRelation::less_than();
        assert!(r.equivalent(&r.complement().complement()));
        assert!(r.complement().contains(&[5, 5]));
        assert!(!r.complement().contains(&[4, 5]));
    }

    #[test]
    fn epset_roundtrip() {
        let even = EpSet::residue(0, 2);
        let r = UnaryRelation::from_epset(&even);
        assert_eq!(r.to_epset().unwrap(), even);
        assert!(r.contains(&[4]) && !r.contains(&[5]));
    }

    #[test]
    fn image_examples() {
        let plus_two = UnaryRelation::shift(2);
        assert_eq!(
            plus_two.image(&EpSet::singleton(0)).unwrap(),
            EpSet::singleton(2)
        );
        let odd = succ().image(&EpSet::residue(0, 2)).unwrap();
        assert_eq!(odd, EpSet::residue(1, 2));
    }

    #[test]
    fn least_partner_examples() {
        let at_least_five = UnaryRelation::product_of(&[EpSet::full(), EpSet::at_least(5)]);
        let lp = at_least_five.least_partner().unwrap();
        assert!(lp.equivalent(&UnaryRelation::product_of(&[
            EpSet::full(),
            EpSet::singleton(5)
        ])));
        let id = UnaryRelation::identity();
        assert!(id.least_partner().unwrap().equivalent(&id));
    }

    #[test]
    fn section_fixes_tracks() {
        let r = UnaryRelation::less_than();
        assert_eq!(r.section(&[Some(3), None]).unwrap(), EpSet::at_least(4));
        assert_eq!(
            r.section(&[None, Some(3)]).unwrap(),
            EpSet::finite([0, 1, 2])
        );
    }

    #[test]
    fn tuples_and_smallest() {
        let r = UnaryRelation::from_tuples(2, &[vec![3, 1], vec![0, 7]]);
        assert!(r.contains(&[3, 1]) && r.contains(&[0, 7]) && !r.contains(&[1, 3]));
        assert_eq!(r.smallest(), Some(vec![3, 1]));
        assert_eq!(UnaryRelation::empty(2).smallest(), None);
    }

    #[test]
    fn rays() {
        let lt = UnaryRelation::less_than();
        assert!(lt.holds_on_ray(&[0, 1], &[1, 1]));
        assert!(!lt.holds_on_ray(&[5, 0], &[0, 1]));
        assert!(lt.holds_on_ray(&[5, 6], &[1, 2]));
        let even = UnaryRelation::from_epset(&EpSet::residue(0, 2));
        assert!(even.holds_on_ray(&[4], &[2]));
        assert!(!even.holds_on_ray(&[4], &[1]));
    }

    #[test]
    fn functionality() {
        assert!(succ().is_functional().unwrap());
        let lt = UnaryRelation::less_than();
        assert_eq!(lt.functionality_witness().unwrap(), Some(vec![0, 1, 2]));
    }
}
