//! Eventually periodic subsets of ℕ.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `n ∈ S` iff `low[n]` for `n < threshold`, else `high[(n - threshold) % period]`.
///
/// Values are always kept in their unique minimal presentation, so derived
/// equality is set equality.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawEpSet", into = "RawEpSet")]
pub struct EpSet {
    threshold: usize,
    period: usize,
    low: Vec<bool>,
    high: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
struct RawEpSet {
    threshold: usize,
    period: usize,
    low: Vec<u8>,
    high: Vec<u8>,
}

impl TryFrom<RawEpSet> for EpSet {
    type Error = Error;
    fn try_from(raw: RawEpSet) -> Result<Self> {
        if raw.period == 0 || raw.low.len() != raw.threshold || raw.high.len() != raw.period {
            return Err(Error::Artifact(
                "inconsistent eventually periodic set".into(),
            ));
        }
        Ok(EpSet::new(
            raw.low.iter().map(|&b| b != 0).collect(),
            raw.high.iter().map(|&b| b != 0).collect(),
        ))
    }
}

impl From<EpSet> for RawEpSet {
    fn from(s: EpSet) -> Self {
        RawEpSet {
            threshold: s.threshold,
            period: s.period,
            low: s.low.iter().map(|&b| u8::from(b)).collect(),
            high: s.high.iter().map(|&b| u8::from(b)).collect(),
        }
    }
}

pub fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

impl EpSet {
    pub fn new(low: Vec<bool>, high: Vec<bool>) -> Self {
        assert!(!high.is_empty(), "period must be at least 1");
        let mut s = EpSet {
            threshold: low.len(),
            period: high.len(),
            low,
            high,
        };
        s.normalize();
        s
    }

    pub fn from_fn(threshold: usize, period: usize, f: impl Fn(usize) -> bool) -> Self {
        EpSet::new(
            (0..threshold).map(&f).collect(),
            (threshold..threshold + period).map(f).collect(),
        )
    }

    pub fn empty() -> Self {
        EpSet::new(vec![], vec![false])
    }

    pub fn full() -> Self {
        EpSet::new(vec![], vec![true])
    }

    pub fn singleton(n: usize) -> Self {
        EpSet::from_fn(n + 1, 1, |i| i == n)
    }

    pub fn finite<I: IntoIterator<Item = usize>>(items: I) -> Self {
        let items: Vec<usize> = items.into_iter().collect();
        let t = items.iter().max().map_or(0, |m| m + 1);
        EpSet::from_fn(t, 1, |i| items.contains(&i))
    }

    pub fn at_least(n: usize) -> Self {
        EpSet::from_fn(n, 1, |i| i >= n)
    }

    /// `{ n : n ≡ r (mod m) }`
    pub fn residue(r: usize, m: usize) -> Self {
        EpSet::from_fn(0, m, |i| i % m == r % m)
    }

    pub fn threshold(&self) -> usize {
        self.threshold
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn low(&self) -> &[bool] {
        &self.low
    }

    pub fn high(&self) -> &[bool] {
        &self.high
    }

    pub fn contains(&self, n: u64) -> bool {
        let n = n as usize;
        if n < self.threshold {
            self.low[n]
        } else {
            self.high[(n - self.threshold) % self.period]
        }
    }

    fn normalize(&mut self) {
        let p = self.period;
        let mut best = p;
        for d in 1..p {
            if p.is_multiple_of(d) && (0..p).all(|i| self.high[i] == self.high[i % d]) {
                best = d;
                break;
            }
        }
        self.high.truncate(best);
        self.period = best;
        while self.threshold > 0 {
            let last = self.low[self.threshold - 1];
            if last != self.high[self.period - 1] {
                break;
            }
            self.low.pop();
            self.threshold -= 1;
            self.high.rotate_right(1);
        }
    }

    pub fn is_empty(&self) -> bool {
        !self.low.iter().chain(&self.high).any(|&b| b)
    }

    pub fn is_full(&self) -> bool {
        self.low.iter().chain(&self.high).all(|&b| b)
    }

    pub fn is_finite(&self) -> bool {
        self.high.iter().all(|&b| !b)
    }

    pub fn least(&self) -> Option<u64> {
        (0..(self.threshold + self.period) as u64).find(|&n| self.contains(n))
    }

    /// Members below `bound`, ascending.
    pub fn members_below(&self, bound: u64) -> impl Iterator<Item = u64> + '_ {
        (0..bound).filter(move |&n| self.contains(n))
    }

    /// Finite members, or `None` if the set is infinite.
    pub fn finite_members(&self) -> Option<Vec<u64>> {
        self.is_finite()
            .then(|| self.members_below(self.threshold as u64).collect())
    }

    pub fn combine(&self, other: &EpSet, op: impl Fn(bool, bool) -> bool) -> EpSet {
        let t = self.threshold.max(other.threshold);
        let p = lcm(self.period, other.period);
        EpSet::from_fn(t, p, |n| {
            op(self.contains(n as u64), other.contains(n as u64))
        })
    }

    pub fn union(&self, other: &EpSet) -> EpSet {
        self.combine(other, |a, b| a || b)
    }

    pub fn intersect(&self, other: &EpSet) -> EpSet {
        self.combine(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &EpSet) -> EpSet {
        self.combine(other, |a, b| a && !b)
    }

    pub fn complement(&self) -> EpSet {
        EpSet::from_fn(self.threshold, self.period, |n| !self.contains(n as u64))
    }

    pub fn is_subset(&self, other: &EpSet) -> bool {
        self.difference(other).is_empty()
    }

    /// `{ n + k : n ∈ S }`
    pub fn shift_up(&self, k: usize) -> EpSet {
        EpSet::from_fn(self.threshold + k, self.period, |n| {
            n >= k && self.contains((n - k) as u64)
        })
    }

    /// `{ n - k : n ∈ S, n ≥ k }`
    pub fn shift_down(&self, k: usize) -> EpSet {
        let t = self.threshold.saturating_sub(k);
        EpSet::from_fn(t, self.period, |n| self.contains((n + k) as u64))
    }

    /// Index of the counter state reached after reading `n` letters in the
    /// lasso automaton with `threshold + period` states.
    pub fn class_of(&self, n: u64) -> usize {
        class_index(self.threshold, self.period, n)
    }

    /// Membership of a lasso class index.
    pub fn class_member(&self, class: usize) -> bool {
        if class < self.threshold {
            self.low[class]
        } else {
            self.high[class - self.threshold]
        }
    }

    pub fn classes(&self) -> usize {
        self.threshold + self.period
    }
}

/// Lasso index of `n` for a (threshold, period) counter.
pub fn class_index(threshold: usize, period: usize, n: u64) -> usize {
    let n = n as usize;
    if n < threshold {
        n
    } else {
        threshold + (n - threshold) % period
    }
}

/// Successor class in a (threshold, period) counter lasso.
pub fn next_class(threshold: usize, period: usize, class: usize) -> usize {
    if class + 1 < threshold + period {
        class + 1
    } else {
        threshold
    }
}

impl fmt::Debug for EpSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for EpSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bits = |v: &[bool]| {
            v.iter()
                .map(|&b| if b { '1' } else { '0' })
                .collect::<String>()
        };
        write!(
            f,
            "EP(T={}, P={}, low={}, high={})",
            self.threshold,
            self.period,
            bits(&self.low),
            bits(&self.high)
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn even_numbers_are_minimal() {
        let even = EpSet::from_fn(4, 6, |n| n % 2 == 0);
        assert_eq!(even.threshold(), 0);
        assert_eq!(even.period(), 2);
        assert_eq!(even.high(), &[true, false]);
    }

    #[test]
    fn singleton_and_shift() {
        let s = EpSet::singleton(3);
        assert_eq!(s.finite_members(), Some(vec![3]));
        assert_eq!(s.shift_up(2), EpSet::singleton(5));
        assert_eq!(s.shift_down(3), EpSet::singleton(0));
        assert!(s.shift_down(4).is_empty());
        assert_eq!(EpSet::at_least(5).least(), Some(5));
    }

    fn arb_epset() -> impl Strategy<Value = EpSet> {
        (
            prop::collection::vec(any::<bool>(), 0..6),
            prop::collection::vec(any::<bool>(), 1..5),
        )
            .prop_map(|(l, h)| EpSet::new(l, h))
    }

    proptest! {
        #[test]
        fn presentation_is_canonical(s in arb_epset(), extra_t in 0usize..4, mult in 1usize..3) {
            let t = s.threshold() + extra_t;
            let p = s.period() * mult;
            let re = EpSet::from_fn(t, p, |n| s.contains(n as u64));
            prop_assert_eq!(re, s);
        }

        #[test]
        fn boolean_ops_pointwise(a in arb_epset(), b in arb_epset()) {
            let u = a.union(&b);
            let i = a.intersect(&b);
            let c = a.complement();
            for n in 0..40u64 {
                prop_assert_eq!(u.contains(n), a.contains(n) || b.contains(n));
                prop_assert_eq!(i.contains(n), a.contains(n) && b.contains(n));
                prop_assert_eq!(c.contains(n), !a.contains(n));
            }
        }
    }
}
