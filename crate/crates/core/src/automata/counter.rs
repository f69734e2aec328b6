//! One-counter systems with eventually periodic level guards, and exact
//! reachability over them.

use serde::{Deserialize, Serialize};

use super::canon::{Direction, ShiftPiece};
use super::epset::{class_index, lcm, next_class, EpSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Pop,
    Stay,
    Push,
}

impl Action {
    pub fn apply(self, level: u64) -> Option<u64> {
        match self {
            Action::Pop => level.checked_sub(1),
            Action::Stay => Some(level),
            Action::Push => Some(level + 1),
        }
    }

    pub fn delta(self) -> i64 {
        match self {
            Action::Pop => -1,
            Action::Stay => 0,
            Action::Push => 1,
        }
    }
}

/// `from --action--> to`, enabled at counter values in `guard`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CounterRule {
    pub from: usize,
    pub to: usize,
    pub action: Action,
    pub guard: EpSet,
}

impl CounterRule {
    pub fn new(from: usize, to: usize, action: Action, guard: EpSet) -> Self {
        CounterRule {
            from,
            to,
            action,
            guard,
        }
    }

    pub fn enabled(&self, level: u64) -> bool {
        self.guard.contains(level) && !(self.action == Action::Pop && level == 0)
    }
}

/// Dense bit set over state indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bits(Vec<u64>);

impl Bits {
    pub fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize) -> bool {
        let was = self.get(i);
        self.0[i / 64] |= 1 << (i % 64);
        !was
    }

    /// `self |= other`; reports whether anything changed.
    pub fn or_with(&mut self, other: &Bits) -> bool {
        let mut changed = false;
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            let n = *a | b;
            changed |= n != *a;
            *a = n;
        }
        changed
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &bits)| {
            (0..64)
                .filter(move |b| bits >> b & 1 == 1)
                .map(move |b| w * 64 + b)
        })
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterSystem {
    pub states: usize,
    pub rules: Vec<CounterRule>,
}

/// Same-level reachability: `sum[c][s]` holds every `s'` reachable from
/// `(s, ℓ)` back at level `ℓ` without dipping below it, for `ℓ` of class `c`.
pub type Summaries = Vec<Vec<Bits>>;

impl CounterSystem {
    pub fn new(states: usize) -> Self {
        CounterSystem {
            states,
            rules: Vec::new(),
        }
    }

    pub fn add_state(&mut self) -> usize {
        self.states += 1;
        self.states - 1
    }

    pub fn add_rule(&mut self, rule: CounterRule) {
        debug_assert!(rule.from < self.states && rule.to < self.states);
        self.rules.push(rule);
    }

    /// Threshold and period past which guards are level-periodic. The
    /// threshold is at least 1 so that level 0 forms its own class.
    pub fn regime(&self) -> (usize, usize) {
        self.rules.iter().fold((1, 1), |(t, p), r| {
            (t.max(r.guard.threshold()), lcm(p, r.guard.period()))
        })
    }

    pub fn successors(&self, state: usize, level: u64) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.rules
            .iter()
            .filter(move |r| r.from == state && r.enabled(level))
            .map(move |r| (r.to, r.action.apply(level).expect("enabled")))
    }

    /// Encodes a binary relation given by its shift pieces as a gadget from
    /// `from` to `to`. Returns the auxiliary states created.
    pub fn add_relation_gadget(
        &mut self,
        from: usize,
        to: usize,
        pieces: &[ShiftPiece],
    ) -> Vec<usize> {
        let mut created = Vec::new();
        for piece in pieces {
            let d = &piece.deltas;
            let (dt, dp) = (d.threshold(), d.period());
            let aux: Vec<usize> = (0..dt + dp).map(|_| self.add_state()).collect();
            created.extend(&aux);
            let (entry_guard, step, exit_guard) = match piece.direction {
                Direction::Up => (piece.starts.clone(), Action::Push, EpSet::full()),
                Direction::Down => (EpSet::full(), Action::Pop, piece.starts.clone()),
            };
            self.add_rule(CounterRule::new(from, aux[0], Action::Stay, entry_guard));
            for (c, &a) in aux.iter().enumerate() {
                self.add_rule(CounterRule::new(
                    a,
                    aux[next_class(dt, dp, c)],
                    step,
                    EpSet::full(),
                ));
                if d.class_member(c) {
                    self.add_rule(CounterRule::new(a, to, Action::Stay, exit_guard.clone()));
                }
            }
        }
        created
    }

    /// Same-level summaries for the class structure `(t, p)`, which must
    /// refine every guard.
    pub fn summaries(&self, t: usize, p: usize) -> Summaries {
        let n = self.states;
        let classes = t + p;
        let mut sum: Summaries = (0..classes)
            .map(|_| {
                (0..n)
                    .map(|s| {
                        let mut b = Bits::new(n);
                        b.set(s);
                        b
                    })
                    .collect()
            })
            .collect();
        loop {
            let mut changed = false;
            for c in 0..classes {
                let level = c as u64;
                let up = next_class(t, p, c);
                let mut direct: Vec<Vec<usize>> = vec![Vec::new(); n];
                for r in &self.rules {
                    if !r.enabled(level) {
                        continue;
                    }
                    match r.action {
                        Action::Stay => direct[r.from].push(r.to),
                        Action::Push => {
                            for u in sum[up][r.to].iter() {
                                for back in &self.rules {
                                    if back.from == u
                                        && back.action == Action::Pop
                                        && back.enabled(up as u64)
                                    {
                                        direct[r.from].push(back.to);
                                    }
                                }
                            }
                        }
                        Action::Pop => {}
                    }
                }
                changed |= close_rows(&mut sum[c], &direct);
            }
            if !changed {
                return sum;
            }
        }
    }

    /// Exact reachable levels per state from `(state, level)`.
    pub fn reachable(&self, state: usize, level: u64, cap: usize) -> Result<Vec<EpSet>> {
        let (t, p) = self.regime();
        let sum = self.summaries(t, p);
        let n = self.states;
        let class = |l: u64| class_index(t, p, l);
        let closure = |x: &Bits, l: u64| -> Bits {
            let mut out = Bits::new(n);
            for s in x.iter() {
                out.or_with(&sum[class(l)][s]);
            }
            out
        };
        let step = |x: &Bits, l: u64, action: Action| -> Bits {
            let mut out = Bits::new(n);
            for r in &self.rules {
                if r.action == action && x.get(r.from) && r.enabled(l) {
                    out.set(r.to);
                }
            }
            out
        };
        // minima: states reachable at level ℓ ≤ level along paths staying ≥ ℓ
        let top = level as usize;
        let mut minima = vec![Bits::new(n); top + 1];
        let mut start = Bits::new(n);
        start.set(state);
        minima[top] = closure(&start, level);
        for l in (1..=top).rev() {
            let down = step(&minima[l], l as u64, Action::Pop);
            minima[l - 1] = closure(&down, l as u64 - 1);
        }
        let mut levels: Vec<Bits> = Vec::new();
        let mut seen = std::collections::HashMap::new();
        let mut z = minima[0].clone();
        let mut h = 0usize;
        let (lt, lp) = loop {
            if h >= top {
                if let Some(&prev) = seen.get(&(z.clone(), class(h as u64))) {
                    break (prev, h - prev);
                }
                seen.insert((z.clone(), class(h as u64)), h);
            }
            if h > cap {
                return Err(Error::IterationCap {
                    cap,
                    diagnostic: format!("reachable frontier still changing at level {h}"),
                });
            }
            levels.push(z.clone());
            let mut next = step(&z, h as u64, Action::Push);
            if h < top {
                next.or_with(&minima[h + 1]);
            }
            z = closure(&next, h as u64 + 1);
            h += 1;
        };
        Ok((0..n)
            .map(|s| EpSet::from_fn(lt, lp, |l| levels[l].get(s)))
            .collect())
    }
}

/// Replaces each row by the reflexive-transitive closure over the existing
/// rows plus `direct` edges. Returns whether anything grew.
fn close_rows(rows: &mut [Bits], direct: &[Vec<usize>]) -> bool {
    let mut changed = false;
    loop {
        let mut round = false;
        for s in 0..rows.len() {
            let mut acc = rows[s].clone();
            for u in rows[s].iter() {
                for &v in &direct[u] {
                    if acc.set(v) {
                        round = true;
                    }
                }
                if u != s {
                    let ru = rows[u].clone();
                    round |= acc.or_with(&ru);
                }
            }
            rows[s] = acc;
        }
        if !round {
            return changed;
        }
        changed = true;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::canon::shift_pieces;
    use crate::automata::relation::UnaryRelation;

    #[test]
    fn closure_of_plus_two_is_even() {
        let mut sys = CounterSystem::new(1);
        sys.add_relation_gadget(0, 0, &shift_pieces(&UnaryRelation::shift(2)));
        let reach = sys.reachable(0, 0, 10_000).unwrap();
        assert_eq!(reach[0], EpSet::residue(0, 2));
    }

    #[test]
    fn descend_and_climb() {
        // state 0 pops freely, switches to 1 only at zero, 1 pushes
        let mut sys = CounterSystem::new(2);
        sys.add_rule(CounterRule::new(0, 0, Action::Pop, EpSet::full()));
        sys.add_rule(CounterRule::new(0, 1, Action::Stay, EpSet::singleton(0)));
        sys.add_rule(CounterRule::new(1, 1, Action::Push, EpSet::residue(0, 3)));
        let reach = sys.reachable(0, 5, 1000).unwrap();
        assert_eq!(reach[0], EpSet::finite(0..=5));
        assert_eq!(reach[1], EpSet::finite([0, 1]));
    }

    #[test]
    fn excursions_are_summarised() {
        // 0 -push-> 1 -pop-> 2 gives 2 at the same level
        let mut sys = CounterSystem::new(3);
        sys.add_rule(CounterRule::new(0, 1, Action::Push, EpSet::full()));
        sys.add_rule(CounterRule::new(1, 2, Action::Pop, EpSet::full()));
        let reach = sys.reachable(0, 4, 1000).unwrap();
        assert_eq!(reach[2], EpSet::singleton(4));
        assert_eq!(reach[1], EpSet::singleton(5));
    }
}
