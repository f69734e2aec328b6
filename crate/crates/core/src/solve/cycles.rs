//! Exact search for runs of a colored one-counter system whose largest
//! color seen infinitely often is bad, with concrete lasso witnesses.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::finite::sccs;
use crate::automata::counter::{Action, CounterSystem};
use crate::automata::epset::{class_index, next_class, EpSet};
use crate::error::{Error, Result};

/// A configuration `(control state, counter)`.
pub type Config = (usize, u64);

/// An ultimately periodic run: `prefix`, then `cycle` repeated forever with
/// every counter raised by `drift` per repetition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigLasso {
    pub prefix: Vec<Config>,
    pub cycle: Vec<Config>,
    pub drift: u64,
}

impl ConfigLasso {
    /// The `i`-th configuration of the run.
    pub fn config_at(&self, i: usize) -> Config {
        if i < self.prefix.len() {
            return self.prefix[i];
        }
        let k = i - self.prefix.len();
        let (rep, j) = (k / self.cycle.len(), k % self.cycle.len());
        let (s, l) = self.cycle[j];
        (s, l + rep as u64 * self.drift)
    }

    pub fn cycle_color(&self, colors: &[u32]) -> u32 {
        self.cycle
            .iter()
            .map(|&(s, _)| colors[s])
            .max()
            .unwrap_or(0)
    }

    /// Checks every step of the first `reps` repetitions against `step_ok`
    /// and that the repetition is shift invariant for the regime `(t, p)`.
    pub fn replay(
        &self,
        t: usize,
        p: usize,
        reps: usize,
        mut step_ok: impl FnMut(Config, Config) -> bool,
    ) -> bool {
        if self.cycle.is_empty() {
            return false;
        }
        let total = self.prefix.len() + reps * self.cycle.len();
        for i in 0..total {
            if !step_ok(self.config_at(i), self.config_at(i + 1)) {
                return false;
            }
        }
        let low = self.cycle.iter().map(|&(_, l)| l).min().expect("nonempty");
        self.drift == 0 || (low as usize >= t && (self.drift as usize).is_multiple_of(p))
    }
}

const EMPTY: u32 = 63;

fn bits(mask: u64) -> impl Iterator<Item = u32> {
    (0..64).filter(move |b| mask >> b & 1 == 1)
}

fn join(a: u32, b: u32) -> u32 {
    match (a, b) {
        (EMPTY, x) | (x, EMPTY) => x,
        (x, y) => x.max(y),
    }
}

#[derive(Debug, Clone, Copy)]
enum Atom {
    Stay,
    Excursion {
        push: usize,
        inner_to: usize,
        inner: u32,
    },
}

#[derive(Debug, Clone, Copy)]
enum Seq {
    Empty,
    Then { mid: usize, first: u32, rest: u32 },
}

/// Same-level paths annotated with the largest color they visit.
struct Colored<'a> {
    sys: &'a CounterSystem,
    t: usize,
    p: usize,
    /// `atom[c][s][s']`: single steps or push-excursion-pop at class `c`.
    atom: Vec<Vec<Vec<u64>>>,
    /// `sum[c][s][s']`: reflexive-transitive closure of `atom`.
    sum: Vec<Vec<Vec<u64>>>,
    atom_how: HashMap<(usize, usize, usize, u32), Atom>,
    sum_how: HashMap<(usize, usize, usize, u32), Seq>,
}

impl<'a> Colored<'a> {
    fn new(sys: &'a CounterSystem, colors: &'a [u32]) -> Result<Self> {
        if colors.iter().any(|&c| c >= EMPTY) {
            return Err(Error::Validation(format!("colors must be below {EMPTY}")));
        }
        let (t, p) = sys.regime();
        let n = sys.states;
        let classes = t + p;
        let mut me = Colored {
            sys,
            t,
            p,
            atom: vec![vec![vec![0; n]; n]; classes],
            sum: vec![vec![vec![0; n]; n]; classes],
            atom_how: HashMap::new(),
            sum_how: HashMap::new(),
        };
        for c in 0..classes {
            for s in 0..n {
                me.sum[c][s][s] |= 1 << EMPTY;
                me.sum_how.insert((c, s, s, EMPTY), Seq::Empty);
            }
        }
        let mut pops_from: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, r) in sys.rules.iter().enumerate() {
            if r.action == Action::Pop {
                pops_from[r.from].push(i);
            }
        }
        loop {
            let mut changed = false;
            for c in 0..classes {
                let up = next_class(t, p, c);
                for (ri, r) in sys.rules.iter().enumerate() {
                    if !r.enabled(c as u64) {
                        continue;
                    }
                    match r.action {
                        Action::Stay => {
                            changed |= me.add_atom(c, r.from, r.to, colors[r.to], Atom::Stay)
                        }
                        Action::Push => {
                            for u in 0..n {
                                let m = me.sum[up][r.to][u];
                                if m == 0 {
                                    continue;
                                }
                                for &pi in &pops_from[u] {
                                    let pr = &sys.rules[pi];
                                    if !pr.enabled(up as u64) {
                                        continue;
                                    }
                                    for b in bits(m) {
                                        let col = join(join(colors[r.to], b), colors[pr.to]);
                                        let how = Atom::Excursion {
                                            push: ri,
                                            inner_to: u,
                                            inner: b,
                                        };
                                        changed |= me.add_atom(c, r.from, pr.to, col, how);
                                    }
                                }
                            }
                        }
                        Action::Pop => {}
                    }
                }
                changed |= me.close(c);
            }
            if !changed {
                return Ok(me);
            }
        }
    }

    fn add_atom(&mut self, c: usize, s: usize, s2: usize, col: u32, how: Atom) -> bool {
        if self.atom[c][s][s2] >> col & 1 == 1 {
            return false;
        }
        self.atom[c][s][s2] |= 1 << col;
        self.atom_how.insert((c, s, s2, col), how);
        true
    }

    fn close(&mut self, c: usize) -> bool {
        let n = self.sys.states;
        let mut any = false;
        loop {
            let mut changed = false;
            for s in 0..n {
                for mid in 0..n {
                    let a = self.atom[c][s][mid];
                    if a == 0 {
                        continue;
                    }
                    for s2 in 0..n {
                        let m = self.sum[c][mid][s2];
                        if m == 0 {
                            continue;
                        }
                        for first in bits(a) {
                            for rest in bits(m) {
                                let col = join(first, rest);
                                if self.sum[c][s][s2] >> col & 1 == 0 {
                                    self.sum[c][s][s2] |= 1 << col;
                                    self.sum_how
                                        .insert((c, s, s2, col), Seq::Then { mid, first, rest });
                                    changed = true;
                                }
                            }
                        }
                    }
                }
            }
            if !changed {
                return any;
            }
            any = true;
        }
    }

    fn expand_atom(
        &self,
        c: usize,
        s: usize,
        s2: usize,
        col: u32,
        level: u64,
        out: &mut Vec<Config>,
    ) {
        match self.atom_how[&(c, s, s2, col)] {
            Atom::Stay => out.push((s2, level)),
            Atom::Excursion {
                push,
                inner_to,
                inner,
                ..
            } => {
                let t = self.sys.rules[push].to;
                out.push((t, level + 1));
                self.expand_sum(
                    next_class(self.t, self.p, c),
                    t,
                    inner_to,
                    inner,
                    level + 1,
                    out,
                );
                out.push((s2, level));
            }
        }
    }

    fn expand_sum(
        &self,
        c: usize,
        s: usize,
        s2: usize,
        col: u32,
        level: u64,
        out: &mut Vec<Config>,
    ) {
        let mut cur = (s, col);
        loop {
            match self.sum_how[&(c, cur.0, s2, cur.1)] {
                Seq::Empty => return,
                Seq::Then { mid, first, rest } => {
                    self.expand_atom(c, cur.0, mid, first, level, out);
                    cur = (mid, rest);
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum HeadEdge {
    Atom,
    Push,
}

/// Searches for a run from `start` whose largest recurring color satisfies
/// `bad`. Returns a concrete witness.
pub fn find_bad_run(
    sys: &CounterSystem,
    colors: &[u32],
    bad: impl Fn(u32) -> bool,
    start: Config,
    cap: usize,
) -> Result<Option<ConfigLasso>> {
    let col = Colored::new(sys, colors)?;
    let (t, p) = (col.t, col.p);
    let n = sys.states;
    let classes = t + p;
    let reach = sys.reachable(start.0, start.1, cap)?;
    let class_set = |c: usize| EpSet::from_fn(t, p, |l| class_index(t, p, l as u64) == c);
    let mut alive = vec![false; n * classes];
    for c in 0..classes {
        let cs = class_set(c);
        for s in 0..n {
            alive[c * n + s] = !reach[s].intersect(&cs).is_empty();
        }
    }
    // head graph: edges stay within a class or push to the next one
    let node = |s: usize, c: usize| c * n + s;
    let mut edges: Vec<Vec<(usize, u64, HeadEdge)>> = vec![Vec::new(); n * classes];
    for c in 0..classes {
        let up = next_class(t, p, c);
        for s in 0..n {
            for s2 in 0..n {
                let m = col.atom[c][s][s2];
                if m != 0 {
                    edges[node(s, c)].push((node(s2, c), m, HeadEdge::Atom));
                }
            }
        }
        for r in &sys.rules {
            if r.action == Action::Push && r.enabled(c as u64) {
                edges[node(r.from, c)].push((node(r.to, up), 1 << colors[r.to], HeadEdge::Push));
            }
        }
    }
    let mut bad_colors: Vec<u32> = colors.iter().copied().filter(|&c| bad(c)).collect();
    bad_colors.sort_unstable();
    bad_colors.dedup();
    for d in bad_colors {
        let low_mask = (1u64 << (d + 1)) - 1;
        let succ: Vec<Vec<usize>> = edges
            .iter()
            .map(|es| {
                es.iter()
                    .filter(|e| e.1 & low_mask != 0)
                    .map(|e| e.0)
                    .collect()
            })
            .collect();
        let comp = sccs(&succ, &alive);
        let mut found = None;
        'outer: for a in 0..n * classes {
            if !alive[a] {
                continue;
            }
            for &(b, m, kind) in &edges[a] {
                if alive[b] && comp[a] == comp[b] && m >> d & 1 == 1 {
                    found = Some((a, b, kind));
                    break 'outer;
                }
            }
        }
        let Some((a, b, kind)) = found else { continue };
        // path b ⇝ a inside the component using colors ≤ d
        let mut pred: BTreeMap<usize, (usize, u32, HeadEdge)> = BTreeMap::new();
        let mut queue = VecDeque::from([b]);
        let mut seen = vec![false; n * classes];
        seen[b] = true;
        while let Some(v) = queue.pop_front() {
            if v == a {
                break;
            }
            for &(w, m, k) in &edges[v] {
                if seen[w] || !alive[w] || comp[w] != comp[a] || m & low_mask == 0 {
                    continue;
                }
                seen[w] = true;
                let c = (m & low_mask).trailing_zeros();
                pred.insert(w, (v, c, k));
                queue.push_back(w);
            }
        }
        let mut path: Vec<(usize, usize, u32, HeadEdge)> = Vec::new();
        let mut v = a;
        while v != b {
            let (u, c, k) = pred[&v];
            path.push((u, v, c, k));
            v = u;
        }
        path.reverse();
        let mut cycle_edges = vec![(a, b, d, kind)];
        cycle_edges.extend(path);

        let (sa, ca) = (a % n, a / n);
        let la = reach[sa].intersect(&class_set(ca)).least().expect("alive");
        let mut cycle = vec![(sa, la)];
        let mut level = la;
        for &(u, v, c, k) in &cycle_edges {
            let (s, cu) = (u % n, u / n);
            match k {
                HeadEdge::Atom => col.expand_atom(cu, s, v % n, c, level, &mut cycle),
                HeadEdge::Push => {
                    level += 1;
                    cycle.push((v % n, level));
                }
            }
            level = cycle.last().expect("nonempty").1;
        }
        let end = cycle.pop().expect("nonempty");
        debug_assert_eq!(end.0, sa);
        let drift = end.1 - la;
        let mut prefix = shortest_path(sys, start, (sa, la))?;
        prefix.pop();
        return Ok(Some(ConfigLasso {
            prefix,
            cycle,
            drift,
        }));
    }
    Ok(None)
}

/// A shortest run from `from` to `to`, including both ends, found by
/// breadth-first search with a growing counter bound.
pub fn shortest_path(sys: &CounterSystem, from: Config, to: Config) -> Result<Vec<Config>> {
    let (t, p) = sys.regime();
    let mut bound = from.1.max(to.1) + (t + p + sys.states) as u64;
    for _ in 0..12 {
        let mut pred: HashMap<Config, Config> = HashMap::new();
        let mut queue = VecDeque::from([from]);
        pred.insert(from, from);
        while let Some(cur) = queue.pop_front() {
            if cur == to {
                let mut path = vec![cur];
                let mut v = cur;
                while v != from {
                    v = pred[&v];
                    path.push(v);
                }
                path.reverse();
                return Ok(path);
            }
            for next in sys.successors(cur.0, cur.1) {
                if next.1 <= bound && !pred.contains_key(&next) {
                    pred.insert(next, cur);
                    queue.push_back(next);
                }
            }
        }
        bound *= 2;
    }
    Err(Error::ResourceCap(format!(
        "no path from {from:?} to {to:?} within counter {bound}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::counter::CounterRule;

    fn step_ok(sys: &CounterSystem) -> impl Fn(Config, Config) -> bool + '_ {
        move |a, b| sys.successors(a.0, a.1).any(|x| x == b)
    }

    #[test]
    fn climbing_forever_is_found() {
        // 0 pushes forever with color 1; 1 is a sink with color 2 reachable at level 0 only
        let mut sys = CounterSystem::new(2);
        sys.add_rule(CounterRule::new(0, 0, Action::Push, EpSet::full()));
        sys.add_rule(CounterRule::new(0, 1, Action::Stay, EpSet::singleton(0)));
        sys.add_rule(CounterRule::new(1, 1, Action::Stay, EpSet::full()));
        let colors = [1, 2];
        let odd = find_bad_run(&sys, &colors, |c| c % 2 == 1, (0, 0), 1000)
            .unwrap()
            .unwrap();
        assert_eq!(odd.drift, 1);
        assert!(odd.replay(1, 1, 3, step_ok(&sys)));
        let even = find_bad_run(&sys, &colors, |c| c % 2 == 0, (0, 3), 1000).unwrap();
        assert!(even.is_none(), "sink unreachable above level 0");
    }

    #[test]
    fn excursions_carry_colors() {
        // 0 -push-> 1 (color 3) -pop-> 0 ; the cycle at 0 has max color 3
        let mut sys = CounterSystem::new(2);
        sys.add_rule(CounterRule::new(0, 1, Action::Push, EpSet::full()));
        sys.add_rule(CounterRule::new(1, 0, Action::Pop, EpSet::full()));
        let colors = [0, 3];
        let w = find_bad_run(&sys, &colors, |c| c == 3, (0, 5), 1000)
            .unwrap()
            .unwrap();
        assert_eq!(w.drift, 0);
        assert_eq!(w.cycle_color(&colors), 3);
        assert!(w.replay(1, 1, 2, step_ok(&sys)));
        assert!(find_bad_run(&sys, &colors, |c| c == 0, (0, 5), 1000)
            .unwrap()
            .is_none());
    }
}
