//! Winner and winning strategy of a one-counter parity game.
//!
//! Candidate strategies come from finite games: truncations that cut the
//! counter at some bound, and foldings that identify counter values by
//! class. No candidate is trusted; each one is checked exactly, and only a
//! verified strategy determines the winner.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::cycles::Config;
use super::finite::{FiniteParityGame, FiniteSolution};
use super::strategy::{verify_regular_strategy, Refutation, RegularStrategy, StrategyVerdict};
use crate::automata::counter::Action;
use crate::automata::epset::{class_index, next_class};
use crate::error::{Error, Result};
use crate::game::{OneCounterGameSystem, Player};
use crate::par::{par_map, ExecMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Rounds of deepening before giving up.
    pub max_deepening: usize,
    /// Cap on saturation rounds of the exact reachability analysis.
    pub max_iterations: usize,
    pub mode: ExecMode,
    /// Deepening round to start from, for resumed runs.
    pub first_round: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_deepening: 6,
            max_iterations: 100_000,
            mode: ExecMode::Parallel,
            first_round: 1,
        }
    }
}

/// A finite game over configurations together with the rule behind each edge.
struct Unrolled {
    game: FiniteParityGame,
    rule_of: Vec<Vec<Option<usize>>>,
}

impl Unrolled {
    fn new() -> Self {
        Unrolled {
            game: FiniteParityGame::default(),
            rule_of: Vec::new(),
        }
    }

    fn vertex(&mut self, owner: Player, color: u32) -> usize {
        self.rule_of.push(Vec::new());
        self.game.add_vertex(owner, color)
    }

    fn edge(&mut self, from: usize, to: usize, rule: Option<usize>) {
        if !self.game.succ[from].contains(&to) {
            self.game.succ[from].push(to);
            self.rule_of[from].push(rule);
        }
    }

    fn chosen_rule(&self, sol: &FiniteSolution, v: usize) -> Option<usize> {
        let to = sol.strategy[v]?;
        let k = self.game.succ[v].iter().position(|&w| w == to)?;
        self.rule_of[v][k]
    }
}

/// Adds absorbing vertices won by each player.
fn sinks(u: &mut Unrolled) -> BTreeMap<Player, usize> {
    [Player::I, Player::II]
        .into_iter()
        .map(|p| {
            let v = u.vertex(p, p.winning_color());
            u.edge(v, v, None);
            (p, v)
        })
        .collect()
}

/// The game on counters `0..=bound`; leaving the bound hands the win to `favored`.
fn truncation(h: &OneCounterGameSystem, bound: u64, favored: Player) -> Unrolled {
    let n = h.num_states();
    let mut u = Unrolled::new();
    for l in 0..=bound {
        for s in 0..n {
            let _ = l;
            u.vertex(h.owners[s], h.colors[s]);
        }
    }
    let sink = sinks(&mut u);
    for l in 0..=bound {
        for s in 0..n {
            let v = l as usize * n + s;
            for ri in h.enabled_rules(s, l) {
                let r = &h.rules()[ri];
                let to = r.action.apply(l).expect("enabled");
                let w = if to > bound {
                    sink[&favored]
                } else {
                    to as usize * n + r.to
                };
                u.edge(v, w, Some(ri));
            }
            if u.game.succ[v].is_empty() {
                u.edge(v, sink[&h.owners[s].opponent()], None);
            }
        }
    }
    u
}

/// The game on counter classes for `(t, p)`. A pop from class `t` may land in
/// class `t - 1` or `t + p - 1`; the opponent of `favored` decides.
fn folding(h: &OneCounterGameSystem, t: usize, p: usize, favored: Player) -> Unrolled {
    let n = h.num_states();
    let classes = t + p;
    let mut u = Unrolled::new();
    for _ in 0..classes {
        for s in 0..n {
            u.vertex(h.owners[s], h.colors[s]);
        }
    }
    let sink = sinks(&mut u);
    let low = h.colors.iter().copied().min().unwrap_or(0);
    let mut ambiguous: BTreeMap<usize, usize> = BTreeMap::new();
    for c in 0..classes {
        for s in 0..n {
            let v = c * n + s;
            for ri in h.enabled_rules(s, c as u64) {
                let r = &h.rules()[ri];
                let w = match r.action {
                    Action::Stay => c * n + r.to,
                    Action::Push => next_class(t, p, c) * n + r.to,
                    Action::Pop if c == t => *ambiguous.entry(r.to).or_insert_with(|| {
                        let a = u.vertex(favored.opponent(), low);
                        u.edge(a, (t - 1) * n + r.to, None);
                        u.edge(a, (t + p - 1) * n + r.to, None);
                        a
                    }),
                    Action::Pop => (c - 1) * n + r.to,
                };
                u.edge(v, w, Some(ri));
            }
            if u.game.succ[v].is_empty() {
                u.edge(v, sink[&h.owners[s].opponent()], None);
            }
        }
    }
    u
}

/// Reads a strategy table off a finite solution, taking the entry for class
/// `c` from the vertex of state `s` at row `row(c)`.
fn table(
    h: &OneCounterGameSystem,
    u: &Unrolled,
    sol: &FiniteSolution,
    player: Player,
    t: usize,
    p: usize,
    row: impl Fn(usize) -> Option<usize>,
) -> RegularStrategy {
    let n = h.num_states();
    let mut choices = BTreeMap::new();
    for s in (0..n).filter(|&s| h.owners[s] == player) {
        let entries: Vec<Option<usize>> = (0..t + p)
            .map(|c| row(c).and_then(|r| u.chosen_rule(sol, r * n + s)))
            .collect();
        choices.insert(s, entries);
    }
    RegularStrategy {
        player,
        threshold: t,
        period: p,
        choices,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub source: String,
    pub strategy: RegularStrategy,
}

/// A candidate that failed verification, with its replayable refutation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejected {
    pub source: String,
    pub strategy: RegularStrategy,
    pub refutation: Refutation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveStats {
    /// Deepening rounds used.
    pub rounds: usize,
    /// Shape of the reported strategy.
    pub threshold: usize,
    pub period: usize,
    /// Candidates verified, including the accepted one.
    pub candidates: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WinnerReport {
    pub winner: Player,
    pub start: Config,
    pub strategy: RegularStrategy,
    pub source: String,
    pub stats: SolveStats,
    /// Hex SHA-256 of the game and the strategy.
    pub certificate: String,
    pub rejected: Vec<Rejected>,
}

/// Hex SHA-256 of the serialized game and strategy.
pub fn certificate_id(h: &OneCounterGameSystem, s: &RegularStrategy) -> String {
    let mut hasher = Sha256::new();
    hasher.update(serde_json::to_vec(h).expect("serializable"));
    hasher.update(serde_json::to_vec(s).expect("serializable"));
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn divisors(k: usize) -> Vec<usize> {
    (1..=k).filter(|d| k.is_multiple_of(*d)).collect()
}

/// Candidate strategies tried in round `round` (starting at 1).
fn candidates(h: &OneCounterGameSystem, start: Config, round: usize) -> Result<Vec<Candidate>> {
    let (th, ph) = h.system.regime();
    let base = th.max(h.num_states());
    let mut shapes: Vec<(usize, usize)> = Vec::new();
    for t in [round * th, round * base, th + round - 1] {
        for m in divisors(round) {
            let shape = (t.max(th).max(start.1 as usize + 1), ph * m);
            if !shapes.contains(&shape) {
                shapes.push(shape);
            }
        }
    }
    shapes.sort_unstable();
    let bound = (2 * round * base) as u64 + start.1;
    let mut out = Vec::new();
    for favored in [Player::I, Player::II] {
        let other = favored.opponent();
        let u = truncation(h, bound, favored);
        let sol = u.game.solve()?;
        let init = start.1 as usize * h.num_states() + start.0;
        let w = sol.winner[init];
        if w == other {
            // the favored player cannot even escape past the bound
            let s = table(h, &u, &sol, other, bound as usize + 1, 1, |c| {
                (c as u64 <= bound).then_some(c)
            });
            out.push(Candidate {
                source: format!("truncation {bound} against {favored}"),
                strategy: s,
            });
        } else {
            for &(t, p) in shapes.iter().filter(|&&(t, p)| (t + p) as u64 <= bound + 1) {
                let s = table(h, &u, &sol, w, t, p, Some);
                out.push(Candidate {
                    source: format!("truncation {bound} compressed to ({t}, {p})"),
                    strategy: s,
                });
            }
        }
    }
    for &(t, p) in &shapes {
        for favored in [Player::II, Player::I] {
            let u = folding(h, t, p, favored);
            let sol = u.game.solve()?;
            let init = class_index(t, p, start.1) * h.num_states() + start.0;
            if sol.winner[init] == favored {
                let s = table(h, &u, &sol, favored, t, p, Some);
                out.push(Candidate {
                    source: format!("folding ({t}, {p}) for {favored}"),
                    strategy: s,
                });
            }
        }
    }
    Ok(out)
}

/// Determines the winner from `start` and a verified regular winning strategy.
pub fn solve_one_counter(
    h: &OneCounterGameSystem,
    start: Config,
    opts: &SolveOptions,
) -> Result<WinnerReport> {
    solve_one_counter_observed(h, start, opts, |_, _| true)
}

/// As [`solve_one_counter`], calling `observe(round, refuted)` before each
/// deepening round; a `false` answer stops with [`Error::Interrupted`].
pub fn solve_one_counter_observed(
    h: &OneCounterGameSystem,
    start: Config,
    opts: &SolveOptions,
    mut observe: impl FnMut(usize, usize) -> bool,
) -> Result<WinnerReport> {
    if start.0 >= h.num_states() {
        return Err(Error::Validation(format!(
            "unknown start state {}",
            start.0
        )));
    }
    let mut rejected = Vec::new();
    let mut tried: Vec<RegularStrategy> = Vec::new();
    for round in opts.first_round.max(1)..=opts.max_deepening {
        if !observe(round, rejected.len()) {
            return Err(Error::Interrupted { next_round: round });
        }
        let mut cands = candidates(h, start, round)?;
        cands.retain(|c| !tried.contains(&c.strategy));
        let mut unique: Vec<Candidate> = Vec::new();
        for c in cands {
            if !unique.iter().any(|u| u.strategy == c.strategy) {
                unique.push(c);
            }
        }
        let verdicts = par_map(opts.mode, &unique, |c| {
            verify_regular_strategy(h, &c.strategy, start, opts.max_iterations)
        });
        for (c, v) in unique.into_iter().zip(verdicts) {
            match v? {
                StrategyVerdict::Winning => {
                    let small = c.strategy.minimized();
                    let strategy = if small != c.strategy
                        && small.check_shape(h).is_ok()
                        && verify_regular_strategy(h, &small, start, opts.max_iterations)?
                            .is_winning()
                    {
                        small
                    } else {
                        c.strategy
                    };
                    let stats = SolveStats {
                        rounds: round,
                        threshold: strategy.threshold,
                        period: strategy.period,
                        candidates: rejected.len() + 1,
                    };
                    return Ok(WinnerReport {
                        winner: strategy.player,
                        start,
                        certificate: certificate_id(h, &strategy),
                        strategy,
                        source: c.source,
                        stats,
                        rejected,
                    });
                }
                StrategyVerdict::Refuted(refutation) => {
                    tried.push(c.strategy.clone());
                    rejected.push(Rejected {
                        source: c.source,
                        strategy: c.strategy,
                        refutation,
                    });
                }
            }
        }
    }
    Err(Error::ResourceCap(format!(
        "no verified strategy after {} deepening rounds ({} candidates refuted)",
        opts.max_deepening,
        rejected.len()
    )))
}

/// The winner from `start`, backed by a verified strategy.
pub fn winner_of(h: &OneCounterGameSystem, start: Config, opts: &SolveOptions) -> Result<Player> {
    Ok(solve_one_counter(h, start, opts)?.winner)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::counter::Action;
    use crate::automata::epset::EpSet;
    use crate::game::{build_game_graph, build_pushdown, extract_uvw, HState};
    use crate::nmso::examples;
    use crate::nmso::model::NmsoAutomaton;
    use crate::solve::bmc::{bmc_check, BmcBounds, BmcVerdict};
    use crate::solve::strategy::replay_refutation;

    fn pushdown(a: &NmsoAutomaton) -> OneCounterGameSystem {
        let g = build_game_graph(a).unwrap();
        build_pushdown(&g, &extract_uvw(&g).unwrap()).unwrap()
    }

    #[test]
    fn example_winners() {
        let cases = [
            (examples::unbounded(), Player::II),
            (examples::echo(), Player::II),
            (examples::trivial(), Player::II),
            (examples::eventually_zero(), Player::I),
            (examples::all_odd(), Player::I),
        ];
        for (a, want) in cases {
            let h = pushdown(&a);
            let start = (h.initial, 0);
            let rep = solve_one_counter(&h, start, &SolveOptions::default()).unwrap();
            assert_eq!(rep.winner, want, "{}", a.name);
            assert_eq!(
                bmc_check(&h, &rep.strategy, start, BmcBounds::default()),
                BmcVerdict::NoCounterexample
            );
            for r in &rep.rejected {
                assert!(
                    replay_refutation(&h, &r.strategy, start, &r.refutation),
                    "{}: {}",
                    a.name,
                    r.source
                );
            }
        }
    }

    fn solitaire(colors: [u32; 2]) -> OneCounterGameSystem {
        let mut h = OneCounterGameSystem::new();
        let a = h.add_state("a".into(), Player::II, colors[0], HState::Vertex(0));
        let b = h.add_state("b".into(), Player::II, colors[1], HState::Vertex(1));
        h.add_rule(a, b, Action::Push, EpSet::full());
        h.add_rule(b, a, Action::Push, EpSet::full());
        h
    }

    #[test]
    fn alternating_solitaire_has_a_memoryless_strategy() {
        let h = solitaire([1, 2]);
        let rep = solve_one_counter(&h, (0, 0), &SolveOptions::default()).unwrap();
        assert_eq!(rep.winner, Player::II);
        assert_eq!((rep.stats.threshold, rep.stats.period), (0, 1));
        assert_eq!(rep.strategy.choices[&0], vec![Some(0)]);
        assert_eq!(rep.strategy.choices[&1], vec![Some(1)]);
    }

    #[test]
    fn odd_solitaire_is_lost() {
        let h = solitaire([1, 1]);
        let rep = solve_one_counter(&h, (0, 0), &SolveOptions::default()).unwrap();
        assert_eq!(rep.winner, Player::I);
        assert!(rep
            .strategy
            .choices
            .values()
            .all(|row| row.iter().all(Option::is_none)));
    }

    #[test]
    fn shifting_colors_keeps_winners() {
        for a in [
            examples::unbounded(),
            examples::eventually_zero(),
            examples::echo(),
        ] {
            let mut h = pushdown(&a);
            let before = winner_of(&h, (h.initial, 0), &SolveOptions::default()).unwrap();
            h.shift_colors(2);
            assert_eq!(
                winner_of(&h, (h.initial, 0), &SolveOptions::default()).unwrap(),
                before,
                "{}",
                a.name
            );
        }
    }
}
