//! Counter-regular strategies on one-counter games and their exact check.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::cycles::{find_bad_run, shortest_path, Config, ConfigLasso};
use crate::automata::counter::{Action, CounterRule, CounterSystem};
use crate::automata::epset::{class_index, EpSet};
use crate::error::{Error, Result};
use crate::game::{OneCounterGameSystem, Player};

/// A strategy whose choice depends on the control state and on the counter
/// class for threshold `threshold` and period `period`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegularStrategy {
    pub player: Player,
    pub threshold: usize,
    pub period: usize,
    /// Rule index chosen per owned control state and counter class.
    pub choices: BTreeMap<usize, Vec<Option<usize>>>,
}

impl RegularStrategy {
    pub fn class(&self, level: u64) -> usize {
        class_index(self.threshold, self.period, level)
    }

    pub fn choose(&self, state: usize, level: u64) -> Option<usize> {
        self.choices
            .get(&state)
            .and_then(|row| row[self.class(level)])
    }

    /// Checks that every entry names a rule leaving its state that is usable
    /// at every counter value of its class.
    pub fn check_shape(&self, h: &OneCounterGameSystem) -> Result<()> {
        let classes = self.threshold + self.period;
        for (&s, row) in &self.choices {
            if s >= h.num_states() || h.owners[s] != self.player || row.len() != classes {
                return Err(Error::Validation(format!(
                    "strategy row for state {s} is malformed"
                )));
            }
            for (c, choice) in row.iter().enumerate() {
                let Some(ri) = *choice else { continue };
                let r = h
                    .rules()
                    .get(ri)
                    .ok_or_else(|| Error::Validation(format!("unknown rule {ri}")))?;
                let levels = self.class_levels(c);
                let usable = match r.action {
                    Action::Pop => r.guard.intersect(&EpSet::at_least(1)),
                    _ => r.guard.clone(),
                };
                if r.from != s || !levels.is_subset(&usable) {
                    return Err(Error::Validation(format!(
                        "rule {ri} cannot be played from {} in class {c}",
                        h.names[s]
                    )));
                }
            }
        }
        Ok(())
    }

    fn class_levels(&self, c: usize) -> EpSet {
        let (t, p) = (self.threshold, self.period);
        EpSet::from_fn(t, p, |l| class_index(t, p, l as u64) == c)
    }

    /// The solitaire system left for the opponent once this strategy is fixed.
    pub fn restrict(&self, h: &OneCounterGameSystem) -> CounterSystem {
        let mut out = CounterSystem::new(h.num_states());
        for (ri, r) in h.rules().iter().enumerate() {
            let guard = if h.owners[r.from] == self.player {
                let (t, p) = (self.threshold, self.period);
                let chosen = EpSet::from_fn(t, p, |l| self.choose(r.from, l as u64) == Some(ri));
                r.guard.intersect(&chosen)
            } else {
                r.guard.clone()
            };
            if !guard.is_empty() {
                out.add_rule(CounterRule::new(r.from, r.to, r.action, guard));
            }
        }
        out
    }

    /// Whether `a → b` is a move of `h` consistent with this strategy.
    pub fn allows(&self, h: &OneCounterGameSystem, a: Config, b: Config) -> bool {
        h.enabled_rules(a.0, a.1).any(|ri| {
            let r = &h.rules()[ri];
            let own = h.owners[a.0] == self.player;
            r.to == b.0
                && r.action.apply(a.1) == Some(b.1)
                && (!own || self.choose(a.0, a.1) == Some(ri))
        })
    }

    /// The same choices presented with threshold `t` and period `p`, if they
    /// fit that shape.
    pub fn reshaped(&self, t: usize, p: usize) -> Option<RegularStrategy> {
        let choices: BTreeMap<usize, Vec<Option<usize>>> = self
            .choices
            .keys()
            .map(|&s| (s, (0..t + p).map(|c| self.choose(s, c as u64)).collect()))
            .collect();
        let out = RegularStrategy {
            player: self.player,
            threshold: t,
            period: p,
            choices,
        };
        let horizon = (self.threshold.max(t) + crate::automata::epset::lcm(self.period, p)) as u64;
        let same = self
            .choices
            .keys()
            .all(|&s| (0..horizon).all(|l| self.choose(s, l) == out.choose(s, l)));
        same.then_some(out)
    }

    /// The equivalent presentation with the fewest counter classes.
    pub fn minimized(&self) -> RegularStrategy {
        let mut shapes: Vec<(usize, usize)> = (0..=self.threshold)
            .flat_map(|t| {
                (1..=self.period)
                    .filter(|p| self.period.is_multiple_of(*p))
                    .map(move |p| (t, p))
            })
            .collect();
        shapes.sort_by_key(|&(t, p)| (t + p, t));
        shapes
            .into_iter()
            .find_map(|(t, p)| self.reshaped(t, p))
            .unwrap_or_else(|| self.clone())
    }
}

/// Why a strategy fails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Refutation {
    /// A consistent finite play ending where the strategy has no move.
    Stuck { path: Vec<Config> },
    /// A consistent infinite play won by the opponent.
    Cycle(ConfigLasso),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyVerdict {
    Winning,
    Refuted(Refutation),
}

impl StrategyVerdict {
    pub fn is_winning(&self) -> bool {
        matches!(self, StrategyVerdict::Winning)
    }
}

/// Decides whether `s` wins every play from `start`.
pub fn verify_regular_strategy(
    h: &OneCounterGameSystem,
    s: &RegularStrategy,
    start: Config,
    cap: usize,
) -> Result<StrategyVerdict> {
    s.check_shape(h)?;
    let rs = s.restrict(h);
    let reach = rs.reachable(start.0, start.1, cap)?;
    for st in 0..h.num_states() {
        if h.owners[st] != s.player {
            continue;
        }
        let mut moves = EpSet::empty();
        for r in rs.rules.iter().filter(|r| r.from == st) {
            let usable = match r.action {
                Action::Pop => r.guard.intersect(&EpSet::at_least(1)),
                _ => r.guard.clone(),
            };
            moves = moves.union(&usable);
        }
        if let Some(l) = reach[st].difference(&moves).least() {
            let path = shortest_path(&rs, start, (st, l))?;
            return Ok(StrategyVerdict::Refuted(Refutation::Stuck { path }));
        }
    }
    let player = s.player;
    match find_bad_run(&rs, &h.colors, |c| !player.wins_with(c), start, cap)? {
        Some(lasso) => Ok(StrategyVerdict::Refuted(Refutation::Cycle(lasso))),
        None => Ok(StrategyVerdict::Winning),
    }
}

/// Replays a refutation against the game and the strategy.
pub fn replay_refutation(
    h: &OneCounterGameSystem,
    s: &RegularStrategy,
    start: Config,
    r: &Refutation,
) -> bool {
    match r {
        Refutation::Stuck { path } => {
            let Some(&last) = path.last() else {
                return false;
            };
            path.first() == Some(&start)
                && path.windows(2).all(|w| s.allows(h, w[0], w[1]))
                && h.owners[last.0] == s.player
                && !s
                    .choose(last.0, last.1)
                    .is_some_and(|ri| h.rules()[ri].enabled(last.1))
        }
        Refutation::Cycle(lasso) => {
            let first = lasso.prefix.first().or(lasso.cycle.first());
            let (t, p) = s.restrict(h).regime();
            first == Some(&start)
                && lasso.replay(t, p, 3, |a, b| s.allows(h, a, b))
                && !s.player.wins_with(lasso.cycle_color(&h.colors))
        }
    }
}
