//! Finite parity games solved by Zielonka's recursive algorithm.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::Player;

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FiniteParityGame {
    pub owners: Vec<Player>,
    pub colors: Vec<u32>,
    pub succ: Vec<Vec<usize>>,
}

/// Winner of every vertex, with a positional strategy for the winner on
/// the vertices it owns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteSolution {
    pub winner: Vec<Player>,
    pub strategy: Vec<Option<usize>>,
}

impl FiniteParityGame {
    pub fn add_vertex(&mut self, owner: Player, color: u32) -> usize {
        self.owners.push(owner);
        self.colors.push(color);
        self.succ.push(Vec::new());
        self.owners.len() - 1
    }

    pub fn add_edge(&mut self, from: usize, to: usize) {
        if !self.succ[from].contains(&to) {
            self.succ[from].push(to);
        }
    }

    pub fn len(&self) -> usize {
        self.owners.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owners.is_empty()
    }

    fn preds(&self) -> Vec<Vec<usize>> {
        let mut p = vec![Vec::new(); self.len()];
        for (v, ss) in self.succ.iter().enumerate() {
            for &s in ss {
                p[s].push(v);
            }
        }
        p
    }

    pub fn solve(&self) -> Result<FiniteSolution> {
        if let Some(v) = self.succ.iter().position(Vec::is_empty) {
            return Err(Error::Validation(format!("vertex {v} has no successor")));
        }
        let preds = self.preds();
        let mut strategy = vec![None; self.len()];
        let all = vec![true; self.len()];
        let (win_ii, _) = self.zielonka(&all, &preds, &mut strategy);
        let winner: Vec<Player> = win_ii
            .iter()
            .map(|&b| if b { Player::II } else { Player::I })
            .collect();
        for v in 0..self.len() {
            if self.owners[v] != winner[v] {
                strategy[v] = None;
            }
        }
        Ok(FiniteSolution { winner, strategy })
    }

    /// Returns the winning regions of II and I inside `alive`.
    fn zielonka(
        &self,
        alive: &[bool],
        preds: &[Vec<usize>],
        strat: &mut [Option<usize>],
    ) -> (Vec<bool>, Vec<bool>) {
        let n = self.len();
        let Some(d) = (0..n).filter(|&v| alive[v]).map(|v| self.colors[v]).max() else {
            return (vec![false; n], vec![false; n]);
        };
        let x = if d % 2 == 0 { Player::II } else { Player::I };
        let top: Vec<bool> = (0..n).map(|v| alive[v] && self.colors[v] == d).collect();
        let a = self.attractor(alive, &top, x, preds, strat);
        let rest: Vec<bool> = (0..n).map(|v| alive[v] && !a[v]).collect();
        let (w2, w1) = self.zielonka(&rest, preds, strat);
        let (wx_sub, wo_sub) = if x == Player::II { (w2, w1) } else { (w1, w2) };
        if !wo_sub.iter().any(|&b| b) {
            for v in 0..n {
                if top[v] && self.owners[v] == x {
                    strat[v] = self.succ[v].iter().copied().find(|&s| alive[s]);
                }
            }
            let wx = alive.to_vec();
            let _ = wx_sub;
            return self.ordered(x, wx, vec![false; n]);
        }
        let b = self.attractor(alive, &wo_sub, x.opponent(), preds, strat);
        let rest2: Vec<bool> = (0..n).map(|v| alive[v] && !b[v]).collect();
        let (w2, w1) = self.zielonka(&rest2, preds, strat);
        let (wx2, mut wo2) = if x == Player::II { (w2, w1) } else { (w1, w2) };
        for v in 0..n {
            wo2[v] |= b[v];
        }
        self.ordered(x, wx2, wo2)
    }

    fn ordered(&self, x: Player, wx: Vec<bool>, wo: Vec<bool>) -> (Vec<bool>, Vec<bool>) {
        if x == Player::II {
            (wx, wo)
        } else {
            (wo, wx)
        }
    }

    /// Attractor of `target` for `player` inside `alive`; records attracting
    /// moves for `player` outside the target.
    fn attractor(
        &self,
        alive: &[bool],
        target: &[bool],
        player: Player,
        preds: &[Vec<usize>],
        strat: &mut [Option<usize>],
    ) -> Vec<bool> {
        let n = self.len();
        let mut inside = target.to_vec();
        let mut count: Vec<usize> = (0..n)
            .map(|v| self.succ[v].iter().filter(|&&s| alive[s]).count())
            .collect();
        let mut queue: VecDeque<usize> = (0..n).filter(|&v| inside[v]).collect();
        while let Some(t) = queue.pop_front() {
            for &v in &preds[t] {
                if !alive[v] || inside[v] {
                    continue;
                }
                if self.owners[v] == player {
                    inside[v] = true;
                    strat[v] = Some(t);
                    queue.push_back(v);
                } else {
                    count[v] -= 1;
                    if count[v] == 0 {
                        inside[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        inside
    }

    /// Largest color seen infinitely often when both players follow
    /// positional strategies from `v`.
    pub fn play_color(&self, v: usize, choice: &[usize]) -> u32 {
        let mut seen = vec![usize::MAX; self.len()];
        let mut path = Vec::new();
        let mut cur = v;
        while seen[cur] == usize::MAX {
            seen[cur] = path.len();
            path.push(cur);
            cur = choice[cur];
        }
        path[seen[cur]..]
            .iter()
            .map(|&u| self.colors[u])
            .max()
            .expect("cycle")
    }

    /// Checks that a positional strategy for `player` wins from every vertex
    /// of `region` against every opponent behavior.
    pub fn strategy_wins(&self, player: Player, region: &[bool], strat: &[Option<usize>]) -> bool {
        let n = self.len();
        // restrict, then look for a reachable cycle that is bad for `player`
        let succ: Vec<Vec<usize>> = (0..n)
            .map(|v| {
                if self.owners[v] == player {
                    strat[v].into_iter().collect()
                } else {
                    self.succ[v].clone()
                }
            })
            .collect();
        let mut reach = region.to_vec();
        let mut stack: Vec<usize> = (0..n).filter(|&v| region[v]).collect();
        while let Some(v) = stack.pop() {
            for &s in &succ[v] {
                if !reach[s] {
                    reach[s] = true;
                    stack.push(s);
                }
            }
        }
        if (0..n).any(|v| reach[v] && succ[v].is_empty()) {
            return false;
        }
        let bad_colors: Vec<u32> = {
            let mut c: Vec<u32> = self
                .colors
                .iter()
                .copied()
                .filter(|&c| !player.wins_with(c))
                .collect();
            c.sort_unstable();
            c.dedup();
            c
        };
        for d in bad_colors {
            let keep: Vec<bool> = (0..n).map(|v| reach[v] && self.colors[v] <= d).collect();
            let comp = sccs(&succ, &keep);
            for v in 0..n {
                if keep[v] && self.colors[v] == d {
                    let cyclic = succ[v].iter().any(|&s| keep[s] && comp[s] == comp[v]);
                    if cyclic {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Strongly connected component index per vertex (Tarjan, iterative);
/// vertices outside `keep` get `usize::MAX`.
pub fn sccs(succ: &[Vec<usize>], keep: &[bool]) -> Vec<usize> {
    let n = succ.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![usize::MAX; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut next_comp = 0;
    for root in 0..n {
        if !keep[root] || index[root] != usize::MAX {
            continue;
        }
        let mut work: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut i)) = work.last_mut() {
            if *i < succ[v].len() {
                let w = succ[v][*i];
                *i += 1;
                if !keep[w] {
                    continue;
                }
                if index[w] == usize::MAX {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    work.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                work.pop();
                if let Some(&(u, _)) = work.last() {
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().expect("nonempty");
                        on_stack[w] = false;
                        comp[w] = next_comp;
                        if w == v {
                            break;
                        }
                    }
                    next_comp += 1;
                }
            }
        }
    }
    comp
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_game(rng: &mut ChaCha8Rng, n: usize) -> FiniteParityGame {
        let mut g = FiniteParityGame::default();
        for _ in 0..n {
            let owner = if rng.gen_bool(0.5) {
                Player::I
            } else {
                Player::II
            };
            g.add_vertex(owner, rng.gen_range(0..4));
        }
        for v in 0..n {
            let k = rng.gen_range(1..=2);
            for _ in 0..k {
                let t = rng.gen_range(0..n);
                g.add_edge(v, t);
            }
        }
        g
    }

    /// II wins `v` iff some positional II strategy beats every positional I strategy.
    fn brute_force(g: &FiniteParityGame) -> Vec<Player> {
        let n = g.len();
        let choices = |p: Player| -> Vec<Vec<usize>> {
            let mut all = vec![vec![0; n]];
            for v in 0..n {
                let opts: Vec<usize> = if g.owners[v] == p {
                    g.succ[v].clone()
                } else {
                    vec![usize::MAX]
                };
                all = all
                    .into_iter()
                    .flat_map(|c| {
                        opts.iter().map(move |&o| {
                            let mut c = c.clone();
                            c[v] = o;
                            c
                        })
                    })
                    .collect();
            }
            all
        };
        let two = choices(Player::II);
        let one = choices(Player::I);
        (0..n)
            .map(|v| {
                let wins = two.iter().any(|s2| {
                    one.iter().all(|s1| {
                        let joint: Vec<usize> = (0..n)
                            .map(|u| {
                                if g.owners[u] == Player::II {
                                    s2[u]
                                } else {
                                    s1[u]
                                }
                            })
                            .collect();
                        g.play_color(v, &joint).is_multiple_of(2)
                    })
                });
                if wins {
                    Player::II
                } else {
                    Player::I
                }
            })
            .collect()
    }

    #[test]
    fn matches_brute_force_on_random_games() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.gen_range(1..=6);
            let g = random_game(&mut rng, n);
            let sol = g.solve().unwrap();
            assert_eq!(sol.winner, brute_force(&g), "{g:?}");
            for p in [Player::I, Player::II] {
                let region: Vec<bool> = sol.winner.iter().map(|&w| w == p).collect();
                assert!(g.strategy_wins(p, &region, &sol.strategy), "{g:?}");
            }
        }
    }

    #[test]
    fn self_loop_parity() {
        let mut g = FiniteParityGame::default();
        let a = g.add_vertex(Player::I, 1);
        let b = g.add_vertex(Player::II, 2);
        g.add_edge(a, a);
        g.add_edge(a, b);
        g.add_edge(b, b);
        let sol = g.solve().unwrap();
        assert_eq!(sol.winner, vec![Player::I, Player::II]);
        assert_eq!(sol.strategy[a], Some(a));
    }
}
