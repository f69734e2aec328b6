//! Random one-counter games: solver answers against independent checks.

mod support;

use gale_core::game::{OneCounterGameSystem, Player};
use gale_core::solve::{
    bmc_check, replay_refutation, solve_one_counter, verify_regular_strategy, BmcBounds,
    BmcVerdict, FiniteParityGame, SolveOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::random_system;

/// Winner of the game cut at counter `cap`, overflowing into a win for
/// `favored`.
fn truncated_winner(
    h: &OneCounterGameSystem,
    cap: u64,
    favored: Player,
    start: (usize, u64),
) -> Player {
    let n = h.num_states();
    let mut g = FiniteParityGame::default();
    for l in 0..=cap {
        for s in 0..n {
            let v = g.add_vertex(h.owners[s], h.colors[s]);
            assert_eq!(v, l as usize * n + s);
        }
    }
    let sink = g.add_vertex(favored, if favored == Player::II { 0 } else { 1 });
    g.add_edge(sink, sink);
    for l in 0..=cap {
        for r in h.rules() {
            if !r.enabled(l) {
                continue;
            }
            let to = match r.action.apply(l) {
                Some(m) if m <= cap => m as usize * n + r.to,
                _ => sink,
            };
            g.add_edge(l as usize * n + r.from, to);
        }
    }
    g.solve().unwrap().winner[start.1 as usize * n + start.0]
}

#[test]
fn random_systems_agree_with_independent_checks() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let opts = SolveOptions::default();
    for sys in 0..100 {
        let h = random_system(&mut rng);
        h.check_no_deadlock().unwrap();
        for level in 0..=20u64 {
            let start = (rng.gen_range(0..h.num_states()), level);
            let rep =
                solve_one_counter(&h, start, &opts).unwrap_or_else(|e| panic!("system {sys}: {e}"));
            let v = verify_regular_strategy(&h, &rep.strategy, start, opts.max_iterations).unwrap();
            assert!(v.is_winning(), "system {sys} from {start:?}");
            assert_eq!(rep.strategy.player, rep.winner);
            // a player winning while ceding overflow wins outright
            for favored in [Player::I, Player::II] {
                let w = truncated_winner(&h, 48, favored, start);
                if w != favored {
                    assert_eq!(w, rep.winner, "system {sys} from {start:?}");
                }
            }
            assert_eq!(
                bmc_check(&h, &rep.strategy, start, BmcBounds::default()),
                BmcVerdict::NoCounterexample,
                "system {sys} from {start:?}"
            );
            for r in &rep.rejected {
                assert!(
                    replay_refutation(&h, &r.strategy, start, &r.refutation),
                    "system {sys}: {}",
                    r.source
                );
            }
        }
    }
}

#[test]
fn shifted_colors_keep_winners() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let opts = SolveOptions::default();
    for _ in 0..30 {
        let mut h = random_system(&mut rng);
        let start = (0, rng.gen_range(0..6));
        let before = solve_one_counter(&h, start, &opts).unwrap().winner;
        h.shift_colors(2);
        assert_eq!(solve_one_counter(&h, start, &opts).unwrap().winner, before);
    }
}
