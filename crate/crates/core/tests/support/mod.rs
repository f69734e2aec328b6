//! Random one-counter systems shared by integration tests.

use gale_core::automata::counter::Action;
use gale_core::automata::epset::EpSet;
use gale_core::game::{HState, OneCounterGameSystem, Player};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn random_guard(rng: &mut ChaCha8Rng) -> EpSet {
    match rng.gen_range(0..5) {
        0 => EpSet::singleton(rng.gen_range(0..4)),
        1 => EpSet::at_least(rng.gen_range(0..4)),
        2 => EpSet::residue(rng.gen_range(0..2), 2),
        3 => EpSet::finite(0..rng.gen_range(1..4)),
        _ => EpSet::full(),
    }
}

fn random_action(rng: &mut ChaCha8Rng) -> Action {
    [Action::Pop, Action::Stay, Action::Push][rng.gen_range(0..3)]
}

/// At most 4 states, 3 colors and 6 rules; every state keeps a move that is
/// enabled at every counter value.
pub fn random_system(rng: &mut ChaCha8Rng) -> OneCounterGameSystem {
    let n = rng.gen_range(1..=4);
    let mut h = OneCounterGameSystem::new();
    for i in 0..n {
        let owner = if rng.gen_bool(0.5) {
            Player::I
        } else {
            Player::II
        };
        h.add_state(
            format!("s{i}"),
            owner,
            rng.gen_range(0..3),
            HState::Vertex(i),
        );
    }
    for i in 0..n {
        let action = if rng.gen_bool(0.5) {
            Action::Stay
        } else {
            Action::Push
        };
        h.add_rule(i, rng.gen_range(0..n), action, EpSet::full());
    }
    for _ in 0..rng.gen_range(0..=6 - n) {
        let (from, to) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let (action, guard) = (random_action(rng), random_guard(rng));
        h.add_rule(from, to, action, guard);
    }
    h
}
