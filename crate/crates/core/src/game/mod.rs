//! Games on automata: the prefix game graph, its decomposition into
//! pop-inspect-push rules and the one-counter game built from them.

pub mod graph;
pub mod pushdown;
pub mod uvw;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use graph::{build_game_graph, PrefixGameGraph};
pub use pushdown::{build_pushdown, HState, OneCounterGameSystem};
pub use uvw::{extract_uvw, recompose, UvwRule};

/// Player II wins a play iff the largest color seen infinitely often is even.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Player {
    I,
    II,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::I => Player::II,
            Player::II => Player::I,
        }
    }

    /// Whether `player` wins when `color` is the largest one seen infinitely often.
    pub fn wins_with(self, color: u32) -> bool {
        color.is_multiple_of(2) == (self == Player::II)
    }

    /// Smallest color that is losing for this player.
    pub fn losing_color(self) -> u32 {
        match self {
            Player::I => 0,
            Player::II => 1,
        }
    }

    pub fn winning_color(self) -> u32 {
        self.opponent().losing_color()
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::I => "I",
            Player::II => "II",
        })
    }
}
