//! Built-in automata, parsed from the `.nmso` sources shipped in `models/`.

use super::format::parse_nmso;
use super::model::NmsoAutomaton;

macro_rules! model {
    ($(#[$doc:meta])* $fn:ident, $file:literal) => {
        $(#[$doc])*
        pub fn $fn() -> NmsoAutomaton {
            parse_nmso(include_str!(concat!("../../models/", $file))).expect($file)
        }
    };
}

/// Source text of every built-in model, by file name.
pub const SOURCES: [(&str, &str); 10] = [
    ("l1.nmso", include_str!("../../models/l1.nmso")),
    (
        "l1_incomplete.nmso",
        include_str!("../../models/l1_incomplete.nmso"),
    ),
    (
        "unbounded.nmso",
        include_str!("../../models/unbounded.nmso"),
    ),
    (
        "repeated_number.nmso",
        include_str!("../../models/repeated_number.nmso"),
    ),
    (
        "eventually_zero.nmso",
        include_str!("../../models/eventually_zero.nmso"),
    ),
    ("echo.nmso", include_str!("../../models/echo.nmso")),
    ("trivial.nmso", include_str!("../../models/trivial.nmso")),
    ("all_odd.nmso", include_str!("../../models/all_odd.nmso")),
    (
        "empty_finite.nmso",
        include_str!("../../models/empty_finite.nmso"),
    ),
    ("plus_one.nmso", include_str!("../../models/plus_one.nmso")),
];

model!(
    /// Words `n (n+1) … (n+ℓ)`; the single-letter words are accepted too,
    /// since the initial transition already enters the final state.
    l1, "l1.nmso"
);
model!(
    /// [`l1`] before completion by the rejecting sink.
    l1_incomplete, "l1_incomplete.nmso"
);
model!(
    /// Unbounded sequences; color 2 marks an increase of the maximum.
    unbounded, "unbounded.nmso"
);
model!(
    /// Nondeterministic: some number occurs infinitely often.
    repeated_number_nfa, "repeated_number.nmso"
);
model!(
    /// Finitely many nonzero letters; the second player loses this game.
    eventually_zero, "eventually_zero.nmso"
);
model!(
    /// Each answer must repeat the preceding letter.
    echo, "echo.nmso"
);
model!(
    /// One state of color 0.
    trivial, "trivial.nmso"
);
model!(
    /// Only odd colors.
    all_odd, "all_odd.nmso"
);
model!(
    /// No transitions.
    empty_finite, "empty_finite.nmso"
);
model!(
    /// One step storing the successor of the letter.
    plus_one, "plus_one.nmso"
);

/// Every built-in automaton.
pub fn all() -> Vec<NmsoAutomaton> {
    SOURCES
        .iter()
        .map(|(f, s)| parse_nmso(s).expect(f))
        .collect()
}
