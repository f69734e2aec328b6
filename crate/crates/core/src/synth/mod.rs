//! Strategies and transducers for the players of a prefix game.

pub mod gstrategy;
pub mod pipeline;
pub mod play;
pub mod solitaire;
pub mod transducer;

pub use gstrategy::{transfer_strategy, verify_g_strategy, GRefutation, GStrategy, GVerdict};
pub use pipeline::{
    build_games, expected_verdict, synthesize, verdict_name, verify_artifact, Check, Games,
    PlayRecord, SynthesisArtifact,
};
pub use play::{
    certified_play_verdict, certified_word_verdict, check_certificate, interactive_play,
    PlayCertificate, PlayRound, PlayTranscript, Verdict,
};
pub use solitaire::{inspector_strategy, vertex_lasso};
pub use transducer::build_transducer;
