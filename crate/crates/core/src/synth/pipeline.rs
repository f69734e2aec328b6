//! From an automaton to a checked transducer for the winner of its game, and
//! the artifact that records every step for later re-checking.

use serde::{Deserialize, Serialize};

use super::gstrategy::{transfer_strategy, verify_g_strategy, GStrategy, GVerdict};
use super::play::{certified_play_verdict, check_certificate, PlayTranscript, Verdict};
use super::transducer::build_transducer;
use crate::automata::lasso::AffineLassoWord;
use crate::error::{Error, Result};
use crate::game::{
    build_game_graph, build_pushdown, extract_uvw, OneCounterGameSystem, Player, PrefixGameGraph,
};
use crate::nmso::format::{parse_nmso, to_nmso};
use crate::nmso::model::{NmsoAutomaton, NmsoTransducer};
use crate::solve::{
    certificate_id, solve_one_counter_observed, verify_regular_strategy, SolveOptions, WinnerReport,
};

/// The two games derived from an automaton.
pub struct Games {
    pub graph: PrefixGameGraph,
    pub counter: OneCounterGameSystem,
}

pub fn build_games(a: &NmsoAutomaton) -> Result<Games> {
    let graph = build_game_graph(a)?;
    let counter = build_pushdown(&graph, &extract_uvw(&graph)?)?;
    Ok(Games { graph, counter })
}

/// A play of the synthesized transducer against one adversary word.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayRecord {
    pub adversary: AffineLassoWord,
    pub transcript: PlayTranscript,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthesisArtifact {
    /// The automaton, in `.nmso` syntax.
    pub automaton: String,
    pub winner: Player,
    pub report: WinnerReport,
    pub strategy: GStrategy,
    pub transducer: NmsoTransducer,
    pub plays: Vec<PlayRecord>,
}

/// The verdict a winning transducer must get.
pub fn expected_verdict(winner: Player) -> Verdict {
    match winner {
        Player::II => Verdict::AcceptCertified,
        Player::I => Verdict::RejectCertified,
    }
}

/// Solves the game of `a`, transfers and checks the winning strategy, builds
/// its transducer and plays it against each adversary.
pub fn synthesize(
    a: &NmsoAutomaton,
    opts: &SolveOptions,
    adversaries: &[AffineLassoWord],
    horizon: usize,
    observe: impl FnMut(usize, usize) -> bool,
) -> Result<SynthesisArtifact> {
    let games = build_games(a)?;
    let (g, h) = (&games.graph, &games.counter);
    let report = solve_one_counter_observed(h, (h.initial, 0), opts, observe)?;
    let strategy = transfer_strategy(h, &report.strategy, g)?;
    match verify_g_strategy(g, &strategy, (g.initial, 0), opts.max_iterations)? {
        GVerdict::Certified => {}
        GVerdict::Refuted(r) => {
            return Err(Error::Inconsistent(format!(
                "transferred strategy refuted: {r:?}"
            )))
        }
    }
    let transducer = build_transducer(a, g, &strategy)?;
    let mut plays = Vec::with_capacity(adversaries.len());
    for w in adversaries {
        let transcript = certified_play_verdict(a, &transducer, w, horizon)?;
        plays.push(PlayRecord {
            adversary: w.clone(),
            transcript,
        });
    }
    Ok(SynthesisArtifact {
        automaton: to_nmso(a)?,
        winner: report.winner,
        report,
        strategy,
        transducer,
        plays,
    })
}

/// One named check of [`verify_artifact`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        passed,
        detail: detail.into(),
    }
}

/// Re-checks every claim of an artifact from its automaton text alone.
pub fn verify_artifact(art: &SynthesisArtifact, opts: &SolveOptions) -> Result<Vec<Check>> {
    let a = parse_nmso(&art.automaton)?;
    let games = build_games(&a)?;
    let (g, h) = (&games.graph, &games.counter);
    let mut out = Vec::new();
    let rep = &art.report;
    out.push(check(
        "winner",
        rep.winner == art.winner
            && rep.strategy.player == art.winner
            && art.strategy.owner == art.winner,
        format!("{}", art.winner),
    ));
    out.push(check(
        "certificate id",
        certificate_id(h, &rep.strategy) == rep.certificate,
        rep.certificate.clone(),
    ));
    let counter_ok = rep.start == (h.initial, 0)
        && verify_regular_strategy(h, &rep.strategy, rep.start, opts.max_iterations)?.is_winning();
    out.push(check(
        "one-counter strategy",
        counter_ok,
        format!("({}, {})", rep.strategy.threshold, rep.strategy.period),
    ));
    let g_verdict = verify_g_strategy(g, &art.strategy, (g.initial, 0), opts.max_iterations)?;
    out.push(check(
        "graph strategy",
        g_verdict == GVerdict::Certified,
        format!("{g_verdict:?}"),
    ));
    let rebuilt = build_transducer(&a, g, &art.strategy)?;
    let same = rebuilt.states == art.transducer.states
        && rebuilt.initial == art.transducer.initial
        && rebuilt.timing == art.transducer.timing
        && rebuilt
            .outputs
            .iter()
            .zip(&art.transducer.outputs)
            .all(|(x, y)| x.equivalent(y))
        && rebuilt.transitions.len() == art.transducer.transitions.len()
        && rebuilt.transitions.iter().all(|(k, r)| {
            art.transducer
                .transitions
                .get(k)
                .is_some_and(|s| r.equivalent(s))
        });
    out.push(check(
        "transducer",
        same && art.transducer.validate().is_ok(),
        art.transducer.name.clone(),
    ));
    let want = expected_verdict(art.winner);
    for p in &art.plays {
        let ok = p.transcript.verdict == want
            && check_certificate(&a, Some(&art.transducer), &p.adversary, &p.transcript)?;
        out.push(check(
            "play",
            ok,
            format!(
                "{} against {}",
                verdict_name(p.transcript.verdict),
                p.adversary
            ),
        ));
    }
    Ok(out)
}

pub fn verdict_name(v: Verdict) -> String {
    match v {
        Verdict::AcceptCertified => "accept (certified)".into(),
        Verdict::RejectCertified => "reject (certified)".into(),
        Verdict::UnknownBounded { horizon } => format!("unknown after {horizon} rounds"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nmso::examples;

    fn corpus() -> Vec<AffineLassoWord> {
        vec![
            AffineLassoWord::constant(0),
            AffineLassoWord::constant(7),
            AffineLassoWord::periodic(vec![], vec![1, 2, 3]),
        ]
    }

    #[test]
    fn artifacts_round_trip_and_verify() {
        for a in [examples::unbounded(), examples::eventually_zero()] {
            let art =
                synthesize(&a, &SolveOptions::default(), &corpus(), 500, |_, _| true).unwrap();
            let json = serde_json::to_string(&art).unwrap();
            let back: SynthesisArtifact = serde_json::from_str(&json).unwrap();
            assert_eq!(back, art);
            let checks = verify_artifact(&back, &SolveOptions::default()).unwrap();
            assert!(checks.iter().all(|c| c.passed), "{}: {checks:?}", a.name);
        }
    }

    #[test]
    fn tampered_artifacts_fail() {
        let a = examples::unbounded();
        let mut art =
            synthesize(&a, &SolveOptions::default(), &corpus(), 500, |_, _| true).unwrap();
        art.winner = Player::I;
        let checks = verify_artifact(&art, &SolveOptions::default()).unwrap();
        assert!(checks.iter().any(|c| !c.passed));
    }

    #[test]
    fn interrupts_report_the_next_round() {
        let a = examples::unbounded();
        let e = synthesize(&a, &SolveOptions::default(), &[], 10, |_, _| false).unwrap_err();
        assert_eq!(e, Error::Interrupted { next_round: 1 });
    }
}
