//! Plays between an automaton's game and a transducer, with verdicts that
//! are either proved for the whole infinite play or reported as unknown.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::automata::lasso::AffineLassoWord;
use crate::automata::relation::UnaryRelation;
use crate::error::{Error, Result};
use crate::nmso::model::{Configuration, NmsoAutomaton, NmsoTransducer, OutputTiming};
use crate::nmso::ops::require_deterministic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// The infinite play is accepted by the automaton.
    AcceptCertified,
    /// The infinite play is rejected.
    RejectCertified,
    /// No affine repetition within the horizon (in rounds).
    UnknownBounded { horizon: usize },
}

/// One round of a play: the adversary's letter, the transducer's letter, and
/// the automaton configurations after each letter in the order played.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayRound {
    pub input: u64,
    pub output: Option<u64>,
    pub configurations: Vec<Configuration>,
    pub colors: Vec<u32>,
    pub transducer: Option<Configuration>,
}

/// Joint configuration at the start of a round in the repeated block, with
/// its growth per repetition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointPoint {
    pub automaton: Configuration,
    pub transducer: Option<Configuration>,
    pub automaton_drift: u64,
    pub transducer_drift: u64,
}

/// Rounds `start..start+length` repeat forever, every number along them
/// growing by its own fixed drift per repetition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayCertificate {
    pub start: usize,
    pub length: usize,
    pub cycle: Vec<JointPoint>,
    pub cycle_color: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayTranscript {
    pub rounds: Vec<PlayRound>,
    pub verdict: Verdict,
    pub certificate: Option<PlayCertificate>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Rel {
    Automaton(usize, usize),
    Transition(usize, usize),
    Output(usize),
}

/// A relation instance used by the play: `vals ∈ rel`.
#[derive(Debug, Clone)]
struct Fact {
    rel: Rel,
    vals: Vec<u64>,
}

/// The automaton, optionally driven together with a transducer.
pub(crate) struct Joint<'a> {
    a: &'a NmsoAutomaton,
    c: Option<&'a NmsoTransducer>,
    colors: &'a [u32],
    acfg: Configuration,
    ccfg: Option<Configuration>,
}

impl<'a> Joint<'a> {
    pub(crate) fn new(a: &'a NmsoAutomaton, c: Option<&'a NmsoTransducer>) -> Result<Self> {
        Ok(Joint {
            a,
            c,
            colors: a.colors()?,
            acfg: a.initial_configuration(),
            ccfg: c.map(NmsoTransducer::initial_configuration),
        })
    }

    fn key(&self) -> (usize, usize) {
        (self.acfg.state, self.ccfg.map_or(usize::MAX, |c| c.state))
    }

    fn feed(&mut self, z: u64, round: &mut PlayRound, facts: &mut Vec<Fact>) -> Result<()> {
        let from = self.acfg;
        let to = self.a.step_det(from, z)?;
        facts.push(Fact {
            rel: Rel::Automaton(from.state, to.state),
            vals: vec![from.memory, z, to.memory],
        });
        round.configurations.push(to);
        round.colors.push(self.colors[to.state]);
        self.acfg = to;
        Ok(())
    }

    fn emit(&self, c: &NmsoTransducer, facts: &mut Vec<Fact>) -> Result<u64> {
        let cfg = self.ccfg.expect("transducer present");
        let n = c.output(cfg)?;
        facts.push(Fact {
            rel: Rel::Output(cfg.state),
            vals: vec![cfg.memory, n],
        });
        Ok(n)
    }

    fn advance(&mut self, c: &NmsoTransducer, m: u64, facts: &mut Vec<Fact>) -> Result<()> {
        let from = self.ccfg.expect("transducer present");
        let to = c.step(from, m)?;
        facts.push(Fact {
            rel: Rel::Transition(from.state, to.state),
            vals: vec![from.memory, m, to.memory],
        });
        self.ccfg = Some(to);
        Ok(())
    }

    /// Plays one round on the adversary's letter `m`.
    fn round(&mut self, m: u64) -> Result<(PlayRound, Vec<Fact>)> {
        let mut r = PlayRound {
            input: m,
            output: None,
            configurations: vec![],
            colors: vec![],
            transducer: None,
        };
        let mut facts = Vec::new();
        match self.c {
            None => self.feed(m, &mut r, &mut facts)?,
            Some(c) if c.timing == OutputTiming::AfterInput => {
                self.feed(m, &mut r, &mut facts)?;
                self.advance(c, m, &mut facts)?;
                let n = self.emit(c, &mut facts)?;
                r.output = Some(n);
                self.feed(n, &mut r, &mut facts)?;
            }
            Some(c) => {
                let n = self.emit(c, &mut facts)?;
                r.output = Some(n);
                self.feed(n, &mut r, &mut facts)?;
                self.feed(m, &mut r, &mut facts)?;
                self.advance(c, m, &mut facts)?;
            }
        }
        r.transducer = self.ccfg;
        Ok((r, facts))
    }

    fn relation(&self, rel: Rel) -> UnaryRelation {
        match rel {
            Rel::Automaton(p, q) => self.a.relation(p, q),
            Rel::Transition(p, q) => self.c.expect("transducer present").relation(p, q),
            Rel::Output(p) => self.c.expect("transducer present").outputs[p].clone(),
        }
    }
}

/// Round-start snapshot used for repetition detection.
struct Start {
    key: (usize, usize),
    phase: Option<usize>,
    acfg: Configuration,
    ccfg: Option<Configuration>,
}

fn drift(a: u64, b: u64) -> Option<u64> {
    b.checked_sub(a)
}

/// Checks that rounds `k1..k1+len` repeat affinely, proving it for every
/// later repetition by exact checks of each fired relation along its ray.
fn affine_block(
    joint: &Joint<'_>,
    starts: &[Start],
    facts: &[Vec<Fact>],
    colors: &[Vec<u32>],
    k1: usize,
    len: usize,
) -> Option<PlayCertificate> {
    let mut cycle = Vec::with_capacity(len);
    for r in k1..k1 + len {
        let (s0, s1) = (&starts[r], &starts[r + len]);
        if s0.key != s1.key {
            return None;
        }
        let ad = drift(s0.acfg.memory, s1.acfg.memory)?;
        let cd = match (s0.ccfg, s1.ccfg) {
            (Some(x), Some(y)) => drift(x.memory, y.memory)?,
            _ => 0,
        };
        cycle.push(JointPoint {
            automaton: s0.acfg,
            transducer: s0.ccfg,
            automaton_drift: ad,
            transducer_drift: cd,
        });
        let (f0, f1) = (&facts[r], &facts[r + len]);
        if f0.len() != f1.len() || f0.iter().zip(f1).any(|(x, y)| x.rel != y.rel) {
            return None;
        }
        for (x, y) in f0.iter().zip(f1) {
            let step: Option<Vec<u64>> = x
                .vals
                .iter()
                .zip(&y.vals)
                .map(|(&u, &v)| drift(u, v))
                .collect();
            if !joint.relation(x.rel).holds_on_ray(&x.vals, &step?) {
                return None;
            }
        }
    }
    let cycle_color = colors[k1..k1 + len].iter().flatten().copied().max()?;
    Some(PlayCertificate {
        start: k1,
        length: len,
        cycle,
        cycle_color,
    })
}

fn verdict_of(cert: &PlayCertificate) -> Verdict {
    if cert.cycle_color.is_multiple_of(2) {
        Verdict::AcceptCertified
    } else {
        Verdict::RejectCertified
    }
}

/// Plays `horizon` rounds at most, deciding the infinite play as soon as an
/// affine repetition of the joint run is proved.
fn certified_run(
    a: &NmsoAutomaton,
    c: Option<&NmsoTransducer>,
    adversary: &AffineLassoWord,
    horizon: usize,
) -> Result<PlayTranscript> {
    require_deterministic(a)?;
    if let Some(c) = c {
        c.validate()?;
    }
    let mut joint = Joint::new(a, c)?;
    let mut starts: Vec<Start> = Vec::new();
    let mut facts: Vec<Vec<Fact>> = Vec::new();
    let mut colors: Vec<Vec<u32>> = Vec::new();
    let mut rounds = Vec::new();
    let mut seen: HashMap<((usize, usize), usize), Vec<usize>> = HashMap::new();
    for k in 0..=horizon {
        starts.push(Start {
            key: joint.key(),
            phase: adversary.phase(k as u64),
            acfg: joint.acfg,
            ccfg: joint.ccfg,
        });
        if let Some(ph) = starts[k].phase {
            let now = &starts[k];
            let earlier = seen.entry((now.key, ph)).or_default();
            for &k2 in earlier.iter().rev() {
                let len = k - k2;
                let Some(k1) = k2.checked_sub(len) else {
                    continue;
                };
                let first = &starts[k1];
                if first.phase != Some(ph) || first.key != now.key {
                    continue;
                }
                let grows = |x: u64, y: u64, z: u64| z >= y && y >= x && y - x == z - y;
                let same_drift = grows(first.acfg.memory, starts[k2].acfg.memory, now.acfg.memory)
                    && match (first.ccfg, starts[k2].ccfg, now.ccfg) {
                        (Some(x), Some(y), Some(z)) => grows(x.memory, y.memory, z.memory),
                        _ => true,
                    };
                if !same_drift {
                    continue;
                }
                if let Some(cert) = affine_block(&joint, &starts, &facts, &colors, k1, len) {
                    return Ok(PlayTranscript {
                        rounds,
                        verdict: verdict_of(&cert),
                        certificate: Some(cert),
                    });
                }
            }
            earlier.push(k);
        }
        if k == horizon {
            break;
        }
        let (r, f) = joint.round(adversary.denote(k as u64))?;
        colors.push(r.colors.clone());
        facts.push(f);
        rounds.push(r);
    }
    Ok(PlayTranscript {
        rounds,
        verdict: Verdict::UnknownBounded { horizon },
        certificate: None,
    })
}

/// Decides the play of transducer `c` against `adversary` in the game of `a`.
pub fn certified_play_verdict(
    a: &NmsoAutomaton,
    c: &NmsoTransducer,
    adversary: &AffineLassoWord,
    horizon: usize,
) -> Result<PlayTranscript> {
    certified_run(a, Some(c), adversary, horizon)
}

/// Decides whether the deterministic automaton `a` accepts the ω-word `w`.
pub fn certified_word_verdict(
    a: &NmsoAutomaton,
    w: &AffineLassoWord,
    horizon: usize,
) -> Result<PlayTranscript> {
    certified_run(a, None, w, horizon)
}

/// Replays the play and re-proves its certificate from scratch.
pub fn check_certificate(
    a: &NmsoAutomaton,
    c: Option<&NmsoTransducer>,
    adversary: &AffineLassoWord,
    t: &PlayTranscript,
) -> Result<bool> {
    let Some(cert) = &t.certificate else {
        return Ok(false);
    };
    if t.verdict != verdict_of(cert)
        || cert.length == 0
        || adversary.phase(cert.start as u64).is_none()
    {
        return Ok(false);
    }
    let mut joint = Joint::new(a, c)?;
    let mut starts = Vec::new();
    let mut facts = Vec::new();
    let mut colors = Vec::new();
    for k in 0..=cert.start + 2 * cert.length {
        starts.push(Start {
            key: joint.key(),
            phase: adversary.phase(k as u64),
            acfg: joint.acfg,
            ccfg: joint.ccfg,
        });
        let (r, f) = joint.round(adversary.denote(k as u64))?;
        if k < t.rounds.len() && t.rounds[k] != r {
            return Ok(false);
        }
        colors.push(r.colors);
        facts.push(f);
    }
    if starts[cert.start].phase != starts[cert.start + cert.length].phase {
        return Err(Error::Inconsistent(
            "certificate block is not aligned with the adversary's cycle".into(),
        ));
    }
    Ok(
        affine_block(&joint, &starts, &facts, &colors, cert.start, cert.length).as_ref()
            == Some(cert),
    )
}

/// Reads the adversary's numbers from `input` and answers with the
/// transducer, until `:quit` or end of input. `:state` prints the joint
/// configuration and `:save FILE` writes the transcript so far as JSON.
pub fn interactive_play<R: BufRead, W: Write>(
    a: &NmsoAutomaton,
    c: &NmsoTransducer,
    input: R,
    mut out: W,
) -> Result<Vec<PlayRound>> {
    require_deterministic(a)?;
    c.validate()?;
    let mut joint = Joint::new(a, Some(c))?;
    let mut rounds: Vec<PlayRound> = Vec::new();
    let mut seen = vec![
        0usize;
        joint
            .colors
            .iter()
            .copied()
            .max()
            .map_or(0, |m| m as usize + 1)
    ];
    let mut lines = input.lines();
    loop {
        if c.timing == OutputTiming::OutputsFirst {
            let n = c.output(joint.ccfg.expect("transducer present"))?;
            writeln!(out, "engine plays {n}")?;
        }
        write!(out, "> ")?;
        out.flush()?;
        let Some(line) = lines.next() else { break };
        let line = line?;
        let cmd = line.trim();
        match cmd {
            "" => continue,
            ":quit" => break,
            ":state" => {
                let acfg = joint.acfg;
                let ccfg = joint.ccfg.expect("transducer present");
                writeln!(
                    out,
                    "automaton ({}, {}) color {}; transducer ({}, {}); rounds {}",
                    a.states[acfg.state],
                    acfg.memory,
                    joint.colors[acfg.state],
                    c.states[ccfg.state],
                    ccfg.memory,
                    rounds.len()
                )?;
                continue;
            }
            _ => {}
        }
        if let Some(path) = cmd.strip_prefix(":save") {
            let path = path.trim();
            if path.is_empty() {
                writeln!(out, "usage: :save FILE")?;
            } else {
                let json = serde_json::to_string_pretty(&rounds)
                    .map_err(|e| Error::Artifact(e.to_string()))?;
                std::fs::write(path, json)?;
                writeln!(out, "saved {} rounds to {path}", rounds.len())?;
            }
            continue;
        }
        let Ok(m) = cmd.parse::<u64>() else {
            writeln!(
                out,
                "expected a natural number, `:state`, `:save FILE` or `:quit`"
            )?;
            continue;
        };
        let (r, _) = joint.round(m)?;
        for &col in &r.colors {
            seen[col as usize] += 1;
        }
        let top = seen.iter().rposition(|&k| k > 0).unwrap_or(0);
        let last = r.configurations.last().expect("each round feeds a letter");
        if let (OutputTiming::AfterInput, Some(n)) = (c.timing, r.output) {
            writeln!(out, "engine answers {n}")?
        }
        writeln!(
            out,
            "automaton at ({}, {}) color {}; colors so far {:?}, largest {top}",
            a.states[last.state], last.memory, joint.colors[last.state], seen
        )?;
        rounds.push(r);
    }
    Ok(rounds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::lasso::CycleEntry;
    use crate::nmso::examples;
    use crate::synth::build_transducer;
    use crate::synth::gstrategy::tests::winning;

    fn synthesized(a: &NmsoAutomaton) -> NmsoTransducer {
        let (g, sigma) = winning(a);
        build_transducer(a, &g, &sigma).unwrap()
    }

    fn echo_transducer() -> NmsoTransducer {
        let copy = UnaryRelation::identity().cylindrify(3, &[1, 2]).unwrap();
        let mut transitions = std::collections::BTreeMap::new();
        transitions.insert((0, 0), copy);
        NmsoTransducer {
            name: "echo".into(),
            states: vec!["s".into()],
            initial: 0,
            transitions,
            outputs: vec![UnaryRelation::identity()],
            timing: OutputTiming::AfterInput,
        }
    }

    fn certified(a: &NmsoAutomaton, c: &NmsoTransducer, w: &AffineLassoWord) -> Verdict {
        let t = certified_play_verdict(a, c, w, 400).unwrap();
        assert!(
            check_certificate(a, Some(c), w, &t).unwrap(),
            "{} on {w}",
            a.name
        );
        t.verdict
    }

    #[test]
    fn unbounded_transducer_is_accepted() {
        let a = examples::unbounded();
        let c = synthesized(&a);
        for w in [
            AffineLassoWord::constant(0),
            AffineLassoWord::constant(7),
            AffineLassoWord::periodic(vec![], vec![1, 2, 3]),
        ] {
            assert_eq!(certified(&a, &c, &w), Verdict::AcceptCertified, "{w}");
        }
        let out = c.run(&[0, 0, 0]).unwrap();
        assert!(out.windows(2).all(|p| p[0] < p[1]), "{out:?}");
    }

    #[test]
    fn eventually_zero_player_one_wins() {
        let a = examples::eventually_zero();
        let c = synthesized(&a);
        assert_eq!(c.timing, OutputTiming::OutputsFirst);
        for w in [
            AffineLassoWord::constant(0),
            AffineLassoWord::constant(4),
            AffineLassoWord::periodic(vec![9], vec![0, 1]),
        ] {
            assert_eq!(certified(&a, &c, &w), Verdict::RejectCertified, "{w}");
        }
    }

    #[test]
    fn trivial_game_accepts_echo() {
        let a = examples::trivial();
        assert_eq!(
            certified(&a, &echo_transducer(), &AffineLassoWord::constant(7)),
            Verdict::AcceptCertified
        );
    }

    #[test]
    fn word_verdicts() {
        let a = examples::unbounded();
        let nat = AffineLassoWord::new(vec![], vec![CycleEntry::drifting(0)], 1);
        let t = certified_word_verdict(&a, &nat, 100).unwrap();
        assert_eq!(t.verdict, Verdict::AcceptCertified);
        assert!(check_certificate(&a, None, &nat, &t).unwrap());
        let five = AffineLassoWord::constant(5);
        assert_eq!(
            certified_word_verdict(&a, &five, 100).unwrap().verdict,
            Verdict::RejectCertified
        );
    }

    #[test]
    fn tampered_certificates_fail() {
        let a = examples::unbounded();
        let nat = AffineLassoWord::new(vec![], vec![CycleEntry::drifting(0)], 1);
        let mut t = certified_word_verdict(&a, &nat, 100).unwrap();
        t.certificate.as_mut().unwrap().cycle_color += 1;
        assert!(!check_certificate(&a, None, &nat, &t).unwrap());
    }

    #[test]
    fn repl_answers_and_reprompts() {
        let a = examples::unbounded();
        let c = synthesized(&a);
        let mut out = Vec::new();
        let rounds = interactive_play(
            &a,
            &c,
            "0\nzero\n0\n:state\n0\n:quit\n5\n".as_bytes(),
            &mut out,
        )
        .unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(rounds.len(), 3);
        let outs: Vec<u64> = rounds.iter().map(|r| r.output.unwrap()).collect();
        assert!(outs.windows(2).all(|p| p[0] < p[1]), "{outs:?}");
        assert!(text.contains("expected a natural number"));
        assert!(text.contains("transducer ("));
        assert!(interactive_play(&a, &c, "".as_bytes(), Vec::new())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn short_horizons_stay_unknown() {
        let a = examples::unbounded();
        let c = synthesized(&a);
        let t = certified_play_verdict(&a, &c, &AffineLassoWord::constant(0), 1).unwrap();
        assert_eq!(t.verdict, Verdict::UnknownBounded { horizon: 1 });
        assert!(t.certificate.is_none());
    }
}
