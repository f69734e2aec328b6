//! Transducers implementing a graph strategy.

use std::collections::BTreeMap;

use super::gstrategy::GStrategy;
use crate::automata::epset::EpSet;
use crate::automata::relation::UnaryRelation;
use crate::error::{Error, Result};
use crate::game::{Player, PrefixGameGraph};
use crate::nmso::model::{NmsoAutomaton, NmsoTransducer, OutputTiming};

/// `{(y, z, y'') : ∃y' (y, y') ∈ step ∧ (y', z, y'') ∈ phi}`
fn fold(step: &UnaryRelation, phi: &UnaryRelation) -> Result<UnaryRelation> {
    // tracks (y, z, y'', y')
    let a = step.cylindrify(4, &[0, 3])?;
    let b = phi.cylindrify(4, &[3, 1, 2])?;
    a.intersect(&b)?.project(3)
}

/// `{(y, z) : ∃y' (y, y') ∈ step ∧ (y, z, y') ∈ phi}`
fn letters_for(step: &UnaryRelation, phi: &UnaryRelation) -> Result<UnaryRelation> {
    let a = step.cylindrify(3, &[0, 2])?;
    a.intersect(phi)?.project(2)
}

/// Builds the transducer playing `sigma` in the game of `a`.
///
/// For Player II the transducer reads Player I's letter first and answers;
/// a fresh initial state stands for the silent start. For Player I the
/// transducer speaks first in every round, its initial output included.
pub fn build_transducer(
    a: &NmsoAutomaton,
    g: &PrefixGameGraph,
    sigma: &GStrategy,
) -> Result<NmsoTransducer> {
    let x = sigma.owner;
    let n = a.num_states();
    let step = |p: usize, q: usize| -> UnaryRelation {
        sigma
            .moves
            .get(&(g.tagged(p, x), g.tagged(q, x.opponent())))
            .cloned()
            .unwrap_or_else(|| UnaryRelation::empty(2))
    };
    let mut states: Vec<String> = a.states.clone();
    let mut transitions: BTreeMap<(usize, usize), UnaryRelation> = BTreeMap::new();
    let mut outputs: Vec<UnaryRelation> = Vec::with_capacity(n + 2);
    for p in 0..n {
        let mut out = UnaryRelation::empty(2);
        for q in 0..n {
            out = out.union(&letters_for(&step(p, q), &a.relation(p, q))?.least_partner()?)?;
        }
        outputs.push(out);
        for r in 0..n {
            let mut nu = UnaryRelation::empty(3);
            for q in 0..n {
                nu = nu.union(&fold(&step(p, q), &a.relation(q, r))?)?;
            }
            if !nu.is_empty() {
                transitions.insert((p, r), nu);
            }
        }
    }
    let (initial, timing) = match x {
        Player::II => {
            let start = states.len();
            states.push(format!("{}'", a.states[a.initial]));
            outputs.push(UnaryRelation::product_of(&[
                EpSet::full(),
                EpSet::singleton(0),
            ]));
            let zero =
                UnaryRelation::product_of(&[EpSet::singleton(0), EpSet::full(), EpSet::full()]);
            for q in 0..n {
                let nu = a.relation(a.initial, q).intersect(&zero)?;
                if !nu.is_empty() {
                    transitions.insert((start, q), nu);
                }
            }
            (start, OutputTiming::AfterInput)
        }
        Player::I => (a.initial, OutputTiming::OutputsFirst),
    };
    // off-strategy configurations fall into a sink that outputs 0
    let sink = states.len();
    states.push("off".into());
    outputs.push(UnaryRelation::product_of(&[
        EpSet::full(),
        EpSet::singleton(0),
    ]));
    let to_zero = UnaryRelation::product_of(&[EpSet::full(), EpSet::full(), EpSet::singleton(0)]);
    transitions.insert((sink, sink), to_zero.clone());
    for p in 0..sink {
        let dom = outputs[p].domain()?;
        let pad = UnaryRelation::product_of(&[dom.complement(), EpSet::singleton(0)]);
        outputs[p] = outputs[p].union(&pad)?;
        let mut covered = UnaryRelation::empty(2);
        for r in 0..sink {
            if let Some(nu) = transitions.get(&(p, r)) {
                covered = covered.union(&nu.project(2)?)?;
            }
        }
        let missing = covered
            .complement()
            .cylindrify(3, &[0, 1])?
            .intersect(&to_zero)?;
        if !missing.is_empty() {
            transitions.insert((p, sink), missing);
        }
    }
    let c = NmsoTransducer {
        name: format!("{}_{}", a.name, x),
        states,
        initial,
        transitions,
        outputs,
        timing,
    };
    c.validate()
        .map_err(|e| Error::Validation(format!("synthesized transducer: {e}")))?;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nmso::examples;
    use crate::synth::gstrategy::tests::winning;

    #[test]
    fn echo_transducer_repeats_its_input() {
        let a = examples::echo();
        let (g, sigma) = winning(&a);
        let c = build_transducer(&a, &g, &sigma).unwrap();
        assert_eq!(c.timing, OutputTiming::AfterInput);
        let input = [3, 7, 0, 12, 12, 1];
        assert_eq!(c.run(&input).unwrap(), input.to_vec());
    }

    #[test]
    fn interleaved_plays_stay_on_edges() {
        for a in [
            examples::unbounded(),
            examples::eventually_zero(),
            examples::trivial(),
        ] {
            let (g, sigma) = winning(&a);
            let c = build_transducer(&a, &g, &sigma).unwrap();
            let input: Vec<u64> = (0..12).map(|i| (i * 5 + 2) % 9).collect();
            let out = c.run(&input).unwrap();
            let word: Vec<u64> = match c.timing {
                OutputTiming::AfterInput => {
                    input.iter().zip(&out).flat_map(|(&m, &n)| [m, n]).collect()
                }
                OutputTiming::OutputsFirst => {
                    out.iter().zip(&input).flat_map(|(&n, &m)| [n, m]).collect()
                }
            };
            assert!(a.run_det(&word).is_ok(), "{}", a.name);
        }
    }

    /// After each input, the transducer sits where the automaton is once the
    /// same input has been read in the interleaved play.
    #[test]
    fn transducer_tracks_the_automaton() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for a in [
            examples::unbounded(),
            examples::echo(),
            examples::eventually_zero(),
        ] {
            let (g, sigma) = winning(&a);
            let c = build_transducer(&a, &g, &sigma).unwrap();
            for _ in 0..20 {
                let len = rng.gen_range(0..=50);
                let input: Vec<u64> = (0..len).map(|_| rng.gen_range(0..8)).collect();
                let mut ccfg = c.initial_configuration();
                let mut acfg = a.initial_configuration();
                for &m in &input {
                    if c.timing == OutputTiming::OutputsFirst {
                        acfg = a.step_det(acfg, c.output(ccfg).unwrap()).unwrap();
                    }
                    acfg = a.step_det(acfg, m).unwrap();
                    ccfg = c.step(ccfg, m).unwrap();
                    assert_eq!(ccfg, acfg, "{} on {input:?}", a.name);
                    if c.timing == OutputTiming::AfterInput {
                        acfg = a.step_det(acfg, c.output(ccfg).unwrap()).unwrap();
                    }
                }
            }
        }
    }
}
