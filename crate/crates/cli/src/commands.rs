use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Once;

use anyhow::{bail, Context, Result};
use gale_core::automata::lasso::AffineLassoWord;
use gale_core::nmso::{
    automaton_dot, membership_finite, nonempty_finite, nonempty_parity, parse_nmso, validate,
    Acceptance, NmsoAutomaton, NmsoTransducer,
};
use gale_core::solve::{solve_one_counter_observed, SolveOptions};
use gale_core::synth::{
    build_games, expected_verdict, interactive_play, synthesize, verdict_name, verify_artifact,
    SynthesisArtifact,
};
use gale_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::Flags;

pub const PASS: u8 = 0;
pub const FAILS: u8 = 1;
pub const CAP: u8 = 2;
pub const INPUT: u8 = 3;

/// Marks errors caused by unreadable or malformed input files.
#[derive(Debug)]
struct InputFailure(String);

impl fmt::Display for InputFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<InputFailure>().is_some() {
        return INPUT;
    }
    for cause in e.chain() {
        if let Some(g) = cause.downcast_ref::<Error>() {
            return match g {
                Error::ResourceCap(_) | Error::IterationCap { .. } | Error::Interrupted { .. } => {
                    CAP
                }
                Error::Syntax { .. } | Error::Io(_) | Error::Artifact(_) => INPUT,
                _ => FAILS,
            };
        }
        if cause.is::<io::Error>() || cause.is::<serde_json::Error>() {
            return INPUT;
        }
    }
    FAILS
}

static INTERRUPTED: AtomicBool = AtomicBool::new(false);

fn watch_interrupts() {
    static INSTALL: Once = Once::new();
    INSTALL.call_once(|| {
        // a second handler cannot be installed; running without one is fine
        let _ = ctrlc::set_handler(|| INTERRUPTED.store(true, Ordering::SeqCst));
    });
}

fn progress(round: usize, refuted: usize) -> bool {
    eprintln!("deepening round {round} ({refuted} candidates refuted so far)");
    !INTERRUPTED.load(Ordering::SeqCst)
}

fn load(path: &Path) -> Result<NmsoAutomaton> {
    let src = fs::read_to_string(path)
        .with_context(|| InputFailure(format!("cannot read {}", path.display())))?;
    parse_nmso(&src).with_context(|| InputFailure(format!("cannot load {}", path.display())))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .with_context(|| InputFailure(format!("cannot read {}", path.display())))?;
    serde_json::from_str(&text)
        .with_context(|| InputFailure(format!("malformed JSON in {}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn solve_options(f: &Flags) -> SolveOptions {
    SolveOptions {
        max_deepening: f.max_deepening as usize,
        max_iterations: f.max_iterations as usize,
        ..SolveOptions::default()
    }
}

/// Where an interrupted run can be picked up again.
#[derive(Debug, Serialize, Deserialize)]
struct PartialState {
    command: String,
    input: PathBuf,
    next_round: usize,
    max_deepening: u64,
    max_iterations: u64,
}

fn resumed(command: &str, input: &Path, resume: Option<&Path>, f: &Flags) -> Result<SolveOptions> {
    let mut opts = solve_options(f);
    if let Some(path) = resume {
        let p: PartialState = read_json(path)?;
        if p.command != command || p.input != input {
            bail!(InputFailure(format!(
                "{} records `{}` on {}",
                path.display(),
                p.command,
                p.input.display()
            )));
        }
        opts.first_round = p.next_round;
        eprintln!("resuming at deepening round {}", p.next_round);
    }
    Ok(opts)
}

/// Writes the partial-state file for an interrupted run and returns its exit
/// code, or passes other errors on.
fn on_interrupt(e: Error, command: &str, input: &Path, dir: &Path, f: &Flags) -> Result<u8> {
    let Error::Interrupted { next_round } = e else {
        return Err(e.into());
    };
    let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("gale");
    let path = dir.join(format!("{stem}.partial.json"));
    let state = PartialState {
        command: command.into(),
        input: input.to_path_buf(),
        next_round,
        max_deepening: f.max_deepening,
        max_iterations: f.max_iterations,
    };
    write_file(&path, &to_json(&state)?)?;
    eprintln!("interrupted; resume with --resume {}", path.display());
    Ok(CAP)
}

pub fn check(input: &Path, f: &Flags) -> Result<u8> {
    let a = load(input)?;
    let report = validate(&a)?;
    for c in &report.checks {
        let status = if c.passed { "pass" } else { "FAIL" };
        match &c.detail {
            Some(d) => println!("{}: {status} ({d})", c.name),
            None => println!("{}: {status}", c.name),
        }
    }
    if let Some(json) = &f.json {
        write_file(json, &to_json(&report)?)?;
    }
    Ok(if report.passed() { PASS } else { FAILS })
}

#[derive(Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
enum Emptiness {
    Empty,
    Witness { word: Vec<u64> },
    OmegaWitness { word: AffineLassoWord },
}

pub fn empt(input: &Path, f: &Flags) -> Result<u8> {
    let a = load(input)?;
    let cap = f.max_iterations as usize;
    let result = match &a.acceptance {
        Acceptance::Final(_) => match nonempty_finite(&a, cap)? {
            Some(w) => {
                if membership_finite(&a, &w)?.is_none() {
                    bail!(Error::Inconsistent(format!(
                        "witness {w:?} is not accepted"
                    )));
                }
                let text: Vec<String> = w.iter().map(u64::to_string).collect();
                println!("witness: [{}] (accepted on replay)", text.join(" "));
                Emptiness::Witness { word: w }
            }
            None => {
                println!("EMPTY");
                Emptiness::Empty
            }
        },
        Acceptance::Colors(_) => match nonempty_parity(&a, cap)? {
            Some(w) => {
                println!("witness: {} (accepting run certified)", w.word);
                Emptiness::OmegaWitness { word: w.word }
            }
            None => {
                println!("EMPTY");
                Emptiness::Empty
            }
        },
    };
    if let Some(json) = &f.json {
        write_file(json, &to_json(&result)?)?;
    }
    Ok(PASS)
}

pub fn solve(input: &Path, resume: Option<&Path>, f: &Flags) -> Result<u8> {
    let a = load(input)?;
    let opts = resumed("solve", input, resume, f)?;
    let games = build_games(&a)?;
    let h = &games.counter;
    if let Some(dot) = &f.dot {
        write_file(dot, &h.to_dot(f.max_counter))?;
    }
    watch_interrupts();
    eprintln!(
        "solving the game of `{}` ({} control states)",
        a.name,
        h.num_states()
    );
    let report = match solve_one_counter_observed(h, (h.initial, 0), &opts, progress) {
        Ok(r) => r,
        Err(e) => return on_interrupt(e, "solve", input, Path::new("."), f),
    };
    let json = to_json(&report)?;
    print!("{json}");
    if let Some(path) = &f.json {
        write_file(path, &json)?;
    }
    Ok(PASS)
}

/// Fixed adversaries plus two eventually periodic ones drawn from `seed`.
pub fn adversaries(seed: u64) -> Vec<AffineLassoWord> {
    let mut out = vec![
        AffineLassoWord::constant(0),
        AffineLassoWord::constant(7),
        AffineLassoWord::periodic(vec![], vec![1, 2, 3]),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..2 {
        let prefix = (0..rng.gen_range(0..3))
            .map(|_| rng.gen_range(0..10))
            .collect();
        let cycle = (0..rng.gen_range(1..4))
            .map(|_| rng.gen_range(0..10))
            .collect();
        out.push(AffineLassoWord::periodic(prefix, cycle));
    }
    out
}

pub fn synth(input: &Path, out: &Path, resume: Option<&Path>, f: &Flags) -> Result<u8> {
    let a = load(input)?;
    let opts = resumed("synth", input, resume, f)?;
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    watch_interrupts();
    eprintln!("synthesizing for `{}`", a.name);
    let art = match synthesize(
        &a,
        &opts,
        &adversaries(f.seed),
        f.horizon as usize,
        progress,
    ) {
        Ok(art) => art,
        Err(e) => return on_interrupt(e, "synth", input, out, f),
    };
    let base = out.join(&a.name);
    let artifact = base.with_extension("synth.json");
    write_file(&artifact, &to_json(&art)?)?;
    write_file(
        &base.with_extension("transducer.json"),
        &to_json(&art.transducer)?,
    )?;
    write_file(
        &base.with_extension("strategy.json"),
        &to_json(&art.strategy)?,
    )?;
    if let Some(json) = &f.json {
        write_file(json, &to_json(&art)?)?;
    }
    if let Some(dot) = &f.dot {
        write_file(dot, &automaton_dot(&a))?;
    }
    let s = &art.report.strategy;
    println!("winner: {}", art.winner);
    println!(
        "strategy: threshold {}, period {} ({})",
        s.threshold, s.period, art.report.certificate
    );
    println!("transducer: {} states", art.transducer.states.len());
    let want = expected_verdict(art.winner);
    let mut ok = true;
    for p in &art.plays {
        ok &= p.transcript.verdict == want;
        println!(
            "against {}: {}",
            p.adversary,
            verdict_name(p.transcript.verdict)
        );
    }
    println!("artifact: {}", artifact.display());
    Ok(if ok { PASS } else { FAILS })
}

pub fn verify(path: &Path, f: &Flags) -> Result<u8> {
    let art: SynthesisArtifact = read_json(path)?;
    let checks = verify_artifact(&art, &solve_options(f))?;
    for c in &checks {
        println!(
            "{}: {} ({})",
            c.name,
            if c.passed { "pass" } else { "FAIL" },
            c.detail
        );
    }
    if let Some(json) = &f.json {
        write_file(json, &to_json(&checks)?)?;
    }
    Ok(if checks.iter().all(|c| c.passed) {
        PASS
    } else {
        FAILS
    })
}

pub fn play(input: &Path, artifact: Option<&Path>, f: &Flags) -> Result<u8> {
    let a = load(input)?;
    let (winner, c): (_, NmsoTransducer) = match artifact {
        Some(path) => {
            let art: SynthesisArtifact = read_json(path)?;
            (art.winner, art.transducer)
        }
        None => {
            watch_interrupts();
            let art = synthesize(&a, &solve_options(f), &[], 0, progress)?;
            (art.winner, art.transducer)
        }
    };
    println!(
        "you play {}, the engine plays {}; commands: :state, :save FILE, :quit",
        winner.opponent(),
        winner
    );
    let stdin = io::stdin();
    let rounds = interactive_play(&a, &c, stdin.lock(), io::stdout().lock())?;
    println!();
    if let Some(json) = &f.json {
        write_file(json, &to_json(&rounds)?)?;
    }
    io::stdout().flush()?;
    Ok(PASS)
}

pub fn export(input: &Path, f: &Flags) -> Result<u8> {
    let a = load(input)?;
    let games = build_games(&a).ok();
    if f.dot.is_none() && f.json.is_none() {
        print!("{}", automaton_dot(&a));
        return Ok(PASS);
    }
    if let Some(dot) = &f.dot {
        write_file(dot, &automaton_dot(&a))?;
        if let Some(g) = &games {
            write_file(
                &dot.with_extension("game.dot"),
                &g.counter.to_dot(f.max_counter),
            )?;
        }
    }
    if let Some(json) = &f.json {
        let value = serde_json::json!({
            "automaton": a,
            "game": games.as_ref().map(|g| &g.graph),
        });
        write_file(json, &to_json(&value)?)?;
    }
    Ok(PASS)
}
