//! End-to-end acceptance checks. Prints one line per criterion and fails if
//! any criterion fails or runs past its time limit.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode, Output};
use std::time::{Duration, Instant};

use gale_core::formula::eval::numbers;
use gale_core::formula::{compile, evaluate, parse_formula};
use gale_core::game::pushdown::check_micro_steps;
use gale_core::game::uvw::rules_between;
use gale_core::game::{build_game_graph, build_pushdown, extract_uvw, Player};
use gale_core::nmso::{
    certify_run, examples, membership_finite, nonempty_parity, parse_nmso, NmsoAutomaton,
};
use gale_core::solve::{
    bmc_check, replay_refutation, solve_one_counter, verify_regular_strategy, BmcBounds,
    BmcVerdict, FiniteParityGame, SolveOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

/// Name, time limit in seconds and check.
type Criterion = (&'static str, u64, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn model_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../core/models/{name}.nmso"))
}

fn model(name: &str) -> NmsoAutomaton {
    parse_nmso(&std::fs::read_to_string(model_path(name)).unwrap()).unwrap()
}

fn gale(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gale"))
        .args(args)
        .output()
        .expect("gale runs")
}

fn text(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Compiled automata against bounded evaluation on every assignment below 8.
/// Every witness of the corpus lies below the evaluation bound.
fn logic_oracle() -> Outcome {
    let corpus = [
        "(x = 0) & (y = z)",
        "(z = succ(x)) & (y = z)",
        "!(x = 0) & y = 0",
        "!(z = succ(x)) & y = 0",
        "x < z & y = z",
        "!(x < z) & y = x",
        "y = succ(succ(x))",
        "x < y & y < z",
        "x = y | y = z",
        "!(x = y) -> z = 0",
        "ex1 w. x < w & w < y",
        "all1 w. w < x -> w < z",
        "exu w. succ(w) = x & y = z",
        "x < 3 & z = 5",
        "succ(x) < succ(succ(z))",
        "ex2 X. x in X & !(y in X)",
        "ex2 X. x in X & (all1 w. w in X & w < z -> succ(w) in X) & !(z in X)",
        "all2 X. (x in X & (all1 w. w in X & w < y -> succ(w) in X)) -> (x < y -> y in X)",
        "ex1 w. w = succ(x) & w = y",
        "!(ex1 w. x < w & w < z) & x < z",
        "y = z & z = x",
        "(x = 7) | (z = 0 & y = 1)",
    ];
    let vars = ["x", "y", "z"];
    let mut checked = 0;
    for src in corpus {
        let f = parse_formula(src).map_err(|e| format!("{src}: {e}"))?;
        let a = compile(&f, &vars).map_err(|e| format!("{src}: {e}"))?;
        for x in 0..8 {
            for y in 0..8 {
                for z in 0..8 {
                    let m = numbers(&[("x", x), ("y", y), ("z", z)]);
                    let got = a.accepts(&m).map_err(|e| e.to_string())?;
                    let want = evaluate(&f, &m, 8).map_err(|e| e.to_string())?;
                    ensure(got == want, || format!("{src} at x={x} y={y} z={z}"))?;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{} formulas, {checked} assignments", corpus.len()))
}

/// Every (p, x, z) of the completed table has exactly one successor among
/// y ≤ 16; the reported gap of the incomplete table has none.
fn determinism() -> Outcome {
    let o = gale(&["check", model_path("l1").to_str().unwrap()]);
    ensure(o.status.code() == Some(0), || format!("l1: {}", text(&o)))?;
    let a = model("l1");
    for p in 0..a.num_states() {
        for x in 0..8 {
            for z in 0..8 {
                let mut succ = 0;
                for ((from, _), t) in &a.transitions {
                    if *from != p {
                        continue;
                    }
                    let f = parse_formula(t.formula.as_deref().unwrap()).unwrap();
                    for y in 0..=16 {
                        succ += evaluate(&f, &numbers(&[("x", x), ("y", y), ("z", z)]), 16).unwrap()
                            as usize;
                    }
                }
                ensure(succ == 1, || {
                    format!("l1 at ({p}, {x}, {z}) has {succ} successors")
                })?;
            }
        }
    }
    let o = gale(&["check", model_path("l1_incomplete").to_str().unwrap()]);
    ensure(o.status.code() == Some(1), || {
        "incomplete table passed".into()
    })?;
    let out = text(&o);
    let (p, x, z) = parse_gap(&out).ok_or_else(|| format!("no counterexample in {out}"))?;
    let b = model("l1_incomplete");
    let p = b.state_index(&p).map_err(|e| e.to_string())?;
    for ((from, _), t) in &b.transitions {
        if *from != p {
            continue;
        }
        let f = parse_formula(t.formula.as_deref().unwrap()).unwrap();
        for y in 0..=16 {
            let hit = evaluate(&f, &numbers(&[("x", x), ("y", y), ("z", z)]), 16).unwrap();
            ensure(!hit, || format!("reported gap has successor y = {y}"))?;
        }
    }
    Ok(format!("gap at ({}, {x}, {z}) confirmed", b.states[p]))
}

/// Reads `state P, x = X, z = Z` from check output.
fn parse_gap(out: &str) -> Option<(String, u64, u64)> {
    let rest = &out[out.find("state ")? + 6..];
    let (p, rest) = rest.split_once(", x = ")?;
    let (x, rest) = rest.split_once(", z = ")?;
    let z: String = rest.chars().take_while(char::is_ascii_digit).collect();
    Some((p.to_string(), x.parse().ok()?, z.parse().ok()?))
}

fn finite_emptiness() -> Outcome {
    let o = gale(&["empt", model_path("l1").to_str().unwrap()]);
    let out = text(&o);
    let inner = out
        .strip_prefix("witness: [")
        .and_then(|s| s.split(']').next())
        .ok_or_else(|| format!("no witness: {out}"))?;
    let word: Vec<u64> = inner
        .split_whitespace()
        .map(|t| t.parse().unwrap())
        .collect();
    ensure(
        membership_finite(&model("l1"), &word).unwrap().is_some(),
        || format!("{word:?} rejected on replay"),
    )?;
    let o = gale(&["empt", model_path("empty_finite").to_str().unwrap()]);
    ensure(text(&o).trim() == "EMPTY", || text(&o))?;
    Ok(format!("witness {word:?}; empty automaton EMPTY"))
}

fn parity_emptiness() -> Outcome {
    let a = examples::unbounded();
    let w = nonempty_parity(&a, 100_000)
        .map_err(|e| e.to_string())?
        .ok_or("unbounded reported empty")?;
    ensure(certify_run(&a, &w).map_err(|e| e.to_string())?, || {
        "witness not certified".into()
    })?;
    let o = gale(&["empt", model_path("unbounded").to_str().unwrap()]);
    ensure(text(&o).contains("certified"), || text(&o))?;
    let o = gale(&["empt", model_path("all_odd").to_str().unwrap()]);
    ensure(text(&o).trim() == "EMPTY", || text(&o))?;
    Ok(format!("witness {}; all-odd EMPTY", w.word))
}

/// Automata whose prefix game can be built.
fn game_automata() -> Vec<NmsoAutomaton> {
    examples::all()
        .into_iter()
        .filter(|a| build_game_graph(a).is_ok())
        .collect()
}

fn uvw_round_trip() -> Outcome {
    let mut edges = 0;
    let mut names = Vec::new();
    for a in game_automata() {
        let start = Instant::now();
        let g = build_game_graph(&a).unwrap();
        let rules = extract_uvw(&g).map_err(|e| e.to_string())?;
        for (&(p, q), rel) in &g.edges {
            let back = recompose(&rules_between(&rules, p, q))?;
            ensure(back.equivalent(rel), || {
                format!("{}: edge {p} -> {q}", a.name)
            })?;
            edges += 1;
        }
        ensure(start.elapsed() < Duration::from_secs(5), || {
            format!("{} took too long", a.name)
        })?;
        names.push(a.name);
    }
    Ok(format!("{edges} edges of {}", names.join(", ")))
}

fn recompose(
    rules: &[gale_core::game::UvwRule],
) -> Result<gale_core::automata::relation::UnaryRelation, String> {
    gale_core::game::recompose(rules).map_err(|e| e.to_string())
}

fn micro_steps() -> Outcome {
    let mut names = Vec::new();
    for a in game_automata() {
        let g = build_game_graph(&a).unwrap();
        let h = build_pushdown(&g, &extract_uvw(&g).unwrap()).map_err(|e| e.to_string())?;
        check_micro_steps(&g, &h, 6, 64).map_err(|e| format!("{}: {e}", a.name))?;
        names.push(a.name);
    }
    Ok(format!("counters ≤ 6 on {}", names.join(", ")))
}

fn random_finite_game(rng: &mut ChaCha8Rng) -> FiniteParityGame {
    let n = rng.gen_range(1..=6);
    let mut g = FiniteParityGame::default();
    for _ in 0..n {
        let owner = if rng.gen_bool(0.5) {
            Player::I
        } else {
            Player::II
        };
        g.add_vertex(owner, rng.gen_range(0..3));
    }
    for v in 0..n {
        for _ in 0..rng.gen_range(1..=3) {
            g.add_edge(v, rng.gen_range(0..n));
        }
    }
    g
}

/// Winners by enumerating Player II's positional strategies; each is judged
/// by searching the remaining one-player graph for a reachable cycle whose
/// largest color is odd.
fn enumerated_winners(g: &FiniteParityGame) -> Vec<Player> {
    let n = g.owners.len();
    let succ: Vec<Vec<usize>> = (0..n)
        .map(|v| {
            let mut s = g.succ[v].clone();
            s.sort_unstable();
            s.dedup();
            s
        })
        .collect();
    let mine: Vec<usize> = (0..n).filter(|&v| g.owners[v] == Player::II).collect();
    let mut wins = vec![false; n];
    let mut pick = vec![0usize; mine.len()];
    loop {
        let moves: Vec<Vec<usize>> = (0..n)
            .map(|v| match mine.iter().position(|&m| m == v) {
                Some(i) => vec![succ[v][pick[i]]],
                None => succ[v].clone(),
            })
            .collect();
        let reach = |from: usize, allowed: &dyn Fn(usize) -> bool| {
            let mut seen = vec![false; n];
            let mut stack = vec![from];
            while let Some(u) = stack.pop() {
                for &w in &moves[u] {
                    if allowed(w) && !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            seen
        };
        // odd cycles: u of odd color d lying on a cycle within colors ≤ d
        let odd_cycle: Vec<bool> = (0..n)
            .map(|u| {
                let d = g.colors[u];
                d % 2 == 1 && reach(u, &|w| g.colors[w] <= d)[u]
            })
            .collect();
        for v in 0..n {
            let mut r = reach(v, &|_| true);
            r[v] = true;
            if !(0..n).any(|u| r[u] && odd_cycle[u]) {
                wins[v] = true;
            }
        }
        let mut i = 0;
        while i < pick.len() {
            pick[i] += 1;
            if pick[i] < succ[mine[i]].len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
        if i == pick.len() {
            break;
        }
    }
    wins.into_iter()
        .map(|w| if w { Player::II } else { Player::I })
        .collect()
}

fn finite_solver() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut first, mut second) = (0, 0);
    for k in 0..200 {
        let g = random_finite_game(&mut rng);
        let sol = g.solve().map_err(|e| e.to_string())?;
        let want = enumerated_winners(&g);
        ensure(sol.winner == want, || format!("game {k}: {g:?}"))?;
        let ii = want.iter().filter(|&&p| p == Player::II).count();
        second += ii;
        first += want.len() - ii;
    }
    Ok(format!(
        "200 random games; vertices won by I: {first}, by II: {second}"
    ))
}

fn one_counter_solver() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce);
    let opts = SolveOptions::default();
    let bounds = BmcBounds {
        max_counter: 50,
        max_depth: 500,
    };
    let (mut certified, mut refutations) = (0, 0);
    for sys in 0..100 {
        let h = support::random_system(&mut rng);
        for level in [0, 1, 2, 5, 9] {
            let start = (rng.gen_range(0..h.num_states()), level);
            let rep =
                solve_one_counter(&h, start, &opts).map_err(|e| format!("system {sys}: {e}"))?;
            let v = verify_regular_strategy(&h, &rep.strategy, start, opts.max_iterations)
                .map_err(|e| e.to_string())?;
            ensure(v.is_winning() && rep.strategy.player == rep.winner, || {
                format!("system {sys} from {start:?}: strategy not certified")
            })?;
            certified += 1;
            for r in &rep.rejected {
                ensure(
                    replay_refutation(&h, &r.strategy, start, &r.refutation),
                    || format!("system {sys}: refutation of {} does not replay", r.source),
                )?;
                refutations += 1;
            }
            ensure(
                bmc_check(&h, &rep.strategy, start, bounds) == BmcVerdict::NoCounterexample,
                || format!("system {sys} from {start:?}: bounded search contradicts"),
            )?;
        }
    }
    Ok(format!(
        "{certified} strategies certified, {refutations} refutations replayed"
    ))
}

fn plays(artifact: &Path) -> Result<(String, Vec<String>), String> {
    let text = std::fs::read_to_string(artifact).map_err(|e| e.to_string())?;
    let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let verdicts = v["plays"]
        .as_array()
        .ok_or("no plays")?
        .iter()
        .map(|p| {
            p["transcript"]["verdict"]
                .as_str()
                .unwrap_or("unknown")
                .to_string()
        })
        .collect();
    Ok((v["winner"].as_str().unwrap_or("").to_string(), verdicts))
}

fn end_to_end() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().to_str().unwrap();
    let mut summary = Vec::new();
    for (name, winner, verdict) in [
        ("unbounded", "II", "accept_certified"),
        ("eventually_zero", "I", "reject_certified"),
    ] {
        let o = gale(&["solve", model_path(name).to_str().unwrap()]);
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).map_err(|e| e.to_string())?;
        ensure(v["winner"] == winner, || {
            format!("{name}: solve says {}", v["winner"])
        })?;
        let o = gale(&["synth", model_path(name).to_str().unwrap(), "--out", out]);
        ensure(o.status.code() == Some(0), || {
            format!("{name}: {}", text(&o))
        })?;
        let (w, verdicts) = plays(&dir.path().join(format!("{name}.synth.json")))?;
        ensure(w == winner, || format!("{name}: artifact winner {w}"))?;
        ensure(
            verdicts.len() >= 3 && verdicts.iter().all(|v| v == verdict),
            || format!("{name}: verdicts {verdicts:?}"),
        )?;
        summary.push(format!("{name}: {winner}, {} × {verdict}", verdicts.len()));
    }
    Ok(summary.join("; "))
}

fn artifact_integrity() -> Outcome {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let names: Vec<String> = game_automata()
        .into_iter()
        .filter(|a| a.deterministic)
        .map(|a| a.name)
        .collect();
    for name in &names {
        for d in &dirs {
            let o = gale(&[
                "--seed",
                "11",
                "synth",
                model_path(name).to_str().unwrap(),
                "--out",
                d.path().to_str().unwrap(),
            ]);
            ensure(o.status.code() == Some(0), || {
                format!("{name}: synth failed: {}", text(&o))
            })?;
        }
        let art = dirs[0].path().join(format!("{name}.synth.json"));
        let o = gale(&["verify", art.to_str().unwrap()]);
        ensure(o.status.code() == Some(0), || {
            format!("{name}: {}", text(&o))
        })?;
        let bytes = |d: &tempfile::TempDir| {
            std::fs::read(d.path().join(format!("{name}.synth.json"))).unwrap()
        };
        ensure(bytes(&dirs[0]) == bytes(&dirs[1]), || {
            format!("{name}: artifacts differ")
        })?;
    }
    Ok(format!(
        "{} artifacts verified and reproducible",
        names.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("logic oracle", 10, logic_oracle),
        ("determinism decision", 1, determinism),
        ("finite non-emptiness", 2, finite_emptiness),
        ("parity non-emptiness", 30, parity_emptiness),
        ("prefix-rule round trip", 60, uvw_round_trip),
        ("micro-step simulation", 60, micro_steps),
        ("finite solver oracle", 60, finite_solver),
        ("one-counter solver consistency", 600, one_counter_solver),
        ("end-to-end synthesis", 300, end_to_end),
        ("artifact integrity", 60, artifact_integrity),
    ];
    // optional criterion numbers select a subset
    let only: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.into_iter().enumerate() {
        if !only.is_empty() && !only.contains(&(i + 1)) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        let late = secs > limit as f64;
        let (status, detail) = match (&outcome, late) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("{d}; over the {limit} s limit")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!(
            "criterion {:>2} {status} {name} ({secs:.2} s, limit {limit} s): {detail}",
            i + 1
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
