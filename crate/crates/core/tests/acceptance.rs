//! Acceptance suite: one line per criterion, nonzero exit if any fails.

mod common;

use std::collections::BTreeMap;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{f, obs, set, st, Direct};
use symdel::boolfun::Engine;
use symdel::bridge::{
    check_minimization, check_part_one, check_part_one_morphism, check_part_two, random_formula,
    random_scene, Bounds, DeterminedInstance, ModelInstance, SceneInstance,
};
use symdel::language::Formula;
use symdel::scenario::{RunOptions, Scenario};
use symdel::symbolic::{BeliefStructure, Scene, Transformer, Translator};

const SALLY: &str = include_str!("../../../scenarios/sally_anne.scn");

fn sally_anne() -> Result<(), String> {
    let scenario = Scenario::parse(SALLY).map_err(|e| e.to_string())?;

    // without minimization, the first two updates give the raw lines
    let raw = scenario
        .run(&Engine::new(), RunOptions::default())
        .map_err(|e| e.to_string())?;
    let expect_raw = [
        (vec!["p", "t", "t°"], "(p & ~t°) & t", st(&["p", "t"])),
        (vec!["p", "t", "t°", "p°"], "(p° & ~t°) & t & ~p", st(&["t", "p°"])),
    ];
    for (k, (vocab, law, state)) in expect_raw.iter().enumerate() {
        let sc = &raw.snapshots[k + 1].scene;
        let s = sc.structure();
        ensure(s.vocabulary() == *vocab, format!("raw step {}: vocabulary {:?}", k + 1, s.vocabulary()))?;
        ensure(*s.law() == s.compile(&f(law)).unwrap(), format!("raw step {}: law {}", k + 1, s.law_formula()))?;
        ensure(sc.state() == state, format!("raw step {}: state {:?}", k + 1, sc.state()))?;
    }

    let run = scenario
        .run(&Engine::new(), RunOptions { minimize: true })
        .map_err(|e| e.to_string())?;
    let expect = [
        ("p & t", "Top", "Top", st(&["p", "t"])),
        ("t & ~p", "Top", "Top", st(&["t"])),
        ("~p & (t <-> ~q)", "~q'", "q <-> q'", st(&["q"])),
        ("(t <-> ~q) & p", "~q'", "q <-> q'", st(&["p", "q"])),
    ];
    for (k, (law, os, oa, state)) in expect.iter().enumerate() {
        let sc = &run.snapshots[k + 1].scene;
        let s = sc.structure();
        let step = k + 1;
        ensure(*s.law() == s.compile(&f(law)).unwrap(), format!("step {step}: law {}", s.law_formula()))?;
        ensure(
            *s.observation("Sally").unwrap() == s.compile(&f(os)).unwrap(),
            format!("step {step}: Sally observes {}", s.observation_formula("Sally").unwrap()),
        )?;
        ensure(
            *s.observation("Anne").unwrap() == s.compile(&f(oa)).unwrap(),
            format!("step {step}: Anne observes {}", s.observation_formula("Anne").unwrap()),
        )?;
        ensure(sc.state() == state, format!("step {step}: state {:?}", sc.state()))?;
    }
    let last = run.last();
    ensure(last.structure().vocabulary() == ["p", "t", "q"], "final vocabulary")?;
    ensure(last.eval(&f("[Sally] t")).unwrap(), "[Sally] t should hold")?;
    ensure(!last.eval(&f("t")).unwrap(), "t should not hold")?;
    ensure(
        last.structure().bool_translate(&f("[Sally] t")).unwrap().is_true(),
        "the translation of [Sally] t should be Top",
    )?;
    ensure(run.passed(), "scenario expectations")
}

fn coin() -> Result<(), String> {
    let s = BeliefStructure::new(
        &Engine::new(),
        &["a", "b"],
        &["p"],
        &f("p"),
        &obs(&[("a", "p <-> p'"), ("b", "p <-> p'")]),
    )
    .map_err(|e| e.to_string())?;
    let x = Transformer {
        add_vocab: vec!["q".into()],
        event_law: Formula::Top,
        changes: BTreeMap::from([("p".into(), f("q"))]),
        observations: obs(&[("b", "q <-> q'")]),
    };
    let r = s.transform(&x).map_err(|e| e.to_string())?;
    ensure(r.vocabulary() == ["p", "q", "p°"], format!("vocabulary {:?}", r.vocabulary()))?;
    ensure(*r.law() == r.compile(&f("p° & (p <-> q)")).unwrap(), "transformed law")?;
    ensure(*r.observation("a").unwrap() == r.compile(&f("p° <-> p°'")).unwrap(), "transformed Ω_a")?;
    ensure(
        *r.observation("b").unwrap() == r.compile(&f("(p° <-> p°') & (q <-> q')")).unwrap(),
        "transformed Ω_b",
    )?;
    let m = r.minimize(&set(&["p", "q"])).map_err(|e| e.to_string())?;
    ensure(m.vocabulary() == ["p", "q"], "minimized vocabulary")?;
    ensure(*m.law() == m.compile(&f("p <-> q")).unwrap(), "minimized law")?;
    ensure(m.observation("a").unwrap().is_true(), "minimized Ω_a")?;
    ensure(*m.observation("b").unwrap() == m.compile(&f("q <-> q'")).unwrap(), "minimized Ω_b")
}

/// Formulas for one structure: random ones up to modal depth 3 and a few
/// forced to depth exactly 3.
fn depth_three_formulas(rng: &mut ChaCha8Rng, scene: &Scene) -> Vec<Formula> {
    let atoms = scene.structure().vocabulary();
    let agents = scene.structure().agents().to_vec();
    let mut out: Vec<Formula> = (0..24)
        .map(|_| random_formula(rng, &atoms, &agents, 3, 6))
        .collect();
    for k in 0..6 {
        let inner = random_formula(rng, &atoms, &agents, 0, 2);
        let mut g = inner;
        for d in 0..3 {
            g = Formula::believes(agents[(k + d) % agents.len()].clone(), g);
            if (k + d) % 2 == 0 {
                g = Formula::neg(g);
            }
        }
        out.push(g);
    }
    out
}

fn translation_theorem() -> Result<(), String> {
    let bounds = Bounds::default();
    let mut deepest = 0;
    for seed in 0..1000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scene = random_scene(&mut rng, &bounds, &Engine::new());
        let f = scene.structure();
        ensure(f.vocabulary().len() <= 4 && f.agents().len() <= 2, "bounds")?;
        let direct = Direct::new(f);
        let mut tr = Translator::new(f);
        for phi in depth_three_formulas(&mut rng, &scene) {
            deepest = deepest.max(phi.modal_depth());
            let b = tr.translate(&phi).map_err(|e| e.to_string())?;
            let ext = direct.extension(&phi);
            for (s, expected) in direct.states.iter().zip(ext) {
                let got = b.holds(&f.assignment(s).unwrap());
                if got != expected {
                    return Err(format!("seed {seed}: {phi} at {s:?}: translation {got}, direct {expected}"));
                }
            }
        }
    }
    ensure(deepest == 3, "no formula of modal depth 3 was generated")
}

fn over_seeds<T>(
    count: u64,
    generate: impl Fn(u64) -> T,
    check: impl Fn(&T) -> Result<(), symdel::bridge::Counterexample>,
) -> Result<(), String> {
    for seed in 0..count {
        let inst = generate(seed);
        if let Err(c) = check(&inst) {
            return Err(format!("seed {seed}: {c}"));
        }
    }
    Ok(())
}

fn part_one() -> Result<(), String> {
    over_seeds(
        500,
        |s| SceneInstance::generate(s, &Bounds::default()),
        |i| check_part_one(i, 2, None),
    )
}

fn part_two() -> Result<(), String> {
    over_seeds(
        500,
        |s| ModelInstance::generate(s, &Bounds::default()),
        |i| check_part_two(i, 2),
    )
}

fn minimization() -> Result<(), String> {
    over_seeds(
        500,
        |s| DeterminedInstance::generate(s, &Bounds::default()),
        |i| check_minimization(i, 2),
    )
}

fn morphism() -> Result<(), String> {
    over_seeds(
        500,
        |s| SceneInstance::generate(s, &Bounds::default()),
        |i| check_part_one_morphism(i, None),
    )
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

type Criterion = (&'static str, Option<Duration>, fn() -> Result<(), String>);

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("1 Sally-Anne trace", Some(Duration::from_secs(1)), sally_anne),
        ("2 coin transform and minimization", Some(Duration::from_secs(1)), coin),
        ("3 boolean translation, 1000 structures", Some(Duration::from_secs(60)), translation_theorem),
        ("4 transformer vs product update, 500", Some(Duration::from_secs(120)), part_one),
        ("5 product update vs transformer, 500", Some(Duration::from_secs(120)), part_two),
        ("6 minimization, 500", Some(Duration::from_secs(60)), minimization),
        ("7 successor-state morphism, 500", None, morphism),
    ];
    let mut failed = 0;
    for (name, limit, run) in criteria {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        let elapsed = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(()), Some(l)) if elapsed > l => Err(format!("took {elapsed:.2?}, limit {l:?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(()) => println!("PASS  {name:<42} {elapsed:>10.2?}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name:<42} {elapsed:>10.2?}  {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
