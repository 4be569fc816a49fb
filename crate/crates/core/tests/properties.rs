mod common;

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{names, subsets, truth_table, Direct};
use symdel::boolfun::{BoolFn, Engine, VarId};
use symdel::bridge::{
    check_morphism, random_event, random_scene, Bounds, ModelInstance, Morphism, SceneInstance,
};
use symdel::explicit::{product_update, structure_of_model, Evaluator};
use symdel::language::{compile, parse, Formula};
use symdel::symbolic::{BeliefStructure, Translator, Transformer};

const ATOMS: [&str; 6] = ["p", "q", "r", "s", "t", "u"];

fn boolean(vars: usize) -> BoxedStrategy<Formula> {
    let atoms: Vec<&'static str> = ATOMS[..vars].to_vec();
    let leaf = prop_oneof![
        1 => Just(Formula::Top),
        1 => Just(Formula::Bot),
        6 => prop::sample::select(atoms).prop_map(Formula::atom),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::neg),
            prop::collection::vec(inner.clone(), 2..=3).prop_map(Formula::And),
            prop::collection::vec(inner.clone(), 2..=3).prop_map(Formula::Or),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::iff(a, b)),
        ]
    })
    .boxed()
}

fn epistemic() -> BoxedStrategy<Formula> {
    let leaf = prop_oneof![
        Just(Formula::Top),
        Just(Formula::Bot),
        prop::sample::select(vec!["p", "q'", "r°", "s°'", "t"]).prop_map(Formula::atom),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::neg),
            (prop::sample::select(vec!["a", "Sally"]), inner.clone())
                .prop_map(|(i, g)| Formula::believes(i, g)),
            prop::collection::vec(inner.clone(), 2..=3).prop_map(Formula::And),
            prop::collection::vec(inner.clone(), 2..=3).prop_map(Formula::Or),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::iff(a, b)),
        ]
    })
    .boxed()
}

/// A formula over up to six variables together with a second one that is
/// either unrelated or an equivalent rewrite.
fn pair() -> impl Strategy<Value = (usize, Formula, Formula)> {
    (1usize..=6).prop_flat_map(|n| {
        let rewritten = boolean(n).prop_map(|a| {
            let b = Formula::neg(Formula::neg(match &a {
                Formula::And(gs) => Formula::neg(Formula::Or(gs.iter().cloned().map(Formula::neg).collect())),
                other => Formula::Or(vec![other.clone(), Formula::Bot]),
            }));
            (a, b)
        });
        let unrelated = (boolean(n), boolean(n));
        (Just(n), prop_oneof![rewritten, unrelated]).prop_map(|(n, (a, b))| (n, a, b))
    })
}

struct Env {
    engine: Engine,
    vars: Vec<VarId>,
    names: Vec<String>,
    env: BTreeMap<String, VarId>,
}

fn env(n: usize) -> Env {
    let engine = Engine::new();
    let names = names(&ATOMS[..n]);
    let vars: Vec<VarId> = names.iter().map(|p| engine.new_var(p)).collect();
    let env = names.iter().cloned().zip(vars.iter().copied()).collect();
    Env {
        engine,
        vars,
        names,
        env,
    }
}

impl Env {
    fn compile(&self, f: &Formula) -> BoolFn {
        compile(f, &self.engine, &self.env).unwrap()
    }

    fn var(&self, p: &str) -> VarId {
        self.env[p]
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn canonicity((n, a, b) in pair()) {
        let e = env(n);
        let same_table = truth_table(&a, &e.names) == truth_table(&b, &e.names);
        prop_assert_eq!(e.compile(&a) == e.compile(&b), same_table);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn forall_is_the_expansion(a in boolean(5), k in 0usize..5) {
        let e = env(5);
        let fa = e.compile(&a);
        let v = e.vars[k];
        let expansion = fa.compose(v, &e.engine.constant(true)).and(&fa.compose(v, &e.engine.constant(false)));
        prop_assert_eq!(fa.forall(&[v]), expansion);
        let dual = fa.compose(v, &e.engine.constant(true)).or(&fa.compose(v, &e.engine.constant(false)));
        prop_assert_eq!(fa.exists(&[v]), dual);
    }

    #[test]
    fn rename_is_a_bijection(a in boolean(4), perm in Just((0..4).collect::<Vec<usize>>()).prop_shuffle()) {
        let e = env(4);
        let fresh: Vec<VarId> = (0..4).map(|k| e.engine.new_var(&format!("z{k}"))).collect();
        let fa = e.compile(&a);
        let m: BTreeMap<VarId, VarId> = (0..4).map(|k| (e.vars[k], fresh[perm[k]])).collect();
        let inv: BTreeMap<VarId, VarId> = m.iter().map(|(x, y)| (*y, *x)).collect();
        let there = fa.rename(&m).unwrap();
        prop_assert_eq!(there.rename(&inv).unwrap(), fa.clone());
        let swap: BTreeMap<VarId, VarId> = (0..4).map(|k| (e.vars[k], e.vars[perm[k]])).collect();
        let back: BTreeMap<VarId, VarId> = swap.iter().map(|(x, y)| (*y, *x)).collect();
        prop_assert_eq!(fa.rename(&swap).unwrap().rename(&back).unwrap(), fa);
    }

    #[test]
    fn sat_assignments_enumerate_models(a in boolean(5)) {
        let e = env(5);
        let fa = e.compile(&a);
        let sats = fa.sat_assignments(&e.vars);
        let expected: Vec<BTreeSet<VarId>> = subsets(&e.names)
            .into_iter()
            .filter(|s| a.eval_bool(s).unwrap())
            .map(|s| s.iter().map(|p| e.var(p)).collect())
            .collect();
        prop_assert!(sats.iter().all(|s| fa.holds(s)));
        prop_assert_eq!(sats, expected);
    }

    #[test]
    fn parse_print_round_trip(a in epistemic()) {
        prop_assert_eq!(parse(&a.to_string()).unwrap(), a);
    }

    #[test]
    fn substitution_is_composition(a in boolean(4), b in boolean(4), k in 0usize..4) {
        let e = env(4);
        let p = ATOMS[k];
        let sub = a.substitute(&BTreeMap::from([(p.to_string(), b.clone())]));
        prop_assert_eq!(e.compile(&sub), e.compile(&a).compose(e.var(p), &e.compile(&b)));
    }

    #[test]
    fn parallel_swap_twice_is_identity(a in epistemic()) {
        let swap = BTreeMap::from([
            ("p".to_string(), Formula::atom("t")),
            ("t".to_string(), Formula::atom("p")),
        ]);
        prop_assert_eq!(a.substitute(&swap).substitute(&swap), a);
    }

    #[test]
    fn prime_is_injective_and_commutes(a in epistemic(), b in epistemic(), c in boolean(3)) {
        prop_assert_eq!(a.prime() == b.prime(), a == b);
        let s = a.substitute(&BTreeMap::from([("p".to_string(), c.clone())])).prime();
        let t = a.prime().substitute(&BTreeMap::from([("p'".to_string(), c.prime())]));
        prop_assert_eq!(s, t);
    }

    #[test]
    fn simplify_preserves_meaning(a in boolean(4)) {
        let names = names(&ATOMS[..4]);
        prop_assert_eq!(truth_table(&a.simplify(), &names), truth_table(&a, &names));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn translation_matches_direct_semantics(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scene = random_scene(&mut rng, &Bounds::default(), &Engine::new());
        let f = scene.structure();
        let direct = Direct::new(f);
        prop_assert_eq!(&direct.states, &f.states());
        let mut tr = Translator::new(f);
        for phi in symdel::bridge::formula_family(&f.vocabulary(), f.agents(), 2) {
            let b = tr.translate(&phi).unwrap();
            let got: Vec<bool> = direct.states.iter().map(|s| b.holds(&f.assignment(s).unwrap())).collect();
            prop_assert_eq!(got, direct.extension(&phi), "{}", phi);
        }
    }

    #[test]
    fn transform_without_change_conjoins(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scene = random_scene(&mut rng, &Bounds::default(), &Engine::new());
        let mut ev = random_event(&mut rng, &Bounds::default(), &scene);
        ev.transformer.changes.clear();
        let f = scene.structure();
        let r = f.transform(&ev.transformer).unwrap();
        let free = ev
            .transformer
            .add_vocab
            .iter()
            .map(|q| (q.clone(), r.var(q).unwrap()))
            .collect();
        let pre = Translator::with_free(f, free).translate(&ev.transformer.event_law).unwrap();
        prop_assert_eq!(r.law().clone(), f.law().and(&pre));
        for i in f.agents() {
            let added = match ev.transformer.observations.get(i) {
                Some(o) => r.compile(o).unwrap(),
                None => r.engine().constant(true),
            };
            prop_assert_eq!(r.observation(i).unwrap().clone(), f.observation(i).unwrap().and(&added));
        }
    }

    #[test]
    fn successor_state_is_a_state(seed in any::<u64>()) {
        let inst = SceneInstance::generate(seed, &Bounds::default());
        let next = inst.scene.apply(&inst.event).unwrap();
        prop_assert!(next.structure().states().contains(next.state()));
    }

    #[test]
    fn minimize_keeping_everything_is_identity(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scene = random_scene(&mut rng, &Bounds::default(), &Engine::new());
        let f = scene.structure();
        let all: BTreeSet<String> = f.vocabulary().into_iter().collect();
        prop_assert_eq!(&f.minimize(&all).unwrap(), f);
    }

    #[test]
    fn product_world_count(seed in any::<u64>()) {
        let inst = ModelInstance::generate(seed, &Bounds::default());
        let m = inst.model.model();
        let p = product_update(m, &inst.action).unwrap();
        let mut eval = Evaluator::new(m);
        let expected: usize = inst
            .action
            .events()
            .iter()
            .map(|e| eval.extension(&e.pre).unwrap().into_iter().filter(|b| *b).count())
            .sum();
        prop_assert_eq!(p.model.len(), expected);
    }

    #[test]
    fn encoded_models_are_morphic(seed in any::<u64>()) {
        let inst = ModelInstance::generate(seed, &Bounds::default());
        let m = inst.model.model();
        let (f, g) = structure_of_model(m, &Engine::new()).unwrap();
        let g = Morphism { g };
        prop_assert_eq!(check_morphism(&f, m, m.vocabulary(), &g).unwrap(), None);
    }
}

#[test]
fn generated_events_are_mostly_executable() {
    let mut executable = 0;
    for seed in 0..1000 {
        let inst = SceneInstance::generate(seed, &Bounds::default());
        if inst.scene.apply(&inst.event).is_ok() {
            executable += 1;
        }
    }
    assert!(executable >= 950, "{executable} of 1000");
}

#[test]
fn event_law_of_transformers_may_be_epistemic() {
    let e = Engine::new();
    let f = BeliefStructure::new(&e, &["a"], &["p"], &Formula::Top, &BTreeMap::new()).unwrap();
    let x = Transformer {
        add_vocab: vec!["e".into()],
        event_law: parse("e -> [a] p").unwrap(),
        ..Transformer::default()
    };
    let r = f.transform(&x).unwrap();
    // nobody believes p, so e is impossible
    assert_eq!(*r.law(), r.compile(&parse("~e").unwrap()).unwrap());
}
