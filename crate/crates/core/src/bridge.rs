//! Translations between transformers and action models, the morphism
//! checker, random instance generators and the property suites comparing the
//! symbolic pipeline with the explicit one.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::boolfun::Engine;
use crate::explicit::{
    ceil_log2, fresh_names, model_of_structure, product_update, structure_of_model, ActionModel,
    Evaluator, ExplicitError, KripkeModel, PointedModel,
};
use crate::language::{subset_formula, Formula, LanguageError};
use crate::symbolic::{
    apply_mutated, format_state, transform_mutated, BeliefStructure, Event, Mutation, Scene, State,
    SymbolicError, Transformer, Translator,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BridgeError {
    #[error(transparent)]
    Explicit(#[from] ExplicitError),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error(transparent)]
    Language(#[from] LanguageError),
    #[error("actual event {0} is not a subset of the event vocabulary")]
    ActualOutsideEvent(String),
    #[error("observation of agent `{agent}` mentions `{atom}`, which is not an event proposition")]
    EventObservationScope { agent: String, atom: String },
    #[error("action model has no events")]
    NoEvents,
}

/// The action model of a transformer: one event per subset of `V⁺`, in the
/// order of [`Transformer::event_labels`]. Returns the model and the index of
/// the actual event.
pub fn act<S: AsRef<str>>(event: &Event, agents: &[S]) -> Result<(ActionModel, usize), BridgeError> {
    let x = &event.transformer;
    let labels = x.event_labels();
    let designated = labels
        .iter()
        .position(|l| *l == event.actual)
        .ok_or_else(|| BridgeError::ActualOutsideEvent(format_state(&event.actual)))?;

    let plus: BTreeSet<String> = x.add_vocab.iter().cloned().collect();
    let primed_plus: BTreeSet<String> = x.add_vocab.iter().map(|q| format!("{q}'")).collect();
    for (agent, obs) in &x.observations {
        if let Some(atom) = obs
            .vocabulary()
            .into_iter()
            .find(|a| !plus.contains(a) && !primed_plus.contains(a))
        {
            return Err(BridgeError::EventObservationScope {
                agent: agent.clone(),
                atom,
            });
        }
    }

    let mut action = ActionModel::new(agents);
    for label in &labels {
        let pre = x.event_law.fix(&x.add_vocab, label).simplify();
        let post = x
            .changes
            .iter()
            .map(|(p, f)| (p.clone(), f.fix(&x.add_vocab, label).simplify()))
            .collect();
        action.add_event(compact_label(label), pre, post)?;
    }
    for agent in agents {
        let agent = agent.as_ref();
        let obs = x.observations.get(agent);
        for (i, a) in labels.iter().enumerate() {
            for (j, b) in labels.iter().enumerate() {
                let related = match obs {
                    Some(f) => {
                        let mut v = a.clone();
                        v.extend(b.iter().map(|q| format!("{q}'")));
                        f.eval_bool(&v)?
                    }
                    None => true,
                };
                if related {
                    action.add_edge(agent, i, j)?;
                }
            }
        }
    }
    Ok((action, designated))
}

/// `{q,r}`: an event name without spaces.
pub fn compact_label(label: &State) -> String {
    let items: Vec<&str> = label.iter().map(String::as_str).collect();
    format!("{{{}}}", items.join(","))
}

/// Injective labeling of events by subsets of fresh propositions: event `k`
/// gets the propositions at the set bits of `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventLabeling {
    props: Vec<String>,
    labels: Vec<State>,
}

impl EventLabeling {
    /// Labels `events` events with `⌈log₂ events⌉` names `q1, q2, …` avoiding
    /// `reserved`.
    pub fn new<S: AsRef<str>>(events: usize, reserved: &[S]) -> Self {
        let props = fresh_names("q", ceil_log2(events), reserved);
        let labels = (0..events)
            .map(|k| {
                (0..props.len())
                    .filter(|b| k >> b & 1 == 1)
                    .map(|b| props[b].clone())
                    .collect()
            })
            .collect();
        EventLabeling { props, labels }
    }

    pub fn props(&self) -> &[String] {
        &self.props
    }

    pub fn label(&self, event: usize) -> &State {
        &self.labels[event]
    }

    pub fn event_of(&self, label: &State) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    fn formula(&self, event: usize) -> Formula {
        subset_formula(&self.labels[event], &self.props).expect("labels are subsets of the props")
    }
}

/// The transformer of an action model, with the labeled designated event as
/// actual event.
pub fn trf<S: AsRef<str>>(
    action: &ActionModel,
    designated: usize,
    reserved: &[S],
) -> Result<(Event, EventLabeling), BridgeError> {
    let events = action.events();
    if events.is_empty() {
        return Err(BridgeError::NoEvents);
    }
    if designated >= events.len() {
        return Err(ExplicitError::NoSuchWorld(designated).into());
    }
    let labeling = EventLabeling::new(events.len(), reserved);

    let event_law = Formula::disj(
        events
            .iter()
            .enumerate()
            .map(|(k, e)| Formula::conj([e.pre.clone(), labeling.formula(k)])),
    );
    let modified: BTreeSet<String> = events
        .iter()
        .flat_map(|e| {
            e.post
                .iter()
                .filter(|(p, f)| **f != Formula::atom(p.as_str()))
                .map(|(p, _)| p.clone())
        })
        .collect();
    let changes = modified
        .into_iter()
        .map(|p| {
            let law = Formula::disj(
                events
                    .iter()
                    .enumerate()
                    .map(|(k, e)| Formula::conj([labeling.formula(k), e.post_of(&p)])),
            );
            (p, law)
        })
        .collect();
    let mut observations = BTreeMap::new();
    for agent in action.agents() {
        let mut edges = Vec::new();
        for a in 0..events.len() {
            for b in action.successors(agent, a)? {
                edges.push(Formula::conj([labeling.formula(a), labeling.formula(*b).prime()]));
            }
        }
        observations.insert(agent.clone(), Formula::disj(edges));
    }
    let transformer = Transformer {
        add_vocab: labeling.props.clone(),
        event_law,
        changes,
        observations,
    };
    let actual = labeling.label(designated).clone();
    Ok((Event::new(transformer, actual), labeling))
}

/// A map from worlds to states; `g[w]` is the state of world `w`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Morphism {
    pub g: Vec<State>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// The structure relates the images of two worlds iff the model does not.
    Edge {
        agent: String,
        from: usize,
        to: usize,
        in_model: bool,
    },
    /// World and image disagree on a shared proposition.
    Valuation { world: usize, atom: String },
    /// A subset of the vocabulary is a state iff it is not an image.
    Image { state: State, is_state: bool },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Edge {
                agent,
                from,
                to,
                in_model,
            } => write!(
                f,
                "edge {from}->{to} for {agent} is {} the model but {} the structure",
                if *in_model { "in" } else { "not in" },
                if *in_model { "not in" } else { "in" }
            ),
            Violation::Valuation { world, atom } => {
                write!(f, "world {world} and its state disagree on `{atom}`")
            }
            Violation::Image { state, is_state } => write!(
                f,
                "{} {}",
                format_state(state),
                if *is_state {
                    "is a state but no world maps to it"
                } else {
                    "is the image of a world but not a state"
                }
            ),
        }
    }
}

/// Checks edge agreement, valuation agreement on `shared`, and that the
/// states of `f` are exactly the images of `g`. Returns the first violation.
pub fn check_morphism(
    f: &BeliefStructure,
    m: &KripkeModel,
    shared: &[String],
    g: &Morphism,
) -> Result<Option<Violation>, BridgeError> {
    if g.g.len() != m.len() {
        return Err(ExplicitError::NoSuchWorld(g.g.len().min(m.len())).into());
    }
    for agent in f.agents() {
        for (w1, s1) in g.g.iter().enumerate() {
            for (w2, s2) in g.g.iter().enumerate() {
                let in_model = m.has_edge(agent, w1, w2)?;
                if f.relates(agent, s1, s2)? != in_model {
                    return Ok(Some(Violation::Edge {
                        agent: agent.clone(),
                        from: w1,
                        to: w2,
                        in_model,
                    }));
                }
            }
        }
    }
    for (w, world) in m.worlds().iter().enumerate() {
        for p in shared {
            if world.valuation.contains(p) != g.g[w].contains(p) {
                return Ok(Some(Violation::Valuation {
                    world: w,
                    atom: p.clone(),
                }));
            }
        }
    }
    let image: BTreeSet<&State> = g.g.iter().collect();
    let vocabulary = f.vocabulary();
    for k in 0..1usize << vocabulary.len() {
        let s: State = (0..vocabulary.len())
            .filter(|b| k >> b & 1 == 1)
            .map(|b| vocabulary[b].clone())
            .collect();
        let is_state = f.is_state(&s)?;
        if is_state != image.contains(&s) {
            return Ok(Some(Violation::Image { state: s, is_state }));
        }
    }
    Ok(None)
}

/// Size limits for generated instances.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bounds {
    pub vars: usize,
    pub event_vars: usize,
    pub modified: usize,
    pub agents: usize,
    pub worlds: usize,
    pub events: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            vars: 4,
            event_vars: 2,
            modified: 2,
            agents: 2,
            worlds: 6,
            events: 3,
        }
    }
}

const ATOMS: [&str; 8] = ["p", "q", "r", "s", "t", "u", "v", "w"];
const AGENTS: [&str; 4] = ["a", "b", "c", "d"];

fn names(pool: &[&str], n: usize, prefix: &str) -> Vec<String> {
    (0..n)
        .map(|k| match pool.get(k) {
            Some(s) => s.to_string(),
            None => format!("{prefix}{k}"),
        })
        .collect()
}

/// A random boolean formula over `atoms` of height at most `height`.
pub fn random_boolean<R: Rng>(rng: &mut R, atoms: &[String], height: usize) -> Formula {
    random_formula(rng, atoms, &[], 0, height)
}

/// A random formula over `atoms` with modal depth at most `depth` and
/// height at most `height`.
pub fn random_formula<R: Rng, S: AsRef<str>>(
    rng: &mut R,
    atoms: &[S],
    agents: &[S],
    depth: usize,
    height: usize,
) -> Formula {
    let leaf = |rng: &mut R| {
        if atoms.is_empty() || rng.gen_ratio(1, 12) {
            if rng.gen_bool(0.5) {
                Formula::Top
            } else {
                Formula::Bot
            }
        } else {
            Formula::atom(atoms.choose(rng).unwrap().as_ref())
        }
    };
    if height == 0 {
        return leaf(rng);
    }
    let modal = depth > 0 && !agents.is_empty();
    let choice = rng.gen_range(0..if modal { 9 } else { 7 });
    let sub = |rng: &mut R, d: usize| random_formula(rng, atoms, agents, d, height - 1);
    match choice {
        0 | 1 => leaf(rng),
        2 => Formula::neg(sub(rng, depth)),
        3 => Formula::And(vec![sub(rng, depth), sub(rng, depth)]),
        4 => Formula::Or(vec![sub(rng, depth), sub(rng, depth)]),
        5 => Formula::implies(sub(rng, depth), sub(rng, depth)),
        6 => Formula::iff(sub(rng, depth), sub(rng, depth)),
        _ => {
            let agent = agents.choose(rng).unwrap().as_ref().to_string();
            Formula::believes(agent, sub(rng, depth - 1))
        }
    }
}

/// Small formulas up to modal depth `depth`: constants, literals and
/// pairwise conjunctions and disjunctions of atoms, closed `depth` times
/// under `[i] phi` and `~[i] phi`. Ordered roughly by size, without duplicates.
pub fn formula_family<S: AsRef<str>>(atoms: &[S], agents: &[S], depth: usize) -> Vec<Formula> {
    let mut out = vec![Formula::Top, Formula::Bot];
    for p in atoms {
        out.push(Formula::atom(p.as_ref()));
        out.push(Formula::neg(Formula::atom(p.as_ref())));
    }
    for (k, p) in atoms.iter().enumerate() {
        for q in &atoms[k + 1..] {
            let (p, q) = (Formula::atom(p.as_ref()), Formula::atom(q.as_ref()));
            out.push(Formula::And(vec![p.clone(), q.clone()]));
            out.push(Formula::Or(vec![p, q]));
        }
    }
    let mut seen: BTreeSet<Formula> = out.iter().cloned().collect();
    for _ in 0..depth {
        let mut next = Vec::new();
        for f in &out {
            for i in agents {
                let b = Formula::believes(i.as_ref(), f.clone());
                for g in [b.clone(), Formula::neg(b)] {
                    if seen.insert(g.clone()) {
                        next.push(g);
                    }
                }
            }
        }
        out.extend(next);
    }
    out
}

fn random_subset<R: Rng>(rng: &mut R, items: &[String]) -> State {
    items.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect()
}

fn doubled(atoms: &[String]) -> Vec<String> {
    atoms
        .iter()
        .flat_map(|p| [p.clone(), format!("{p}'")])
        .collect()
}

/// A random structure with a random actual state; the law is satisfiable.
pub fn random_scene<R: Rng>(rng: &mut R, bounds: &Bounds, engine: &Engine) -> Scene {
    let agents = names(&AGENTS, rng.gen_range(1..=bounds.agents.max(1)), "i");
    let vocab = names(&ATOMS, rng.gen_range(1..=bounds.vars.max(1)), "x");
    let law = random_law(rng, &vocab);
    let observations = random_observations(rng, &agents, &vocab);
    let f = BeliefStructure::new(engine, &agents, &vocab, &law, &observations)
        .expect("generated structures are well formed");
    let states = f.states();
    let state = states.choose(rng).expect("law is satisfiable").clone();
    Scene::new(f, state).expect("state satisfies the law")
}

fn random_law<R: Rng>(rng: &mut R, vocab: &[String]) -> Formula {
    let law = random_boolean(rng, vocab, 3);
    let satisfiable = (0..1usize << vocab.len()).any(|k| {
        let s: State = (0..vocab.len())
            .filter(|b| k >> b & 1 == 1)
            .map(|b| vocab[b].clone())
            .collect();
        law.eval_bool(&s).expect("boolean")
    });
    if satisfiable {
        law
    } else {
        Formula::neg(law)
    }
}

fn random_observations<R: Rng>(
    rng: &mut R,
    agents: &[String],
    vocab: &[String],
) -> BTreeMap<String, Formula> {
    agents
        .iter()
        .map(|i| {
            let obs = if rng.gen_ratio(1, 3) {
                Formula::conj(
                    random_subset(rng, vocab)
                        .into_iter()
                        .map(|p| Formula::iff(Formula::atom(p.clone()), Formula::atom(format!("{p}'")))),
                )
            } else {
                random_boolean(rng, &doubled(vocab), 3)
            };
            (i.clone(), obs)
        })
        .collect()
}

/// A random event for `scene`. Draws are retried until the event is
/// executable; the last resort drops the event law, which always is.
pub fn random_event<R: Rng>(rng: &mut R, bounds: &Bounds, scene: &Scene) -> Event {
    let f = scene.structure();
    let vocab = f.vocabulary();
    let agents = f.agents().to_vec();
    let mut last = None;
    for _ in 0..20 {
        let ev = draw_event(rng, bounds, &vocab, &agents);
        if scene.apply(&ev).is_ok() {
            return ev;
        }
        last = Some(ev);
    }
    let mut ev = last.expect("at least one draw");
    ev.transformer.event_law = Formula::Top;
    ev
}

fn draw_event<R: Rng>(rng: &mut R, bounds: &Bounds, vocab: &[String], agents: &[String]) -> Event {
    let k = rng.gen_range(0..=bounds.event_vars);
    let plus: Vec<String> = (1..=k).map(|k| format!("e{k}")).collect();
    let mut all = vocab.to_vec();
    all.extend(plus.iter().cloned());

    let event_law = match rng.gen_range(0..3) {
        0 => Formula::Top,
        1 => random_boolean(rng, &all, 2),
        _ => Formula::conj([
            random_boolean(rng, &plus, 1),
            random_formula(rng, vocab, agents, 1, 2),
        ]),
    };
    let mut candidates = vocab.to_vec();
    candidates.shuffle(rng);
    let m = rng.gen_range(0..=bounds.modified.min(vocab.len()));
    let changes = candidates[..m]
        .iter()
        .map(|p| (p.clone(), random_boolean(rng, &all, 2)))
        .collect();
    let mut observations = BTreeMap::new();
    for i in agents {
        if rng.gen_ratio(3, 4) {
            observations.insert(i.clone(), random_boolean(rng, &doubled(&plus), 2));
        }
    }
    let actual = random_subset(rng, &plus);
    Event::new(
        Transformer {
            add_vocab: plus,
            event_law,
            changes,
            observations,
        },
        actual,
    )
}

/// A seeded (scene, event) pair.
#[derive(Clone, Debug)]
pub struct SceneInstance {
    pub seed: u64,
    pub scene: Scene,
    pub event: Event,
}

impl SceneInstance {
    pub fn generate(seed: u64, bounds: &Bounds) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scene = random_scene(&mut rng, bounds, &Engine::new());
        let event = random_event(&mut rng, bounds, &scene);
        SceneInstance { seed, scene, event }
    }

    fn size(&self) -> usize {
        let x = &self.event.transformer;
        self.scene.structure().vars().len() + x.add_vocab.len() + x.changes.len()
    }
}

impl fmt::Display for SceneInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "seed {}", self.seed)?;
        write!(f, "{}", self.scene.structure())?;
        writeln!(f, "state: {}", format_state(self.scene.state()))?;
        write_transformer(f, &self.event.transformer)?;
        writeln!(f, "actual event: {}", format_state(&self.event.actual))
    }
}

fn write_transformer(f: &mut fmt::Formatter<'_>, x: &Transformer) -> fmt::Result {
    if !x.add_vocab.is_empty() {
        writeln!(f, "event vocabulary: {}", x.add_vocab.join(", "))?;
    }
    writeln!(f, "event law: {}", x.event_law)?;
    for (p, g) in &x.changes {
        writeln!(f, "change {p} := {g}")?;
    }
    for (i, g) in &x.observations {
        writeln!(f, "event obs {i}: {g}")?;
    }
    Ok(())
}

/// A seeded pointed model with an action and an event executable at the
/// point.
#[derive(Clone, Debug)]
pub struct ModelInstance {
    pub seed: u64,
    pub model: PointedModel,
    pub action: ActionModel,
    pub event: usize,
}

impl ModelInstance {
    pub fn generate(seed: u64, bounds: &Bounds) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rng = &mut rng;
        let agents = names(&AGENTS, rng.gen_range(1..=bounds.agents.max(1)), "i");
        let vocab = names(&ATOMS, rng.gen_range(1..=bounds.vars.max(1)), "x");

        let mut m = KripkeModel::new(&vocab, &agents);
        let n = rng.gen_range(1..=bounds.worlds.max(1));
        for k in 0..n {
            m.add_world(format!("w{k}"), random_subset(rng, &vocab))
                .expect("valuation within vocabulary");
        }
        random_edges(rng, &agents, n, |i, a, b| m.add_edge(i, a, b).map(|_| ()));
        let point = rng.gen_range(0..n);

        let k = rng.gen_range(1..=bounds.events.max(1));
        let mut pres: Vec<Formula> = (0..k)
            .map(|_| match rng.gen_range(0..3) {
                0 => Formula::Top,
                1 => random_boolean(rng, &vocab, 2),
                _ => random_formula(rng, &vocab, &agents, 1, 2),
            })
            .collect();
        let mut eval = Evaluator::new(&m);
        let live: Vec<usize> = (0..k)
            .filter(|a| eval.extension(&pres[*a]).expect("well formed")[point])
            .collect();
        let event = match live.choose(rng) {
            Some(a) => *a,
            None => {
                pres[0] = Formula::Top;
                0
            }
        };

        let mut action = ActionModel::new(&agents);
        for (a, pre) in pres.into_iter().enumerate() {
            let mut candidates = vocab.clone();
            candidates.shuffle(rng);
            let changed = rng.gen_range(0..=bounds.modified.min(vocab.len()));
            let post = candidates[..changed]
                .iter()
                .map(|p| {
                    let f = if rng.gen_ratio(1, 6) {
                        Formula::atom(p.clone())
                    } else {
                        random_boolean(rng, &vocab, 2)
                    };
                    (p.clone(), f)
                })
                .collect();
            action
                .add_event(format!("a{a}"), pre, post)
                .expect("postconditions are boolean");
        }
        random_edges(rng, &agents, k, |i, a, b| action.add_edge(i, a, b).map(|_| ()));

        ModelInstance {
            seed,
            model: PointedModel::new(m, point).expect("point in range"),
            action,
            event,
        }
    }

    fn size(&self) -> usize {
        self.model.model().len() + self.action.events().len() + self.model.model().vocabulary().len()
    }
}

fn random_edges<R: Rng>(
    rng: &mut R,
    agents: &[String],
    n: usize,
    mut add: impl FnMut(&str, usize, usize) -> Result<(), ExplicitError>,
) {
    for i in agents {
        let density = rng.gen_range(0.2..0.9);
        for a in 0..n {
            for b in 0..n {
                if rng.gen_bool(density) {
                    add(i, a, b).expect("edge within range");
                }
            }
        }
    }
}

impl fmt::Display for ModelInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = self.model.model();
        writeln!(f, "seed {}", self.seed)?;
        write!(f, "{m}")?;
        writeln!(f, "point: {}", m.worlds()[self.model.point()].name)?;
        writeln!(f, "events:")?;
        for e in self.action.events() {
            let post: Vec<String> = e.post.iter().map(|(p, g)| format!("{p} := {g}")).collect();
            writeln!(f, "  {}: pre {}; post {}", e.name, e.pre, post.join(", "))?;
        }
        for i in self.action.agents() {
            let mut edges = Vec::new();
            for (a, e) in self.action.events().iter().enumerate() {
                for b in self.action.successors(i, a).expect("known agent") {
                    edges.push(format!("{}->{}", e.name, self.action.events()[*b].name));
                }
            }
            writeln!(f, "{i}: {}", edges.join(" "))?;
        }
        writeln!(f, "actual event: {}", self.action.events()[self.event].name)
    }
}

/// A seeded structure whose law determines the proposition `determined`.
#[derive(Clone, Debug)]
pub struct DeterminedInstance {
    pub seed: u64,
    pub structure: BeliefStructure,
    pub determined: String,
}

impl DeterminedInstance {
    pub fn generate(seed: u64, bounds: &Bounds) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rng = &mut rng;
        let agents = names(&AGENTS, rng.gen_range(1..=bounds.agents.max(1)), "i");
        let vocab = names(&ATOMS, rng.gen_range(1..=bounds.vars.max(1)), "x");
        let law = random_law(rng, &vocab);
        let observations = random_observations(rng, &agents, &vocab);
        let determined = vocab.choose(rng).expect("non-empty vocabulary").clone();
        let literal = Formula::atom(determined.clone());
        let engine = Engine::new();
        let build = |lit: Formula| {
            BeliefStructure::new(&engine, &agents, &vocab, &Formula::conj([law.clone(), lit]), &observations)
                .expect("generated structures are well formed")
        };
        let (first, second) = if rng.gen_bool(0.5) {
            (literal.clone(), Formula::neg(literal))
        } else {
            (Formula::neg(literal.clone()), literal)
        };
        let mut structure = build(first);
        if structure.law().is_false() {
            structure = build(second);
        }
        DeterminedInstance {
            seed,
            structure,
            determined,
        }
    }
}

impl fmt::Display for DeterminedInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "seed {}", self.seed)?;
        write!(f, "{}", self.structure)?;
        writeln!(f, "determined: {}", self.determined)
    }
}

/// Why a property failed on one instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub formula: Option<Formula>,
    pub detail: String,
}

impl Counterexample {
    fn on(formula: &Formula, detail: String) -> Self {
        Counterexample {
            formula: Some(formula.clone()),
            detail,
        }
    }

    fn plain(detail: impl Into<String>) -> Self {
        Counterexample {
            formula: None,
            detail: detail.into(),
        }
    }
}

macro_rules! unexpected {
    ($($t:ty),*) => {$(
        impl From<$t> for Counterexample {
            fn from(e: $t) -> Self {
                Counterexample::plain(format!("unexpected error: {e}"))
            }
        }
    )*};
}

unexpected!(BridgeError, ExplicitError, SymbolicError, LanguageError);

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(phi) = &self.formula {
            write!(f, "formula {phi}: ")?;
        }
        f.write_str(&self.detail)
    }
}

type Check = Result<(), Counterexample>;

/// Explicit evaluation in `M(F)` against the boolean translation, on every
/// state and every formula of the family up to `depth`, plus `extra`.
pub fn check_translation(f: &BeliefStructure, depth: usize, extra: &[Formula]) -> Check {
    let sm = model_of_structure(f)?;
    let vocab = f.vocabulary();
    let mut formulas = formula_family(&vocab, f.agents(), depth);
    formulas.extend(extra.iter().cloned());
    let mut eval = Evaluator::new(&sm.model);
    let mut tr = Translator::new(f);
    for phi in &formulas {
        let ext = eval.extension(phi)?;
        let b = tr.translate(phi)?;
        for (w, s) in sm.states.iter().enumerate() {
            if b.holds(&f.assignment(s)?) != ext[w] {
                return Err(Counterexample::on(
                    phi,
                    format!("explicit says {} at {}", ext[w], format_state(s)),
                ));
            }
        }
    }
    Ok(())
}

struct PartOne {
    product: crate::explicit::Product,
    structure: BeliefStructure,
    g: Vec<State>,
}

fn part_one_setup(inst: &SceneInstance, mutation: Option<Mutation>) -> Result<PartOne, Counterexample> {
    let f = inst.scene.structure();
    let sm = model_of_structure(f)?;
    let (action, designated) = act(&inst.event, f.agents())?;
    let product = product_update(&sm.model, &action)?;
    let t = transform_mutated(f, &inst.event.transformer, mutation)?;
    let labels = inst.event.transformer.event_labels();

    for (w, s) in sm.states.iter().enumerate() {
        for (a, x) in labels.iter().enumerate() {
            let next = t.successor_state(s, x)?;
            let survives = product.world_of(w, a).is_some();
            if t.structure.is_state(&next)? != survives {
                return Err(Counterexample::plain(format!(
                    "executability of {} at {} differs: explicit {survives}",
                    format_state(x),
                    format_state(s)
                )));
            }
        }
    }
    let w0 = sm.world_of(inst.scene.state()).expect("actual state is a world");
    let applied = apply_mutated(&inst.scene, &inst.event, mutation);
    match (applied, product.world_of(w0, designated)) {
        (Ok(sc), Some(_)) => {
            let expect = t.successor_state(inst.scene.state(), &inst.event.actual)?;
            if *sc.state() != expect {
                return Err(Counterexample::plain("applied state differs from the successor state"));
            }
        }
        (Err(SymbolicError::NotExecutable(_)), None) => {}
        (Ok(_), None) => return Err(Counterexample::plain("point eliminated but event executable")),
        (Err(e), _) => return Err(e.into()),
    }
    let g = product
        .origins
        .iter()
        .map(|&(w, a)| t.successor_state(&sm.states[w], &labels[a]))
        .collect::<Result<_, _>>()?;
    Ok(PartOne {
        product,
        structure: t.structure,
        g,
    })
}

/// Transforming then evaluating symbolically agrees with product update by
/// the translated action, at every world of the product.
pub fn check_part_one(inst: &SceneInstance, depth: usize, mutation: Option<Mutation>) -> Check {
    let setup = part_one_setup(inst, mutation)?;
    let f = inst.scene.structure();
    let formulas = formula_family(&f.vocabulary(), f.agents(), depth);
    let mut eval = Evaluator::new(&setup.product.model);
    let mut tr = Translator::new(&setup.structure);
    for phi in &formulas {
        let ext = eval.extension(phi)?;
        let b = tr.translate(phi)?;
        for (x, s) in setup.g.iter().enumerate() {
            if b.holds(&setup.structure.assignment(s)?) != ext[x] {
                return Err(Counterexample::on(
                    phi,
                    format!(
                        "explicit says {} at {}, symbolic state {}",
                        ext[x],
                        setup.product.model.worlds()[x].name,
                        format_state(s)
                    ),
                ));
            }
        }
    }
    Ok(())
}

/// The successor-state map is a morphism from the product to the transformed
/// structure.
pub fn check_part_one_morphism(inst: &SceneInstance, mutation: Option<Mutation>) -> Check {
    let setup = part_one_setup(inst, mutation)?;
    let shared = inst.scene.structure().vocabulary();
    let g = Morphism { g: setup.g };
    match check_morphism(&setup.structure, &setup.product.model, &shared, &g)? {
        None => Ok(()),
        Some(v) => Err(Counterexample::plain(v.to_string())),
    }
}

/// Product update agrees with encoding the model, translating the action
/// and transforming, at every world of the product.
pub fn check_part_two(inst: &ModelInstance, depth: usize) -> Check {
    let m = inst.model.model();
    let engine = Engine::new();
    let (f, g) = structure_of_model(m, &engine)?;
    if let Some(v) = check_morphism(&f, m, m.vocabulary(), &Morphism { g: g.clone() })? {
        return Err(Counterexample::plain(format!("encoding of the model: {v}")));
    }
    let (event, labeling) = trf(&inst.action, inst.event, &f.vocabulary())?;
    let product = product_update(m, &inst.action)?;
    let t = f.transform_detailed(&event.transformer)?;

    for (w, s) in g.iter().enumerate() {
        for a in 0..inst.action.events().len() {
            let next = t.successor_state(s, labeling.label(a))?;
            let survives = product.world_of(w, a).is_some();
            if t.structure.is_state(&next)? != survives {
                return Err(Counterexample::plain(format!(
                    "executability of {} at {} differs: explicit {survives}",
                    inst.action.events()[a].name,
                    m.worlds()[w].name
                )));
            }
        }
    }
    let scene = Scene::new(f.clone(), g[inst.model.point()].clone())?;
    scene.apply(&event)?;

    let images: Vec<State> = product
        .origins
        .iter()
        .map(|&(w, a)| t.successor_state(&g[w], labeling.label(a)))
        .collect::<Result<_, _>>()?;
    let formulas = formula_family(m.vocabulary(), m.agents(), depth);
    let mut eval = Evaluator::new(&product.model);
    let mut tr = Translator::new(&t.structure);
    for phi in &formulas {
        let ext = eval.extension(phi)?;
        let b = tr.translate(phi)?;
        for (x, s) in images.iter().enumerate() {
            if b.holds(&t.structure.assignment(s)?) != ext[x] {
                return Err(Counterexample::on(
                    phi,
                    format!(
                        "explicit says {} at {}, symbolic state {}",
                        ext[x],
                        product.model.worlds()[x].name,
                        format_state(s)
                    ),
                ));
            }
        }
    }
    Ok(())
}

/// `act(trf(A))` updates every model like `A` does.
pub fn check_round_trip(inst: &ModelInstance, depth: usize) -> Check {
    let m = inst.model.model();
    let (event, labeling) = trf(&inst.action, inst.event, m.vocabulary())?;
    let (back, designated) = act(&event, m.agents())?;
    if labeling.event_of(&event.actual) != Some(inst.event) || designated != inst.event {
        return Err(Counterexample::plain("designated event not preserved"));
    }
    let p1 = product_update(m, &inst.action)?;
    let p2 = product_update(m, &back)?;
    if p1.model.len() != p2.model.len() {
        return Err(Counterexample::plain(format!(
            "products have {} and {} worlds",
            p1.model.len(),
            p2.model.len()
        )));
    }
    let pairs: Vec<(usize, usize)> = p1
        .origins
        .iter()
        .enumerate()
        .map(|(x, &(w, a))| {
            let y = p2.world_of(w, a).ok_or_else(|| {
                Counterexample::plain(format!("world ({}, {a}) missing after round trip", m.worlds()[w].name))
            })?;
            Ok((x, y))
        })
        .collect::<Result<_, Counterexample>>()?;
    let formulas = formula_family(m.vocabulary(), m.agents(), depth);
    let mut e1 = Evaluator::new(&p1.model);
    let mut e2 = Evaluator::new(&p2.model);
    for phi in &formulas {
        let (x1, x2) = (e1.extension(phi)?, e2.extension(phi)?);
        if let Some(&(x, _)) = pairs.iter().find(|&&(x, y)| x1[x] != x2[y]) {
            return Err(Counterexample::on(
                phi,
                format!("differs at {}", p1.model.worlds()[x].name),
            ));
        }
    }
    Ok(())
}

/// Removing the determined proposition preserves every formula over the
/// rest of the vocabulary.
pub fn check_minimization(inst: &DeterminedInstance, depth: usize) -> Check {
    let f = &inst.structure;
    let keep: BTreeSet<String> = f
        .vocabulary()
        .into_iter()
        .filter(|p| *p != inst.determined)
        .collect();
    let min = f.minimize(&keep)?;
    let sm = model_of_structure(f)?;
    let reduced: Vec<State> = sm
        .states
        .iter()
        .map(|s| s.iter().filter(|p| keep.contains(*p)).cloned().collect())
        .collect();
    if min.states() != reduced {
        return Err(Counterexample::plain("states differ after minimization"));
    }
    let kept: Vec<String> = keep.into_iter().collect();
    let formulas = formula_family(&kept, f.agents(), depth);
    let mut eval = Evaluator::new(&sm.model);
    let mut tr = Translator::new(&min);
    for phi in &formulas {
        let ext = eval.extension(phi)?;
        let b = tr.translate(phi)?;
        for (w, s) in reduced.iter().enumerate() {
            if b.holds(&min.assignment(s)?) != ext[w] {
                return Err(Counterexample::on(
                    phi,
                    format!("before {}, after {} at {}", ext[w], !ext[w], format_state(s)),
                ));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Translation,
    PartOne,
    Morphism,
    PartTwo,
    RoundTrip,
    Minimization,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Translation,
        Suite::PartOne,
        Suite::Morphism,
        Suite::PartTwo,
        Suite::RoundTrip,
        Suite::Minimization,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Translation => "boolean translation",
            Suite::PartOne => "transformer vs product update",
            Suite::Morphism => "successor-state morphism",
            Suite::PartTwo => "product update vs transformer",
            Suite::RoundTrip => "action round trip",
            Suite::Minimization => "minimization",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProveConfig {
    pub seed: u64,
    pub count: usize,
    pub depth: usize,
    pub bounds: Bounds,
    pub mutation: Option<Mutation>,
}

impl Default for ProveConfig {
    fn default() -> Self {
        ProveConfig {
            seed: 0,
            count: 500,
            depth: 2,
            bounds: Bounds::default(),
            mutation: None,
        }
    }
}

/// A failing instance, printed in full.
#[derive(Clone, Debug)]
pub struct Failure {
    pub seed: u64,
    pub instance: String,
    pub counterexample: Counterexample,
    size: (usize, usize),
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: usize,
    pub failed: usize,
    /// The smallest failing instance, by instance size then formula size.
    pub minimal: Option<Failure>,
}

#[derive(Clone, Debug)]
pub struct ProveReport {
    pub suites: Vec<SuiteReport>,
}

impl ProveReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.failed == 0)
    }
}

impl fmt::Display for ProveReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.suites {
            let verdict = if s.failed == 0 { "ok" } else { "FAILED" };
            writeln!(
                f,
                "{:<32} {:>5} passed {:>5} failed  {verdict}",
                s.suite.name(),
                s.passed,
                s.failed
            )?;
        }
        for s in &self.suites {
            if let Some(fail) = &s.minimal {
                writeln!(f)?;
                writeln!(f, "minimal counterexample for {}:", s.suite.name())?;
                write!(f, "{}", fail.instance)?;
                writeln!(f, "{}", fail.counterexample)?;
            }
        }
        Ok(())
    }
}

/// Runs every suite on `count` instances with seeds `seed, seed + 1, …`.
pub fn prove(config: &ProveConfig) -> ProveReport {
    let mut reports: Vec<SuiteReport> = Suite::ALL
        .iter()
        .map(|&suite| SuiteReport {
            suite,
            passed: 0,
            failed: 0,
            minimal: None,
        })
        .collect();
    let mut record = |suite: Suite, seed: u64, size: usize, describe: &dyn Fn() -> String, check: Check| {
        let r = reports.iter_mut().find(|r| r.suite == suite).expect("known suite");
        match check {
            Ok(()) => r.passed += 1,
            Err(c) => {
                r.failed += 1;
                let key = (size, c.formula.as_ref().map_or(0, Formula::size));
                if r.minimal.as_ref().is_none_or(|m| key < m.size) {
                    r.minimal = Some(Failure {
                        seed,
                        instance: describe(),
                        counterexample: c,
                        size: key,
                    });
                }
            }
        }
    };
    let b = &config.bounds;
    for k in 0..config.count as u64 {
        let seed = config.seed.wrapping_add(k);

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scene = random_scene(&mut rng, b, &Engine::new());
        let f = scene.structure();
        let atoms = f.vocabulary();
        let extra: Vec<Formula> = (0..10)
            .map(|_| random_formula(&mut rng, &atoms, f.agents(), config.depth + 1, 4))
            .collect();
        let size = atoms.len();
        record(
            Suite::Translation,
            seed,
            size,
            &|| format!("seed {seed}\n{f}state: {}\n", format_state(scene.state())),
            check_translation(f, config.depth, &extra),
        );

        let inst = SceneInstance::generate(seed, b);
        let describe = || inst.to_string();
        record(Suite::PartOne, seed, inst.size(), &describe, check_part_one(&inst, config.depth, config.mutation));
        record(Suite::Morphism, seed, inst.size(), &describe, check_part_one_morphism(&inst, config.mutation));

        let inst = ModelInstance::generate(seed, b);
        let describe = || inst.to_string();
        record(Suite::PartTwo, seed, inst.size(), &describe, check_part_two(&inst, config.depth));
        record(Suite::RoundTrip, seed, inst.size(), &describe, check_round_trip(&inst, config.depth));

        let inst = DeterminedInstance::generate(seed, b);
        record(
            Suite::Minimization,
            seed,
            inst.structure.vars().len(),
            &|| inst.to_string(),
            check_minimization(&inst, config.depth),
        );
    }
    ProveReport { suites: reports }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::language::parse;

    fn f(s: &str) -> Formula {
        parse(s).unwrap()
    }

    fn st(items: &[&str]) -> State {
        items.iter().map(|s| s.to_string()).collect()
    }

    fn coin_flip() -> Event {
        Event::new(
            Transformer {
                add_vocab: vec!["q".into()],
                event_law: Formula::Top,
                changes: BTreeMap::from([("p".into(), f("q"))]),
                observations: BTreeMap::from([("b".into(), f("q <-> q'"))]),
            },
            st(&["q"]),
        )
    }

    fn coin() -> Scene {
        let s = BeliefStructure::new(
            &Engine::new(),
            &["a", "b"],
            &["p"],
            &f("p"),
            &BTreeMap::from([("a".into(), f("p <-> p'")), ("b".into(), f("p <-> p'"))]),
        )
        .unwrap();
        Scene::new(s, st(&["p"])).unwrap()
    }

    #[test]
    fn act_of_coin_flip_is_the_flip_action() {
        let (action, designated) = act(&coin_flip(), &["a", "b"]).unwrap();
        assert_eq!(designated, 1);
        let events = action.events();
        assert_eq!(events.len(), 2);
        assert_eq!(events[0].name, "{}");
        assert_eq!(events[1].name, "{q}");
        assert_eq!(events[0].post["p"], Formula::Bot);
        assert_eq!(events[1].post["p"], Formula::Top);
        assert_eq!(events[0].pre, Formula::Top);
        for (x, y) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            assert!(action.has_edge("a", x, y).unwrap());
            assert_eq!(action.has_edge("b", x, y).unwrap(), x == y);
        }
    }

    #[test]
    fn act_without_event_vocabulary() {
        let x = Transformer {
            event_law: f("p"),
            observations: BTreeMap::from([("a".into(), Formula::Bot)]),
            ..Transformer::default()
        };
        let (action, d) = act(&Event::new(x, st(&[])), &["a", "b"]).unwrap();
        assert_eq!(d, 0);
        assert_eq!(action.events().len(), 1);
        assert_eq!(action.events()[0].pre, f("p"));
        assert!(!action.has_edge("a", 0, 0).unwrap());
        assert!(action.has_edge("b", 0, 0).unwrap());
    }

    #[test]
    fn act_rejects_bad_actual_and_observation() {
        let mut ev = coin_flip();
        ev.actual = st(&["z"]);
        assert!(matches!(act(&ev, &["a", "b"]), Err(BridgeError::ActualOutsideEvent(_))));
        let mut ev = coin_flip();
        ev.transformer.observations.insert("a".into(), f("p"));
        assert!(matches!(
            act(&ev, &["a", "b"]),
            Err(BridgeError::EventObservationScope { .. })
        ));
    }

    #[test]
    fn trf_of_flip_action_is_the_coin_transformer() {
        let (action, _) = act(&coin_flip(), &["a", "b"]).unwrap();
        let (ev, labeling) = trf(&action, 1, &["p"]).unwrap();
        assert_eq!(labeling.props(), ["q1"]);
        assert_eq!(ev.actual, st(&["q1"]));
        let x = &ev.transformer;
        assert_eq!(x.modified(), st(&["p"]));

        let base = coin().structure().clone();
        let r = base.transform(x).unwrap();
        assert_eq!(*r.law(), r.compile(&f("p° & (p <-> q1)")).unwrap());
        assert_eq!(*r.observation("a").unwrap(), r.compile(&f("p° <-> p°'")).unwrap());
        assert_eq!(
            *r.observation("b").unwrap(),
            r.compile(&f("(p° <-> p°') & (q1 <-> q1')")).unwrap()
        );
    }

    #[test]
    fn trf_single_event_and_identity_post() {
        let mut action = ActionModel::new(&["a"]);
        action
            .add_event("ann", f("p"), BTreeMap::from([("p".into(), f("p"))]))
            .unwrap();
        action.add_edge("a", 0, 0).unwrap();
        let (ev, labeling) = trf(&action, 0, &["p"]).unwrap();
        assert!(labeling.props().is_empty());
        assert!(ev.transformer.add_vocab.is_empty());
        assert_eq!(ev.transformer.event_law, f("p"));
        assert!(ev.transformer.changes.is_empty());
        assert_eq!(ev.transformer.observations["a"], Formula::Top);
        assert!(ev.actual.is_empty());
    }

    #[test]
    fn labeling_is_injective_and_avoids_names() {
        let l = EventLabeling::new(3, &["q1"]);
        assert_eq!(l.props(), ["q1_", "q2"]);
        assert_eq!(*l.label(0), st(&[]));
        assert_eq!(*l.label(1), st(&["q1_"]));
        assert_eq!(*l.label(2), st(&["q2"]));
        assert_eq!(l.event_of(&st(&["q2"])), Some(2));
        assert!(EventLabeling::new(1, &["p"]).props().is_empty());
    }

    #[test]
    fn morphism_identity_and_collapse() {
        let f = coin().structure().clone();
        let sm = model_of_structure(&f).unwrap();
        let g = Morphism { g: sm.states.clone() };
        assert_eq!(check_morphism(&f, &sm.model, &f.vocabulary(), &g).unwrap(), None);

        // two worlds with the same valuation mapped onto one state
        let mut m = KripkeModel::new(&["p"], &["a", "b"]);
        m.add_world("u", st(&["p"])).unwrap();
        m.add_world("v", st(&["p"])).unwrap();
        m.add_edge("a", 0, 0).unwrap();
        m.add_edge("b", 0, 0).unwrap();
        m.add_edge("b", 1, 1).unwrap();
        let g = Morphism {
            g: vec![st(&["p"]), st(&["p"])],
        };
        assert!(check_morphism(&f, &m, &f.vocabulary(), &g).unwrap().is_some());
    }

    #[test]
    fn morphism_on_the_coin_instance() {
        let inst = SceneInstance {
            seed: 0,
            scene: coin(),
            event: coin_flip(),
        };
        check_part_one_morphism(&inst, None).unwrap();
        check_part_one(&inst, 2, None).unwrap();
        assert!(check_part_one_morphism(&inst, Some(Mutation::DropObservationCircling)).is_err());
    }

    #[test]
    fn family_shape() {
        let fam = formula_family(&["p", "q"], &["a"], 1);
        assert_eq!(fam[..6], [Formula::Top, Formula::Bot, f("p"), f("~p"), f("q"), f("~q")]);
        assert!(fam.contains(&f("[a] (p & q)")));
        assert!(fam.contains(&f("~[a] (p | q)")));
        assert!(fam.iter().all(|g| g.modal_depth() <= 1));
        let set: BTreeSet<&Formula> = fam.iter().collect();
        assert_eq!(set.len(), fam.len());
    }

    #[test]
    fn generators_are_reproducible() {
        let b = Bounds::default();
        let x = SceneInstance::generate(7, &b).to_string();
        assert_eq!(x, SceneInstance::generate(7, &b).to_string());
        let y = ModelInstance::generate(7, &b).to_string();
        assert_eq!(y, ModelInstance::generate(7, &b).to_string());
    }

    #[test]
    fn generated_events_are_executable() {
        let b = Bounds::default();
        for seed in 0..100 {
            let inst = SceneInstance::generate(seed, &b);
            assert!(inst.scene.apply(&inst.event).is_ok(), "seed {seed}");
            let m = ModelInstance::generate(seed, &b);
            let pre = &m.action.events()[m.event].pre;
            assert!(m.model.eval(pre).unwrap(), "seed {seed}");
            let d = DeterminedInstance::generate(seed, &b);
            assert!(!d.structure.law().is_false());
        }
    }

    #[test]
    fn no_event_vocabulary_bound() {
        let b = Bounds {
            event_vars: 0,
            ..Bounds::default()
        };
        for seed in 0..20 {
            assert!(SceneInstance::generate(seed, &b).event.transformer.add_vocab.is_empty());
        }
    }

    #[test]
    fn small_prove_run_passes() {
        let report = prove(&ProveConfig {
            count: 10,
            ..ProveConfig::default()
        });
        assert!(report.passed(), "{report}");
        assert!(prove(&ProveConfig {
            count: 0,
            ..ProveConfig::default()
        })
        .passed());
    }
}
