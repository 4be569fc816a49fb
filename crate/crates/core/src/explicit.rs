//! Explicit Kripke models and action models with pre- and postconditions.
//!
//! This is the reference semantics the symbolic side is checked against.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::boolfun::{BoolFn, Engine, VarId};
use crate::language::{Formula, LanguageError};
use crate::symbolic::{format_state, BeliefStructure, State, SymbolicError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExplicitError {
    #[error("`{0}` is not in the vocabulary")]
    UnknownAtom(String),
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("no world or event with index {0}")]
    NoSuchWorld(usize),
    #[error("postcondition of `{event}` for `{atom}` is not boolean")]
    EpistemicPostcondition { event: String, atom: String },
    #[error("the designated point {0} does not survive the update")]
    PointEliminated(String),
    #[error(transparent)]
    Language(#[from] LanguageError),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct World {
    pub name: String,
    pub valuation: State,
}

/// `(W, R, π)` over a fixed vocabulary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KripkeModel {
    vocabulary: Vec<String>,
    agents: Vec<String>,
    worlds: Vec<World>,
    relations: BTreeMap<String, Vec<BTreeSet<usize>>>,
}

impl KripkeModel {
    pub fn new<S: AsRef<str>>(vocabulary: &[S], agents: &[S]) -> Self {
        KripkeModel {
            vocabulary: vocabulary.iter().map(|s| s.as_ref().to_string()).collect(),
            agents: agents.iter().map(|s| s.as_ref().to_string()).collect(),
            worlds: Vec::new(),
            relations: agents
                .iter()
                .map(|a| (a.as_ref().to_string(), Vec::new()))
                .collect(),
        }
    }

    pub fn add_world(&mut self, name: impl Into<String>, valuation: State) -> Result<usize, ExplicitError> {
        if let Some(p) = valuation.iter().find(|p| !self.vocabulary.contains(p)) {
            return Err(ExplicitError::UnknownAtom(p.clone()));
        }
        self.worlds.push(World {
            name: name.into(),
            valuation,
        });
        for succ in self.relations.values_mut() {
            succ.push(BTreeSet::new());
        }
        Ok(self.worlds.len() - 1)
    }

    pub fn add_edge(&mut self, agent: &str, from: usize, to: usize) -> Result<(), ExplicitError> {
        let n = self.worlds.len();
        for w in [from, to] {
            if w >= n {
                return Err(ExplicitError::NoSuchWorld(w));
            }
        }
        self.relations
            .get_mut(agent)
            .ok_or_else(|| ExplicitError::UnknownAgent(agent.to_string()))?[from]
            .insert(to);
        Ok(())
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn agents(&self) -> &[String] {
        &self.agents
    }

    pub fn worlds(&self) -> &[World] {
        &self.worlds
    }

    pub fn len(&self) -> usize {
        self.worlds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.worlds.is_empty()
    }

    pub fn successors(&self, agent: &str, w: usize) -> Result<&BTreeSet<usize>, ExplicitError> {
        self.relations
            .get(agent)
            .ok_or_else(|| ExplicitError::UnknownAgent(agent.to_string()))?
            .get(w)
            .ok_or(ExplicitError::NoSuchWorld(w))
    }

    pub fn has_edge(&self, agent: &str, from: usize, to: usize) -> Result<bool, ExplicitError> {
        Ok(self.successors(agent, from)?.contains(&to))
    }

    /// Truth of `φ` at every world, in world order.
    pub fn extension(&self, f: &Formula) -> Result<Vec<bool>, ExplicitError> {
        Evaluator::new(self).extension(f)
    }

    /// `(M, w) ⊨ φ`.
    pub fn eval(&self, w: usize, f: &Formula) -> Result<bool, ExplicitError> {
        if w >= self.worlds.len() {
            return Err(ExplicitError::NoSuchWorld(w));
        }
        Ok(self.extension(f)?[w])
    }
}

/// Debug text format: one line per world, then one line per agent listing
/// its edges. Not a stable interchange format.
impl fmt::Display for KripkeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "worlds:")?;
        for w in &self.worlds {
            writeln!(f, "  {}: {}", w.name, format_state(&w.valuation))?;
        }
        for (agent, succ) in &self.relations {
            let edges: Vec<String> = succ
                .iter()
                .enumerate()
                .flat_map(|(w, vs)| {
                    vs.iter()
                        .map(move |v| format!("{}->{}", self.worlds[w].name, self.worlds[*v].name))
                })
                .collect();
            writeln!(f, "{agent}: {}", edges.join(" "))?;
        }
        Ok(())
    }
}

/// Memoizing evaluator: each subformula's extension is computed once.
pub struct Evaluator<'a> {
    model: &'a KripkeModel,
    cache: HashMap<Formula, Vec<bool>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(model: &'a KripkeModel) -> Self {
        Evaluator {
            model,
            cache: HashMap::new(),
        }
    }

    pub fn extension(&mut self, f: &Formula) -> Result<Vec<bool>, ExplicitError> {
        if let Some(e) = self.cache.get(f) {
            return Ok(e.clone());
        }
        let n = self.model.worlds.len();
        let e = match f {
            Formula::Top => vec![true; n],
            Formula::Bot => vec![false; n],
            Formula::Atom(p) => {
                if !self.model.vocabulary.contains(p) {
                    return Err(ExplicitError::UnknownAtom(p.clone()));
                }
                self.model
                    .worlds
                    .iter()
                    .map(|w| w.valuation.contains(p))
                    .collect()
            }
            Formula::Not(g) => self.extension(g)?.into_iter().map(|b| !b).collect(),
            Formula::And(gs) => {
                let mut acc = vec![true; n];
                for g in gs {
                    let e = self.extension(g)?;
                    acc.iter_mut().zip(e).for_each(|(a, b)| *a &= b);
                }
                acc
            }
            Formula::Or(gs) => {
                let mut acc = vec![false; n];
                for g in gs {
                    let e = self.extension(g)?;
                    acc.iter_mut().zip(e).for_each(|(a, b)| *a |= b);
                }
                acc
            }
            Formula::Implies(a, b) => {
                let (ea, eb) = (self.extension(a)?, self.extension(b)?);
                ea.into_iter().zip(eb).map(|(x, y)| !x || y).collect()
            }
            Formula::Iff(a, b) => {
                let (ea, eb) = (self.extension(a)?, self.extension(b)?);
                ea.into_iter().zip(eb).map(|(x, y)| x == y).collect()
            }
            Formula::Believes(i, g) => {
                let succ = self
                    .model
                    .relations
                    .get(i)
                    .ok_or_else(|| ExplicitError::UnknownAgent(i.clone()))?;
                let eg = self.extension(g)?;
                succ.iter().map(|vs| vs.iter().all(|v| eg[*v])).collect()
            }
        };
        self.cache.insert(f.clone(), e.clone());
        Ok(e)
    }
}

/// `(M, w)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointedModel {
    model: KripkeModel,
    point: usize,
}

impl PointedModel {
    pub fn new(model: KripkeModel, point: usize) -> Result<Self, ExplicitError> {
        if point >= model.len() {
            return Err(ExplicitError::NoSuchWorld(point));
        }
        Ok(PointedModel { model, point })
    }

    pub fn model(&self) -> &KripkeModel {
        &self.model
    }

    pub fn point(&self) -> usize {
        self.point
    }

    pub fn eval(&self, f: &Formula) -> Result<bool, ExplicitError> {
        self.model.eval(self.point, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionEvent {
    pub name: String,
    pub pre: Formula,
    /// Postconditions for the changed propositions; every other
    /// proposition keeps its value.
    pub post: BTreeMap<String, Formula>,
}

impl ActionEvent {
    /// `post_a(p)`, defaulting to `p`.
    pub fn post_of(&self, p: &str) -> Formula {
        self.post
            .get(p)
            .cloned()
            .unwrap_or_else(|| Formula::atom(p))
    }
}

/// `(A, R, pre, post)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionModel {
    agents: Vec<String>,
    events: Vec<ActionEvent>,
    relations: BTreeMap<String, Vec<BTreeSet<usize>>>,
}

impl ActionModel {
    pub fn new<S: AsRef<str>>(agents: &[S]) -> Self {
        ActionModel {
            agents: agents.iter().map(|s| s.as_ref().to_string()).collect(),
            events: Vec::new(),
            relations: agents
                .iter()
                .map(|a| (a.as_ref().to_string(), Vec::new()))
                .collect(),
        }
    }

    /// Adds an event; postconditions must be boolean.
    pub fn add_event(
        &mut self,
        name: impl Into<String>,
        pre: Formula,
        post: BTreeMap<String, Formula>,
    ) -> Result<usize, ExplicitError> {
        let name = name.into();
        if let Some((p, _)) = post.iter().find(|(_, f)| !f.is_boolean()) {
            return Err(ExplicitError::EpistemicPostcondition {
                event: name,
                atom: p.clone(),
            });
        }
        pre.check_agents(&self.agents)?;
        self.events.push(ActionEvent { name, pre, post });
        for succ in self.relations.values_mut() {
            succ.push(BTreeSet::new());
        }
        Ok(self.events.len() - 1)
    }

    pub fn add_edge(&mut self, agent: &str, from: usize, to: usize) -> Result<(), ExplicitError> {
        let n = self.events.len();
        for a in [from, to] {
            if a >= n {
                return Err(ExplicitError::NoSuchWorld(a));
            }
        }
        self.relations
            .get_mut(agent)
            .ok_or_else(|| ExplicitError::UnknownAgent(agent.to_string()))?[from]
            .insert(to);
        Ok(())
    }

    pub fn agents(&self) -> &[String] {
        &self.agents
    }

    pub fn events(&self) -> &[ActionEvent] {
        &self.events
    }

    pub fn event_index(&self, name: &str) -> Option<usize> {
        self.events.iter().position(|e| e.name == name)
    }

    pub fn successors(&self, agent: &str, a: usize) -> Result<&BTreeSet<usize>, ExplicitError> {
        self.relations
            .get(agent)
            .ok_or_else(|| ExplicitError::UnknownAgent(agent.to_string()))?
            .get(a)
            .ok_or(ExplicitError::NoSuchWorld(a))
    }

    pub fn has_edge(&self, agent: &str, from: usize, to: usize) -> Result<bool, ExplicitError> {
        Ok(self.successors(agent, from)?.contains(&to))
    }

    /// Propositions with an explicit postcondition in some event.
    pub fn changed_atoms(&self) -> BTreeSet<String> {
        self.events
            .iter()
            .flat_map(|e| e.post.keys().cloned())
            .collect()
    }
}

/// `M × A`, remembering which `(w, a)` each new world came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Product {
    pub model: KripkeModel,
    pub origins: Vec<(usize, usize)>,
}

impl Product {
    pub fn world_of(&self, w: usize, a: usize) -> Option<usize> {
        self.origins.iter().position(|o| *o == (w, a))
    }
}

/// Product update. Worlds are the pairs `(w, a)` with `w ⊨ pre(a)`, in
/// lexicographic order; the result may be empty.
pub fn product_update(m: &KripkeModel, act: &ActionModel) -> Result<Product, ExplicitError> {
    if let Some(a) = act.agents.iter().find(|a| !m.agents.contains(a)) {
        return Err(ExplicitError::UnknownAgent(a.clone()));
    }
    for e in &act.events {
        if let Some(p) = e.post.keys().find(|p| !m.vocabulary.contains(p)) {
            return Err(ExplicitError::UnknownAtom(p.clone()));
        }
    }
    let mut eval = Evaluator::new(m);
    let mut pre = Vec::new();
    let mut post: Vec<BTreeMap<&String, Vec<bool>>> = Vec::new();
    for e in &act.events {
        pre.push(eval.extension(&e.pre)?);
        let mut values = BTreeMap::new();
        for (p, f) in &e.post {
            values.insert(p, eval.extension(f)?);
        }
        post.push(values);
    }

    let mut out = KripkeModel::new(&m.vocabulary, &m.agents);
    let mut origins = Vec::new();
    for (w, world) in m.worlds.iter().enumerate() {
        for (a, event) in act.events.iter().enumerate() {
            if !pre[a][w] {
                continue;
            }
            let valuation = m
                .vocabulary
                .iter()
                .filter(|p| match post[a].get(p) {
                    Some(values) => values[w],
                    None => world.valuation.contains(*p),
                })
                .cloned()
                .collect();
            out.add_world(format!("({},{})", world.name, event.name), valuation)?;
            origins.push((w, a));
        }
    }
    for agent in &m.agents {
        let empty = Vec::new();
        let act_rel = act.relations.get(agent).unwrap_or(&empty);
        for (x, &(w, a)) in origins.iter().enumerate() {
            for (y, &(v, b)) in origins.iter().enumerate() {
                let event_edge = act_rel.get(a).is_some_and(|s| s.contains(&b));
                if event_edge && m.relations[agent][w].contains(&v) {
                    out.add_edge(agent, x, y)?;
                }
            }
        }
    }
    Ok(Product {
        model: out,
        origins,
    })
}

/// `(M, w) × (A, a)`; fails if `w` does not satisfy `pre(a)`.
pub fn update_pointed(
    pm: &PointedModel,
    act: &ActionModel,
    event: usize,
) -> Result<(PointedModel, Product), ExplicitError> {
    if event >= act.events.len() {
        return Err(ExplicitError::NoSuchWorld(event));
    }
    let product = product_update(&pm.model, act)?;
    let point = product.world_of(pm.point, event).ok_or_else(|| {
        ExplicitError::PointEliminated(format!(
            "({},{})",
            pm.model.worlds[pm.point].name, act.events[event].name
        ))
    })?;
    Ok((PointedModel::new(product.model.clone(), point)?, product))
}

/// The Kripke model of a belief structure: one world per state, named after
/// the state; `w Rᵢ v` iff `w ∪ v'` satisfies `Ωᵢ`. `states[k]` is the state
/// of world `k`.
#[derive(Clone, Debug)]
pub struct StructureModel {
    pub model: KripkeModel,
    pub states: Vec<State>,
}

impl StructureModel {
    pub fn world_of(&self, s: &State) -> Option<usize> {
        self.states.iter().position(|t| t == s)
    }
}

pub fn model_of_structure(f: &BeliefStructure) -> Result<StructureModel, ExplicitError> {
    let states = f.states();
    let vocabulary = f.vocabulary();
    let mut model = KripkeModel::new(&vocabulary, f.agents());
    for s in &states {
        model.add_world(format_state(s), s.clone())?;
    }
    for agent in f.agents() {
        for (w, s) in states.iter().enumerate() {
            for (v, t) in states.iter().enumerate() {
                if f.relates(agent, s, t)? {
                    model.add_edge(agent, w, v)?;
                }
            }
        }
    }
    Ok(StructureModel { model, states })
}

/// Encodes a Kripke model as a belief structure over `V ∪ D`.
///
/// When the valuation already separates the worlds, `D` is empty. Otherwise
/// `⌈log₂|W|⌉` fresh propositions label the worlds by the binary digits of
/// their index. Returns the structure and the state `g(w)` of each world.
pub fn structure_of_model(
    m: &KripkeModel,
    engine: &Engine,
) -> Result<(BeliefStructure, Vec<State>), ExplicitError> {
    let n = m.worlds.len();
    let separated = m
        .worlds
        .iter()
        .map(|w| &w.valuation)
        .collect::<BTreeSet<_>>()
        .len()
        == n;
    let bits = if separated { 0 } else { ceil_log2(n) };
    let labels = fresh_names("d", bits, &m.vocabulary);

    let mut names = m.vocabulary.clone();
    names.extend(labels.iter().cloned());
    let vars: Vec<VarId> = names.iter().map(|p| engine.new_var(p)).collect();
    let by_name: BTreeMap<&String, VarId> = names.iter().zip(vars.iter().copied()).collect();

    let g: Vec<State> = m
        .worlds
        .iter()
        .enumerate()
        .map(|(k, w)| {
            let mut s = w.valuation.clone();
            s.extend((0..bits).filter(|b| k >> b & 1 == 1).map(|b| labels[b].clone()));
            s
        })
        .collect();
    let cube = |s: &State, primed: bool| -> BoolFn {
        let true_vars: BTreeSet<VarId> = s
            .iter()
            .map(|p| {
                let v = by_name[p];
                if primed {
                    engine.primed(v)
                } else {
                    v
                }
            })
            .collect();
        let over: Vec<VarId> = vars
            .iter()
            .map(|v| if primed { engine.primed(*v) } else { *v })
            .collect();
        engine.cube(&over, &true_vars)
    };

    let law = g
        .iter()
        .fold(engine.constant(false), |acc, s| acc.or(&cube(s, false)));
    let mut observations = BTreeMap::new();
    for agent in &m.agents {
        let mut obs = engine.constant(false);
        for (w, succ) in m.relations[agent].iter().enumerate() {
            for v in succ {
                obs = obs.or(&cube(&g[w], false).and(&cube(&g[*v], true)));
            }
        }
        observations.insert(agent.clone(), obs);
    }
    let structure = BeliefStructure::from_parts(engine, m.agents.clone(), vars, law, observations)?;
    Ok((structure, g))
}

pub(crate) fn ceil_log2(n: usize) -> usize {
    let mut bits = 0;
    while (1usize << bits) < n {
        bits += 1;
    }
    bits
}

/// `count` names `{prefix}1, {prefix}2, …`, each extended with underscores
/// until it avoids `reserved`.
pub(crate) fn fresh_names<S: AsRef<str>>(prefix: &str, count: usize, reserved: &[S]) -> Vec<String> {
    (1..=count)
        .map(|k| {
            let mut name = format!("{prefix}{k}");
            while reserved.iter().any(|r| r.as_ref() == name) {
                name.push('_');
            }
            name
        })
        .collect()
}
