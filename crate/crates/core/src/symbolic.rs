//! Belief structures, their semantics via local boolean translation, and
//! transformers with factual change.
//!
//! A [`BeliefStructure`] is a vocabulary `V`, a state law `θ` over `V` and one
//! observation function `Ωᵢ` over `V ∪ V'` per agent. Its states are the
//! subsets of `V` satisfying `θ`; agent `i` considers `t` possible at `s` iff
//! `s ∪ t'` satisfies `Ωᵢ`.
//!
//! Applying a [`Transformer`] adds event propositions `V⁺`, keeps the old
//! values of the modified propositions `V₋` in fresh circled copies and
//! rewrites the law and observations accordingly. Everything is done with
//! diagram operations; no state is ever enumerated.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::boolfun::{BoolFn, BoolFnError, Engine, VarId};
use crate::language::{self, decompile, Formula, LanguageError, CIRCLE};

/// A set of true propositions.
pub type State = BTreeSet<String>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymbolicError {
    #[error(transparent)]
    Language(#[from] LanguageError),
    #[error(transparent)]
    BoolFn(#[from] BoolFnError),
    #[error("`{0}` is declared twice")]
    Duplicate(String),
    #[error("`{0}` is not a valid proposition name")]
    InvalidName(String),
    #[error("`{0}` is not in the vocabulary")]
    UnknownAtom(String),
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("{0} is not a state: it violates the state law")]
    NotAState(String),
    #[error("event proposition `{0}` already belongs to the vocabulary")]
    EventVocabularyClash(String),
    #[error("event proposition `{0}` occurs under a belief modality in the event law")]
    EventAtomUnderBelief(String),
    #[error("observation of agent `{agent}` mentions `{atom}`, which is not an event proposition")]
    EventObservationScope { agent: String, atom: String },
    #[error("actual event {0} is not a subset of the event vocabulary")]
    ActualOutsideEvent(String),
    #[error("event not executable: the new state {0} violates the new state law")]
    NotExecutable(String),
    #[error("`{0}` is not determined by the state law")]
    NotDetermined(String),
}

pub fn format_state(s: &State) -> String {
    let items: Vec<&str> = s.iter().map(String::as_str).collect();
    format!("{{{}}}", items.join(", "))
}

/// `(V, θ, Ω)`.
#[derive(Clone, Debug)]
pub struct BeliefStructure {
    engine: Engine,
    agents: Vec<String>,
    vocabulary: Vec<VarId>,
    names: BTreeMap<String, VarId>,
    law: BoolFn,
    observations: BTreeMap<String, BoolFn>,
}

impl PartialEq for BeliefStructure {
    fn eq(&self, other: &Self) -> bool {
        self.engine == other.engine
            && self.agents == other.agents
            && self.vocabulary == other.vocabulary
            && self.law == other.law
            && self.observations == other.observations
    }
}

impl BeliefStructure {
    /// Allocates fresh variables for `vocabulary` in `engine` and compiles the
    /// law and observations. Agents without an observation get `⊤`.
    pub fn new<S: AsRef<str>>(
        engine: &Engine,
        agents: &[S],
        vocabulary: &[S],
        law: &Formula,
        observations: &BTreeMap<String, Formula>,
    ) -> Result<Self, SymbolicError> {
        let agents = unique_names(agents, false)?;
        let names = unique_names(vocabulary, true)?;
        let vars: Vec<VarId> = names.iter().map(|n| engine.new_var(n)).collect();
        let base: BTreeMap<String, VarId> = names.iter().cloned().zip(vars.iter().copied()).collect();
        let mut doubled = base.clone();
        for (n, v) in &base {
            doubled.insert(format!("{n}'"), engine.primed(*v));
        }
        let law = compile_checked(law, engine, &base)?;
        let mut obs = BTreeMap::new();
        for (agent, f) in observations {
            if !agents.contains(agent) {
                return Err(SymbolicError::UnknownAgent(agent.clone()));
            }
            obs.insert(agent.clone(), compile_checked(f, engine, &doubled)?);
        }
        Self::from_parts(engine, agents, vars, law, obs)
    }

    /// Assembles a structure from already compiled parts. Variables in
    /// `vocabulary` must be unprimed and have distinct names.
    pub fn from_parts(
        engine: &Engine,
        agents: Vec<String>,
        vocabulary: Vec<VarId>,
        law: BoolFn,
        mut observations: BTreeMap<String, BoolFn>,
    ) -> Result<Self, SymbolicError> {
        let mut names = BTreeMap::new();
        for v in &vocabulary {
            if names.insert(engine.name(*v), *v).is_some() {
                return Err(SymbolicError::Duplicate(engine.name(*v)));
            }
        }
        let in_vocab: BTreeSet<VarId> = vocabulary.iter().copied().collect();
        let doubled: BTreeSet<VarId> = vocabulary
            .iter()
            .flat_map(|v| [*v, engine.primed(*v)])
            .collect();
        if let Some(v) = law.support().into_iter().find(|v| !in_vocab.contains(v)) {
            return Err(SymbolicError::UnknownAtom(engine.name(v)));
        }
        for (agent, f) in &observations {
            if !agents.contains(agent) {
                return Err(SymbolicError::UnknownAgent(agent.clone()));
            }
            if let Some(v) = f.support().into_iter().find(|v| !doubled.contains(v)) {
                return Err(SymbolicError::UnknownAtom(engine.name(v)));
            }
        }
        for agent in &agents {
            observations
                .entry(agent.clone())
                .or_insert_with(|| engine.constant(true));
        }
        Ok(BeliefStructure {
            engine: engine.clone(),
            agents,
            vocabulary,
            names,
            law,
            observations,
        })
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn agents(&self) -> &[String] {
        &self.agents
    }

    /// Proposition names in vocabulary order.
    pub fn vocabulary(&self) -> Vec<String> {
        self.vocabulary.iter().map(|v| self.engine.name(*v)).collect()
    }

    pub fn vars(&self) -> &[VarId] {
        &self.vocabulary
    }

    pub fn var(&self, name: &str) -> Option<VarId> {
        self.names.get(name).copied()
    }

    pub fn law(&self) -> &BoolFn {
        &self.law
    }

    pub fn observation(&self, agent: &str) -> Result<&BoolFn, SymbolicError> {
        self.observations
            .get(agent)
            .ok_or_else(|| SymbolicError::UnknownAgent(agent.to_string()))
    }

    /// The law as a readable formula.
    pub fn law_formula(&self) -> Formula {
        decompile(&self.law)
    }

    pub fn observation_formula(&self, agent: &str) -> Result<Formula, SymbolicError> {
        Ok(decompile(self.observation(agent)?))
    }

    /// Name lookup over `V ∪ V'`.
    pub fn doubled_env(&self) -> BTreeMap<String, VarId> {
        let mut env = self.names.clone();
        for (n, v) in &self.names {
            env.insert(format!("{n}'"), self.engine.primed(*v));
        }
        env
    }

    /// Compiles a boolean formula over `V ∪ V'` in this structure's engine.
    pub fn compile(&self, f: &Formula) -> Result<BoolFn, SymbolicError> {
        compile_checked(f, &self.engine, &self.doubled_env())
    }

    pub fn assignment(&self, s: &State) -> Result<BTreeSet<VarId>, SymbolicError> {
        s.iter()
            .map(|p| self.var(p).ok_or_else(|| SymbolicError::UnknownAtom(p.clone())))
            .collect()
    }

    fn primed_assignment(&self, t: &State) -> Result<BTreeSet<VarId>, SymbolicError> {
        Ok(self
            .assignment(t)?
            .into_iter()
            .map(|v| self.engine.primed(v))
            .collect())
    }

    /// Every subset of the vocabulary satisfying the law, in the order of
    /// [`BoolFn::sat_assignments`].
    pub fn states(&self) -> Vec<State> {
        self.law
            .sat_assignments(&self.vocabulary)
            .into_iter()
            .map(|a| a.into_iter().map(|v| self.engine.name(v)).collect())
            .collect()
    }

    pub fn is_state(&self, s: &State) -> Result<bool, SymbolicError> {
        Ok(self.law.holds(&self.assignment(s)?))
    }

    /// Whether `s ∪ t'` satisfies the agent's observation.
    pub fn relates(&self, agent: &str, s: &State, t: &State) -> Result<bool, SymbolicError> {
        let mut a = self.assignment(s)?;
        a.extend(self.primed_assignment(t)?);
        Ok(self.observation(agent)?.holds(&a))
    }

    /// `‖φ‖`, a function over `V` true exactly at the states where `φ` holds.
    pub fn bool_translate(&self, f: &Formula) -> Result<BoolFn, SymbolicError> {
        Translator::new(self).translate(f)
    }

    /// Rewrites the structure over `V ∖ remove`, fixing every removed
    /// proposition to the value the law forces on it.
    pub fn minimize(&self, keep: &BTreeSet<String>) -> Result<BeliefStructure, SymbolicError> {
        if let Some(p) = keep.iter().find(|p| self.var(p).is_none()) {
            return Err(SymbolicError::UnknownAtom(p.clone()));
        }
        let remove: Vec<String> = self
            .vocabulary()
            .into_iter()
            .filter(|p| !keep.contains(p))
            .collect();
        let mut fixed = Vec::new();
        for p in remove {
            let v = self.names[&p];
            let value = self
                .determined_value(v)
                .ok_or(SymbolicError::NotDetermined(p))?;
            fixed.push((v, value));
        }
        Ok(self.remove_fixed(&fixed))
    }

    /// Removes those `candidates` that the law determines and returns the
    /// names actually removed.
    pub fn minimize_determined(&self, candidates: &BTreeSet<String>) -> (BeliefStructure, Vec<String>) {
        let fixed: Vec<(VarId, bool)> = self
            .vocabulary
            .iter()
            .filter(|v| candidates.contains(&self.engine.name(**v)))
            .filter_map(|v| self.determined_value(*v).map(|b| (*v, b)))
            .collect();
        let removed = fixed.iter().map(|(v, _)| self.engine.name(*v)).collect();
        (self.remove_fixed(&fixed), removed)
    }

    /// `Some(b)` if the law forces the variable to `b`.
    fn determined_value(&self, v: VarId) -> Option<bool> {
        let x = self.engine.var(v);
        if self.law.entails(&x) {
            Some(true)
        } else if self.law.entails(&x.not()) {
            Some(false)
        } else {
            None
        }
    }

    fn remove_fixed(&self, fixed: &[(VarId, bool)]) -> BeliefStructure {
        let mut law = self.law.clone();
        let mut observations = self.observations.clone();
        for &(v, value) in fixed {
            law = law.restrict(v, value);
            let pv = self.engine.primed(v);
            for obs in observations.values_mut() {
                *obs = obs.restrict(v, value).restrict(pv, value);
            }
        }
        let gone: BTreeSet<VarId> = fixed.iter().map(|(v, _)| *v).collect();
        let vocabulary: Vec<VarId> = self
            .vocabulary
            .iter()
            .copied()
            .filter(|v| !gone.contains(v))
            .collect();
        let names = self
            .names
            .iter()
            .filter(|(_, v)| !gone.contains(v))
            .map(|(n, v)| (n.clone(), *v))
            .collect();
        BeliefStructure {
            engine: self.engine.clone(),
            agents: self.agents.clone(),
            vocabulary,
            names,
            law,
            observations,
        }
    }

    /// `F × X` for a transformer with factual change.
    pub fn transform(&self, x: &Transformer) -> Result<BeliefStructure, SymbolicError> {
        Ok(self.transform_detailed(x)?.structure)
    }

    /// Like [`BeliefStructure::transform`], also returning the names chosen
    /// for the circled copies.
    pub fn transform_detailed(&self, x: &Transformer) -> Result<Transformation, SymbolicError> {
        transform_impl(self, x, None)
    }
}

impl fmt::Display for BeliefStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "vocabulary: {}", self.vocabulary().join(", "))?;
        writeln!(f, "law: {}", self.law_formula())?;
        for agent in &self.agents {
            writeln!(f, "obs {agent}: {}", decompile(&self.observations[agent]))?;
        }
        Ok(())
    }
}

fn unique_names<S: AsRef<str>>(items: &[S], props: bool) -> Result<Vec<String>, SymbolicError> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for item in items {
        let s = item.as_ref().to_string();
        if props && !language::is_valid_name(&s) {
            return Err(SymbolicError::InvalidName(s));
        }
        if !seen.insert(s.clone()) {
            return Err(SymbolicError::Duplicate(s));
        }
        out.push(s);
    }
    Ok(out)
}

fn compile_checked(
    f: &Formula,
    engine: &Engine,
    env: &BTreeMap<String, VarId>,
) -> Result<BoolFn, SymbolicError> {
    f.require_boolean()?;
    if let Some(p) = f.vocabulary().into_iter().find(|p| !env.contains_key(p)) {
        return Err(SymbolicError::UnknownAtom(p));
    }
    Ok(language::compile(f, engine, env)?)
}

/// Local boolean translation with memoization.
///
/// Atoms listed as free (the event propositions of a transformer) are
/// compiled as plain variables and must not occur under a modality.
pub struct Translator<'a> {
    structure: &'a BeliefStructure,
    free: BTreeMap<String, VarId>,
    prime_map: BTreeMap<VarId, VarId>,
    primed_vars: Vec<VarId>,
    primed_law: Option<BoolFn>,
    cache: HashMap<Formula, BoolFn>,
}

impl<'a> Translator<'a> {
    pub fn new(structure: &'a BeliefStructure) -> Self {
        Self::with_free(structure, BTreeMap::new())
    }

    pub fn with_free(structure: &'a BeliefStructure, free: BTreeMap<String, VarId>) -> Self {
        let prime_map: BTreeMap<VarId, VarId> = structure
            .vocabulary
            .iter()
            .map(|v| (*v, structure.engine.primed(*v)))
            .collect();
        let primed_vars = prime_map.values().copied().collect();
        Translator {
            structure,
            free,
            prime_map,
            primed_vars,
            primed_law: None,
            cache: HashMap::new(),
        }
    }

    pub fn translate(&mut self, f: &Formula) -> Result<BoolFn, SymbolicError> {
        self.check(f, false)?;
        self.go(f)
    }

    fn check(&self, f: &Formula, under_belief: bool) -> Result<(), SymbolicError> {
        match f {
            Formula::Atom(p) => {
                if self.free.contains_key(p) {
                    if under_belief {
                        return Err(SymbolicError::EventAtomUnderBelief(p.clone()));
                    }
                } else if self.structure.var(p).is_none() {
                    return Err(SymbolicError::UnknownAtom(p.clone()));
                }
                Ok(())
            }
            Formula::Believes(i, g) => {
                if !self.structure.agents.contains(i) {
                    return Err(SymbolicError::UnknownAgent(i.clone()));
                }
                self.check(g, true)
            }
            _ => f
                .children()
                .into_iter()
                .try_for_each(|g| self.check(g, under_belief)),
        }
    }

    fn go(&mut self, f: &Formula) -> Result<BoolFn, SymbolicError> {
        if let Some(r) = self.cache.get(f) {
            return Ok(r.clone());
        }
        let engine = self.structure.engine.clone();
        let r = match f {
            Formula::Top => engine.constant(true),
            Formula::Bot => engine.constant(false),
            Formula::Atom(p) => {
                let v = self.structure.var(p).or_else(|| self.free.get(p).copied());
                engine.var(v.ok_or_else(|| SymbolicError::UnknownAtom(p.clone()))?)
            }
            Formula::Not(g) => self.go(g)?.not(),
            Formula::And(gs) => {
                let mut acc = engine.constant(true);
                for g in gs {
                    acc = acc.and(&self.go(g)?);
                }
                acc
            }
            Formula::Or(gs) => {
                let mut acc = engine.constant(false);
                for g in gs {
                    acc = acc.or(&self.go(g)?);
                }
                acc
            }
            Formula::Implies(a, b) => self.go(a)?.implies(&self.go(b)?),
            Formula::Iff(a, b) => self.go(a)?.iff(&self.go(b)?),
            Formula::Believes(i, g) => {
                // ∀V'(θ' → (Ωᵢ → ‖g‖'))
                let body = self.go(g)?.rename(&self.prime_map)?;
                let primed_law = match &self.primed_law {
                    Some(l) => l.clone(),
                    None => {
                        let l = self.structure.law.rename(&self.prime_map)?;
                        self.primed_law = Some(l.clone());
                        l
                    }
                };
                let obs = self.structure.observation(i)?;
                primed_law
                    .implies(&obs.implies(&body))
                    .forall(&self.primed_vars)
            }
        };
        self.cache.insert(f.clone(), r.clone());
        Ok(r)
    }
}

/// `(F, s)`: a belief structure with an actual state.
#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    structure: BeliefStructure,
    state: State,
}

impl Scene {
    pub fn new(structure: BeliefStructure, state: State) -> Result<Self, SymbolicError> {
        if !structure.is_state(&state)? {
            return Err(SymbolicError::NotAState(format_state(&state)));
        }
        Ok(Scene { structure, state })
    }

    pub fn structure(&self) -> &BeliefStructure {
        &self.structure
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    /// Truth of `φ` at the actual state, decided through the boolean
    /// translation.
    pub fn eval(&self, f: &Formula) -> Result<bool, SymbolicError> {
        let t = self.structure.bool_translate(f)?;
        Ok(t.holds(&self.structure.assignment(&self.state)?))
    }

    pub fn minimize(&self, keep: &BTreeSet<String>) -> Result<Scene, SymbolicError> {
        let structure = self.structure.minimize(keep)?;
        let state = self.state.iter().filter(|p| keep.contains(*p)).cloned().collect();
        Ok(Scene { structure, state })
    }

    /// Drops the determined `candidates`; see
    /// [`BeliefStructure::minimize_determined`].
    pub fn minimize_determined(&self, candidates: &BTreeSet<String>) -> (Scene, Vec<String>) {
        let (structure, removed) = self.structure.minimize_determined(candidates);
        let state = self
            .state
            .iter()
            .filter(|p| !removed.contains(p))
            .cloned()
            .collect();
        (Scene { structure, state }, removed)
    }

    /// `(F, s) × (X, x)`.
    pub fn apply(&self, event: &Event) -> Result<Scene, SymbolicError> {
        apply_impl(self, event, None)
    }
}

/// `(V⁺, θ⁺, V₋, θ₋, Ω⁺)`. The modified set `V₋` is the key set of
/// `changes`; agents missing from `observations` observe nothing (`⊤`).
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Transformer {
    pub add_vocab: Vec<String>,
    pub event_law: Formula,
    pub changes: BTreeMap<String, Formula>,
    pub observations: BTreeMap<String, Formula>,
}

impl Transformer {
    /// The transformer changing nothing.
    pub fn identity() -> Self {
        Self::default()
    }

    /// The publicly observed assignment `p := φ`.
    pub fn public_change(p: impl Into<String>, value: Formula) -> Self {
        Transformer {
            changes: BTreeMap::from([(p.into(), value)]),
            ..Self::default()
        }
    }

    pub fn modified(&self) -> BTreeSet<String> {
        self.changes.keys().cloned().collect()
    }

    /// The events of this transformer, i.e. the subsets of `V⁺`, in binary
    /// counting order with the first event proposition as least significant
    /// bit.
    pub fn event_labels(&self) -> Vec<State> {
        let n = self.add_vocab.len();
        (0..1usize << n)
            .map(|k| {
                (0..n)
                    .filter(|b| k >> b & 1 == 1)
                    .map(|b| self.add_vocab[b].clone())
                    .collect()
            })
            .collect()
    }
}

/// A transformer with an actual event `x ⊆ V⁺`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Event {
    pub transformer: Transformer,
    pub actual: State,
}

impl Event {
    pub fn new(transformer: Transformer, actual: State) -> Self {
        Event {
            transformer,
            actual,
        }
    }
}

/// Result of applying a transformer, with enough bookkeeping to map old
/// states and events to new states.
#[derive(Clone, Debug)]
pub struct Transformation {
    pub structure: BeliefStructure,
    /// Modified proposition ↦ name of its circled copy.
    pub copies: BTreeMap<String, String>,
    changes: BTreeMap<String, Formula>,
}

impl Transformation {
    /// `sⁿᵉʷ = (s ∖ V₋) ∪ (s ∩ V₋)° ∪ x ∪ {p ∈ V₋ | s ∪ x ⊨ θ₋(p)}`.
    pub fn successor_state(&self, s: &State, x: &State) -> Result<State, SymbolicError> {
        let mut out: State = s
            .iter()
            .filter(|p| !self.changes.contains_key(*p))
            .cloned()
            .collect();
        for p in s.iter().filter(|p| self.changes.contains_key(*p)) {
            out.insert(self.copies[p].clone());
        }
        out.extend(x.iter().cloned());
        let old: State = s.union(x).cloned().collect();
        for (p, f) in &self.changes {
            if f.eval_bool(&old)? {
                out.insert(p.clone());
            }
        }
        Ok(out)
    }
}

/// Seeded faults used to check that the property suites catch real bugs.
#[doc(hidden)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mutation {
    /// Leave old observations on the new values of modified propositions
    /// instead of moving them to the circled copies.
    DropObservationCircling,
}

#[doc(hidden)]
pub fn transform_mutated(
    f: &BeliefStructure,
    x: &Transformer,
    mutation: Option<Mutation>,
) -> Result<Transformation, SymbolicError> {
    transform_impl(f, x, mutation)
}

#[doc(hidden)]
pub fn apply_mutated(
    sc: &Scene,
    ev: &Event,
    mutation: Option<Mutation>,
) -> Result<Scene, SymbolicError> {
    apply_impl(sc, ev, mutation)
}

fn fresh_copy_name(p: &str, taken: &BTreeSet<String>) -> String {
    let mut name = format!("{p}{CIRCLE}");
    while taken.contains(&name) {
        name.push(CIRCLE);
    }
    name
}

fn transform_impl(
    f: &BeliefStructure,
    x: &Transformer,
    mutation: Option<Mutation>,
) -> Result<Transformation, SymbolicError> {
    let engine = &f.engine;

    let mut plus_names = BTreeSet::new();
    for p in &x.add_vocab {
        if !language::is_valid_name(p) {
            return Err(SymbolicError::InvalidName(p.clone()));
        }
        if f.var(p).is_some() {
            return Err(SymbolicError::EventVocabularyClash(p.clone()));
        }
        if !plus_names.insert(p.clone()) {
            return Err(SymbolicError::Duplicate(p.clone()));
        }
    }
    if let Some(p) = x.changes.keys().find(|p| f.var(p).is_none()) {
        return Err(SymbolicError::UnknownAtom(p.clone()));
    }
    for agent in x.observations.keys() {
        if !f.agents.contains(agent) {
            return Err(SymbolicError::UnknownAgent(agent.clone()));
        }
    }

    let plus: Vec<VarId> = x.add_vocab.iter().map(|p| engine.new_var(p)).collect();
    let plus_env: BTreeMap<String, VarId> =
        x.add_vocab.iter().cloned().zip(plus.iter().copied()).collect();

    // θ ∧ ‖θ⁺‖
    let event_law = Translator::with_free(f, plus_env.clone()).translate(&x.event_law)?;
    let pre = f.law.and(&event_law);

    let mut taken: BTreeSet<String> = f.names.keys().cloned().collect();
    taken.extend(plus_names.iter().cloned());
    let mut copies = BTreeMap::new();
    let mut copy_vars = Vec::new();
    let mut circ = BTreeMap::new();
    let mut circ_both = BTreeMap::new();
    for p in x.changes.keys() {
        let v = f.names[p];
        let name = fresh_copy_name(p, &taken);
        taken.insert(name.clone());
        let c = engine.new_copy(v, &name);
        circ.insert(v, c);
        circ_both.insert(v, c);
        circ_both.insert(engine.primed(v), engine.primed(c));
        copies.insert(p.clone(), name);
        copy_vars.push(c);
    }

    let mut change_env = f.names.clone();
    change_env.extend(plus_env.clone());
    let mut law = pre.rename(&circ)?;
    for (p, g) in &x.changes {
        let value = compile_checked(g, engine, &change_env)?.rename(&circ)?;
        law = law.and(&engine.var(f.names[p]).iff(&value));
    }

    let mut obs_env = plus_env.clone();
    for (n, v) in &plus_env {
        obs_env.insert(format!("{n}'"), engine.primed(*v));
    }
    let mut observations = BTreeMap::new();
    for agent in &f.agents {
        let old = &f.observations[agent];
        let old = match mutation {
            Some(Mutation::DropObservationCircling) => old.clone(),
            None => old.rename(&circ_both)?,
        };
        let added = match x.observations.get(agent) {
            Some(g) => {
                g.require_boolean()?;
                if let Some(atom) = g.vocabulary().into_iter().find(|a| !obs_env.contains_key(a)) {
                    return Err(SymbolicError::EventObservationScope {
                        agent: agent.clone(),
                        atom,
                    });
                }
                language::compile(g, engine, &obs_env)?
            }
            None => engine.constant(true),
        };
        observations.insert(agent.clone(), old.and(&added));
    }

    let mut vocabulary = f.vocabulary.clone();
    vocabulary.extend(plus);
    vocabulary.extend(copy_vars);
    let structure = BeliefStructure::from_parts(engine, f.agents.clone(), vocabulary, law, observations)?;
    Ok(Transformation {
        structure,
        copies,
        changes: x.changes.clone(),
    })
}

fn apply_impl(sc: &Scene, ev: &Event, mutation: Option<Mutation>) -> Result<Scene, SymbolicError> {
    if ev
        .actual
        .iter()
        .any(|p| !ev.transformer.add_vocab.contains(p))
    {
        return Err(SymbolicError::ActualOutsideEvent(format_state(&ev.actual)));
    }
    let t = transform_impl(&sc.structure, &ev.transformer, mutation)?;
    let state = t.successor_state(&sc.state, &ev.actual)?;
    if !t.structure.is_state(&state)? {
        return Err(SymbolicError::NotExecutable(format_state(&state)));
    }
    Ok(Scene {
        structure: t.structure,
        state,
    })
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

    fn obs(pairs: &[(&str, &str)]) -> BTreeMap<String, Formula> {
        pairs.iter().map(|(a, s)| (a.to_string(), f(s))).collect()
    }

    fn coin() -> BeliefStructure {
        BeliefStructure::new(
            &Engine::new(),
            &["a", "b"],
            &["p"],
            &f("p"),
            &obs(&[("a", "p <-> p'"), ("b", "p <-> p'")]),
        )
        .unwrap()
    }

    fn coin_flip() -> Transformer {
        Transformer {
            add_vocab: vec!["q".into()],
            event_law: Formula::Top,
            changes: BTreeMap::from([("p".into(), f("q"))]),
            observations: obs(&[("b", "q <-> q'")]),
        }
    }

    #[test]
    fn coin_transform_matches_the_worked_example() {
        let s = coin();
        let r = s.transform(&coin_flip()).unwrap();
        assert_eq!(r.vocabulary(), vec!["p", "q", "p°"]);
        assert_eq!(*r.law(), r.compile(&f("p° & (p <-> q)")).unwrap());
        assert_eq!(*r.observation("a").unwrap(), r.compile(&f("p° <-> p°'")).unwrap());
        assert_eq!(
            *r.observation("b").unwrap(),
            r.compile(&f("(p° <-> p°') & (q <-> q')")).unwrap()
        );
    }

    #[test]
    fn coin_minimization() {
        let r = coin().transform(&coin_flip()).unwrap();
        let m = r.minimize(&st(&["p", "q"])).unwrap();
        assert_eq!(m.vocabulary(), vec!["p", "q"]);
        assert_eq!(*m.law(), m.compile(&f("p <-> q")).unwrap());
        assert!(m.observation("a").unwrap().is_true());
        assert_eq!(*m.observation("b").unwrap(), m.compile(&f("q <-> q'")).unwrap());
        // the minimized belief about p is trivially false: a cannot rule out either side
        assert!(m.bool_translate(&f("[a] p")).unwrap().is_false());
    }

    #[test]
    fn coin_event_state() {
        let sc = Scene::new(coin(), st(&["p"])).unwrap();
        let ev = Event::new(coin_flip(), st(&["q"]));
        let next = sc.apply(&ev).unwrap();
        assert_eq!(*next.state(), st(&["p", "p°", "q"]));
    }

    #[test]
    fn public_change_law() {
        let s = BeliefStructure::new(&Engine::new(), &["a"], &["p", "r"], &f("p | r"), &BTreeMap::new())
            .unwrap();
        let r = s.transform(&Transformer::public_change("p", f("~p & r"))).unwrap();
        let expect = r.compile(&f("(p° | r) & (p <-> ~p° & r)")).unwrap();
        assert_eq!(*r.law(), expect);
    }

    #[test]
    fn identity_transformer_changes_nothing() {
        let s = coin();
        let r = s.transform(&Transformer::identity()).unwrap();
        assert_eq!(r, s);
        let sc = Scene::new(s, st(&["p"])).unwrap();
        let next = sc.apply(&Event::new(Transformer::identity(), st(&[]))).unwrap();
        assert_eq!(next, sc);
    }

    #[test]
    fn transform_without_change_conjoins() {
        let s = coin();
        let x = Transformer {
            add_vocab: vec!["e".into()],
            event_law: f("e -> p"),
            changes: BTreeMap::new(),
            observations: obs(&[("a", "e'")]),
        };
        let r = s.transform(&x).unwrap();
        let law = s.law().and(&r.compile(&f("e -> p")).unwrap());
        assert_eq!(*r.law(), law);
        let oa = s.observation("a").unwrap().and(&r.compile(&f("e'")).unwrap());
        assert_eq!(*r.observation("a").unwrap(), oa);
    }

    #[test]
    fn transform_errors() {
        let s = coin();
        let clash = Transformer {
            add_vocab: vec!["p".into()],
            ..Transformer::default()
        };
        assert_eq!(
            s.transform(&clash),
            Err(SymbolicError::EventVocabularyClash("p".into()))
        );
        let bad_key = Transformer::public_change("z", Formula::Top);
        assert_eq!(s.transform(&bad_key), Err(SymbolicError::UnknownAtom("z".into())));
        let scope = Transformer {
            add_vocab: vec!["q".into()],
            observations: obs(&[("a", "p <-> q'")]),
            ..Transformer::default()
        };
        assert!(matches!(
            s.transform(&scope),
            Err(SymbolicError::EventObservationScope { .. })
        ));
        let under = Transformer {
            add_vocab: vec!["q".into()],
            event_law: f("[a] q"),
            ..Transformer::default()
        };
        assert_eq!(
            s.transform(&under),
            Err(SymbolicError::EventAtomUnderBelief("q".into()))
        );
        let epistemic_change = Transformer::public_change("p", f("[a] p"));
        assert!(matches!(
            s.transform(&epistemic_change),
            Err(SymbolicError::Language(LanguageError::NotBoolean(_)))
        ));
    }

    #[test]
    fn non_executable_event() {
        let sc = Scene::new(coin(), st(&["p"])).unwrap();
        let x = Transformer {
            event_law: f("~p"),
            ..Transformer::default()
        };
        assert!(matches!(
            sc.apply(&Event::new(x, st(&[]))),
            Err(SymbolicError::NotExecutable(_))
        ));
        let y = Transformer::identity();
        assert!(matches!(
            sc.apply(&Event::new(y, st(&["q"]))),
            Err(SymbolicError::ActualOutsideEvent(_))
        ));
    }

    #[test]
    fn minimize_rejects_undetermined() {
        let s = BeliefStructure::new(&Engine::new(), &["a"], &["p", "q"], &f("p | q"), &BTreeMap::new())
            .unwrap();
        assert_eq!(
            s.minimize(&st(&["p"])),
            Err(SymbolicError::NotDetermined("q".into()))
        );
        assert_eq!(s.minimize(&st(&["p", "q"])).unwrap(), s);
    }

    #[test]
    fn states_and_scene_checks() {
        let s = BeliefStructure::new(&Engine::new(), &["S", "A"], &["p", "t"], &f("p & ~t"), &BTreeMap::new())
            .unwrap();
        assert_eq!(s.states(), vec![st(&["p"])]);
        assert!(Scene::new(s.clone(), st(&["t"])).is_err());
        let empty = BeliefStructure::new(&Engine::new(), &["a"], &["p"], &Formula::Bot, &BTreeMap::new())
            .unwrap();
        assert!(empty.states().is_empty());
    }

    #[test]
    fn construction_errors() {
        let e = Engine::new();
        assert_eq!(
            BeliefStructure::new(&e, &["a"], &["p", "p"], &Formula::Top, &BTreeMap::new()),
            Err(SymbolicError::Duplicate("p".into()))
        );
        assert_eq!(
            BeliefStructure::new(&e, &["a"], &["p"], &f("q"), &BTreeMap::new()),
            Err(SymbolicError::UnknownAtom("q".into()))
        );
        assert_eq!(
            BeliefStructure::new(&e, &["a"], &["p"], &Formula::Top, &obs(&[("b", "Top")])),
            Err(SymbolicError::UnknownAgent("b".into()))
        );
        assert!(BeliefStructure::new(&e, &["a"], &["p"], &f("[a] p"), &BTreeMap::new()).is_err());
    }

    #[test]
    fn copy_names_avoid_live_names() {
        let e = Engine::new();
        let s = BeliefStructure::new(&e, &["a"], &["p"], &Formula::Top, &BTreeMap::new()).unwrap();
        let once = s.transform(&Transformer::public_change("p", f("~p"))).unwrap();
        let twice = once.transform(&Transformer::public_change("p", f("~p"))).unwrap();
        assert_eq!(twice.vocabulary(), vec!["p", "p°", "p°°"]);
    }
}
