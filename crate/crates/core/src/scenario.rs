//! Scenario files: an initial scene, a sequence of updates and queries.
//!
//! ```text
//! AGENTS Sally Anne
//! VARS p t
//! LAW p & ~t
//! STATE p
//!
//! EVENT Sally puts the marble in the basket
//! CHANGE t := Top
//!
//! CHECK [Sally] t EXPECT true
//! ```
//!
//! Header lines are `AGENTS`, `VARS`, `LAW`, `OBS agent: φ` and `STATE`.
//! An `EVENT` block takes `ADDVARS`, `PRE`, `CHANGE p := φ`, `OBS+ agent: φ`
//! and `ASSIGN`. An `ACTION` block takes `EVENTS`, `PRE id: φ`,
//! `POST id: p := φ`, `REL agent: a > b; …` and `ACTUAL id`. Queries are
//! `CHECK [after N] φ [EXPECT true|false]`, evaluated after `N` updates or
//! after the last one. Omitted observations and preconditions are `Top`, an
//! omitted `REL` is the total relation. `#` starts a comment.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::boolfun::Engine;
use crate::bridge::{act, trf, BridgeError};
use crate::explicit::{ActionModel, ExplicitError};
use crate::language::{is_valid_name, parse_with_agents, Formula, LanguageError};
use crate::symbolic::{format_state, BeliefStructure, Event, Scene, State, SymbolicError, Transformer};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Formula { line: usize, source: LanguageError },
    #[error("line {line}: {source}")]
    Action { line: usize, source: ExplicitError },
    #[error("initial scene: {0}")]
    Initial(SymbolicError),
    #[error("step {step} (line {line}): {source}")]
    Step {
        step: usize,
        line: usize,
        source: StepError,
    },
    #[error("line {line}: query: {source}")]
    Query { line: usize, source: SymbolicError },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StepError {
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error(transparent)]
    Bridge(#[from] BridgeError),
}

/// One update of a scenario.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Update {
    Event(Event),
    Action { model: ActionModel, actual: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub title: String,
    pub update: Update,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    /// Number of updates applied before evaluation; `None` means all.
    pub after: Option<usize>,
    pub formula: Formula,
    pub expect: Option<bool>,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scenario {
    pub agents: Vec<String>,
    pub vars: Vec<String>,
    pub law: Formula,
    pub observations: BTreeMap<String, Formula>,
    pub state: State,
    pub steps: Vec<Step>,
    pub queries: Vec<Query>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Drop circled copies that the law determines after every update.
    pub minimize: bool,
}

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub step: usize,
    pub title: String,
    pub scene: Scene,
    /// Propositions dropped by minimization after this step.
    pub removed: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryResult {
    pub query: Query,
    pub after: usize,
    pub value: bool,
}

impl QueryResult {
    pub fn passed(&self) -> bool {
        self.query.expect.is_none_or(|e| e == self.value)
    }
}

#[derive(Clone, Debug)]
pub struct Run {
    pub snapshots: Vec<Snapshot>,
    pub results: Vec<QueryResult>,
}

impl Run {
    pub fn passed(&self) -> bool {
        self.results.iter().all(QueryResult::passed)
    }

    pub fn last(&self) -> &Scene {
        &self.snapshots.last().expect("initial snapshot").scene
    }

    /// Human-readable report: every snapshot when `trace` is set, otherwise
    /// only the final one, followed by the query results.
    pub fn render(&self, trace: bool) -> String {
        let mut out = String::new();
        let shown = if trace {
            &self.snapshots[..]
        } else {
            &self.snapshots[self.snapshots.len() - 1..]
        };
        for snap in shown {
            let sc = &snap.scene;
            assert!(
                sc.structure().is_state(sc.state()).unwrap_or(false),
                "printed state violates its own law"
            );
            if snap.step == 0 {
                out.push_str("initial\n");
            } else if snap.title.is_empty() {
                out.push_str(&format!("after step {}\n", snap.step));
            } else {
                out.push_str(&format!("after step {}: {}\n", snap.step, snap.title));
            }
            for line in sc.structure().to_string().lines() {
                out.push_str(&format!("  {line}\n"));
            }
            out.push_str(&format!("  state: {}\n", format_state(sc.state())));
            if !snap.removed.is_empty() {
                out.push_str(&format!("  removed: {}\n", snap.removed.join(", ")));
            }
        }
        for r in &self.results {
            let verdict = match r.query.expect {
                None => String::new(),
                Some(e) if e == r.value => format!(" (expected {e}) ok"),
                Some(e) => format!(" (expected {e}) FAILED"),
            };
            out.push_str(&format!(
                "check after {}: {} is {}{verdict}\n",
                r.after, r.query.formula, r.value
            ));
        }
        out
    }

    pub fn to_json(&self) -> TraceView {
        TraceView {
            steps: self
                .snapshots
                .iter()
                .map(|s| StepView {
                    step: s.step,
                    title: s.title.clone(),
                    structure: StructureView::of(&s.scene),
                    removed: s.removed.clone(),
                })
                .collect(),
            checks: self
                .results
                .iter()
                .map(|r| CheckView {
                    after: r.after,
                    formula: r.query.formula.to_string(),
                    value: r.value,
                    expect: r.query.expect,
                    passed: r.passed(),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StructureView {
    pub vars: Vec<String>,
    pub law: String,
    pub obs: BTreeMap<String, String>,
    pub state: Vec<String>,
}

impl StructureView {
    pub fn of(sc: &Scene) -> Self {
        let f = sc.structure();
        StructureView {
            vars: f.vocabulary(),
            law: f.law_formula().to_string(),
            obs: f
                .agents()
                .iter()
                .map(|i| {
                    let o = f.observation_formula(i).expect("known agent");
                    (i.clone(), o.to_string())
                })
                .collect(),
            state: sc.state().iter().cloned().collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StepView {
    pub step: usize,
    pub title: String,
    pub structure: StructureView,
    pub removed: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckView {
    pub after: usize,
    pub formula: String,
    pub value: bool,
    pub expect: Option<bool>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceView {
    pub steps: Vec<StepView>,
    pub checks: Vec<CheckView>,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Scenario, ScenarioError> {
        Parser::default().run(text)
    }

    /// Every name the scenario declares, used to keep generated names fresh.
    fn declared_names(&self) -> BTreeSet<String> {
        let mut names: BTreeSet<String> = self.vars.iter().cloned().collect();
        for step in &self.steps {
            if let Update::Event(ev) = &step.update {
                names.extend(ev.transformer.add_vocab.iter().cloned());
            }
        }
        names
    }

    pub fn initial_scene(&self, engine: &Engine) -> Result<Scene, ScenarioError> {
        let f = BeliefStructure::new(engine, &self.agents, &self.vars, &self.law, &self.observations)
            .map_err(ScenarioError::Initial)?;
        Scene::new(f, self.state.clone()).map_err(ScenarioError::Initial)
    }

    /// Applies every update in order and evaluates the queries.
    pub fn run(&self, engine: &Engine, options: RunOptions) -> Result<Run, ScenarioError> {
        let mut scene = self.initial_scene(engine)?;
        let mut snapshots = vec![Snapshot {
            step: 0,
            title: String::new(),
            scene: scene.clone(),
            removed: Vec::new(),
        }];
        let declared = self.declared_names();
        for (k, step) in self.steps.iter().enumerate() {
            let fail = |source: StepError| ScenarioError::Step {
                step: k + 1,
                line: step.line,
                source,
            };
            let event = match &step.update {
                Update::Event(ev) => ev.clone(),
                Update::Action { model, actual } => {
                    let mut reserved = declared.clone();
                    reserved.extend(scene.structure().vocabulary());
                    let reserved: Vec<String> = reserved.into_iter().collect();
                    trf(model, *actual, &reserved)
                        .map_err(|e| fail(e.into()))?
                        .0
                }
            };
            let copies: BTreeSet<String> = {
                let before: BTreeSet<String> = scene.structure().vocabulary().into_iter().collect();
                scene = scene.apply(&event).map_err(|e| fail(e.into()))?;
                let plus: BTreeSet<&String> = event.transformer.add_vocab.iter().collect();
                scene
                    .structure()
                    .vocabulary()
                    .into_iter()
                    .filter(|p| !before.contains(p) && !plus.contains(p))
                    .collect()
            };
            let mut removed = Vec::new();
            if options.minimize {
                let (smaller, gone) = scene.minimize_determined(&copies);
                scene = smaller;
                removed = gone;
            }
            snapshots.push(Snapshot {
                step: k + 1,
                title: step.title.clone(),
                scene: scene.clone(),
                removed,
            });
        }
        let mut results = Vec::new();
        for q in &self.queries {
            let after = q.after.unwrap_or(self.steps.len());
            let value = snapshots[after]
                .scene
                .eval(&q.formula)
                .map_err(|source| ScenarioError::Query { line: q.line, source })?;
            results.push(QueryResult {
                query: q.clone(),
                after,
                value,
            });
        }
        Ok(Run { snapshots, results })
    }

    /// The same scenario with every `EVENT` replaced by its action model.
    pub fn to_actions(&self) -> Result<Scenario, ScenarioError> {
        let mut out = self.clone();
        for (k, step) in out.steps.iter_mut().enumerate() {
            if let Update::Event(ev) = &step.update {
                let (model, actual) = act(ev, &self.agents).map_err(|e| ScenarioError::Step {
                    step: k + 1,
                    line: step.line,
                    source: e.into(),
                })?;
                step.update = Update::Action { model, actual };
            }
        }
        Ok(out)
    }

    /// The same scenario with every `ACTION` replaced by a transformer.
    pub fn to_transformers(&self) -> Result<Scenario, ScenarioError> {
        let mut out = self.clone();
        let mut reserved = self.declared_names();
        for (k, step) in out.steps.iter_mut().enumerate() {
            if let Update::Action { model, actual } = &step.update {
                let names: Vec<String> = reserved.iter().cloned().collect();
                let (ev, labeling) = trf(model, *actual, &names).map_err(|e| ScenarioError::Step {
                    step: k + 1,
                    line: step.line,
                    source: e.into(),
                })?;
                reserved.extend(labeling.props().iter().cloned());
                step.update = Update::Event(ev);
            }
        }
        Ok(out)
    }
}

fn names_line(items: &[String]) -> String {
    items.join(" ")
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "AGENTS {}", names_line(&self.agents))?;
        writeln!(f, "VARS {}", names_line(&self.vars))?;
        writeln!(f, "LAW {}", self.law)?;
        for (i, o) in &self.observations {
            writeln!(f, "OBS {i}: {o}")?;
        }
        writeln!(f, "STATE {}", self.state.iter().cloned().collect::<Vec<_>>().join(" "))?;
        for step in &self.steps {
            writeln!(f)?;
            match &step.update {
                Update::Event(ev) => write_event(f, &step.title, ev)?,
                Update::Action { model, actual } => write_action(f, &step.title, model, *actual)?,
            }
        }
        if !self.queries.is_empty() {
            writeln!(f)?;
        }
        for q in &self.queries {
            write!(f, "CHECK ")?;
            if let Some(n) = q.after {
                write!(f, "after {n} ")?;
            }
            write!(f, "{}", q.formula)?;
            if let Some(e) = q.expect {
                write!(f, " EXPECT {e}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

fn header(f: &mut fmt::Formatter<'_>, keyword: &str, title: &str) -> fmt::Result {
    if title.is_empty() {
        writeln!(f, "{keyword}")
    } else {
        writeln!(f, "{keyword} {title}")
    }
}

fn write_event(f: &mut fmt::Formatter<'_>, title: &str, ev: &Event) -> fmt::Result {
    let x = &ev.transformer;
    header(f, "EVENT", title)?;
    if !x.add_vocab.is_empty() {
        writeln!(f, "ADDVARS {}", names_line(&x.add_vocab))?;
    }
    if x.event_law != Formula::Top {
        writeln!(f, "PRE {}", x.event_law)?;
    }
    for (p, g) in &x.changes {
        writeln!(f, "CHANGE {p} := {g}")?;
    }
    for (i, g) in &x.observations {
        writeln!(f, "OBS+ {i}: {g}")?;
    }
    if !ev.actual.is_empty() {
        let items: Vec<String> = ev.actual.iter().cloned().collect();
        writeln!(f, "ASSIGN {}", names_line(&items))?;
    }
    Ok(())
}

fn write_action(f: &mut fmt::Formatter<'_>, title: &str, m: &ActionModel, actual: usize) -> fmt::Result {
    header(f, "ACTION", title)?;
    let events = m.events();
    let names: Vec<String> = events.iter().map(|e| e.name.clone()).collect();
    writeln!(f, "EVENTS {}", names_line(&names))?;
    for e in events {
        if e.pre != Formula::Top {
            writeln!(f, "PRE {}: {}", e.name, e.pre)?;
        }
        for (p, g) in &e.post {
            writeln!(f, "POST {}: {p} := {g}", e.name)?;
        }
    }
    for i in m.agents() {
        let mut edges = Vec::new();
        for (a, e) in events.iter().enumerate() {
            for b in m.successors(i, a).expect("known agent") {
                edges.push(format!("{} > {}", e.name, events[*b].name));
            }
        }
        writeln!(f, "REL {i}: {}", edges.join("; "))?;
    }
    writeln!(f, "ACTUAL {}", events[actual].name)
}

#[derive(Default)]
struct EventDraft {
    title: String,
    line: usize,
    add_vocab: Vec<String>,
    pre: Option<Formula>,
    changes: BTreeMap<String, Formula>,
    observations: BTreeMap<String, Formula>,
    assign: Option<State>,
}

#[derive(Default)]
struct ActionDraft {
    title: String,
    line: usize,
    events: Vec<String>,
    pre: BTreeMap<String, Formula>,
    post: BTreeMap<String, BTreeMap<String, Formula>>,
    relations: BTreeMap<String, Vec<(String, String, usize)>>,
    actual: Option<(String, usize)>,
}

enum Block {
    Header,
    Event(EventDraft),
    Action(ActionDraft),
}

#[derive(Default)]
struct Parser {
    agents: Option<Vec<String>>,
    vars: Option<Vec<String>>,
    law: Option<Formula>,
    observations: BTreeMap<String, Formula>,
    state: Option<(State, usize)>,
    steps: Vec<Step>,
    queries: Vec<Query>,
}

fn syntax(line: usize, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Syntax {
        line,
        message: message.into(),
    }
}

/// Splits `name: rest`.
fn labeled(line: usize, rest: &str, what: &str) -> Result<(String, String), ScenarioError> {
    let (name, body) = rest
        .split_once(':')
        .ok_or_else(|| syntax(line, format!("expected `{what}: ...`")))?;
    let name = name.trim();
    if name.is_empty() || name.contains(char::is_whitespace) {
        return Err(syntax(line, format!("expected a single {what} before `:`")));
    }
    Ok((name.to_string(), body.trim().to_string()))
}

fn name_list(line: usize, rest: &str) -> Result<Vec<String>, ScenarioError> {
    let items: Vec<String> = rest
        .trim()
        .trim_start_matches('{')
        .trim_end_matches('}')
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect();
    let mut seen = BTreeSet::new();
    for s in &items {
        if !seen.insert(s) {
            return Err(syntax(line, format!("`{s}` is listed twice")));
        }
    }
    Ok(items)
}

fn prop_list(line: usize, rest: &str) -> Result<Vec<String>, ScenarioError> {
    let items = name_list(line, rest)?;
    if let Some(p) = items.iter().find(|p| !is_valid_name(p)) {
        return Err(syntax(line, format!("`{p}` is not a valid proposition name")));
    }
    Ok(items)
}

impl Parser {
    fn agents(&self) -> &[String] {
        self.agents.as_deref().unwrap_or(&[])
    }

    fn formula(&self, line: usize, text: &str) -> Result<Formula, ScenarioError> {
        if text.trim().is_empty() {
            return Err(syntax(line, "missing formula"));
        }
        parse_with_agents(text, self.agents()).map_err(|source| ScenarioError::Formula { line, source })
    }

    fn boolean(&self, line: usize, text: &str) -> Result<Formula, ScenarioError> {
        let f = self.formula(line, text)?;
        f.require_boolean()
            .map_err(|source| ScenarioError::Formula { line, source })?;
        Ok(f)
    }

    fn run(mut self, text: &str) -> Result<Scenario, ScenarioError> {
        let mut block = Block::Header;
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (keyword, rest) = match content.split_once(char::is_whitespace) {
                Some((kw, rest)) => (kw, rest.trim()),
                None => (content, ""),
            };
            match keyword {
                "EVENT" | "ACTION" => {
                    self.finish(block)?;
                    if self.agents.is_none() || self.vars.is_none() {
                        return Err(syntax(line, "AGENTS and VARS must come before the first update"));
                    }
                    block = if keyword == "EVENT" {
                        Block::Event(EventDraft {
                            title: rest.to_string(),
                            line,
                            ..EventDraft::default()
                        })
                    } else {
                        Block::Action(ActionDraft {
                            title: rest.to_string(),
                            line,
                            ..ActionDraft::default()
                        })
                    };
                }
                "CHECK" => self.check(line, rest)?,
                _ => match &mut block {
                    Block::Header => self.header_line(line, keyword, rest)?,
                    Block::Event(d) => {
                        let d = std::mem::take(d);
                        block = Block::Event(self.event_line(d, line, keyword, rest)?);
                    }
                    Block::Action(d) => {
                        let d = std::mem::take(d);
                        block = Block::Action(self.action_line(d, line, keyword, rest)?);
                    }
                },
            }
        }
        self.finish(block)?;

        let agents = self.agents.ok_or_else(|| syntax(0, "missing AGENTS"))?;
        let vars = self.vars.ok_or_else(|| syntax(0, "missing VARS"))?;
        let law = self.law.unwrap_or(Formula::Top);
        let (state, state_line) = self.state.unwrap_or_default();
        if let Some(p) = state.iter().find(|p| !vars.contains(p)) {
            return Err(syntax(state_line, format!("`{p}` is not declared in VARS")));
        }
        if let Some(p) = law.vocabulary().into_iter().find(|p| !vars.contains(p)) {
            return Err(syntax(0, format!("LAW mentions undeclared `{p}`")));
        }
        if !law.eval_bool(&state).unwrap_or(false) {
            return Err(syntax(state_line, format!("STATE {} violates LAW", format_state(&state))));
        }
        for q in &self.queries {
            if q.after.is_some_and(|n| n > self.steps.len()) {
                return Err(syntax(
                    q.line,
                    format!("there are only {} updates", self.steps.len()),
                ));
            }
        }
        Ok(Scenario {
            agents,
            vars,
            law,
            observations: self.observations,
            state,
            steps: self.steps,
            queries: self.queries,
        })
    }

    fn header_line(&mut self, line: usize, keyword: &str, rest: &str) -> Result<(), ScenarioError> {
        match keyword {
            "AGENTS" => {
                let agents = name_list(line, rest)?;
                if agents.is_empty() {
                    return Err(syntax(line, "AGENTS needs at least one agent"));
                }
                set_once(&mut self.agents, agents, line, "AGENTS")
            }
            "VARS" => {
                let vars = prop_list(line, rest)?;
                set_once(&mut self.vars, vars, line, "VARS")
            }
            "LAW" => {
                let law = self.boolean(line, rest)?;
                set_once(&mut self.law, law, line, "LAW")
            }
            "OBS" => {
                let (agent, body) = labeled(line, rest, "agent")?;
                self.known_agent(line, &agent)?;
                let f = self.boolean(line, &body)?;
                if self.observations.insert(agent.clone(), f).is_some() {
                    return Err(syntax(line, format!("second OBS for `{agent}`")));
                }
                Ok(())
            }
            "STATE" => {
                let state = prop_list(line, rest)?.into_iter().collect();
                set_once(&mut self.state, (state, line), line, "STATE")
            }
            _ => Err(syntax(line, format!("unexpected `{keyword}` in the header"))),
        }
    }

    fn known_agent(&self, line: usize, agent: &str) -> Result<(), ScenarioError> {
        if self.agents().iter().any(|a| a == agent) {
            Ok(())
        } else {
            Err(syntax(line, format!("unknown agent `{agent}`")))
        }
    }

    fn event_line(
        &self,
        mut d: EventDraft,
        line: usize,
        keyword: &str,
        rest: &str,
    ) -> Result<EventDraft, ScenarioError> {
        match keyword {
            "ADDVARS" => {
                if !d.add_vocab.is_empty() {
                    return Err(syntax(line, "second ADDVARS in this event"));
                }
                d.add_vocab = prop_list(line, rest)?;
            }
            "PRE" => {
                let f = self.formula(line, rest)?;
                set_once(&mut d.pre, f, line, "PRE")?;
            }
            "CHANGE" => {
                let (p, body) = rest
                    .split_once(":=")
                    .ok_or_else(|| syntax(line, "expected `CHANGE p := formula`"))?;
                let p = p.trim().to_string();
                if !is_valid_name(&p) {
                    return Err(syntax(line, format!("`{p}` is not a valid proposition name")));
                }
                let f = self.boolean(line, body)?;
                if d.changes.insert(p.clone(), f).is_some() {
                    return Err(syntax(line, format!("second CHANGE for `{p}`")));
                }
            }
            "OBS+" => {
                let (agent, body) = labeled(line, rest, "agent")?;
                self.known_agent(line, &agent)?;
                let f = self.boolean(line, &body)?;
                if d.observations.insert(agent.clone(), f).is_some() {
                    return Err(syntax(line, format!("second OBS+ for `{agent}`")));
                }
            }
            "ASSIGN" => {
                let x = prop_list(line, rest)?.into_iter().collect();
                set_once(&mut d.assign, x, line, "ASSIGN")?;
            }
            _ => return Err(syntax(line, format!("unexpected `{keyword}` in an EVENT block"))),
        }
        Ok(d)
    }

    fn action_line(
        &self,
        mut d: ActionDraft,
        line: usize,
        keyword: &str,
        rest: &str,
    ) -> Result<ActionDraft, ScenarioError> {
        let known_event = |d: &ActionDraft, e: &str| {
            if d.events.iter().any(|x| x == e) {
                Ok(())
            } else {
                Err(syntax(line, format!("unknown event `{e}`")))
            }
        };
        match keyword {
            "EVENTS" => {
                if !d.events.is_empty() {
                    return Err(syntax(line, "second EVENTS in this action"));
                }
                let events: Vec<String> = rest
                    .split_whitespace()
                    .map(str::to_string)
                    .collect();
                if events.is_empty() {
                    return Err(syntax(line, "EVENTS needs at least one event"));
                }
                for e in &events {
                    if e.contains([':', ';', '>']) {
                        return Err(syntax(line, format!("`{e}` is not a valid event name")));
                    }
                }
                if events.iter().collect::<BTreeSet<_>>().len() != events.len() {
                    return Err(syntax(line, "an event is listed twice"));
                }
                d.events = events;
            }
            "PRE" => {
                let (e, body) = labeled(line, rest, "event")?;
                known_event(&d, &e)?;
                let f = self.formula(line, &body)?;
                if d.pre.insert(e.clone(), f).is_some() {
                    return Err(syntax(line, format!("second PRE for `{e}`")));
                }
            }
            "POST" => {
                let (e, body) = labeled(line, rest, "event")?;
                known_event(&d, &e)?;
                let (p, value) = body
                    .split_once(":=")
                    .ok_or_else(|| syntax(line, "expected `POST event: p := formula`"))?;
                let p = p.trim().to_string();
                let f = self.boolean(line, value)?;
                if d.post.entry(e).or_default().insert(p.clone(), f).is_some() {
                    return Err(syntax(line, format!("second POST for `{p}`")));
                }
            }
            "REL" => {
                let (agent, body) = labeled(line, rest, "agent")?;
                self.known_agent(line, &agent)?;
                let mut edges = Vec::new();
                for pair in body.split(';').map(str::trim).filter(|s| !s.is_empty()) {
                    let (a, b) = pair
                        .split_once('>')
                        .ok_or_else(|| syntax(line, format!("expected `a > b`, found `{pair}`")))?;
                    let (a, b) = (a.trim().to_string(), b.trim().to_string());
                    known_event(&d, &a)?;
                    known_event(&d, &b)?;
                    edges.push((a, b, line));
                }
                if d.relations.insert(agent.clone(), edges).is_some() {
                    return Err(syntax(line, format!("second REL for `{agent}`")));
                }
            }
            "ACTUAL" => {
                let e = rest.trim().to_string();
                known_event(&d, &e)?;
                set_once(&mut d.actual, (e, line), line, "ACTUAL")?;
            }
            _ => return Err(syntax(line, format!("unexpected `{keyword}` in an ACTION block"))),
        }
        Ok(d)
    }

    fn finish(&mut self, block: Block) -> Result<(), ScenarioError> {
        match block {
            Block::Header => {}
            Block::Event(d) => {
                let transformer = Transformer {
                    add_vocab: d.add_vocab,
                    event_law: d.pre.unwrap_or(Formula::Top),
                    changes: d.changes,
                    observations: d.observations,
                };
                self.steps.push(Step {
                    title: d.title,
                    update: Update::Event(Event::new(transformer, d.assign.unwrap_or_default())),
                    line: d.line,
                });
            }
            Block::Action(d) => {
                if d.events.is_empty() {
                    return Err(syntax(d.line, "ACTION without EVENTS"));
                }
                let action_err = |line: usize| move |source: ExplicitError| ScenarioError::Action { line, source };
                let mut model = ActionModel::new(self.agents());
                for e in &d.events {
                    let pre = d.pre.get(e).cloned().unwrap_or(Formula::Top);
                    let post = d.post.get(e).cloned().unwrap_or_default();
                    model.add_event(e.clone(), pre, post).map_err(action_err(d.line))?;
                }
                let index = |e: &str| d.events.iter().position(|x| x == e).expect("checked");
                for agent in self.agents() {
                    match d.relations.get(agent) {
                        Some(edges) => {
                            for (a, b, line) in edges {
                                model.add_edge(agent, index(a), index(b)).map_err(action_err(*line))?;
                            }
                        }
                        None => {
                            for a in 0..d.events.len() {
                                for b in 0..d.events.len() {
                                    model.add_edge(agent, a, b).map_err(action_err(d.line))?;
                                }
                            }
                        }
                    }
                }
                let actual = match &d.actual {
                    Some((e, _)) => index(e),
                    None => return Err(syntax(d.line, "ACTION without ACTUAL")),
                };
                self.steps.push(Step {
                    title: d.title,
                    update: Update::Action { model, actual },
                    line: d.line,
                });
            }
        }
        Ok(())
    }

    fn check(&mut self, line: usize, rest: &str) -> Result<(), ScenarioError> {
        let mut body = rest;
        let mut after = None;
        if let Some(tail) = body.strip_prefix("after") {
            let tail = tail.trim_start();
            let digits: String = tail.chars().take_while(char::is_ascii_digit).collect();
            if !digits.is_empty() && tail.len() != digits.len() {
                after = Some(digits.parse().map_err(|_| syntax(line, "step number out of range"))?);
                body = &tail[digits.len()..];
            }
        }
        let mut expect = None;
        if let Some((formula, verdict)) = body.rsplit_once("EXPECT") {
            expect = Some(match verdict.trim() {
                "true" => true,
                "false" => false,
                v => return Err(syntax(line, format!("EXPECT takes true or false, not `{v}`"))),
            });
            body = formula;
        }
        let formula = self.formula(line, body)?;
        self.queries.push(Query {
            after,
            formula,
            expect,
            line,
        });
        Ok(())
    }
}

fn set_once<T>(slot: &mut Option<T>, value: T, line: usize, what: &str) -> Result<(), ScenarioError> {
    if slot.is_some() {
        return Err(syntax(line, format!("second {what}")));
    }
    *slot = Some(value);
    Ok(())
}
