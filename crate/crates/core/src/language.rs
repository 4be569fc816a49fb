//! Epistemic formulas: syntax tree, concrete syntax, syntactic operations and
//! compilation of the boolean fragment to [`BoolFn`]s.
//!
//! Concrete syntax, loosest binding first:
//!
//! ```text
//! formula := iff
//! iff     := imp ("<->" imp)*          left associative
//! imp     := or ("->" imp)?            right associative
//! or      := and ("|" and)*
//! and     := unary ("&" unary)*
//! unary   := "~" unary | "[" IDENT "]" unary | atom
//! atom    := "Top" | "Bot" | IDENT | "(" formula ")"
//! ```
//!
//! Identifiers may carry trailing primes (`p'`) and circles (`p°`, written
//! `p@o` in ASCII input). The unicode connectives `¬ ∧ ∨ → ↔ ⊤ ⊥` are
//! accepted as aliases.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::boolfun::{BoolFn, Engine, VarId};

/// Marks an earlier copy of a proposition.
pub const CIRCLE: char = '°';

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LanguageError {
    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("unbound atom `{0}`")]
    UnboundAtom(String),
    #[error("expected a boolean formula, found a belief modality in `{0}`")]
    NotBoolean(String),
    #[error("`{0}` is not in the enclosing set")]
    NotSubset(String),
}

/// A formula of the epistemic language. The boolean fragment is the set of
/// formulas without [`Formula::Believes`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[derive(Default)]
pub enum Formula {
    #[default]
    Top,
    Bot,
    Atom(String),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    /// `[i] φ`: agent `i` believes `φ`.
    Believes(String, Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(vec![a, b])
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(vec![a, b])
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn believes(agent: impl Into<String>, f: Formula) -> Self {
        Formula::Believes(agent.into(), Box::new(f))
    }

    /// Conjunction that drops `Top`, collapses on `Bot`, flattens nested
    /// conjunctions and avoids one-element lists.
    pub fn conj(parts: impl IntoIterator<Item = Formula>) -> Self {
        let mut out = Vec::new();
        for f in parts {
            match f {
                Formula::Top => {}
                Formula::Bot => return Formula::Bot,
                Formula::And(inner) => out.extend(inner),
                f => out.push(f),
            }
        }
        match out.len() {
            0 => Formula::Top,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    /// Disjunction counterpart of [`Formula::conj`].
    pub fn disj(parts: impl IntoIterator<Item = Formula>) -> Self {
        let mut out = Vec::new();
        for f in parts {
            match f {
                Formula::Bot => {}
                Formula::Top => return Formula::Top,
                Formula::Or(inner) => out.extend(inner),
                f => out.push(f),
            }
        }
        match out.len() {
            0 => Formula::Bot,
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    /// Folds `Top` and `Bot` away wherever that preserves meaning.
    pub fn simplify(&self) -> Formula {
        match self {
            Formula::Top | Formula::Bot | Formula::Atom(_) => self.clone(),
            Formula::Not(g) => match g.simplify() {
                Formula::Top => Formula::Bot,
                Formula::Bot => Formula::Top,
                Formula::Not(h) => *h,
                h => Formula::neg(h),
            },
            Formula::And(gs) => Formula::conj(gs.iter().map(Formula::simplify)),
            Formula::Or(gs) => Formula::disj(gs.iter().map(Formula::simplify)),
            Formula::Implies(a, b) => match (a.simplify(), b.simplify()) {
                (Formula::Bot, _) | (_, Formula::Top) => Formula::Top,
                (Formula::Top, b) => b,
                (a, Formula::Bot) => Formula::neg(a).simplify(),
                (a, b) => Formula::implies(a, b),
            },
            Formula::Iff(a, b) => match (a.simplify(), b.simplify()) {
                (Formula::Top, x) | (x, Formula::Top) => x,
                (Formula::Bot, x) | (x, Formula::Bot) => Formula::neg(x).simplify(),
                (a, b) => Formula::iff(a, b),
            },
            Formula::Believes(i, g) => match g.simplify() {
                Formula::Top => Formula::Top,
                h => Formula::believes(i.clone(), h),
            },
        }
    }

    pub(crate) fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Top | Formula::Bot | Formula::Atom(_) => vec![],
            Formula::Not(f) | Formula::Believes(_, f) => vec![f],
            Formula::And(fs) | Formula::Or(fs) => fs.iter().collect(),
            Formula::Implies(a, b) | Formula::Iff(a, b) => vec![a, b],
        }
    }

    /// Atoms occurring in the formula.
    pub fn vocabulary(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        if let Formula::Atom(p) = self {
            out.insert(p.clone());
        }
        for c in self.children() {
            c.collect_atoms(out);
        }
    }

    /// Agents occurring in belief modalities.
    pub fn agents(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_agents(&mut out);
        out
    }

    fn collect_agents(&self, out: &mut BTreeSet<String>) {
        if let Formula::Believes(i, _) = self {
            out.insert(i.clone());
        }
        for c in self.children() {
            c.collect_agents(out);
        }
    }

    pub fn is_boolean(&self) -> bool {
        self.modal_depth() == 0
    }

    pub fn modal_depth(&self) -> usize {
        let inner = self
            .children()
            .into_iter()
            .map(Formula::modal_depth)
            .max()
            .unwrap_or(0);
        match self {
            Formula::Believes(..) => inner + 1,
            _ => inner,
        }
    }

    /// Number of nodes in the syntax tree.
    pub fn size(&self) -> usize {
        1 + self
            .children()
            .into_iter()
            .map(Formula::size)
            .sum::<usize>()
    }

    /// Fails with [`LanguageError::UnknownAgent`] if a modality names an agent
    /// outside `agents`.
    pub fn check_agents<S: AsRef<str>>(&self, agents: &[S]) -> Result<(), LanguageError> {
        for a in self.agents() {
            if !agents.iter().any(|b| b.as_ref() == a) {
                return Err(LanguageError::UnknownAgent(a));
            }
        }
        Ok(())
    }

    pub fn require_boolean(&self) -> Result<(), LanguageError> {
        if self.is_boolean() {
            Ok(())
        } else {
            Err(LanguageError::NotBoolean(self.to_string()))
        }
    }

    /// Simultaneous substitution of formulas for atoms. Bodies of belief
    /// modalities are substituted through.
    pub fn substitute(&self, bindings: &BTreeMap<String, Formula>) -> Formula {
        self.map_atoms(&|p| bindings.get(p).cloned())
    }

    /// Substitutes the bindings one after another in key order, so later
    /// replacements act on the output of earlier ones.
    pub fn substitute_sequential(&self, bindings: &BTreeMap<String, Formula>) -> Formula {
        bindings.iter().fold(self.clone(), |acc, (p, psi)| {
            acc.substitute(&BTreeMap::from([(p.clone(), psi.clone())]))
        })
    }

    /// `[a/⊤][(over ∖ a)/⊥]φ`: fixes every atom of `over` to its truth value
    /// under `a`.
    pub fn fix(&self, over: &[String], a: &BTreeSet<String>) -> Formula {
        let bindings = over
            .iter()
            .map(|p| {
                let v = if a.contains(p) {
                    Formula::Top
                } else {
                    Formula::Bot
                };
                (p.clone(), v)
            })
            .collect();
        self.substitute(&bindings)
    }

    fn map_atoms(&self, f: &dyn Fn(&str) -> Option<Formula>) -> Formula {
        match self {
            Formula::Top => Formula::Top,
            Formula::Bot => Formula::Bot,
            Formula::Atom(p) => f(p).unwrap_or_else(|| self.clone()),
            Formula::Not(g) => Formula::neg(g.map_atoms(f)),
            Formula::And(gs) => Formula::And(gs.iter().map(|g| g.map_atoms(f)).collect()),
            Formula::Or(gs) => Formula::Or(gs.iter().map(|g| g.map_atoms(f)).collect()),
            Formula::Implies(a, b) => Formula::implies(a.map_atoms(f), b.map_atoms(f)),
            Formula::Iff(a, b) => Formula::iff(a.map_atoms(f), b.map_atoms(f)),
            Formula::Believes(i, g) => Formula::believes(i.clone(), g.map_atoms(f)),
        }
    }

    /// Replaces every atom by its primed twin.
    pub fn prime(&self) -> Formula {
        self.map_atoms(&|p| Some(Formula::Atom(format!("{p}'"))))
    }

    /// Replaces every atom in `over` by its circled copy.
    pub fn circle(&self, over: &BTreeSet<String>) -> Formula {
        self.map_atoms(&|p| over.contains(p).then(|| Formula::Atom(format!("{p}{CIRCLE}"))))
    }

    /// Evaluates a boolean formula under the assignment making exactly
    /// `assignment` true.
    pub fn eval_bool(&self, assignment: &BTreeSet<String>) -> Result<bool, LanguageError> {
        Ok(match self {
            Formula::Top => true,
            Formula::Bot => false,
            Formula::Atom(p) => assignment.contains(p),
            Formula::Not(f) => !f.eval_bool(assignment)?,
            Formula::And(fs) => {
                for f in fs {
                    if !f.eval_bool(assignment)? {
                        return Ok(false);
                    }
                }
                true
            }
            Formula::Or(fs) => {
                for f in fs {
                    if f.eval_bool(assignment)? {
                        return Ok(true);
                    }
                }
                false
            }
            Formula::Implies(a, b) => !a.eval_bool(assignment)? || b.eval_bool(assignment)?,
            Formula::Iff(a, b) => a.eval_bool(assignment)? == b.eval_bool(assignment)?,
            Formula::Believes(..) => return Err(LanguageError::NotBoolean(self.to_string())),
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Iff(..) => 1,
            Formula::Implies(..) => 2,
            Formula::Or(_) => 3,
            Formula::And(_) => 4,
            Formula::Not(_) | Formula::Believes(..) => 5,
            Formula::Top | Formula::Bot | Formula::Atom(_) => 6,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let parens = self.precedence() < min;
        if parens {
            f.write_str("(")?;
        }
        match self {
            Formula::Top => f.write_str("Top")?,
            Formula::Bot => f.write_str("Bot")?,
            Formula::Atom(p) => f.write_str(p)?,
            Formula::Not(g) => {
                f.write_str("~")?;
                g.fmt_at(f, 5)?;
            }
            Formula::Believes(i, g) => {
                write!(f, "[{i}] ")?;
                g.fmt_at(f, 5)?;
            }
            Formula::And(gs) | Formula::Or(gs) => {
                let (sep, level) = if matches!(self, Formula::And(_)) {
                    (" & ", 5)
                } else {
                    (" | ", 4)
                };
                if gs.is_empty() {
                    // not produced by the parser; keep the output parseable
                    f.write_str(if level == 5 { "Top" } else { "Bot" })?;
                }
                for (k, g) in gs.iter().enumerate() {
                    if k > 0 {
                        f.write_str(sep)?;
                    }
                    g.fmt_at(f, level)?;
                }
            }
            Formula::Implies(a, b) => {
                a.fmt_at(f, 3)?;
                f.write_str(" -> ")?;
                b.fmt_at(f, 2)?;
            }
            Formula::Iff(a, b) => {
                a.fmt_at(f, 1)?;
                f.write_str(" <-> ")?;
                b.fmt_at(f, 2)?;
            }
        }
        if parens {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

impl std::str::FromStr for Formula {
    type Err = LanguageError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

/// `⋀A ∧ ⋀{¬p | p ∈ B∖A}`, with the atoms in the order of `b`.
pub fn subset_formula(a: &BTreeSet<String>, b: &[String]) -> Result<Formula, LanguageError> {
    if let Some(p) = a.iter().find(|p| !b.contains(p)) {
        return Err(LanguageError::NotSubset(p.clone()));
    }
    Ok(Formula::conj(b.iter().map(|p| {
        if a.contains(p) {
            Formula::atom(p.clone())
        } else {
            Formula::neg(Formula::atom(p.clone()))
        }
    })))
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Top,
    Bot,
    Not,
    And,
    Or,
    Implies,
    Iff,
    LBrack,
    RBrack,
    LParen,
    RParen,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Top => f.write_str("`Top`"),
            Tok::Bot => f.write_str("`Bot`"),
            Tok::Not => f.write_str("`~`"),
            Tok::And => f.write_str("`&`"),
            Tok::Or => f.write_str("`|`"),
            Tok::Implies => f.write_str("`->`"),
            Tok::Iff => f.write_str("`<->`"),
            Tok::LBrack => f.write_str("`[`"),
            Tok::RBrack => f.write_str("`]`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn lex(text: &str) -> Result<Vec<(Tok, usize, usize)>, LanguageError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (1, 1);
    let mut i = 0;
    let err = |line, column, message: String| LanguageError::Syntax {
        line,
        column,
        message,
    };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let mut advance = |n: usize, i: &mut usize| {
            *i += n;
            col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(1, &mut i);
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        let (tok, len) = if rest.starts_with("<->") {
            (Tok::Iff, 3)
        } else if rest.starts_with("->") {
            (Tok::Implies, 2)
        } else {
            match c {
                '~' | '¬' => (Tok::Not, 1),
                '&' | '∧' => (Tok::And, 1),
                '|' | '∨' => (Tok::Or, 1),
                '→' => (Tok::Implies, 1),
                '↔' => (Tok::Iff, 1),
                '⊤' => (Tok::Top, 1),
                '⊥' => (Tok::Bot, 1),
                '[' => (Tok::LBrack, 1),
                ']' => (Tok::RBrack, 1),
                '(' => (Tok::LParen, 1),
                ')' => (Tok::RParen, 1),
                c if is_ident_start(c) => {
                    let mut j = i;
                    while j < chars.len() && is_ident_char(chars[j]) {
                        j += 1;
                    }
                    let mut name: String = chars[i..j].iter().collect();
                    loop {
                        if j < chars.len() && (chars[j] == '\'' || chars[j] == CIRCLE) {
                            name.push(chars[j]);
                            j += 1;
                        } else if j + 1 < chars.len() && chars[j] == '@' && chars[j + 1] == 'o' {
                            name.push(CIRCLE);
                            j += 2;
                        } else {
                            break;
                        }
                    }
                    let tok = match name.as_str() {
                        "Top" => Tok::Top,
                        "Bot" => Tok::Bot,
                        _ => Tok::Ident(name),
                    };
                    (tok, j - i)
                }
                c => return Err(err(l0, c0, format!("unexpected character `{c}`"))),
            }
        };
        out.push((tok, l0, c0));
        advance(len, &mut i);
    }
    out.push((Tok::End, line, col));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: String) -> LanguageError {
        let (_, line, column) = self.toks[self.pos];
        LanguageError::Syntax {
            line,
            column,
            message,
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), LanguageError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected {tok}, found {}", self.peek())))
        }
    }

    fn iff(&mut self) -> Result<Formula, LanguageError> {
        let mut f = self.imp()?;
        while *self.peek() == Tok::Iff {
            self.bump();
            let g = self.imp()?;
            f = Formula::iff(f, g);
        }
        Ok(f)
    }

    fn imp(&mut self) -> Result<Formula, LanguageError> {
        let f = self.or()?;
        if *self.peek() == Tok::Implies {
            self.bump();
            let g = self.imp()?;
            return Ok(Formula::implies(f, g));
        }
        Ok(f)
    }

    fn or(&mut self) -> Result<Formula, LanguageError> {
        let mut parts = vec![self.and()?];
        while *self.peek() == Tok::Or {
            self.bump();
            parts.push(self.and()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::Or(parts)
        })
    }

    fn and(&mut self) -> Result<Formula, LanguageError> {
        let mut parts = vec![self.unary()?];
        while *self.peek() == Tok::And {
            self.bump();
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::And(parts)
        })
    }

    fn unary(&mut self) -> Result<Formula, LanguageError> {
        match self.peek() {
            Tok::Not => {
                self.bump();
                Ok(Formula::neg(self.unary()?))
            }
            Tok::LBrack => {
                self.bump();
                let agent = match self.bump() {
                    Tok::Ident(a) => a,
                    t => {
                        self.pos -= 1;
                        return Err(self.error(format!("expected an agent name, found {t}")));
                    }
                };
                self.expect(Tok::RBrack)?;
                Ok(Formula::believes(agent, self.unary()?))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula, LanguageError> {
        match self.peek().clone() {
            Tok::Top => {
                self.bump();
                Ok(Formula::Top)
            }
            Tok::Bot => {
                self.bump();
                Ok(Formula::Bot)
            }
            Tok::Ident(p) => {
                self.bump();
                Ok(Formula::Atom(p))
            }
            Tok::LParen => {
                self.bump();
                let f = self.iff()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            t => Err(self.error(format!("expected a formula, found {t}"))),
        }
    }
}

/// Parses a formula.
pub fn parse(text: &str) -> Result<Formula, LanguageError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let f = p.iff()?;
    if *p.peek() != Tok::End {
        return Err(p.error(format!("unexpected {}", p.peek())));
    }
    Ok(f)
}

/// Parses a formula and checks that every modality names one of `agents`.
pub fn parse_with_agents<S: AsRef<str>>(
    text: &str,
    agents: &[S],
) -> Result<Formula, LanguageError> {
    let f = parse(text)?;
    f.check_agents(agents)?;
    Ok(f)
}

/// Whether `name` is a valid proposition name (identifier plus optional
/// prime and circle suffixes).
pub fn is_valid_name(name: &str) -> bool {
    matches!(parse(name), Ok(Formula::Atom(n)) if n == name)
}

/// Compiles a boolean formula. Atoms are looked up in `env`.
pub fn compile(
    f: &Formula,
    engine: &Engine,
    env: &BTreeMap<String, VarId>,
) -> Result<BoolFn, LanguageError> {
    Ok(match f {
        Formula::Top => engine.constant(true),
        Formula::Bot => engine.constant(false),
        Formula::Atom(p) => engine.var(
            *env
                .get(p)
                .ok_or_else(|| LanguageError::UnboundAtom(p.clone()))?,
        ),
        Formula::Not(g) => compile(g, engine, env)?.not(),
        Formula::And(gs) => {
            let mut acc = engine.constant(true);
            for g in gs {
                acc = acc.and(&compile(g, engine, env)?);
            }
            acc
        }
        Formula::Or(gs) => {
            let mut acc = engine.constant(false);
            for g in gs {
                acc = acc.or(&compile(g, engine, env)?);
            }
            acc
        }
        Formula::Implies(a, b) => compile(a, engine, env)?.implies(&compile(b, engine, env)?),
        Formula::Iff(a, b) => compile(a, engine, env)?.iff(&compile(b, engine, env)?),
        Formula::Believes(..) => return Err(LanguageError::NotBoolean(f.to_string())),
    })
}

/// Recovers a readable formula from a boolean function, using the engine's
/// variable names. Literals entailed by the function are pulled out first;
/// the remainder is printed from its decision structure.
pub fn decompile(f: &BoolFn) -> Formula {
    let engine = f.engine();
    if f.is_true() {
        return Formula::Top;
    }
    if f.is_false() {
        return Formula::Bot;
    }
    let mut lits = Vec::new();
    let mut rest = f.clone();
    for v in f.support() {
        let x = engine.var(v);
        if f.entails(&x) {
            lits.push(Formula::atom(engine.name(v)));
            rest = rest.restrict(v, true);
        } else if f.entails(&x.not()) {
            lits.push(Formula::neg(Formula::atom(engine.name(v))));
            rest = rest.restrict(v, false);
        }
    }
    lits.push(decision_formula(&rest));
    Formula::conj(lits)
}

fn decision_formula(f: &BoolFn) -> Formula {
    let Some((v, lo, hi)) = f.decompose() else {
        return if f.is_true() { Formula::Top } else { Formula::Bot };
    };
    let x = Formula::atom(f.engine().name(v));
    let nx = || Formula::neg(x.clone());
    if lo.is_false() && hi.is_true() {
        x
    } else if lo.is_true() && hi.is_false() {
        nx()
    } else if hi == lo.not() {
        Formula::iff(x, decision_formula(&hi))
    } else if lo.is_false() {
        Formula::conj([x, decision_formula(&hi)])
    } else if hi.is_false() {
        Formula::conj([nx(), decision_formula(&lo)])
    } else if lo.is_true() {
        Formula::implies(x, decision_formula(&hi))
    } else if hi.is_true() {
        Formula::disj([x, decision_formula(&lo)])
    } else {
        Formula::disj([
            Formula::conj([x.clone(), decision_formula(&hi)]),
            Formula::conj([nx(), decision_formula(&lo)]),
        ])
    }
}
