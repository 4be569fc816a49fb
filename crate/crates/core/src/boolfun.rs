//! Reduced ordered binary decision diagrams over a growable variable universe.
//!
//! An [`Engine`] owns a node store and a variable table. Every [`BoolFn`] is a
//! handle into exactly one engine; handles from different engines must not be
//! mixed. Nodes are hash-consed, so two handles denote the same function iff
//! they point at the same node.
//!
//! Variables are ordered by `(lineage, generation, primed)`. A fresh base
//! proposition opens a new lineage; its primed twin sits directly below it and
//! circled copies (fresh generations of the same lineage) follow right after.
//! The order of base propositions is allocation order.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::rc::Rc;

use thiserror::Error;

/// Identifier of one variable inside an [`Engine`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Which copy of a proposition a variable stands for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Namespace {
    Base,
    /// A copy holding an earlier value of a base proposition. Generations
    /// start at 1 and are never reused.
    Circled(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Connective {
    And,
    Or,
    Not,
    Implies,
    Iff,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoolFnError {
    #[error("rename maps {from} onto {to}, which stays in the support")]
    RenameCollision { from: String, to: String },
    #[error("rename maps both {first} and {second} onto {to}")]
    RenameNotInjective {
        first: String,
        second: String,
        to: String,
    },
}

type NodeId = u32;
const FALSE: NodeId = 0;
const TRUE: NodeId = 1;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct Node {
    var: VarId,
    lo: NodeId,
    hi: NodeId,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Op {
    And,
    Or,
    Xor,
}

struct VarInfo {
    name: String,
    rank: u64,
    namespace: Namespace,
    primed: bool,
    twin: VarId,
    lineage: u32,
}

struct Inner {
    vars: Vec<VarInfo>,
    next_generation: Vec<u32>,
    nodes: Vec<Node>,
    unique: HashMap<Node, NodeId>,
    apply_cache: HashMap<(Op, NodeId, NodeId), NodeId>,
    not_cache: HashMap<NodeId, NodeId>,
}

const TERMINAL_VAR: VarId = VarId(u32::MAX);

impl Inner {
    fn new() -> Self {
        let terminal = Node {
            var: TERMINAL_VAR,
            lo: FALSE,
            hi: FALSE,
        };
        Inner {
            vars: Vec::new(),
            next_generation: Vec::new(),
            nodes: vec![terminal, terminal],
            unique: HashMap::new(),
            apply_cache: HashMap::new(),
            not_cache: HashMap::new(),
        }
    }

    fn rank(&self, v: VarId) -> u64 {
        self.vars[v.index()].rank
    }

    fn node_rank(&self, n: NodeId) -> u64 {
        if n <= TRUE {
            u64::MAX
        } else {
            self.rank(self.nodes[n as usize].var)
        }
    }

    fn alloc_pair(&mut self, name: &str, lineage: u32, generation: u32) -> VarId {
        let base = VarId(self.vars.len() as u32);
        let primed = VarId(base.0 + 1);
        let rank = ((lineage as u64) << 32) | ((generation as u64) << 1);
        let namespace = if generation == 0 {
            Namespace::Base
        } else {
            Namespace::Circled(generation)
        };
        self.vars.push(VarInfo {
            name: name.to_string(),
            rank,
            namespace,
            primed: false,
            twin: primed,
            lineage,
        });
        self.vars.push(VarInfo {
            name: format!("{name}'"),
            rank: rank | 1,
            namespace,
            primed: true,
            twin: base,
            lineage,
        });
        base
    }

    fn mk(&mut self, var: VarId, lo: NodeId, hi: NodeId) -> NodeId {
        if lo == hi {
            return lo;
        }
        let node = Node { var, lo, hi };
        if let Some(&id) = self.unique.get(&node) {
            return id;
        }
        let id = self.nodes.len() as NodeId;
        self.nodes.push(node);
        self.unique.insert(node, id);
        id
    }

    fn var_node(&mut self, v: VarId) -> NodeId {
        self.mk(v, FALSE, TRUE)
    }

    fn not(&mut self, f: NodeId) -> NodeId {
        match f {
            FALSE => TRUE,
            TRUE => FALSE,
            _ => {
                if let Some(&r) = self.not_cache.get(&f) {
                    return r;
                }
                let Node { var, lo, hi } = self.nodes[f as usize];
                let lo = self.not(lo);
                let hi = self.not(hi);
                let r = self.mk(var, lo, hi);
                self.not_cache.insert(f, r);
                self.not_cache.insert(r, f);
                r
            }
        }
    }

    fn apply(&mut self, op: Op, f: NodeId, g: NodeId) -> NodeId {
        match op {
            Op::And => {
                if f == FALSE || g == FALSE {
                    return FALSE;
                }
                if f == TRUE || f == g {
                    return g;
                }
                if g == TRUE {
                    return f;
                }
            }
            Op::Or => {
                if f == TRUE || g == TRUE {
                    return TRUE;
                }
                if f == FALSE || f == g {
                    return g;
                }
                if g == FALSE {
                    return f;
                }
            }
            Op::Xor => {
                if f == g {
                    return FALSE;
                }
                if f == FALSE {
                    return g;
                }
                if g == FALSE {
                    return f;
                }
                if f == TRUE {
                    return self.not(g);
                }
                if g == TRUE {
                    return self.not(f);
                }
            }
        }
        let (f, g) = if f <= g { (f, g) } else { (g, f) };
        if let Some(&r) = self.apply_cache.get(&(op, f, g)) {
            return r;
        }
        let rf = self.node_rank(f);
        let rg = self.node_rank(g);
        let (var, f0, f1, g0, g1) = {
            let nf = self.nodes[f as usize];
            let ng = self.nodes[g as usize];
            if rf == rg {
                (nf.var, nf.lo, nf.hi, ng.lo, ng.hi)
            } else if rf < rg {
                (nf.var, nf.lo, nf.hi, g, g)
            } else {
                (ng.var, f, f, ng.lo, ng.hi)
            }
        };
        let lo = self.apply(op, f0, g0);
        let hi = self.apply(op, f1, g1);
        let r = self.mk(var, lo, hi);
        self.apply_cache.insert((op, f, g), r);
        r
    }

    fn ite(&mut self, c: NodeId, t: NodeId, e: NodeId) -> NodeId {
        let a = self.apply(Op::And, c, t);
        let nc = self.not(c);
        let b = self.apply(Op::And, nc, e);
        self.apply(Op::Or, a, b)
    }

    fn restrict(&mut self, f: NodeId, v: VarId, value: bool) -> NodeId {
        let mut memo = HashMap::new();
        self.restrict_rec(f, v, self.rank(v), value, &mut memo)
    }

    fn restrict_rec(
        &mut self,
        f: NodeId,
        v: VarId,
        rank: u64,
        value: bool,
        memo: &mut HashMap<NodeId, NodeId>,
    ) -> NodeId {
        if self.node_rank(f) > rank {
            return f;
        }
        let node = self.nodes[f as usize];
        if node.var == v {
            return if value { node.hi } else { node.lo };
        }
        if let Some(&r) = memo.get(&f) {
            return r;
        }
        let lo = self.restrict_rec(node.lo, v, rank, value, memo);
        let hi = self.restrict_rec(node.hi, v, rank, value, memo);
        let r = self.mk(node.var, lo, hi);
        memo.insert(f, r);
        r
    }

    fn support(&self, f: NodeId) -> BTreeSet<VarId> {
        let mut seen = BTreeSet::new();
        let mut vars = BTreeSet::new();
        let mut stack = vec![f];
        while let Some(n) = stack.pop() {
            if n <= TRUE || !seen.insert(n) {
                continue;
            }
            let node = self.nodes[n as usize];
            vars.insert(node.var);
            stack.push(node.lo);
            stack.push(node.hi);
        }
        vars
    }

    fn size(&self, f: NodeId) -> usize {
        let mut seen = BTreeSet::new();
        let mut stack = vec![f];
        while let Some(n) = stack.pop() {
            if !seen.insert(n) || n <= TRUE {
                continue;
            }
            let node = self.nodes[n as usize];
            stack.push(node.lo);
            stack.push(node.hi);
        }
        seen.len()
    }

    fn rename(&mut self, f: NodeId, map: &BTreeMap<VarId, VarId>) -> NodeId {
        let mut memo = HashMap::new();
        self.rename_rec(f, map, &mut memo)
    }

    fn rename_rec(
        &mut self,
        f: NodeId,
        map: &BTreeMap<VarId, VarId>,
        memo: &mut HashMap<NodeId, NodeId>,
    ) -> NodeId {
        if f <= TRUE {
            return f;
        }
        if let Some(&r) = memo.get(&f) {
            return r;
        }
        let node = self.nodes[f as usize];
        let lo = self.rename_rec(node.lo, map, memo);
        let hi = self.rename_rec(node.hi, map, memo);
        let target = map.get(&node.var).copied().unwrap_or(node.var);
        let c = self.var_node(target);
        let r = self.ite(c, hi, lo);
        memo.insert(f, r);
        r
    }

    fn eval(&self, f: NodeId, assignment: &BTreeSet<VarId>) -> bool {
        let mut n = f;
        while n > TRUE {
            let node = self.nodes[n as usize];
            n = if assignment.contains(&node.var) {
                node.hi
            } else {
                node.lo
            };
        }
        n == TRUE
    }
}

/// Shared handle to a node store and variable table.
///
/// Cloning is cheap; clones refer to the same engine. An engine is not `Send`:
/// one engine per thread.
#[derive(Clone)]
pub struct Engine(Rc<RefCell<Inner>>);

impl Default for Engine {
    fn default() -> Self {
        Self::new()
    }
}

impl fmt::Debug for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inner = self.0.borrow();
        f.debug_struct("Engine")
            .field("vars", &inner.vars.len())
            .field("nodes", &inner.nodes.len())
            .finish()
    }
}

impl PartialEq for Engine {
    fn eq(&self, other: &Self) -> bool {
        Rc::ptr_eq(&self.0, &other.0)
    }
}

impl Eq for Engine {}

impl Engine {
    pub fn new() -> Self {
        Engine(Rc::new(RefCell::new(Inner::new())))
    }

    /// Allocates a base proposition together with its primed twin and
    /// returns the base variable. Names are labels only; they need not be
    /// unique inside the engine.
    pub fn new_var(&self, name: &str) -> VarId {
        let mut inner = self.0.borrow_mut();
        let lineage = inner.next_generation.len() as u32;
        inner.next_generation.push(1);
        inner.alloc_pair(name, lineage, 0)
    }

    /// Allocates a fresh circled copy of `of`, ordered right after every
    /// earlier copy of the same proposition.
    pub fn new_copy(&self, of: VarId, name: &str) -> VarId {
        let mut inner = self.0.borrow_mut();
        let lineage = inner.vars[of.index()].lineage;
        let generation = inner.next_generation[lineage as usize];
        inner.next_generation[lineage as usize] += 1;
        inner.alloc_pair(name, lineage, generation)
    }

    /// The primed twin of an unprimed variable.
    ///
    /// Panics if `v` is itself primed.
    pub fn primed(&self, v: VarId) -> VarId {
        let inner = self.0.borrow();
        let info = &inner.vars[v.index()];
        assert!(!info.primed, "{} is already primed", info.name);
        info.twin
    }

    pub fn is_primed(&self, v: VarId) -> bool {
        self.0.borrow().vars[v.index()].primed
    }

    pub fn namespace(&self, v: VarId) -> Namespace {
        self.0.borrow().vars[v.index()].namespace
    }

    pub fn name(&self, v: VarId) -> String {
        self.0.borrow().vars[v.index()].name.clone()
    }

    pub fn var_count(&self) -> usize {
        self.0.borrow().vars.len()
    }

    /// Number of nodes allocated so far, terminals included.
    pub fn node_count(&self) -> usize {
        self.0.borrow().nodes.len()
    }

    /// Compares two variables in diagram order.
    pub fn order(&self, a: VarId, b: VarId) -> std::cmp::Ordering {
        let inner = self.0.borrow();
        inner.rank(a).cmp(&inner.rank(b))
    }

    pub fn constant(&self, value: bool) -> BoolFn {
        self.wrap(if value { TRUE } else { FALSE })
    }

    pub fn var(&self, v: VarId) -> BoolFn {
        let n = self.0.borrow_mut().var_node(v);
        self.wrap(n)
    }

    pub fn literal(&self, v: VarId, positive: bool) -> BoolFn {
        let f = self.var(v);
        if positive {
            f
        } else {
            f.not()
        }
    }

    /// The conjunction of literals fixing exactly `true_vars` inside `over`.
    pub fn cube<'a>(
        &self,
        over: impl IntoIterator<Item = &'a VarId>,
        true_vars: &BTreeSet<VarId>,
    ) -> BoolFn {
        over.into_iter().fold(self.constant(true), |acc, v| {
            acc.and(&self.literal(*v, true_vars.contains(v)))
        })
    }

    /// Pointwise combination. `Not` takes one argument, `Implies` and `Iff`
    /// take two, `And` and `Or` take any number.
    ///
    /// Panics on an arity mismatch.
    pub fn combine(&self, op: Connective, args: &[BoolFn]) -> BoolFn {
        match op {
            Connective::Not => {
                assert_eq!(args.len(), 1, "not takes one argument");
                args[0].not()
            }
            Connective::Implies => {
                assert_eq!(args.len(), 2, "implies takes two arguments");
                args[0].implies(&args[1])
            }
            Connective::Iff => {
                assert_eq!(args.len(), 2, "iff takes two arguments");
                args[0].iff(&args[1])
            }
            Connective::And => args
                .iter()
                .fold(self.constant(true), |acc, f| acc.and(f)),
            Connective::Or => args
                .iter()
                .fold(self.constant(false), |acc, f| acc.or(f)),
        }
    }

    fn wrap(&self, node: NodeId) -> BoolFn {
        BoolFn {
            engine: self.clone(),
            node,
        }
    }
}

/// A boolean function bound to one [`Engine`].
#[derive(Clone)]
pub struct BoolFn {
    engine: Engine,
    node: NodeId,
}

impl PartialEq for BoolFn {
    fn eq(&self, other: &Self) -> bool {
        self.node == other.node && self.engine == other.engine
    }
}

impl Eq for BoolFn {}

impl Hash for BoolFn {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.node.hash(state);
    }
}

impl fmt::Debug for BoolFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let support: Vec<String> = self
            .support()
            .into_iter()
            .map(|v| self.engine.name(v))
            .collect();
        f.debug_struct("BoolFn")
            .field("node", &self.node)
            .field("support", &support)
            .finish()
    }
}

impl BoolFn {
    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    fn check_engine(&self, other: &BoolFn) {
        assert!(
            self.engine == other.engine,
            "boolean functions from different engines"
        );
    }

    fn binary(&self, op: Op, other: &BoolFn) -> BoolFn {
        self.check_engine(other);
        let n = self.engine.0.borrow_mut().apply(op, self.node, other.node);
        self.engine.wrap(n)
    }

    pub fn is_true(&self) -> bool {
        self.node == TRUE
    }

    pub fn is_false(&self) -> bool {
        self.node == FALSE
    }

    pub fn not(&self) -> BoolFn {
        let n = self.engine.0.borrow_mut().not(self.node);
        self.engine.wrap(n)
    }

    pub fn and(&self, other: &BoolFn) -> BoolFn {
        self.binary(Op::And, other)
    }

    pub fn or(&self, other: &BoolFn) -> BoolFn {
        self.binary(Op::Or, other)
    }

    pub fn xor(&self, other: &BoolFn) -> BoolFn {
        self.binary(Op::Xor, other)
    }

    pub fn implies(&self, other: &BoolFn) -> BoolFn {
        self.not().or(other)
    }

    pub fn iff(&self, other: &BoolFn) -> BoolFn {
        self.xor(other).not()
    }

    pub fn ite(&self, then: &BoolFn, otherwise: &BoolFn) -> BoolFn {
        self.check_engine(then);
        self.check_engine(otherwise);
        let n = self
            .engine
            .0
            .borrow_mut()
            .ite(self.node, then.node, otherwise.node);
        self.engine.wrap(n)
    }

    /// Shannon cofactor with `v` fixed to `value`.
    pub fn restrict(&self, v: VarId, value: bool) -> BoolFn {
        let n = self.engine.0.borrow_mut().restrict(self.node, v, value);
        self.engine.wrap(n)
    }

    /// Substitutes the function `g` for the variable `v`.
    pub fn compose(&self, v: VarId, g: &BoolFn) -> BoolFn {
        self.check_engine(g);
        let hi = self.restrict(v, true);
        let lo = self.restrict(v, false);
        g.ite(&hi, &lo)
    }

    /// Existential quantification by eliminating one variable at a time,
    /// deepest variable first.
    pub fn exists(&self, vars: &[VarId]) -> BoolFn {
        self.quantify(vars, Op::Or)
    }

    /// Universal quantification by eliminating one variable at a time,
    /// deepest variable first.
    pub fn forall(&self, vars: &[VarId]) -> BoolFn {
        self.quantify(vars, Op::And)
    }

    fn quantify(&self, vars: &[VarId], op: Op) -> BoolFn {
        let mut inner = self.engine.0.borrow_mut();
        let mut order: Vec<VarId> = vars.to_vec();
        order.sort_by_key(|v| std::cmp::Reverse(inner.rank(*v)));
        order.dedup();
        let mut f = self.node;
        for v in order {
            let lo = inner.restrict(f, v, false);
            let hi = inner.restrict(f, v, true);
            f = inner.apply(op, lo, hi);
        }
        drop(inner);
        self.engine.wrap(f)
    }

    /// Simultaneous variable-for-variable substitution.
    ///
    /// The map must be injective on the support and must not send a variable
    /// onto one that stays in the support un-renamed.
    pub fn rename(&self, map: &BTreeMap<VarId, VarId>) -> Result<BoolFn, BoolFnError> {
        let support = self.support();
        let mut targets: BTreeMap<VarId, VarId> = BTreeMap::new();
        for v in &support {
            let Some(&to) = map.get(v) else { continue };
            if let Some(&first) = targets.get(&to) {
                return Err(BoolFnError::RenameNotInjective {
                    first: self.engine.name(first),
                    second: self.engine.name(*v),
                    to: self.engine.name(to),
                });
            }
            targets.insert(to, *v);
            if to != *v && support.contains(&to) && !map.contains_key(&to) {
                return Err(BoolFnError::RenameCollision {
                    from: self.engine.name(*v),
                    to: self.engine.name(to),
                });
            }
        }
        if targets.is_empty() {
            return Ok(self.clone());
        }
        let n = self.engine.0.borrow_mut().rename(self.node, map);
        Ok(self.engine.wrap(n))
    }

    /// Evaluates under the assignment that makes exactly `assignment` true.
    pub fn holds(&self, assignment: &BTreeSet<VarId>) -> bool {
        self.engine.0.borrow().eval(self.node, assignment)
    }

    /// Whether `self → other` is valid.
    pub fn entails(&self, other: &BoolFn) -> bool {
        self.and(&other.not()).is_false()
    }

    /// Variables the function depends on, in diagram order.
    pub fn support(&self) -> Vec<VarId> {
        let inner = self.engine.0.borrow();
        let mut vars: Vec<VarId> = inner.support(self.node).into_iter().collect();
        vars.sort_by_key(|v| inner.rank(*v));
        vars
    }

    /// Number of nodes reachable from this function, terminals included.
    pub fn size(&self) -> usize {
        self.engine.0.borrow().size(self.node)
    }

    /// The top variable with its low and high cofactors, or `None` for a
    /// constant.
    pub fn decompose(&self) -> Option<(VarId, BoolFn, BoolFn)> {
        if self.node <= TRUE {
            return None;
        }
        let node = self.engine.0.borrow().nodes[self.node as usize];
        Some((node.var, self.engine.wrap(node.lo), self.engine.wrap(node.hi)))
    }

    /// Every subset of `universe` satisfying the function.
    ///
    /// Results are ordered as binary numbers with the first universe variable
    /// as the least significant bit, so `∅` comes first. Variables of the
    /// support missing from `universe` are treated as false.
    pub fn sat_assignments(&self, universe: &[VarId]) -> Vec<BTreeSet<VarId>> {
        let mut out = Vec::new();
        let mut current = BTreeSet::new();
        self.enumerate(self.node, universe, &mut current, &mut out);
        out
    }

    fn enumerate(
        &self,
        node: NodeId,
        universe: &[VarId],
        current: &mut BTreeSet<VarId>,
        out: &mut Vec<BTreeSet<VarId>>,
    ) {
        if node == FALSE {
            return;
        }
        let Some((&last, rest)) = universe.split_last() else {
            if self.engine.0.borrow().eval(node, current) {
                out.push(current.clone());
            }
            return;
        };
        let lo = self.engine.0.borrow_mut().restrict(node, last, false);
        self.enumerate(lo, rest, current, out);
        let hi = self.engine.0.borrow_mut().restrict(node, last, true);
        if hi != FALSE {
            current.insert(last);
            self.enumerate(hi, rest, current, out);
            current.remove(&last);
        }
    }
}
