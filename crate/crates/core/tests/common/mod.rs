#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use symdel::language::{parse, Formula};
use symdel::symbolic::{BeliefStructure, State};

pub fn f(s: &str) -> Formula {
    parse(s).unwrap()
}

pub fn st(items: &[&str]) -> State {
    items.iter().map(|s| s.to_string()).collect()
}

pub fn obs(pairs: &[(&str, &str)]) -> BTreeMap<String, Formula> {
    pairs.iter().map(|(a, s)| (a.to_string(), f(s))).collect()
}

/// Every subset of `vocab`, in binary counting order.
pub fn subsets(vocab: &[String]) -> Vec<State> {
    (0..1usize << vocab.len())
        .map(|k| {
            (0..vocab.len())
                .filter(|b| k >> b & 1 == 1)
                .map(|b| vocab[b].clone())
                .collect()
        })
        .collect()
}

/// Direct semantics of a structure: states found by testing every subset of
/// the vocabulary against the law, and `□ᵢ` quantifying over the states `t`
/// with `s ∪ t'` satisfying `Ωᵢ`.
pub struct Direct {
    pub states: Vec<State>,
    succ: BTreeMap<String, Vec<Vec<usize>>>,
}

impl Direct {
    pub fn new(f: &BeliefStructure) -> Self {
        let states: Vec<State> = subsets(&f.vocabulary())
            .into_iter()
            .filter(|s| f.is_state(s).unwrap())
            .collect();
        let succ = f
            .agents()
            .iter()
            .map(|i| {
                let rows = states
                    .iter()
                    .map(|s| {
                        (0..states.len())
                            .filter(|t| f.relates(i, s, &states[*t]).unwrap())
                            .collect()
                    })
                    .collect();
                (i.clone(), rows)
            })
            .collect();
        Direct { states, succ }
    }

    /// Truth value at each state.
    pub fn extension(&self, phi: &Formula) -> Vec<bool> {
        let n = self.states.len();
        match phi {
            Formula::Top => vec![true; n],
            Formula::Bot => vec![false; n],
            Formula::Atom(p) => self.states.iter().map(|s| s.contains(p)).collect(),
            Formula::Not(g) => self.extension(g).into_iter().map(|b| !b).collect(),
            Formula::And(gs) => gs.iter().fold(vec![true; n], |acc, g| {
                acc.into_iter().zip(self.extension(g)).map(|(a, b)| a && b).collect()
            }),
            Formula::Or(gs) => gs.iter().fold(vec![false; n], |acc, g| {
                acc.into_iter().zip(self.extension(g)).map(|(a, b)| a || b).collect()
            }),
            Formula::Implies(a, b) => self
                .extension(a)
                .into_iter()
                .zip(self.extension(b))
                .map(|(x, y)| !x || y)
                .collect(),
            Formula::Iff(a, b) => self
                .extension(a)
                .into_iter()
                .zip(self.extension(b))
                .map(|(x, y)| x == y)
                .collect(),
            Formula::Believes(i, g) => {
                let e = self.extension(g);
                self.succ[i]
                    .iter()
                    .map(|ts| ts.iter().all(|t| e[*t]))
                    .collect()
            }
        }
    }
}

/// Truth table of a boolean formula over `vocab`.
pub fn truth_table(phi: &Formula, vocab: &[String]) -> Vec<bool> {
    subsets(vocab)
        .iter()
        .map(|s| phi.eval_bool(s).unwrap())
        .collect()
}

pub fn names(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

pub fn set(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}
