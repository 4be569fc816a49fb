//! Symbolic model checking for dynamic epistemic logic with factual change.
//!
//! Models are belief structures: a vocabulary, a boolean state law and one
//! boolean observation function per agent, all stored as binary decision
//! diagrams. Updates are transformers, which may add event variables and
//! change the values of existing ones.
//!
//! - [`boolfun`]: the decision diagram engine.
//! - [`language`]: formulas, parsing, printing and compilation.
//! - [`symbolic`]: belief structures, translation, transformers.
//! - [`explicit`]: Kripke models, action models and product update.
//! - [`bridge`]: translations between the two sides, random instances and
//!   the equivalence checks behind `symdel prove`.
//! - [`scenario`]: the scenario file format used by the command line.
//!
//! ```
//! use std::collections::{BTreeMap, BTreeSet};
//! use symdel::{parse, BeliefStructure, Engine, Scene};
//!
//! let engine = Engine::new();
//! let obs = BTreeMap::from([("b".to_string(), parse("p <-> p'").unwrap())]);
//! let f = BeliefStructure::new(&engine, &["a", "b"], &["p"], &parse("Top").unwrap(), &obs).unwrap();
//! let scene = Scene::new(f, BTreeSet::from(["p".to_string()])).unwrap();
//! assert!(scene.eval(&parse("[b] p & ~[a] p").unwrap()).unwrap());
//! ```

pub mod boolfun;
pub mod language;
pub mod symbolic;
pub mod explicit;
pub mod bridge;
pub mod scenario;

pub use boolfun::{BoolFn, Engine};
pub use language::{parse, Formula};
pub use symbolic::{BeliefStructure, Event, Scene, State, Transformer};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/formulas.md")]
    mod formulas {}
    #[doc = include_str!("../../../book/src/structures.md")]
    mod structures {}
    #[doc = include_str!("../../../book/src/transformers.md")]
    mod transformers {}
    #[doc = include_str!("../../../book/src/sally_anne.md")]
    mod sally_anne {}
    #[doc = include_str!("../../../book/src/action_models.md")]
    mod action_models {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
