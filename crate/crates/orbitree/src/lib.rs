//! Finite-depth ergodic decomposition of automaton-group actions on regular
//! rooted trees: orbit enumeration per level, orbit-tree construction, the
//! correspondence between orbit-tree rays and ergodic invariant measures,
//! and the GF(2) power-series model of the lamplighter action.

pub mod automaton;
pub mod catalog;
pub mod dsl;
pub mod error;
pub mod limits;
pub mod measures;
pub mod orbits;
pub mod render;
pub mod series;
pub mod tree;

pub use automaton::{Alphabet, GroupWord, MealyAutomaton, Permutation, TreeWord};
pub use error::{Error, Result};
pub use limits::VertexBudget;
pub use orbits::{compute_level_orbits, LevelOrbits};
pub use tree::{is_level_transitive, match_shape, OrbitTree, ShapeSpec, ShapeVerdict};
