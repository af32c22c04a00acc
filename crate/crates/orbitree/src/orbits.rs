//! Level-by-level orbit enumeration for a finitely generated group of tree
//! automorphisms.
//!
//! Each level `n` is the index range `[0, d^n)` in mixed-radix encoding. The
//! engine grows generator image tables incrementally from one level to the
//! next and partitions each level with a disjoint-set forest: one sweep per
//! generator uniting `v` with `g(v)`. Generators permute the finite level,
//! so closure under the generators alone suffices (their inverses are
//! positive powers). The canonical id of an orbit is its minimal vertex
//! index, which is stable across runs.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::automaton::{vertex_index, GroupWord, LevelTables, MealyAutomaton, SignedAutomaton, TreeWord};
use crate::error::{Error, Result};
use crate::limits::VertexBudget;

/// Union-find over vertex indices, union by size with path halving.
struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSets {
    fn new(len: usize) -> Self {
        DisjointSets {
            parent: (0..len).collect(),
            size: vec![1; len],
        }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, i: usize, j: usize) {
        let (mut i, mut j) = (self.find(i), self.find(j));
        if i == j {
            return;
        }
        if self.size[i] < self.size[j] {
            (i, j) = (j, i);
        }
        self.parent[j] = i;
        self.size[i] += self.size[j];
    }
}

/// The partition of one level into orbits.
#[derive(Debug, Clone)]
pub struct LevelOrbits {
    level: usize,
    arity: usize,
    orbit_id: Vec<u32>,
    reps: Vec<u32>,
    sizes: Vec<u64>,
}

impl LevelOrbits {
    /// The trivial partition of the root level (one vertex, one orbit).
    pub(crate) fn root(arity: usize) -> Self {
        LevelOrbits {
            level: 0,
            arity,
            orbit_id: vec![0],
            reps: vec![0],
            sizes: vec![1],
        }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Number of vertices on the level (`d^level`).
    pub fn vertex_count(&self) -> usize {
        self.orbit_id.len()
    }

    pub fn orbit_count(&self) -> usize {
        self.reps.len()
    }

    /// Canonical orbit id (minimal member index) of an encoded vertex.
    pub fn orbit_id_of_index(&self, vertex: u64) -> u64 {
        self.orbit_id[vertex as usize] as u64
    }

    /// Position of a vertex's orbit in the rep-sorted node list.
    pub fn node_of_index(&self, vertex: u64) -> usize {
        let id = self.orbit_id[vertex as usize];
        self.reps.binary_search(&id).expect("orbit ids are exactly the reps")
    }

    /// Canonical id of the `node`-th orbit (nodes are sorted by id).
    pub fn rep(&self, node: usize) -> u64 {
        self.reps[node] as u64
    }

    pub fn size(&self, node: usize) -> u64 {
        self.sizes[node]
    }

    /// Canonical id and size of the orbit of `v`. Fails unless
    /// `|v| == level`.
    pub fn orbit_of_vertex(&self, v: &TreeWord) -> Result<(u64, u64)> {
        if v.len() != self.level {
            return Err(Error::LevelMismatch {
                expected: self.level,
                found: v.len(),
            });
        }
        let node = self.node_of_index(vertex_index(v, self.arity));
        Ok((self.rep(node), self.size(node)))
    }

    /// Multiset of orbit sizes: size -> number of orbits of that size.
    pub fn size_histogram(&self) -> BTreeMap<u64, u64> {
        let mut hist = BTreeMap::new();
        for &s in &self.sizes {
            *hist.entry(s).or_insert(0) += 1;
        }
        hist
    }

    pub fn summary(&self) -> LevelSummary {
        LevelSummary {
            level: self.level,
            orbits: self.orbit_count(),
            sizes: self.size_histogram(),
        }
    }
}

/// One line of the orbit summary: serializes as
/// `{"level": n, "orbits": count, "sizes": {size: count, ...}}`.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct LevelSummary {
    pub level: usize,
    pub orbits: usize,
    pub sizes: BTreeMap<u64, u64>,
}

/// Streams the levels of the orbit partition one at a time.
pub struct OrbitEngine {
    arity: usize,
    budget: VertexBudget,
    tables: LevelTables,
    generators: Vec<Vec<usize>>,
}

impl OrbitEngine {
    pub fn new(aut: &MealyAutomaton, gens: &[GroupWord], budget: VertexBudget) -> Self {
        let sa = SignedAutomaton::closure(aut, gens);
        let generators = gens.iter().map(|g| sa.compile(g)).collect();
        OrbitEngine {
            arity: aut.arity(),
            budget,
            tables: LevelTables::new(sa),
            generators,
        }
    }

    /// The level the next call to [`Self::next_level`] will produce.
    pub fn next_level_number(&self) -> usize {
        self.tables.level() + 1
    }

    /// Computes the orbits of the next level.
    pub fn next_level(&mut self) -> Result<LevelOrbits> {
        let level = self.tables.level() + 1;
        let size = self.budget.check_level(self.arity, level)?;
        self.tables.advance();
        let mut sets = DisjointSets::new(size);
        for gen in &self.generators {
            for v in 0..size {
                let image = self.tables.image(gen, v as u32);
                sets.union(v, image as usize);
            }
        }
        // canonical id = minimal member; ascending sweep meets it first
        let mut canon: Vec<u32> = vec![u32::MAX; size];
        let mut orbit_id = vec![0u32; size];
        let mut reps = Vec::new();
        let mut sizes = Vec::new();
        for v in 0..size {
            let root = sets.find(v);
            if canon[root] == u32::MAX {
                canon[root] = v as u32;
                reps.push(v as u32);
                sizes.push(sets.size[root] as u64);
            }
            orbit_id[v] = canon[root];
        }
        Ok(LevelOrbits {
            level,
            arity: self.arity,
            orbit_id,
            reps,
            sizes,
        })
    }
}

/// The orbit partition of level `level` under the group generated by `gens`.
pub fn compute_level_orbits(
    aut: &MealyAutomaton,
    gens: &[GroupWord],
    level: usize,
    budget: VertexBudget,
) -> Result<LevelOrbits> {
    if level == 0 {
        return Ok(LevelOrbits::root(aut.arity()));
    }
    budget.check_level(aut.arity(), level)?;
    let mut engine = OrbitEngine::new(aut, gens, budget);
    let mut orbits = engine.next_level()?;
    while orbits.level() < level {
        orbits = engine.next_level()?;
    }
    Ok(orbits)
}
