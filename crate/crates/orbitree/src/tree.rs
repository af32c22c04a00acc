//! The orbit tree: the quotient of the rooted tree by the group action,
//! truncated to a finite depth.
//!
//! Nodes at level `n` are the orbits on level `n`, listed in increasing
//! order of their canonical ids. Each node is adjacent to exactly one node
//! of the previous level (the orbit of the parents of its vertices), and
//! the children of consecutive nodes form consecutive blocks, so parent
//! links are stored as offsets.

use std::fmt;

use crate::automaton::{GroupWord, MealyAutomaton, TreeWord, vertex_index};
use crate::error::{Error, Result};
use crate::limits::VertexBudget;
use crate::orbits::{LevelOrbits, OrbitEngine};

struct TreeLevel {
    orbits: LevelOrbits,
    /// parent[i] = node index of the parent at the previous level; empty at
    /// the root level.
    parent: Vec<usize>,
    /// child_offsets[i]..child_offsets[i+1] indexes the children at the next
    /// level; all zeros at the deepest level (children unknown).
    child_offsets: Vec<usize>,
}

/// An orbit tree truncated at a fixed depth.
pub struct OrbitTree {
    arity: usize,
    levels: Vec<TreeLevel>,
}

impl OrbitTree {
    /// Builds the orbit tree of depth `depth` for the group generated by
    /// `gens`.
    pub fn build(
        aut: &MealyAutomaton,
        gens: &[GroupWord],
        depth: usize,
        budget: VertexBudget,
    ) -> Result<Self> {
        budget.check_level(aut.arity(), depth)?;
        let mut levels = vec![TreeLevel {
            orbits: LevelOrbits::root(aut.arity()),
            parent: Vec::new(),
            child_offsets: vec![0, 0],
        }];
        let mut engine = OrbitEngine::new(aut, gens, budget);
        for _ in 0..depth {
            let orbits = engine.next_level()?;
            let d = aut.arity() as u64;
            let prev = levels.last_mut().expect("root level exists");
            let parent: Vec<usize> = (0..orbits.orbit_count())
                .map(|i| prev.orbits.node_of_index(orbits.rep(i) / d))
                .collect();
            // children of earlier nodes come first because canonical ids are
            // minimal members and taking prefixes is monotone
            let mut offsets = vec![0usize; prev.orbits.orbit_count() + 1];
            for (i, &p) in parent.iter().enumerate() {
                debug_assert!(i == 0 || parent[i - 1] <= p, "parent links must be monotone");
                offsets[p + 1] += 1;
            }
            for i in 0..prev.orbits.orbit_count() {
                offsets[i + 1] += offsets[i];
            }
            prev.child_offsets = offsets;
            let count = orbits.orbit_count();
            levels.push(TreeLevel {
                orbits,
                parent,
                child_offsets: vec![0; count + 1],
            });
        }
        Ok(OrbitTree {
            arity: aut.arity(),
            levels,
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, n: usize) -> &LevelOrbits {
        &self.levels[n].orbits
    }

    pub fn node_count(&self, n: usize) -> usize {
        self.levels[n].orbits.orbit_count()
    }

    /// Parent node index of node `i` at level `n`; `None` at the root.
    pub fn parent(&self, n: usize, i: usize) -> Option<usize> {
        if n == 0 {
            None
        } else {
            Some(self.levels[n].parent[i])
        }
    }

    /// Children (node indices at level `n+1`) of node `i` at level `n`. The
    /// deepest level has no recorded children.
    pub fn children(&self, n: usize, i: usize) -> std::ops::Range<usize> {
        let offsets = &self.levels[n].child_offsets;
        offsets[i]..offsets[i + 1]
    }

    pub fn child_count(&self, n: usize, i: usize) -> usize {
        self.children(n, i).len()
    }

    /// Node index of the orbit of a vertex given by its tree word.
    pub fn node_of_word(&self, v: &TreeWord) -> Result<(usize, usize)> {
        if v.len() > self.depth() {
            return Err(Error::DepthExceeded {
                available: self.depth(),
                requested: v.len(),
            });
        }
        if let Some(&bad) = v.letters().iter().find(|&&x| x >= self.arity) {
            return Err(Error::InvalidWord(format!(
                "letter {bad} out of range for arity {}",
                self.arity
            )));
        }
        let level = v.len();
        let node = self.levels[level]
            .orbits
            .node_of_index(vertex_index(v, self.arity));
        Ok((level, node))
    }

    /// Child-count table: entry `[n][i]` is the child count of node `i` at
    /// level `n`, for levels `0..depth`.
    pub fn child_count_table(&self) -> Vec<Vec<usize>> {
        (0..self.depth())
            .map(|n| (0..self.node_count(n)).map(|i| self.child_count(n, i)).collect())
            .collect()
    }

    /// True when every node at levels `from..depth` has exactly `arity`
    /// children, i.e. the orbit tree branches like the tree itself from
    /// level `from` on.
    pub fn stabilized_branching(&self, from: usize) -> bool {
        (from..self.depth()).all(|n| {
            (0..self.node_count(n)).all(|i| self.child_count(n, i) == self.arity)
        })
    }

    /// Deterministic DOT rendering; node `i` of level `n` is named
    /// `L{n}O{id}` with the orbit size in the label.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph orbit_tree {\n  rankdir=TB;\n  node [shape=circle];\n");
        for n in 0..=self.depth() {
            for i in 0..self.node_count(n) {
                let level = &self.levels[n];
                out.push_str(&format!(
                    "  \"L{}O{}\" [label=\"L{}O{}\\n{}\"];\n",
                    n,
                    level.orbits.rep(i),
                    n,
                    level.orbits.rep(i),
                    level.orbits.size(i)
                ));
            }
        }
        for n in 1..=self.depth() {
            for i in 0..self.node_count(n) {
                let parent = self.levels[n].parent[i];
                out.push_str(&format!(
                    "  \"L{}O{}\" -> \"L{}O{}\";\n",
                    n - 1,
                    self.levels[n - 1].orbits.rep(parent),
                    n,
                    self.levels[n].orbits.rep(i)
                ));
            }
        }
        out.push_str("}\n");
        out
    }

    /// Plain-text listing: one line per node,
    /// `level orbit_id size parent_id child_count`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for n in 0..=self.depth() {
            for i in 0..self.node_count(n) {
                let level = &self.levels[n].orbits;
                let parent = if n == 0 {
                    "-".to_string()
                } else {
                    self.levels[n - 1]
                        .orbits
                        .rep(self.levels[n].parent[i])
                        .to_string()
                };
                out.push_str(&format!(
                    "{} {} {} {} {}\n",
                    n,
                    level.rep(i),
                    level.size(i),
                    parent,
                    self.child_count(n, i)
                ));
            }
        }
        out
    }
}

/// Level-transitivity verdict to a fixed depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelTransitivity {
    pub transitive: bool,
    /// The smallest level with more than one orbit, when not transitive.
    pub first_failing_level: Option<usize>,
}

/// Checks whether each level `1..=depth` is a single orbit, stopping at the
/// first level that is not.
pub fn is_level_transitive(
    aut: &MealyAutomaton,
    gens: &[GroupWord],
    depth: usize,
    budget: VertexBudget,
) -> Result<LevelTransitivity> {
    budget.check_level(aut.arity(), depth)?;
    let mut engine = OrbitEngine::new(aut, gens, budget);
    for _ in 0..depth {
        let orbits = engine.next_level()?;
        if orbits.orbit_count() > 1 {
            return Ok(LevelTransitivity {
                transitive: false,
                first_failing_level: Some(orbits.level()),
            });
        }
    }
    Ok(LevelTransitivity {
        transitive: true,
        first_failing_level: None,
    })
}

/// Expected orbit-tree shapes, described by child-count patterns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ShapeSpec {
    /// One node per level: the level-transitive case.
    Line,
    /// Every node has exactly `arity` children.
    FullRegular(usize),
    /// One child at levels `2^n - 1`, two children elsewhere.
    LamplighterA,
    /// Root has two children rooting a `LamplighterB` and a `LamplighterA`
    /// subtree, recursively.
    LamplighterB,
    /// Single node at level 1 with `p` children, exactly one of which roots
    /// a line while the other `p - 1` root full `p`-ary subtrees.
    Sushchansky(usize),
    /// Every node at levels `>= from` has exactly `arity` children; levels
    /// below `from` are unconstrained.
    EventuallyRegular { from: usize, arity: usize },
    /// Explicit per-node child counts: entry `[n][i]` is the expected child
    /// count of node `i` at level `n` (nodes in canonical order).
    Explicit(Vec<Vec<usize>>),
}

/// Outcome of a shape comparison. All verdicts are depth-limited: `Ok` means
/// agreement on every level the tree was built to, nothing more.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ShapeVerdict {
    Ok,
    ChildCountMismatch {
        level: usize,
        node: usize,
        expected: usize,
        actual: usize,
    },
    NodeCountMismatch {
        level: usize,
        expected: usize,
        actual: usize,
    },
}

impl ShapeVerdict {
    pub fn is_ok(&self) -> bool {
        matches!(self, ShapeVerdict::Ok)
    }
}

impl fmt::Display for ShapeVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShapeVerdict::Ok => write!(f, "ok"),
            ShapeVerdict::ChildCountMismatch {
                level,
                node,
                expected,
                actual,
            } => write!(
                f,
                "mismatch at level {level}, node {node}: expected {expected} children, found {actual}"
            ),
            ShapeVerdict::NodeCountMismatch {
                level,
                expected,
                actual,
            } => write!(
                f,
                "mismatch at level {level}: expected {expected} nodes, found {actual}"
            ),
        }
    }
}

impl std::str::FromStr for ShapeSpec {
    type Err = Error;

    /// Shape names: `line`, `full:<arity>`, `lamplighter-a`,
    /// `lamplighter-b`, `sushchansky:<p>`,
    /// `eventually-regular:<level>:<arity>`.
    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::UnknownShape(s.to_string());
        match s {
            "line" => return Ok(ShapeSpec::Line),
            "lamplighter-a" => return Ok(ShapeSpec::LamplighterA),
            "lamplighter-b" => return Ok(ShapeSpec::LamplighterB),
            _ => {}
        }
        if let Some(k) = s.strip_prefix("full:") {
            return k.parse().map(ShapeSpec::FullRegular).map_err(|_| unknown());
        }
        if let Some(p) = s.strip_prefix("sushchansky:") {
            return p.parse().map(ShapeSpec::Sushchansky).map_err(|_| unknown());
        }
        if let Some(rest) = s.strip_prefix("eventually-regular:") {
            if let Some((from, arity)) = rest.split_once(':') {
                if let (Ok(from), Ok(arity)) = (from.parse(), arity.parse()) {
                    return Ok(ShapeSpec::EventuallyRegular { from, arity });
                }
            }
            return Err(unknown());
        }
        Err(unknown())
    }
}

/// `T_a` child count at a level: one child exactly at levels `2^n - 1`.
fn lamplighter_a_count(level: usize) -> usize {
    if (level + 1).is_power_of_two() {
        1
    } else {
        2
    }
}

/// Expands `LamplighterB` to a per-node child-count table. Children of a
/// `b`-node are ordered `(b, a)`, matching canonical order: the `b` child is
/// the orbit of the all-zeros vertex.
fn expand_lamplighter_b(depth: usize) -> Vec<Vec<usize>> {
    // node kinds per level: None = the b-spine, Some(l) = an a-subtree node
    // at relative level l
    let mut kinds: Vec<Option<usize>> = vec![None];
    let mut table = Vec::with_capacity(depth);
    for _ in 0..depth {
        let mut row = Vec::with_capacity(kinds.len());
        let mut next = Vec::new();
        for kind in &kinds {
            match kind {
                None => {
                    row.push(2);
                    next.push(None);
                    next.push(Some(0));
                }
                Some(l) => {
                    let c = lamplighter_a_count(*l);
                    row.push(c);
                    next.extend(std::iter::repeat_n(Some(l + 1), c));
                }
            }
        }
        table.push(row);
        kinds = next;
    }
    table
}

/// Compares the tree's child counts against the shape, reporting the first
/// mismatch in (level, node) order.
pub fn match_shape(tree: &OrbitTree, spec: &ShapeSpec) -> ShapeVerdict {
    match spec {
        ShapeSpec::Line => {
            match_uniform(tree, 0, |_| 1)
        }
        ShapeSpec::FullRegular(k) => match_uniform(tree, 0, |_| *k),
        ShapeSpec::LamplighterA => match_uniform(tree, 0, lamplighter_a_count),
        ShapeSpec::LamplighterB => match_explicit(tree, &expand_lamplighter_b(tree.depth())),
        ShapeSpec::EventuallyRegular { from, arity } => match_uniform(tree, *from, |_| *arity),
        ShapeSpec::Explicit(table) => match_explicit(tree, table),
        ShapeSpec::Sushchansky(p) => match_sushchansky(tree, *p),
    }
}

fn match_uniform(tree: &OrbitTree, from: usize, expected: impl Fn(usize) -> usize) -> ShapeVerdict {
    for n in from..tree.depth() {
        let want = expected(n);
        for i in 0..tree.node_count(n) {
            let got = tree.child_count(n, i);
            if got != want {
                return ShapeVerdict::ChildCountMismatch {
                    level: n,
                    node: i,
                    expected: want,
                    actual: got,
                };
            }
        }
    }
    ShapeVerdict::Ok
}

fn match_explicit(tree: &OrbitTree, table: &[Vec<usize>]) -> ShapeVerdict {
    let levels = table.len().min(tree.depth());
    for n in 0..levels {
        if table[n].len() != tree.node_count(n) {
            return ShapeVerdict::NodeCountMismatch {
                level: n,
                expected: table[n].len(),
                actual: tree.node_count(n),
            };
        }
        for i in 0..tree.node_count(n) {
            let got = tree.child_count(n, i);
            if got != table[n][i] {
                return ShapeVerdict::ChildCountMismatch {
                    level: n,
                    node: i,
                    expected: table[n][i],
                    actual: got,
                };
            }
        }
    }
    ShapeVerdict::Ok
}

fn match_sushchansky(tree: &OrbitTree, p: usize) -> ShapeVerdict {
    // levels 0 and 1: single nodes, the root with one child and the level-1
    // node with p children
    for (level, want) in [(0, 1), (1, p)] {
        if level >= tree.depth() {
            return ShapeVerdict::Ok;
        }
        if tree.node_count(level) != 1 {
            return ShapeVerdict::NodeCountMismatch {
                level,
                expected: 1,
                actual: tree.node_count(level),
            };
        }
        if tree.child_count(level, 0) != want {
            return ShapeVerdict::ChildCountMismatch {
                level,
                node: 0,
                expected: want,
                actual: tree.child_count(level, 0),
            };
        }
    }
    if tree.depth() < 3 {
        return ShapeVerdict::Ok;
    }
    // level 2 on: one line thread, everything else full p-ary; the thread
    // starts at the unique level-2 node with a single child
    let line_candidates: Vec<usize> = (0..tree.node_count(2))
        .filter(|&i| tree.child_count(2, i) == 1)
        .collect();
    let mut line_node = match line_candidates.as_slice() {
        [single] => *single,
        _ => {
            // wrong number of line roots: report the first offender
            let (node, actual) = (0..tree.node_count(2))
                .map(|i| (i, tree.child_count(2, i)))
                .find(|&(_, c)| c != p && c != 1)
                .or_else(|| {
                    (0..tree.node_count(2))
                        .map(|i| (i, tree.child_count(2, i)))
                        .find(|&(_, c)| c == 1)
                })
                .unwrap_or((0, tree.child_count(2, 0)));
            return ShapeVerdict::ChildCountMismatch {
                level: 2,
                node,
                expected: p,
                actual,
            };
        }
    };
    for n in 2..tree.depth() {
        for i in 0..tree.node_count(n) {
            let want = if i == line_node { 1 } else { p };
            let got = tree.child_count(n, i);
            if got != want {
                return ShapeVerdict::ChildCountMismatch {
                    level: n,
                    node: i,
                    expected: want,
                    actual: got,
                };
            }
        }
        if n + 1 < tree.depth() {
            line_node = tree.children(n, line_node).start;
        }
    }
    ShapeVerdict::Ok
}
