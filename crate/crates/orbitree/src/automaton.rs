//! Invertible Mealy automata and their actions on regular rooted trees.
//!
//! Finite words over the alphabet are identified with tree vertices: the word
//! `x1 x2 ... xn` is the level-`n` vertex reached from the root by taking the
//! `x1`-th child, then the `x2`-th child, and so on. Every automaton state
//! acts as a tree automorphism letter by letter, and a [`GroupWord`]
//! `f1 f2 ... fk` acts by composition with the *rightmost factor applied
//! first*: `g(v) = f1(f2(... fk(v)))`. Sections are written on the right of
//! root permutations, i.e. `g = (g_0, ..., g_{d-1})τ` acts by
//! `g(xw) = τ(x) · g_x(w)`.

use std::collections::HashMap;

use num::{BigUint, Integer, One};

use crate::error::{Error, Result};
use crate::limits::VertexBudget;

/// An ordered alphabet of `d >= 2` distinct symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(symbols: Vec<S>) -> Result<Self> {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.len() < 2 {
            return Err(Error::InvalidAutomaton(format!(
                "alphabet must have at least 2 symbols, got {}",
                symbols.len()
            )));
        }
        for (i, s) in symbols.iter().enumerate() {
            if s.is_empty() || s.chars().any(|c| c.is_whitespace()) {
                return Err(Error::InvalidAutomaton(format!(
                    "alphabet symbol {i} is empty or contains whitespace"
                )));
            }
            if symbols[..i].contains(s) {
                return Err(Error::InvalidAutomaton(format!(
                    "duplicate alphabet symbol `{s}`"
                )));
            }
        }
        Ok(Alphabet { symbols })
    }

    /// The binary alphabet `0 1`.
    pub fn binary() -> Self {
        Alphabet::new(vec!["0", "1"]).unwrap()
    }

    /// The alphabet `0 1 ... d-1`.
    pub fn decimal(arity: usize) -> Result<Self> {
        Alphabet::new((0..arity).map(|i| i.to_string()).collect())
    }

    pub fn arity(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbol(&self, index: usize) -> &str {
        &self.symbols[index]
    }

    pub fn symbols(&self) -> impl Iterator<Item = &str> {
        self.symbols.iter().map(String::as_str)
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == symbol)
    }

    /// Parses a word written as concatenated symbols, with `^k` repeating the
    /// preceding single symbol `k` times: `10^7` is `1` followed by seven
    /// `0`s. Requires all symbols to be single characters.
    pub fn parse_word(&self, text: &str) -> Result<TreeWord> {
        if self.symbols.iter().any(|s| s.chars().count() != 1) {
            return Err(Error::InvalidWord(
                "word syntax requires single-character alphabet symbols".into(),
            ));
        }
        let mut letters: Vec<usize> = Vec::new();
        let mut chars = text.chars().peekable();
        while let Some(c) = chars.next() {
            if c == '^' {
                let last = letters.pop().ok_or_else(|| {
                    Error::InvalidWord("`^` must follow a symbol".into())
                })?;
                let mut digits = String::new();
                while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                    digits.push(*d);
                    chars.next();
                }
                let count: usize = digits
                    .parse()
                    .map_err(|_| Error::InvalidWord("`^` must be followed by a count".into()))?;
                letters.extend(std::iter::repeat_n(last, count));
            } else {
                let idx = self.index_of(&c.to_string()).ok_or_else(|| {
                    Error::InvalidWord(format!("`{c}` is not an alphabet symbol"))
                })?;
                letters.push(idx);
            }
        }
        Ok(TreeWord(letters))
    }

    pub fn format_word(&self, word: &TreeWord) -> String {
        word.letters().iter().map(|&x| self.symbol(x)).collect()
    }
}

/// A vertex of the tree: a finite word of letter indices; the empty word is
/// the root.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct TreeWord(pub Vec<usize>);

impl TreeWord {
    pub fn root() -> Self {
        TreeWord(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    /// The prefix consisting of the first `n` letters.
    pub fn prefix(&self, n: usize) -> TreeWord {
        TreeWord(self.0[..n].to_vec())
    }

    /// Concatenation `self ++ other`.
    pub fn concat(&self, other: &TreeWord) -> TreeWord {
        let mut letters = self.0.clone();
        letters.extend_from_slice(&other.0);
        TreeWord(letters)
    }
}

impl From<Vec<usize>> for TreeWord {
    fn from(letters: Vec<usize>) -> Self {
        TreeWord(letters)
    }
}

/// Mixed-radix encoding of a level-`n` word as an integer in `[0, d^n)`,
/// with the first letter as the most significant digit. Prefix order equals
/// numeric order, which keeps canonical orbit ids stable.
pub fn vertex_index(word: &TreeWord, arity: usize) -> u64 {
    let mut v: u64 = 0;
    for &x in word.letters() {
        debug_assert!(x < arity);
        v = v * arity as u64 + x as u64;
    }
    v
}

/// Inverse of [`vertex_index`] for a given level.
pub fn vertex_word(mut index: u64, level: usize, arity: usize) -> TreeWord {
    let mut letters = vec![0usize; level];
    for slot in letters.iter_mut().rev() {
        *slot = (index % arity as u64) as usize;
        index /= arity as u64;
    }
    TreeWord(letters)
}

/// A bijection of `{0, .., n-1}` stored by images.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &im in &images {
            if im >= n || seen[im] {
                return Err(Error::InvalidAutomaton(format!(
                    "{images:?} is not a permutation"
                )));
            }
            seen[im] = true;
        }
        Ok(Permutation { images })
    }

    pub fn identity(degree: usize) -> Self {
        Permutation {
            images: (0..degree).collect(),
        }
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn apply(&self, point: usize) -> usize {
        self.images[point]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &im)| i == im)
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0; self.images.len()];
        for (i, &im) in self.images.iter().enumerate() {
            images[im] = i;
        }
        Permutation { images }
    }

    pub fn cycle_lengths(&self) -> Vec<usize> {
        let n = self.images.len();
        let mut seen = vec![false; n];
        let mut lengths = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = self.images[i];
                len += 1;
            }
            lengths.push(len);
        }
        lengths
    }

    /// Multiplicative order: the lcm of the cycle lengths.
    pub fn order(&self) -> BigUint {
        let mut ord = BigUint::one();
        for len in self.cycle_lengths() {
            ord = ord.lcm(&BigUint::from(len));
        }
        ord
    }
}

/// One factor of a group word: an automaton state, possibly inverted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Factor {
    pub state: usize,
    pub inverted: bool,
}

/// A formal word in automaton states and their inverses. The empty word is
/// the identity. No free reduction is performed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct GroupWord {
    factors: Vec<Factor>,
}

impl GroupWord {
    pub fn identity() -> Self {
        GroupWord::default()
    }

    pub fn state(state: usize) -> Self {
        GroupWord {
            factors: vec![Factor {
                state,
                inverted: false,
            }],
        }
    }

    pub fn from_factors(factors: Vec<Factor>) -> Self {
        GroupWord { factors }
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// The formal inverse: factors reversed with signs flipped.
    pub fn inverse(&self) -> GroupWord {
        GroupWord {
            factors: self
                .factors
                .iter()
                .rev()
                .map(|f| Factor {
                    state: f.state,
                    inverted: !f.inverted,
                })
                .collect(),
        }
    }

    /// The product `self · other` (so `other` acts first).
    pub fn concat(&self, other: &GroupWord) -> GroupWord {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        GroupWord { factors }
    }
}

/// A state definition for [`MealyAutomaton::new`]: the sections at the first
/// level (by letter index) and the root output permutation.
#[derive(Debug, Clone)]
pub struct StateDef {
    pub name: String,
    pub sections: Vec<usize>,
    pub output: Permutation,
}

/// An invertible Mealy automaton `(Q, Σ, π, λ)`.
///
/// The inverse automaton is materialized once at construction: inverting the
/// output permutations is cheap and amortizes across the millions of vertex
/// applications made by the level engines.
#[derive(Debug, Clone)]
pub struct MealyAutomaton {
    alphabet: Alphabet,
    names: Vec<String>,
    transition: Vec<Vec<usize>>,
    output: Vec<Permutation>,
    inv_transition: Vec<Vec<usize>>,
    inv_output: Vec<Permutation>,
}

impl MealyAutomaton {
    pub fn new(alphabet: Alphabet, states: Vec<StateDef>) -> Result<Self> {
        let d = alphabet.arity();
        let n = states.len();
        let mut names = Vec::with_capacity(n);
        let mut transition = Vec::with_capacity(n);
        let mut output = Vec::with_capacity(n);
        for def in states {
            if names.contains(&def.name) {
                return Err(Error::InvalidAutomaton(format!(
                    "duplicate state name `{}`",
                    def.name
                )));
            }
            if def.sections.len() != d {
                return Err(Error::InvalidAutomaton(format!(
                    "state `{}` has {} sections, expected {}",
                    def.name,
                    def.sections.len(),
                    d
                )));
            }
            if let Some(&bad) = def.sections.iter().find(|&&t| t >= n) {
                return Err(Error::InvalidAutomaton(format!(
                    "state `{}` has section index {} out of range",
                    def.name, bad
                )));
            }
            if def.output.degree() != d {
                return Err(Error::InvalidAutomaton(format!(
                    "state `{}` has an output permutation of degree {}, expected {}",
                    def.name,
                    def.output.degree(),
                    d
                )));
            }
            names.push(def.name);
            transition.push(def.sections);
            output.push(def.output);
        }
        let inv_output: Vec<Permutation> = output.iter().map(Permutation::inverse).collect();
        let inv_transition: Vec<Vec<usize>> = (0..n)
            .map(|q| (0..d).map(|x| transition[q][inv_output[q].apply(x)]).collect())
            .collect();
        Ok(MealyAutomaton {
            alphabet,
            names,
            transition,
            output,
            inv_transition,
            inv_output,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn arity(&self) -> usize {
        self.alphabet.arity()
    }

    pub fn state_count(&self) -> usize {
        self.names.len()
    }

    pub fn state_name(&self, state: usize) -> &str {
        &self.names[state]
    }

    pub fn state_names(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(String::as_str)
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// The transition function `π(state, letter)`.
    pub fn transition(&self, state: usize, letter: usize) -> usize {
        self.transition[state][letter]
    }

    /// The output permutation `λ(state, ·)`.
    pub fn output(&self, state: usize) -> &Permutation {
        &self.output[state]
    }

    /// One single-state generator per state, in declaration order.
    pub fn state_generators(&self) -> Vec<GroupWord> {
        (0..self.state_count()).map(GroupWord::state).collect()
    }

    /// The inverse automaton: one state `q^-1` per state `q`, acting as the
    /// inverse tree automorphism of `q`.
    pub fn invert(&self) -> MealyAutomaton {
        let names = self
            .names
            .iter()
            .map(|n| match n.strip_suffix("^-1") {
                Some(base) => base.to_string(),
                None => format!("{n}^-1"),
            })
            .collect();
        MealyAutomaton {
            alphabet: self.alphabet.clone(),
            names,
            transition: self.inv_transition.clone(),
            output: self.inv_output.clone(),
            inv_transition: self.transition.clone(),
            inv_output: self.output.clone(),
        }
    }

    /// Feeds one letter through one factor: returns the output letter and
    /// advances the factor's carried state.
    fn step(&self, state: &mut usize, inverted: bool, letter: usize) -> usize {
        let q = *state;
        if inverted {
            // q^-1 on input x outputs y = σ_q^-1(x) and moves to (π(q, y))^-1
            let y = self.inv_output[q].apply(letter);
            *state = self.transition[q][y];
            y
        } else {
            let y = self.output[q].apply(letter);
            *state = self.transition[q][letter];
            y
        }
    }

    fn walk(&self, word: &GroupWord, v: &TreeWord) -> (TreeWord, Vec<usize>) {
        let mut states: Vec<usize> = word.factors().iter().map(|f| f.state).collect();
        let mut out = Vec::with_capacity(v.len());
        for &x in v.letters() {
            assert!(x < self.arity(), "letter {x} out of range for arity {}", self.arity());
            let mut letter = x;
            // letters flow right to left through the factors
            for (i, f) in word.factors().iter().enumerate().rev() {
                letter = self.step(&mut states[i], f.inverted, letter);
            }
            out.push(letter);
        }
        (TreeWord(out), states)
    }

    /// The image of vertex `v` under the group word `g`.
    pub fn act(&self, g: &GroupWord, v: &TreeWord) -> TreeWord {
        self.walk(g, v).0
    }

    /// The section `g|_v`: the group word `h` with `g(vw) = g(v) · h(w)` for
    /// all `w`. The section at the root is `g` itself.
    pub fn section(&self, g: &GroupWord, v: &TreeWord) -> GroupWord {
        let (_, states) = self.walk(g, v);
        GroupWord::from_factors(
            g.factors()
                .iter()
                .zip(states)
                .map(|(f, state)| Factor {
                    state,
                    inverted: f.inverted,
                })
                .collect(),
        )
    }

    /// Parses a group word: whitespace-separated tokens, each `name` or
    /// `name^-1`. The empty string is the identity.
    pub fn parse_group_word(&self, text: &str) -> Result<GroupWord> {
        let mut factors = Vec::new();
        for tok in text.split_whitespace() {
            // an exact state-name match wins over the ^-1 reading
            if let Some(state) = self.state_index(tok) {
                factors.push(Factor {
                    state,
                    inverted: false,
                });
            } else if let Some(state) = tok.strip_suffix("^-1").and_then(|b| self.state_index(b)) {
                factors.push(Factor {
                    state,
                    inverted: true,
                });
            } else {
                return Err(Error::UnknownState(tok.to_string()));
            }
        }
        Ok(GroupWord::from_factors(factors))
    }

    pub fn format_group_word(&self, g: &GroupWord) -> String {
        if g.is_empty() {
            return "1".to_string();
        }
        g.factors()
            .iter()
            .map(|f| {
                let name = self.state_name(f.state);
                if f.inverted {
                    format!("{name}^-1")
                } else {
                    name.to_string()
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// The permutation induced by `g` on the `d^level` vertices of a level,
    /// in mixed-radix encoding.
    pub fn level_permutation(
        &self,
        g: &GroupWord,
        level: usize,
        budget: VertexBudget,
    ) -> Result<Permutation> {
        let size = budget.check_level(self.arity(), level)?;
        let sa = SignedAutomaton::closure(self, std::slice::from_ref(g));
        let compiled = sa.compile(g);
        let mut tables = LevelTables::new(sa);
        for _ in 0..level {
            tables.advance();
        }
        let images = (0..size)
            .map(|v| tables.image(&compiled, v as u32) as usize)
            .collect();
        Ok(Permutation::new(images).expect("level action of an invertible automaton is a bijection"))
    }

    /// The least `m >= 1` with `g^m` acting trivially on the level: the lcm
    /// of the cycle lengths of the level permutation.
    pub fn permutation_order_at_level(
        &self,
        g: &GroupWord,
        level: usize,
        budget: VertexBudget,
    ) -> Result<BigUint> {
        Ok(self.level_permutation(g, level, budget)?.order())
    }
}

/// The closure of a set of signed states under taking sections, flattened
/// into transition/output tables. This is the sub-automaton of the disjoint
/// union `A ⊔ A^-1` reachable from the factors of the given words.
pub(crate) struct SignedAutomaton {
    arity: usize,
    trans: Vec<Vec<usize>>,
    out: Vec<Vec<usize>>,
    index: HashMap<Factor, usize>,
}

impl SignedAutomaton {
    pub(crate) fn closure(aut: &MealyAutomaton, words: &[GroupWord]) -> Self {
        let d = aut.arity();
        let mut index: HashMap<Factor, usize> = HashMap::new();
        let mut queue: Vec<Factor> = Vec::new();
        let enqueue = |f: Factor, index: &mut HashMap<Factor, usize>, queue: &mut Vec<Factor>| {
            if !index.contains_key(&f) {
                index.insert(f, index.len());
                queue.push(f);
            }
        };
        for w in words {
            for &f in w.factors() {
                enqueue(f, &mut index, &mut queue);
            }
        }
        let mut trans: Vec<Vec<usize>> = Vec::new();
        let mut out: Vec<Vec<usize>> = Vec::new();
        let mut head = 0;
        while head < queue.len() {
            let f = queue[head];
            head += 1;
            let q = f.state;
            let (images, children): (Vec<usize>, Vec<Factor>) = if f.inverted {
                (
                    (0..d).map(|x| aut.inv_output[q].apply(x)).collect(),
                    (0..d)
                        .map(|x| Factor {
                            state: aut.inv_transition[q][x],
                            inverted: true,
                        })
                        .collect(),
                )
            } else {
                (
                    (0..d).map(|x| aut.output[q].apply(x)).collect(),
                    (0..d)
                        .map(|x| Factor {
                            state: aut.transition[q][x],
                            inverted: false,
                        })
                        .collect(),
                )
            };
            for &c in &children {
                enqueue(c, &mut index, &mut queue);
            }
            trans.push(children.iter().map(|c| index[c]).collect());
            out.push(images);
        }
        SignedAutomaton {
            arity: d,
            trans,
            out,
            index,
        }
    }

    /// Maps the factors of `g` to signed-state ids. `g` must have been part
    /// of the closure.
    pub(crate) fn compile(&self, g: &GroupWord) -> Vec<usize> {
        g.factors().iter().map(|f| self.index[f]).collect()
    }
}

/// Per-level image tables for every signed state, grown one level at a time
/// from the transition tables: with `D = d^(n-1)`,
/// `table_s[x·D + r] = σ_s(x)·D + table_{s|x}[r]`.
pub(crate) struct LevelTables {
    arity: usize,
    trans: Vec<Vec<usize>>,
    out: Vec<Vec<usize>>,
    level: usize,
    tables: Vec<Vec<u32>>,
}

impl LevelTables {
    pub(crate) fn new(sa: SignedAutomaton) -> Self {
        let n = sa.trans.len();
        LevelTables {
            arity: sa.arity,
            trans: sa.trans,
            out: sa.out,
            level: 0,
            tables: vec![vec![0u32]; n],
        }
    }

    pub(crate) fn level(&self) -> usize {
        self.level
    }

    /// Grows every table to the next level. The caller is responsible for
    /// checking the level size against the vertex budget beforehand.
    pub(crate) fn advance(&mut self) {
        let d = self.arity;
        let prev_size = self.tables.first().map_or(1, Vec::len);
        let next: Vec<Vec<u32>> = (0..self.tables.len())
            .map(|s| {
                let mut table = Vec::with_capacity(prev_size * d);
                for x in 0..d {
                    let base = (self.out[s][x] * prev_size) as u32;
                    let child = &self.tables[self.trans[s][x]];
                    table.extend(child.iter().map(|&r| base + r));
                }
                table
            })
            .collect();
        self.tables = next;
        self.level += 1;
    }

    /// Image of the encoded vertex `v` under a compiled word (rightmost
    /// factor first).
    pub(crate) fn image(&self, compiled: &[usize], v: u32) -> u32 {
        let mut v = v;
        for &s in compiled.iter().rev() {
            v = self.tables[s][v as usize];
        }
        v
    }
}
