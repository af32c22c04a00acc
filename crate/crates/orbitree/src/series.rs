//! The lamplighter boundary action as multiplication by `1 + t` over GF(2)
//! power series, truncated to polynomials mod `t^m`.
//!
//! A binary word `a0 a1 a2 ...` is identified with the series
//! `a0 + a1·t + a2·t² + ...`; under this identification the generators act
//! by `a(f) = (1+t)·f + 1` and `b(f) = (1+t)·f`. Multiplication by `1 + t`
//! is `f XOR (f << 1)` on the coefficient bits, so one action step costs
//! `O(m/64)`.

use crate::automaton::{GroupWord, MealyAutomaton, TreeWord};
use crate::error::{Error, Result};
use crate::limits::VertexBudget;

const BITS: usize = 64;

/// A polynomial over GF(2) modulo `t^m`, stored as a bit vector with bit `i`
/// holding the coefficient of `t^i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Poly2 {
    limbs: Vec<u64>,
    len: usize,
}

impl Poly2 {
    pub fn zero(len: usize) -> Self {
        Poly2 {
            limbs: vec![0; len.div_ceil(BITS)],
            len,
        }
    }

    /// The constant polynomial `1` (requires `len >= 1`).
    pub fn one(len: usize) -> Self {
        assert!(len >= 1, "degree-0 truncation has no constant term");
        let mut p = Poly2::zero(len);
        p.set(0, true);
        p
    }

    /// The truncation degree `m`.
    pub fn truncation(&self) -> usize {
        self.len
    }

    pub fn coeff(&self, i: usize) -> bool {
        assert!(i < self.len);
        self.limbs[i / BITS] >> (i % BITS) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len);
        let mask = 1u64 << (i % BITS);
        if value {
            self.limbs[i / BITS] |= mask;
        } else {
            self.limbs[i / BITS] &= !mask;
        }
    }

    /// Number of nonzero coefficients.
    pub fn count_ones(&self) -> u64 {
        self.limbs.iter().map(|l| l.count_ones() as u64).sum()
    }

    /// Multiplication by `1 + t`, truncated: `f XOR (f << 1)`.
    pub fn mul_one_plus_t(&self) -> Poly2 {
        let mut limbs = Vec::with_capacity(self.limbs.len());
        let mut carry = 0u64;
        for &limb in &self.limbs {
            limbs.push(limb ^ (limb << 1) ^ carry);
            carry = limb >> (BITS - 1);
        }
        let mut out = Poly2 { limbs, len: self.len };
        out.mask_tail();
        out
    }

    /// XOR with another polynomial of the same truncation.
    pub fn add(&self, other: &Poly2) -> Poly2 {
        assert_eq!(self.len, other.len, "truncation degrees must match");
        Poly2 {
            limbs: self
                .limbs
                .iter()
                .zip(&other.limbs)
                .map(|(a, b)| a ^ b)
                .collect(),
            len: self.len,
        }
    }

    /// The polynomial `t^k · self`, truncated.
    pub fn shift(&self, k: usize) -> Poly2 {
        let mut out = Poly2::zero(self.len);
        for i in 0..self.len.saturating_sub(k) {
            if self.coeff(i) {
                out.set(i + k, true);
            }
        }
        out
    }

    fn mask_tail(&mut self) {
        let used = self.len % BITS;
        if used != 0 {
            if let Some(last) = self.limbs.last_mut() {
                *last &= (1u64 << used) - 1;
            }
        }
    }

    /// Reads a binary word as a polynomial; the word length fixes the
    /// truncation degree.
    pub fn from_word(word: &TreeWord) -> Result<Poly2> {
        let mut p = Poly2::zero(word.len());
        for (i, &x) in word.letters().iter().enumerate() {
            if x > 1 {
                return Err(Error::InvalidWord(format!(
                    "letter {x} is not binary; the series model needs a binary word"
                )));
            }
            if x == 1 {
                p.set(i, true);
            }
        }
        Ok(p)
    }

    pub fn to_word(&self) -> TreeWord {
        TreeWord((0..self.len).map(|i| self.coeff(i) as usize).collect())
    }
}

/// `a(f) = (1+t)·f + 1`.
pub fn act_a(f: &Poly2) -> Poly2 {
    let mut out = f.mul_one_plus_t();
    if out.len > 0 {
        out.set(0, !out.coeff(0));
    }
    out
}

/// `b(f) = (1+t)·f`.
pub fn act_b(f: &Poly2) -> Poly2 {
    f.mul_one_plus_t()
}

/// The two lamplighter generators in the series model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LampGen {
    A,
    B,
}

impl LampGen {
    pub fn act(&self, f: &Poly2) -> Poly2 {
        match self {
            LampGen::A => act_a(f),
            LampGen::B => act_b(f),
        }
    }
}

/// Orbit size of `f` under a generator: the first return time. Both actions
/// are bijections mod `t^m` (the multiplier `1 + t` is a unit), so the orbit
/// is a single cycle through `f`.
pub fn orbit_size(f: &Poly2, g: LampGen) -> u64 {
    let mut cur = g.act(f);
    let mut steps = 1;
    while cur != *f {
        cur = g.act(&cur);
        steps += 1;
    }
    steps
}

/// The closed form `2^(floor(log2 n) + 1)` from the orbit-size lemmas.
pub fn orbit_size_formula(n: u64) -> u64 {
    assert!(n >= 1);
    1 << (63 - n.leading_zeros() + 1)
}

/// Closed-form and brute-force size of the orbit of `1 0^k` under `b`.
pub fn orb10_sizes(k: usize) -> (u64, u64) {
    assert!(k >= 1);
    let mut v = Poly2::zero(k + 1);
    v.set(0, true);
    (orbit_size_formula(k as u64), orbit_size(&v, LampGen::B))
}

/// Closed-form and brute-force size of the orbit of `w` under `a`.
pub fn orb_a_sizes(w: &TreeWord) -> Result<(u64, u64)> {
    if w.is_empty() {
        return Err(Error::InvalidWord("the orbit-size formula needs |w| >= 1".into()));
    }
    let f = Poly2::from_word(w)?;
    Ok((orbit_size_formula(w.len() as u64), orbit_size(&f, LampGen::A)))
}

/// Closed-form and brute-force size of the orbit of `0^i 1 w` under `b`.
pub fn orb_0i1w_sizes(i: usize, w: &TreeWord) -> Result<(u64, u64)> {
    if w.is_empty() {
        return Err(Error::InvalidWord("the orbit-size formula needs |w| >= 1".into()));
    }
    let mut letters = vec![0usize; i];
    letters.push(1);
    letters.extend_from_slice(w.letters());
    let f = Poly2::from_word(&TreeWord(letters))?;
    Ok((orbit_size_formula(w.len() as u64), orbit_size(&f, LampGen::B)))
}

/// A matrix whose `i`-th row is `g^i(v)` (row 0 is `v` itself).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitMatrix {
    width: usize,
    rows: Vec<Poly2>,
}

impl OrbitMatrix {
    pub fn from_rows(rows: Vec<Poly2>) -> Self {
        let width = rows.first().map_or(0, Poly2::truncation);
        assert!(rows.iter().all(|r| r.truncation() == width), "rows must have equal length");
        OrbitMatrix { width, rows }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &Poly2 {
        &self.rows[i]
    }

    pub fn bit(&self, i: usize, j: usize) -> bool {
        self.rows[i].coeff(j)
    }

    pub fn count_ones(&self) -> u64 {
        self.rows.iter().map(Poly2::count_ones).sum()
    }

    /// Entrywise XOR.
    pub fn add(&self, other: &OrbitMatrix) -> OrbitMatrix {
        assert_eq!(self.height(), other.height());
        OrbitMatrix::from_rows(
            self.rows
                .iter()
                .zip(&other.rows)
                .map(|(a, b)| a.add(b))
                .collect(),
        )
    }

    /// The `height × width` submatrix starting at `(row, col)`.
    pub fn block(&self, row: usize, col: usize, height: usize, width: usize) -> OrbitMatrix {
        let rows = (row..row + height)
            .map(|i| {
                let mut p = Poly2::zero(width);
                for j in 0..width {
                    if self.bit(i, col + j) {
                        p.set(j, true);
                    }
                }
                p
            })
            .collect();
        OrbitMatrix::from_rows(rows)
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(|r| r.count_ones() == 0)
    }
}

/// Orbit matrix of `v` under a series generator.
pub fn orbit_matrix(v: &TreeWord, g: LampGen, rows: usize) -> Result<OrbitMatrix> {
    let mut cur = Poly2::from_word(v)?;
    let mut out = Vec::with_capacity(rows);
    for _ in 0..rows {
        out.push(cur.clone());
        cur = g.act(&cur);
    }
    Ok(OrbitMatrix::from_rows(out))
}

/// Orbit matrix of `v` under a group word of an arbitrary binary automaton.
pub fn orbit_matrix_automaton(
    aut: &MealyAutomaton,
    g: &GroupWord,
    v: &TreeWord,
    rows: usize,
) -> Result<OrbitMatrix> {
    if aut.arity() != 2 {
        return Err(Error::InvalidWord(
            "orbit matrices are defined over the binary alphabet".into(),
        ));
    }
    let mut cur = v.clone();
    let mut out = Vec::with_capacity(rows);
    for _ in 0..rows {
        out.push(Poly2::from_word(&cur)?);
        cur = aut.act(g, &cur);
    }
    Ok(OrbitMatrix::from_rows(out))
}

/// Checks the block decomposition of `M(1 0^(2^(n+1) - 1), b)`: with
/// `M = M(1 0^(2^n - 1), b)`, the doubled matrix must equal
/// `[[M, 0], [M, M]]`.
pub fn verify_block_decomposition(n: u32, budget: VertexBudget) -> Result<bool> {
    let half = 1usize << n;
    let full = half * 2;
    if full as u64 > budget.get() {
        return Err(Error::BudgetExceeded {
            arity: 2,
            level: full,
            budget: budget.get(),
        });
    }
    let mut seed = Poly2::zero(full);
    seed.set(0, true);
    let big = orbit_matrix(&seed.to_word(), LampGen::B, full)?;
    let mut small_seed = Poly2::zero(half);
    small_seed.set(0, true);
    let small = orbit_matrix(&small_seed.to_word(), LampGen::B, half)?;
    Ok(big.block(0, 0, half, half) == small
        && big.block(0, half, half, half).is_zero()
        && big.block(half, 0, half, half) == small
        && big.block(half, half, half, half) == small)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::automaton::vertex_word;

    #[test]
    fn generator_action_examples() {
        let one = Poly2::one(4);
        let b1 = act_b(&one);
        assert_eq!(b1.to_word().letters(), &[1, 1, 0, 0]); // 1 + t
        let zero = Poly2::zero(4);
        assert_eq!(act_a(&zero), Poly2::one(4));
        assert_eq!(act_b(&zero), zero);
    }

    #[test]
    fn word_series_roundtrip() {
        let alpha = crate::automaton::Alphabet::binary();
        let w = alpha.parse_word("10^5").unwrap();
        let p = Poly2::from_word(&w).unwrap();
        assert_eq!(p.count_ones(), 1);
        assert!(p.coeff(0));
        assert_eq!(p.to_word(), w);
        let w = alpha.parse_word("11").unwrap();
        let p = Poly2::from_word(&w).unwrap();
        assert!(p.coeff(0) && p.coeff(1)); // 1 + t
        let zero = alpha.parse_word("0^6").unwrap();
        assert_eq!(Poly2::from_word(&zero).unwrap(), Poly2::zero(6));
        // bijectivity over all words of length 10
        for idx in 0..(1u64 << 10) {
            let w = vertex_word(idx, 10, 2);
            assert_eq!(Poly2::from_word(&w).unwrap().to_word(), w);
        }
    }

    #[test]
    fn base_orbit_matrices() {
        let alpha = crate::automaton::Alphabet::binary();
        let m = orbit_matrix(&alpha.parse_word("1").unwrap(), LampGen::B, 1).unwrap();
        assert_eq!((m.height(), m.width()), (1, 1));
        assert!(m.bit(0, 0));
        let m = orbit_matrix(&alpha.parse_word("10").unwrap(), LampGen::B, 2).unwrap();
        assert!(m.bit(0, 0) && !m.bit(0, 1));
        assert!(m.bit(1, 0) && m.bit(1, 1));
    }

    #[test]
    fn block_decomposition_holds() {
        for n in 0..5 {
            assert!(verify_block_decomposition(n, VertexBudget::default()).unwrap());
        }
    }

    #[test]
    fn block_decomposition_negative() {
        // a corrupted matrix no longer satisfies the block identity
        let alpha = crate::automaton::Alphabet::binary();
        let big = orbit_matrix(&alpha.parse_word("10^3").unwrap(), LampGen::B, 4).unwrap();
        let small = orbit_matrix(&alpha.parse_word("10").unwrap(), LampGen::B, 2).unwrap();
        let mut corrupted = big.clone();
        let flipped = !corrupted.rows[3].coeff(0);
        corrupted.rows[3].set(0, flipped);
        assert_eq!(big.block(2, 0, 2, 2), small);
        assert_ne!(corrupted.block(2, 0, 2, 2), small);
    }

    #[test]
    fn orbit_size_formulas_small() {
        assert_eq!(orb10_sizes(1), (2, 2));
        assert_eq!(orb10_sizes(2), (4, 4));
        assert_eq!(orb10_sizes(3), (4, 4));
        assert_eq!(orb10_sizes(4), (8, 8));
        let alpha = crate::automaton::Alphabet::binary();
        for text in ["1", "01", "101", "0011011"] {
            let w = alpha.parse_word(text).unwrap();
            let (formula, brute) = orb_a_sizes(&w).unwrap();
            assert_eq!(formula, brute, "word {text}");
            for i in 0..4 {
                let (formula2, brute2) = orb_0i1w_sizes(i, &w).unwrap();
                assert_eq!(formula, formula2);
                assert_eq!(formula2, brute2, "word 0^{i}1{text}");
            }
        }
    }

    #[test]
    fn period_of_b_on_power_of_two_words() {
        // b^(2^(n+1)) fixes 1 0^(2^(n+1)-1) because (1+t)^(2^(n+1)) = 1 mod t^(2^(n+1))
        for n in 0..4u32 {
            let len = 1usize << (n + 1);
            let mut f = Poly2::zero(len);
            f.set(0, true);
            let mut cur = f.clone();
            for _ in 0..len {
                cur = act_b(&cur);
            }
            assert_eq!(cur, f);
        }
    }

    #[test]
    fn additivity_of_orbit_matrices() {
        // M(w, b) is the XOR of the single-1 matrices over the positions of
        // the 1s of w; exhaustive for |w| <= 10
        let rows = 16;
        for len in 1..=10usize {
            let singles: Vec<OrbitMatrix> = (0..len)
                .map(|l| {
                    let mut p = Poly2::zero(len);
                    p.set(l, true);
                    orbit_matrix(&p.to_word(), LampGen::B, rows).unwrap()
                })
                .collect();
            for idx in 0..(1u64 << len) {
                let w = vertex_word(idx, len, 2);
                let direct = orbit_matrix(&w, LampGen::B, rows).unwrap();
                let mut sum = OrbitMatrix::from_rows(vec![Poly2::zero(len); rows]);
                for (l, &x) in w.letters().iter().enumerate() {
                    if x == 1 {
                        sum = sum.add(&singles[l]);
                    }
                }
                assert_eq!(direct, sum);
            }
        }
    }

    #[test]
    fn cross_model_agreement_sample() {
        let aut = catalog::lamplighter();
        let ga = aut.parse_group_word("a").unwrap();
        let gb = aut.parse_group_word("b").unwrap();
        for idx in 0..(1u64 << 11) {
            let w = vertex_word(idx, 11, 2);
            let f = Poly2::from_word(&w).unwrap();
            assert_eq!(act_a(&f).to_word(), aut.act(&ga, &w));
            assert_eq!(act_b(&f).to_word(), aut.act(&gb, &w));
        }
    }

    #[test]
    fn automaton_orbit_matrix_matches_series() {
        let aut = catalog::lamplighter();
        let gb = aut.parse_group_word("b").unwrap();
        let alpha = crate::automaton::Alphabet::binary();
        let v = alpha.parse_word("10^7").unwrap();
        let m1 = orbit_matrix(&v, LampGen::B, 8).unwrap();
        let m2 = orbit_matrix_automaton(&aut, &gb, &v, 8).unwrap();
        assert_eq!(m1, m2);
    }

    #[test]
    fn block_decomposition_budget() {
        let tiny = VertexBudget::new(8).unwrap();
        assert!(verify_block_decomposition(2, tiny).unwrap());
        assert!(verify_block_decomposition(3, tiny).is_err());
    }
}
