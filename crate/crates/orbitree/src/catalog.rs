//! Builtin automata: the lamplighter pair, the universal Grigorchuk
//! automaton, the Sushchansky two-automata family, the adding machine, the
//! root swap, and the two-generator lamplighter of rank 2.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::automaton::{GroupWord, MealyAutomaton};
use crate::dsl::parse_automaton;
use crate::error::{Error, Result};

fn parse_builtin(src: &str) -> MealyAutomaton {
    parse_automaton(src).expect("builtin automaton source is valid")
}

/// The lamplighter automaton: `a = (b, a)σ`, `b = (b, a)`.
pub fn lamplighter() -> MealyAutomaton {
    parse_builtin(
        "alphabet 0 1\n\
         state a -> (b, a) perm [1,0]\n\
         state b -> (b, a)\n",
    )
}

/// The binary adding machine (odometer): `a = (e, a)σ`.
pub fn adding_machine() -> MealyAutomaton {
    parse_builtin(
        "alphabet 0 1\n\
         state a -> (e, a) perm [1,0]\n\
         state e -> (e, e)\n",
    )
}

/// The rooted swap `s = (e, e)σ`, generating a group of order 2.
pub fn root_swap() -> MealyAutomaton {
    parse_builtin(
        "alphabet 0 1\n\
         state s -> (e, e) perm [1,0]\n\
         state e -> (e, e)\n",
    )
}

/// The rank-2 lamplighter automaton: `a = (d, d)σ`, `b = (c, c)`,
/// `c = (a, b)`, `d = (b, a)`, plus an explicit identity state.
pub fn ll2() -> MealyAutomaton {
    parse_builtin(
        "alphabet 0 1\n\
         state a -> (d, d) perm [1,0]\n\
         state b -> (c, c)\n\
         state c -> (a, b)\n\
         state d -> (b, a)\n\
         state e -> (e, e)\n",
    )
}

/// The universal Grigorchuk automaton over six letters:
/// `a = (14)(25)(36)` with trivial sections, `b = (a, a, 1, b, b, b)`,
/// `c = (a, 1, a, c, c, c)`, `d = (1, a, a, d, d, d)`.
pub fn universal_grigorchuk() -> MealyAutomaton {
    parse_builtin(
        "alphabet 1 2 3 4 5 6\n\
         state a -> (e, e, e, e, e, e) perm [3,4,5,0,1,2]\n\
         state b -> (a, a, e, b, b, b)\n\
         state c -> (a, e, a, c, c, c)\n\
         state d -> (e, a, a, d, d, d)\n\
         state e -> (e, e, e, e, e, e)\n",
    )
}

fn is_prime(p: usize) -> bool {
    p >= 2 && (2..p).take_while(|q| q * q <= p).all(|q| !p.is_multiple_of(q))
}

/// A linear order on the `p²` pairs over `{0..p-1}`, parameterizing the
/// Sushchansky family. `p` must be prime: the letters `-α/β` live in the
/// field of `p` elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SushchanskyOrder {
    p: usize,
    pairs: Vec<(usize, usize)>,
}

impl SushchanskyOrder {
    pub fn new(p: usize, pairs: Vec<(usize, usize)>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidOrder(format!("{p} is not prime")));
        }
        if pairs.len() != p * p {
            return Err(Error::InvalidOrder(format!(
                "expected {} pairs, found {}",
                p * p,
                pairs.len()
            )));
        }
        let mut seen = vec![false; p * p];
        for &(a, b) in &pairs {
            if a >= p || b >= p {
                return Err(Error::InvalidOrder(format!("pair ({a},{b}) out of range")));
            }
            if seen[a * p + b] {
                return Err(Error::InvalidOrder(format!("duplicate pair ({a},{b})")));
            }
            seen[a * p + b] = true;
        }
        Ok(SushchanskyOrder { p, pairs })
    }

    /// The default lexicographic order `(0,0), (0,1), ..., (p-1,p-1)`.
    pub fn lexicographic(p: usize) -> Result<Self> {
        let pairs = (0..p).flat_map(|a| (0..p).map(move |b| (a, b))).collect();
        SushchanskyOrder::new(p, pairs)
    }

    /// A seeded random order (a deterministic shuffle of the pair set).
    pub fn shuffled(p: usize, seed: u64) -> Result<Self> {
        let mut order = SushchanskyOrder::lexicographic(p)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        order.pairs.shuffle(&mut rng);
        Ok(order)
    }

    /// Parses a comma-separated pair list like `00,01,10,11`, each token two
    /// digit characters `αβ`.
    pub fn parse(p: usize, text: &str) -> Result<Self> {
        if p > 9 {
            return Err(Error::InvalidOrder(
                "pair syntax uses single digits, so p must be at most 9".into(),
            ));
        }
        let digit = |c: char| -> Result<usize> {
            c.to_digit(10)
                .map(|d| d as usize)
                .ok_or_else(|| Error::InvalidOrder(format!("`{c}` is not a digit")))
        };
        let mut pairs = Vec::new();
        for tok in text.split(',') {
            let chars: Vec<char> = tok.trim().chars().collect();
            if chars.len() != 2 {
                return Err(Error::InvalidOrder(format!(
                    "pair `{tok}` must be exactly two digits"
                )));
            }
            pairs.push((digit(chars[0])?, digit(chars[1])?));
        }
        SushchanskyOrder::new(p, pairs)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// The word `u`: `u_i = 0` when `β_i = 0`, else `1`.
    pub fn u(&self) -> Vec<usize> {
        self.pairs.iter().map(|&(_, b)| usize::from(b != 0)).collect()
    }

    /// The word `v`: `v_i = 1` when `β_i = 0`, else `-α_i/β_i` in the field
    /// of `p` elements (the inverse computed as `β^(p-2)` by Fermat).
    pub fn v(&self) -> Vec<usize> {
        let p = self.p;
        self.pairs
            .iter()
            .map(|&(a, b)| {
                if b == 0 {
                    1
                } else {
                    let inv = mod_pow(b, p - 2, p);
                    (p - (a * inv) % p) % p
                }
            })
            .collect()
    }
}

fn mod_pow(mut base: usize, mut exp: usize, modulus: usize) -> usize {
    let mut acc = 1usize;
    base %= modulus;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % modulus;
        }
        base = base * base % modulus;
        exp >>= 1;
    }
    acc
}

/// A Sushchansky automaton together with its two distinguished generators.
pub struct SushchanskyAutomaton {
    pub automaton: MealyAutomaton,
    /// State index of the tableau generator `A`.
    pub gen_a: usize,
    /// State index of the generator `B`.
    pub gen_b: usize,
}

impl SushchanskyAutomaton {
    /// The generating set `{A, B}` of the Sushchansky group.
    pub fn generators(&self) -> Vec<GroupWord> {
        vec![GroupWord::state(self.gen_a), GroupWord::state(self.gen_b)]
    }
}

/// Builds the Sushchansky automaton for a pair order.
///
/// States: `A = (1, σ, σ², ..., σ^(p-1))σ`; `B` acts trivially on the first
/// two levels with depth-2 sections `B|_00 = q_1`, `B|_10 = r_1` and (for
/// `p >= 3`) `B|_21 = σ`, realized through one glue state per first-level
/// letter that carries a section; the chains `q_i = (q_{i+1}, σ^{u_i}, 1,
/// ..., 1)` and `r_i = (r_{i+1}, σ^{v_i}, 1, ..., 1)` with indices modulo
/// `p²`; the identity `e`; and the rooted powers `s1..s(p-1)` of the cycle
/// `σ = (0, 1, ..., p-1)`.
pub fn sushchansky(order: &SushchanskyOrder) -> SushchanskyAutomaton {
    let p = order.p();
    let p2 = p * p;
    let u = order.u();
    let v = order.v();
    let spow = |j: usize| -> String {
        match j % p {
            0 => "e".to_string(),
            j => format!("s{j}"),
        }
    };
    let sigma: Vec<usize> = (0..p).map(|x| (x + 1) % p).collect();
    let perm_text = |images: &[usize]| -> String {
        format!(
            " perm [{}]",
            images.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
        )
    };
    let line = |name: &str, sections: Vec<String>, perm: Option<&[usize]>| -> String {
        format!(
            "state {name} -> ({}){}\n",
            sections.join(", "),
            perm.map_or(String::new(), perm_text)
        )
    };
    let trivial = |name: &str| -> Vec<String> { vec![name.to_string(); p] };

    let mut src = format!(
        "alphabet {}\n",
        (0..p).map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
    );
    // A = (1, σ, σ², ..., σ^(p-1))σ
    let a_sections: Vec<String> = (0..p).map(spow).collect();
    src.push_str(&line("A", a_sections, Some(&sigma)));
    // B = (B0, B1, B2, 1, ..., 1) with glue states carrying the depth-2
    // sections; for p = 2 the letter 2 does not exist and B|_21 is dropped
    let glue_count = p.min(3);
    let mut b_sections = trivial("e");
    for (g, slot) in b_sections.iter_mut().enumerate().take(glue_count) {
        *slot = format!("B{g}");
    }
    src.push_str(&line("B", b_sections, None));
    let mut glue0 = trivial("e");
    glue0[0] = "q1".to_string();
    src.push_str(&line("B0", glue0, None));
    let mut glue1 = trivial("e");
    glue1[0] = "r1".to_string();
    src.push_str(&line("B1", glue1, None));
    if p >= 3 {
        let mut glue2 = trivial("e");
        glue2[1] = spow(1);
        src.push_str(&line("B2", glue2, None));
    }
    // q_i = (q_{i+1}, σ^{u_i}, 1, ..., 1) and likewise for r_i
    for (prefix, word) in [("q", &u), ("r", &v)] {
        for i in 1..=p2 {
            let mut sections = trivial("e");
            sections[0] = format!("{prefix}{}", i % p2 + 1);
            sections[1] = spow(word[i - 1]);
            src.push_str(&line(&format!("{prefix}{i}"), sections, None));
        }
    }
    src.push_str(&line("e", trivial("e"), None));
    for j in 1..p {
        let images: Vec<usize> = (0..p).map(|x| (x + j) % p).collect();
        src.push_str(&line(&format!("s{j}"), trivial("e"), Some(&images)));
    }

    let automaton = parse_builtin(&src);
    let gen_a = automaton.state_index("A").unwrap();
    let gen_b = automaton.state_index("B").unwrap();
    SushchanskyAutomaton {
        automaton,
        gen_a,
        gen_b,
    }
}

/// A builtin automaton together with the generating set its group uses by
/// default.
pub struct BuiltinAutomaton {
    pub automaton: MealyAutomaton,
    pub default_generators: Vec<GroupWord>,
}

/// Resolves a builtin name: `lamplighter`, `universal`,
/// `sushchansky:p[:pairs]`, `ll2`, `adding`, or `rootswap`. All builtins
/// default to the full state set as generators except `sushchansky`, whose
/// group is generated by its two distinguished states `A` and `B`.
pub fn builtin(name: &str) -> Result<BuiltinAutomaton> {
    if let Some(rest) = name.strip_prefix("sushchansky:") {
        let (p_text, pairs_text) = match rest.split_once(':') {
            Some((p, pairs)) => (p, Some(pairs)),
            None => (rest, None),
        };
        let p: usize = p_text
            .parse()
            .map_err(|_| Error::UnknownBuiltin(name.to_string()))?;
        let order = match pairs_text {
            Some(text) => SushchanskyOrder::parse(p, text)?,
            None => SushchanskyOrder::lexicographic(p)?,
        };
        let sus = sushchansky(&order);
        let default_generators = sus.generators();
        return Ok(BuiltinAutomaton {
            automaton: sus.automaton,
            default_generators,
        });
    }
    let automaton = match name {
        "lamplighter" => lamplighter(),
        "universal" => universal_grigorchuk(),
        "ll2" => ll2(),
        "adding" => adding_machine(),
        "rootswap" => root_swap(),
        _ => return Err(Error::UnknownBuiltin(name.to_string())),
    };
    let default_generators = automaton.state_generators();
    Ok(BuiltinAutomaton {
        automaton,
        default_generators,
    })
}
