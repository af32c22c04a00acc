//! Randomized invariants over the action, orbit, series, and measure
//! machinery, complementing the deterministic sweeps in the acceptance
//! suite.

use proptest::prelude::*;

use orbitree::automaton::{vertex_word, Factor, GroupWord, TreeWord};
use orbitree::catalog::{self, SushchanskyOrder};
use orbitree::limits::VertexBudget;
use orbitree::measures::{check_invariance_on, verify_decomposition_all, InvariantMeasurePrefix};
use orbitree::orbits::compute_level_orbits;
use orbitree::render::{matrix_to_ascii, matrix_to_pbm, parse_pbm};
use orbitree::series::{self, LampGen, Poly2};
use orbitree::tree::OrbitTree;

fn budget() -> VertexBudget {
    VertexBudget::default()
}

fn arb_binary_word(max_len: usize) -> impl Strategy<Value = TreeWord> {
    prop::collection::vec(0..2usize, 0..=max_len).prop_map(TreeWord)
}

fn arb_group_word(states: usize, max_factors: usize) -> impl Strategy<Value = GroupWord> {
    prop::collection::vec((0..states, any::<bool>()), 0..=max_factors).prop_map(|factors| {
        GroupWord::from_factors(
            factors
                .into_iter()
                .map(|(state, inverted)| Factor { state, inverted })
                .collect(),
        )
    })
}

proptest! {
    #[test]
    fn prefix_compatibility_and_sections(
        g in arb_group_word(5, 6),
        w in arb_binary_word(12),
        split_seed in any::<u16>(),
    ) {
        let aut = catalog::ll2();
        let image = aut.act(&g, &w);
        prop_assert_eq!(image.len(), w.len());
        let split = if w.is_empty() { 0 } else { split_seed as usize % (w.len() + 1) };
        let u = w.prefix(split);
        let v = TreeWord(w.letters()[split..].to_vec());
        let section = aut.section(&g, &u);
        prop_assert_eq!(&image, &aut.act(&g, &u).concat(&aut.act(&section, &v)));
        prop_assert_eq!(aut.section(&section, &v), aut.section(&g, &w));
    }

    #[test]
    fn inverse_law(g in arb_group_word(5, 6), w in arb_binary_word(12)) {
        let aut = catalog::ll2();
        let image = aut.act(&g, &w);
        prop_assert_eq!(aut.act(&g.inverse(), &image), w);
    }

    #[test]
    fn level_permutations_project(
        g in arb_group_word(5, 4),
        level in 1usize..=7,
    ) {
        let aut = catalog::ll2();
        let fine = aut.level_permutation(&g, level, budget()).unwrap();
        let coarse = aut.level_permutation(&g, level - 1, budget()).unwrap();
        for v in 0..fine.degree() {
            prop_assert_eq!(fine.apply(v) / 2, coarse.apply(v / 2));
        }
    }

    #[test]
    fn orbits_partition_equivariantly(
        gens in prop::collection::vec(arb_group_word(5, 3), 0..=3),
        level in 1usize..=6,
    ) {
        let aut = catalog::ll2();
        let orbits = compute_level_orbits(&aut, &gens, level, budget()).unwrap();
        let total: u64 = (0..orbits.orbit_count()).map(|i| orbits.size(i)).sum();
        prop_assert_eq!(total, 1u64 << level);
        for g in &gens {
            for v in 0..orbits.vertex_count() as u64 {
                let image = orbitree::automaton::vertex_index(
                    &aut.act(g, &vertex_word(v, level, 2)),
                    2,
                );
                prop_assert_eq!(orbits.orbit_id_of_index(v), orbits.orbit_id_of_index(image));
            }
        }
        let again = compute_level_orbits(&aut, &gens, level, budget()).unwrap();
        for v in 0..orbits.vertex_count() as u64 {
            prop_assert_eq!(orbits.orbit_id_of_index(v), again.orbit_id_of_index(v));
        }
    }

    #[test]
    fn engine_matches_breadth_first_oracle(
        gens in prop::collection::vec(arb_group_word(5, 3), 1..=3),
        level in 1usize..=6,
    ) {
        // independent oracle: orbit closure by breadth-first search over
        // generator images, no union-find involved
        let aut = catalog::ll2();
        let n = 1usize << level;
        let mut oracle_id = vec![u32::MAX; n];
        for start in 0..n {
            if oracle_id[start] != u32::MAX {
                continue;
            }
            let mut frontier = vec![start];
            oracle_id[start] = start as u32;
            while let Some(v) = frontier.pop() {
                for g in &gens {
                    let image = orbitree::automaton::vertex_index(
                        &aut.act(g, &vertex_word(v as u64, level, 2)),
                        2,
                    ) as usize;
                    if oracle_id[image] == u32::MAX {
                        oracle_id[image] = start as u32;
                        frontier.push(image);
                    }
                }
            }
        }
        let orbits = compute_level_orbits(&aut, &gens, level, budget()).unwrap();
        for v in 0..n {
            prop_assert_eq!(orbits.orbit_id_of_index(v as u64), oracle_id[v] as u64);
        }
    }

    #[test]
    fn orbit_sizes_divide_the_level_order(
        g in arb_group_word(5, 4),
        level in 1usize..=6,
    ) {
        let aut = catalog::ll2();
        let order = aut.permutation_order_at_level(&g, level, budget()).unwrap();
        let orbits =
            compute_level_orbits(&aut, std::slice::from_ref(&g), level, budget()).unwrap();
        for i in 0..orbits.orbit_count() {
            let size = num::BigUint::from(orbits.size(i));
            prop_assert_eq!(&order % &size, num::BigUint::ZERO);
        }
    }

    #[test]
    fn series_and_automaton_agree(w in arb_binary_word(14)) {
        let aut = catalog::lamplighter();
        let f = Poly2::from_word(&w).unwrap();
        prop_assert_eq!(
            series::act_a(&f).to_word(),
            aut.act(&aut.parse_group_word("a").unwrap(), &w)
        );
        prop_assert_eq!(
            series::act_b(&f).to_word(),
            aut.act(&aut.parse_group_word("b").unwrap(), &w)
        );
    }

    #[test]
    fn word_series_bijection(w in arb_binary_word(40)) {
        prop_assert_eq!(Poly2::from_word(&w).unwrap().to_word(), w);
    }

    #[test]
    fn automaton_parser_never_panics(text in ".{0,120}") {
        let _ = orbitree::dsl::parse_automaton(&text);
    }

    #[test]
    fn structured_garbage_never_panics(
        names in prop::collection::vec("[a-c]{1,2}", 1..4),
        junk in prop::collection::vec(0..6usize, 0..8),
    ) {
        // lines that are nearly well-formed exercise the later parse stages
        let mut src = String::from("alphabet 0 1\n");
        for (i, name) in names.iter().enumerate() {
            let perm = if i % 2 == 0 { " perm [1,0]" } else { "" };
            src.push_str(&format!("state {name} -> (a, {name}){perm}\n"));
        }
        let _ = orbitree::dsl::parse_automaton(&src);
        let aut = catalog::lamplighter();
        let word_text: String = junk.iter().map(|d| d.to_string()).collect();
        let _ = aut.alphabet().parse_word(&word_text);
        let _ = aut.parse_group_word(&word_text);
    }

    #[test]
    fn word_parser_never_panics(text in ".{0,60}") {
        let alpha = orbitree::Alphabet::binary();
        let _ = alpha.parse_word(&text);
        let aut = catalog::lamplighter();
        let _ = aut.parse_group_word(&text);
    }

    #[test]
    fn pbm_parser_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..200)) {
        let _ = parse_pbm(&bytes);
    }

    #[test]
    fn pbm_roundtrip(w in arb_binary_word(24), rows in 1usize..=12) {
        prop_assume!(!w.is_empty());
        let m = series::orbit_matrix(&w, LampGen::B, rows).unwrap();
        prop_assert_eq!(parse_pbm(&matrix_to_pbm(&m)).unwrap(), m.clone());
        prop_assert_eq!(matrix_to_ascii(&m).len(), rows * w.len() + rows - 1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_measures_are_invariant_and_decompose(
        seed in any::<u64>(),
        depth in 1usize..=6,
        which in 0usize..3,
    ) {
        let (aut, gens) = match which {
            0 => {
                let aut = catalog::lamplighter();
                let gens = vec![aut.parse_group_word("a").unwrap()];
                (aut, gens)
            }
            1 => {
                let aut = catalog::lamplighter();
                let gens = vec![aut.parse_group_word("b").unwrap()];
                (aut, gens)
            }
            _ => {
                let sus = catalog::sushchansky(&SushchanskyOrder::lexicographic(2).unwrap());
                let gens = sus.generators();
                (sus.automaton, gens)
            }
        };
        let tree = OrbitTree::build(&aut, &gens, depth, budget()).unwrap();
        let m = InvariantMeasurePrefix::random(&tree, depth, seed).unwrap();
        prop_assert!(check_invariance_on(&tree, &m));
        prop_assert!(verify_decomposition_all(&tree, &m));
        let json = m.to_json(&tree);
        prop_assert_eq!(InvariantMeasurePrefix::from_json(&tree, &json).unwrap(), m);
    }

    #[test]
    fn corrupted_measures_are_detected(
        seed in any::<u64>(),
        depth in 2usize..=6,
        bump in 1u64..=9,
    ) {
        let aut = catalog::lamplighter();
        let gens = vec![aut.parse_group_word("a").unwrap()];
        let tree = OrbitTree::build(&aut, &gens, depth, budget()).unwrap();
        let mut m = InvariantMeasurePrefix::random(&tree, depth, seed).unwrap();
        let level = depth; // corrupt a leaf-level weight
        let node = (seed % tree.node_count(level) as u64) as usize;
        let corrupted = m.weight(level, node)
            + num::BigRational::new(bump.into(), 1000u64.into());
        m.set_weight(level, node, corrupted);
        prop_assert!(!check_invariance_on(&tree, &m));
        prop_assert!(!verify_decomposition_all(&tree, &m));
    }
}
