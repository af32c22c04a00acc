//! Invariant measures on the tree boundary, represented exactly at finite
//! depth.
//!
//! The infinite objects (the boundary, its invariant measures, the weak
//! topology) appear here only through their finite shadows: cylinder weights
//! per level, stored as one exact rational per orbit. Storing weights
//! per orbit makes invariance structural, and every verification below is an
//! exact equality of [`BigRational`]s, never a tolerance check.

use num::{BigRational, One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automaton::{GroupWord, MealyAutomaton, TreeWord};
use crate::error::{Error, Result};
use crate::limits::VertexBudget;
use crate::tree::OrbitTree;

fn ratio(num: u64, den: u64) -> BigRational {
    BigRational::new(num.into(), den.into())
}

/// A boundary-ray prefix of the orbit tree: one node per level, each the
/// parent of the next.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitRayPrefix {
    nodes: Vec<usize>,
}

impl OrbitRayPrefix {
    /// Validates a parent-consistent chain starting at the root.
    pub fn new(tree: &OrbitTree, nodes: Vec<usize>) -> Result<Self> {
        if nodes.is_empty() || nodes[0] != 0 {
            return Err(Error::InvalidMeasure(
                "a ray prefix must start at the root orbit".into(),
            ));
        }
        if nodes.len() > tree.depth() + 1 {
            return Err(Error::DepthExceeded {
                available: tree.depth(),
                requested: nodes.len() - 1,
            });
        }
        for (level, &node) in nodes.iter().enumerate() {
            if node >= tree.node_count(level) {
                return Err(Error::InvalidMeasure(format!(
                    "node {node} does not exist at level {level}"
                )));
            }
            if level > 0 && tree.parent(level, node) != Some(nodes[level - 1]) {
                return Err(Error::InvalidMeasure(format!(
                    "node {node} at level {level} is not a child of node {} at level {}",
                    nodes[level - 1],
                    level - 1
                )));
            }
        }
        Ok(OrbitRayPrefix { nodes })
    }

    /// The ray through a given node, assembled by walking parent links.
    pub fn through(tree: &OrbitTree, level: usize, node: usize) -> Self {
        let mut nodes = vec![node];
        let mut current = node;
        for l in (1..=level).rev() {
            current = tree.parent(l, current).expect("non-root levels have parents");
            nodes.push(current);
        }
        nodes.reverse();
        OrbitRayPrefix { nodes }
    }

    /// The deepest level the prefix covers.
    pub fn depth(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn node_at(&self, level: usize) -> usize {
        self.nodes[level]
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }
}

/// The orbit-ray prefix of a vertex: the chain of orbits of its prefixes.
pub fn psi_prefix(tree: &OrbitTree, v: &TreeWord) -> Result<OrbitRayPrefix> {
    let (level, _) = tree.node_of_word(v)?;
    let nodes = (0..=level)
        .map(|l| tree.node_of_word(&v.prefix(l)).map(|(_, node)| node))
        .collect::<Result<Vec<_>>>()?;
    Ok(OrbitRayPrefix { nodes })
}

/// Cylinder weight of the ergodic measure attached to a ray prefix: `0` when
/// `v` lies outside the ray's orbit at its level, `1/|orbit|` otherwise.
pub fn ergodic_cylinder_value(
    tree: &OrbitTree,
    ray: &OrbitRayPrefix,
    v: &TreeWord,
) -> Result<BigRational> {
    if v.len() > ray.depth() {
        return Err(Error::DepthExceeded {
            available: ray.depth(),
            requested: v.len(),
        });
    }
    let (level, node) = tree.node_of_word(v)?;
    if node == ray.node_at(level) {
        Ok(ratio(1, tree.level(level).size(node)))
    } else {
        Ok(BigRational::zero())
    }
}

/// An invariant probability measure truncated at depth `N`: per level, one
/// per-vertex cylinder weight for each orbit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantMeasurePrefix {
    depth: usize,
    /// weights[n][i] = measure of the cylinder of any vertex in orbit `i` of
    /// level `n`
    weights: Vec<Vec<BigRational>>,
}

impl InvariantMeasurePrefix {
    /// The uniform measure: weight `1/d^n` at level `n`.
    pub fn uniform(tree: &OrbitTree, depth: usize) -> Result<Self> {
        check_depth(tree, depth)?;
        let d = tree.arity() as u64;
        let weights = (0..=depth)
            .map(|n| {
                let w = ratio(1, d.pow(n as u32));
                vec![w; tree.node_count(n)]
            })
            .collect();
        Ok(InvariantMeasurePrefix { depth, weights })
    }

    /// A random invariant measure, generated top-down: each node's mass is
    /// split over its child orbits by integer-lattice rationals (random
    /// positive integers, normalized), so the result stays exact. The same
    /// seed always produces the same measure.
    pub fn random(tree: &OrbitTree, depth: usize, seed: u64) -> Result<Self> {
        check_depth(tree, depth)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = vec![vec![BigRational::one()]];
        for n in 0..depth {
            let mut next = vec![BigRational::zero(); tree.node_count(n + 1)];
            for i in 0..tree.node_count(n) {
                let children = tree.children(n, i);
                let parent_size = tree.level(n).size(i);
                let draws: Vec<u64> = children
                    .clone()
                    .map(|_| rng.random_range(1..=1000u64))
                    .collect();
                // per parent vertex: sum over child vertices must equal the
                // parent weight, and each vertex of the parent orbit carries
                // size_child/size_parent vertices of each child orbit
                let denom: u64 = children
                    .clone()
                    .zip(&draws)
                    .map(|(c, &a)| (tree.level(n + 1).size(c) / parent_size) * a)
                    .sum();
                for (c, &a) in children.clone().zip(&draws) {
                    next[c] = &weights[n][i] * ratio(a, denom);
                }
            }
            weights.push(next);
        }
        Ok(InvariantMeasurePrefix { depth, weights })
    }

    /// The ergodic measure of a ray prefix: `1/|orbit|` along the ray, `0`
    /// elsewhere.
    pub fn ray(tree: &OrbitTree, ray: &OrbitRayPrefix) -> Self {
        let depth = ray.depth();
        let weights = (0..=depth)
            .map(|n| {
                (0..tree.node_count(n))
                    .map(|i| {
                        if i == ray.node_at(n) {
                            ratio(1, tree.level(n).size(i))
                        } else {
                            BigRational::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        InvariantMeasurePrefix { depth, weights }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Per-vertex cylinder weight of orbit `node` at `level`.
    pub fn weight(&self, level: usize, node: usize) -> &BigRational {
        &self.weights[level][node]
    }

    /// Overrides one weight; used to build hand-crafted (or deliberately
    /// broken) measures.
    pub fn set_weight(&mut self, level: usize, node: usize, value: BigRational) {
        self.weights[level][node] = value;
    }

    /// The measure of the cylinder of `v`.
    pub fn cylinder_value(&self, tree: &OrbitTree, v: &TreeWord) -> Result<BigRational> {
        if v.len() > self.depth {
            return Err(Error::DepthExceeded {
                available: self.depth,
                requested: v.len(),
            });
        }
        let (level, node) = tree.node_of_word(v)?;
        Ok(self.weights[level][node].clone())
    }

    fn shape_matches(&self, tree: &OrbitTree) -> bool {
        self.depth <= tree.depth()
            && (0..=self.depth).all(|n| self.weights[n].len() == tree.node_count(n))
    }

    /// Serializes as `{"depth": N, "levels": [{"orbits": {id: "num/den"}}]}`.
    pub fn to_json(&self, tree: &OrbitTree) -> String {
        let levels: Vec<serde_json::Value> = (0..=self.depth)
            .map(|n| {
                let orbits: serde_json::Map<String, serde_json::Value> = (0..self.weights[n].len())
                    .map(|i| {
                        let w = &self.weights[n][i];
                        (
                            tree.level(n).rep(i).to_string(),
                            serde_json::Value::String(format!("{}/{}", w.numer(), w.denom())),
                        )
                    })
                    .collect();
                serde_json::json!({ "orbits": orbits })
            })
            .collect();
        serde_json::json!({ "depth": self.depth, "levels": levels }).to_string()
    }

    /// Parses the JSON emitted by [`Self::to_json`]; every orbit of every
    /// level up to the stored depth must be covered.
    pub fn from_json(tree: &OrbitTree, text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| Error::InvalidMeasure(format!("bad JSON: {e}")))?;
        let depth = value["depth"]
            .as_u64()
            .ok_or_else(|| Error::InvalidMeasure("missing depth".into()))? as usize;
        check_depth(tree, depth)?;
        let levels = value["levels"]
            .as_array()
            .ok_or_else(|| Error::InvalidMeasure("missing levels".into()))?;
        if levels.len() != depth + 1 {
            return Err(Error::InvalidMeasure(format!(
                "expected {} levels, found {}",
                depth + 1,
                levels.len()
            )));
        }
        let mut weights = Vec::with_capacity(depth + 1);
        for (n, level) in levels.iter().enumerate() {
            let orbits = level["orbits"]
                .as_object()
                .ok_or_else(|| Error::InvalidMeasure(format!("level {n} lacks orbits")))?;
            let mut row = Vec::with_capacity(tree.node_count(n));
            for i in 0..tree.node_count(n) {
                let key = tree.level(n).rep(i).to_string();
                let text = orbits
                    .get(&key)
                    .and_then(|v| v.as_str())
                    .ok_or_else(|| {
                        Error::InvalidMeasure(format!("level {n} is missing orbit {key}"))
                    })?;
                let w: BigRational = text.parse().map_err(|_| {
                    Error::InvalidMeasure(format!("`{text}` is not a rational"))
                })?;
                row.push(w);
            }
            weights.push(row);
        }
        Ok(InvariantMeasurePrefix { depth, weights })
    }
}

fn check_depth(tree: &OrbitTree, depth: usize) -> Result<()> {
    if depth > tree.depth() {
        return Err(Error::DepthExceeded {
            available: tree.depth(),
            requested: depth,
        });
    }
    Ok(())
}

/// Structural invariance check against the tree: weights are nonnegative,
/// the root has mass 1, and every node's weight is the size-weighted sum of
/// its children's (`w_O = Σ (|O'|/|O|)·w_O'`), exactly.
pub fn check_invariance_on(tree: &OrbitTree, measure: &InvariantMeasurePrefix) -> bool {
    if !measure.shape_matches(tree) {
        return false;
    }
    if !measure.weight(0, 0).is_one() {
        return false;
    }
    for n in 0..=measure.depth() {
        if measure.weights[n].iter().any(|w| w.is_negative()) {
            return false;
        }
    }
    for n in 0..measure.depth() {
        for i in 0..tree.node_count(n) {
            let parent_size = tree.level(n).size(i);
            let sum: BigRational = tree
                .children(n, i)
                .map(|c| {
                    ratio(tree.level(n + 1).size(c) / parent_size, 1) * measure.weight(n + 1, c)
                })
                .sum();
            if &sum != measure.weight(n, i) {
                return false;
            }
        }
    }
    true
}

/// Checks that per-vertex weights constant on the orbits of the group
/// generated by `gens` describe `measure`, and that they refine exactly:
/// the orbit tree of `gens` is rebuilt to the measure's depth, the measure
/// must share its shape, and the refinement equation must hold at every
/// node.
pub fn check_invariance(
    aut: &MealyAutomaton,
    gens: &[GroupWord],
    measure: &InvariantMeasurePrefix,
    budget: VertexBudget,
) -> Result<bool> {
    let tree = OrbitTree::build(aut, gens, measure.depth(), budget)?;
    Ok(check_invariance_on(&tree, measure))
}

/// Exact check of the ergodic-decomposition identity at the cylinder of `v`:
/// for every discretization level `n` between `|v|` and the measure depth,
///
/// ```text
/// μ(C_v) = Σ_{w at level n} μ(C_w) · μ_{ψ(w)}(C_v)
/// ```
///
/// where `μ_{ψ(w)}(C_v)` is `1/|orbit(v)|` when the level-`|v|` ancestor of
/// `w`'s orbit is `v`'s orbit and `0` otherwise. The integrand is constant
/// on level-`n` cylinders for every such `n`, so all discretizations must
/// agree; requiring them all makes the check sensitive to weights that break
/// refinement anywhere below `v`.
pub fn verify_decomposition(
    tree: &OrbitTree,
    measure: &InvariantMeasurePrefix,
    v: &TreeWord,
) -> Result<bool> {
    if v.len() > measure.depth() {
        return Err(Error::DepthExceeded {
            available: measure.depth(),
            requested: v.len(),
        });
    }
    if !measure.shape_matches(tree) {
        return Err(Error::InvalidMeasure(
            "measure does not match the orbit tree".into(),
        ));
    }
    let (l, node_v) = tree.node_of_word(v)?;
    let lhs = measure.weight(l, node_v);
    let orbit_size = ratio(tree.level(l).size(node_v), 1);
    for n in l..=measure.depth() {
        let mut total = BigRational::zero();
        for j in 0..tree.node_count(n) {
            let mut ancestor = j;
            for level in ((l + 1)..=n).rev() {
                ancestor = tree.parent(level, ancestor).expect("level > 0");
            }
            if ancestor == node_v {
                total += ratio(tree.level(n).size(j), 1) * measure.weight(n, j);
            }
        }
        if total / &orbit_size != *lhs {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Runs [`verify_decomposition`] at every vertex of every level at once.
/// Because both sides of the identity are constant on orbits, checking one
/// representative per orbit covers every vertex; orbit masses are aggregated
/// level pair by level pair instead of per vertex.
pub fn verify_decomposition_all(tree: &OrbitTree, measure: &InvariantMeasurePrefix) -> bool {
    if !measure.shape_matches(tree) {
        return false;
    }
    for n in 0..=measure.depth() {
        // masses of level-n orbits, folded upward one level at a time
        let mut agg: Vec<BigRational> = (0..tree.node_count(n))
            .map(|j| ratio(tree.level(n).size(j), 1) * measure.weight(n, j))
            .collect();
        for l in (0..=n).rev() {
            if l < n {
                let mut up = vec![BigRational::zero(); tree.node_count(l)];
                for (j, mass) in agg.iter().enumerate() {
                    up[tree.parent(l + 1, j).expect("level > 0")] += mass;
                }
                agg = up;
            }
            for (i, mass) in agg.iter().enumerate() {
                let expected = ratio(tree.level(l).size(i), 1) * measure.weight(l, i);
                if *mass != expected {
                    return false;
                }
            }
        }
    }
    true
}

/// Number of ergodic components distinguishable at level `n`: the orbit-tree
/// node count there.
pub fn ergodic_component_count(tree: &OrbitTree, level: usize) -> Result<u64> {
    if level > tree.depth() {
        return Err(Error::DepthExceeded {
            available: tree.depth(),
            requested: level,
        });
    }
    Ok(tree.node_count(level) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::automaton::vertex_word;

    fn lamp_a_tree(depth: usize) -> OrbitTree {
        let aut = catalog::lamplighter();
        let gens = vec![aut.parse_group_word("a").unwrap()];
        OrbitTree::build(&aut, &gens, depth, VertexBudget::default()).unwrap()
    }

    fn word(text: &str) -> TreeWord {
        crate::automaton::Alphabet::binary().parse_word(text).unwrap()
    }

    #[test]
    fn psi_prefix_examples() {
        let tree = lamp_a_tree(4);
        let ray = psi_prefix(&tree, &TreeWord::root()).unwrap();
        assert_eq!(ray.depth(), 0);
        let ray = psi_prefix(&tree, &word("000")).unwrap();
        let sizes: Vec<u64> = (0..=3).map(|l| tree.level(l).size(ray.node_at(l))).collect();
        assert_eq!(sizes, vec![1, 2, 4, 4]);

        // identity subgroup: the chain of singleton orbits of the prefixes
        let aut = catalog::lamplighter();
        let idtree = OrbitTree::build(&aut, &[], 3, VertexBudget::default()).unwrap();
        let ray = psi_prefix(&idtree, &word("011")).unwrap();
        for l in 0..=3 {
            assert_eq!(idtree.level(l).size(ray.node_at(l)), 1);
        }
    }

    #[test]
    fn ray_constructors_agree() {
        let tree = lamp_a_tree(5);
        let v = word("01011");
        let ray = psi_prefix(&tree, &v).unwrap();
        let (level, node) = tree.node_of_word(&v).unwrap();
        assert_eq!(ray, OrbitRayPrefix::through(&tree, level, node));
        assert!(OrbitRayPrefix::new(&tree, ray.nodes().to_vec()).is_ok());
        // a broken chain is rejected
        let aut = catalog::lamplighter();
        let idtree = OrbitTree::build(&aut, &[], 2, VertexBudget::default()).unwrap();
        assert!(OrbitRayPrefix::new(&idtree, vec![0, 0, 3]).is_err());
    }

    #[test]
    fn ergodic_cylinder_values() {
        let tree = lamp_a_tree(3);
        let ray = psi_prefix(&tree, &word("000")).unwrap();
        // orbit of 000 at level 3 has size 4
        assert_eq!(
            ergodic_cylinder_value(&tree, &ray, &word("000")).unwrap(),
            ratio(1, 4)
        );
        assert_eq!(
            ergodic_cylinder_value(&tree, &ray, &TreeWord::root()).unwrap(),
            BigRational::one()
        );
        // level 3 of <a> splits in two orbits; 001 lies in the other one
        let (_, other) = tree.node_of_word(&word("001")).unwrap();
        assert_ne!(other, ray.node_at(3));
        assert_eq!(
            ergodic_cylinder_value(&tree, &ray, &word("001")).unwrap(),
            BigRational::zero()
        );
        assert!(ergodic_cylinder_value(&tree, &ray, &word("0000")).is_err());
    }

    #[test]
    fn uniform_measure_values() {
        let tree = lamp_a_tree(3);
        let m = InvariantMeasurePrefix::uniform(&tree, 3).unwrap();
        assert_eq!(m.cylinder_value(&tree, &word("010")).unwrap(), ratio(1, 8));
        assert_eq!(m.cylinder_value(&tree, &TreeWord::root()).unwrap(), BigRational::one());
        assert!(check_invariance_on(&tree, &m));
        assert!(verify_decomposition_all(&tree, &m));

        let u = catalog::universal_grigorchuk();
        let utree = OrbitTree::build(&u, &u.state_generators(), 2, VertexBudget::default()).unwrap();
        let um = InvariantMeasurePrefix::uniform(&utree, 2).unwrap();
        let v = u.alphabet().parse_word("25").unwrap();
        assert_eq!(um.cylinder_value(&utree, &v).unwrap(), ratio(1, 36));
    }

    #[test]
    fn random_measures_are_invariant_and_deterministic() {
        let tree = lamp_a_tree(6);
        for seed in 0..20 {
            let m = InvariantMeasurePrefix::random(&tree, 6, seed).unwrap();
            assert!(check_invariance_on(&tree, &m), "seed {seed}");
            assert!(verify_decomposition_all(&tree, &m), "seed {seed}");
        }
        let a = InvariantMeasurePrefix::random(&tree, 6, 42).unwrap();
        let b = InvariantMeasurePrefix::random(&tree, 6, 42).unwrap();
        assert_eq!(a, b);
        let c = InvariantMeasurePrefix::random(&tree, 6, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn ray_measures_decompose_trivially() {
        let tree = lamp_a_tree(5);
        for leaf in 0..tree.node_count(5) {
            let ray = OrbitRayPrefix::through(&tree, 5, leaf);
            let m = InvariantMeasurePrefix::ray(&tree, &ray);
            assert!(check_invariance_on(&tree, &m));
            assert!(verify_decomposition_all(&tree, &m));
            // along the ray both sides are 1/|orbit|
            let (level, node) = (3, ray.node_at(3));
            let v_idx = tree.level(level).rep(node);
            let v = vertex_word(v_idx, level, 2);
            assert!(verify_decomposition(&tree, &m, &v).unwrap());
            assert_eq!(
                m.cylinder_value(&tree, &v).unwrap(),
                ratio(1, tree.level(level).size(node))
            );
        }
    }

    #[test]
    fn corrupted_weight_fails_decomposition() {
        let tree = lamp_a_tree(4);
        let mut m = InvariantMeasurePrefix::uniform(&tree, 4).unwrap();
        m.set_weight(3, 1, ratio(1, 7));
        assert!(!check_invariance_on(&tree, &m));
        assert!(!verify_decomposition_all(&tree, &m));
        assert!(!verify_decomposition(&tree, &m, &TreeWord::root()).unwrap());
        // the corruption is below 00, so the root cylinder already sees it
        assert!(!verify_decomposition(&tree, &m, &word("00")).unwrap());
    }

    #[test]
    fn per_vertex_and_bulk_verifiers_agree() {
        let tree = lamp_a_tree(5);
        for seed in [1u64, 2, 3] {
            let mut m = InvariantMeasurePrefix::random(&tree, 5, seed).unwrap();
            let all_vertices_ok = (0..=5).all(|l| {
                (0..(1u64 << l)).all(|idx| {
                    verify_decomposition(&tree, &m, &vertex_word(idx, l, 2)).unwrap()
                })
            });
            assert!(all_vertices_ok);
            assert!(verify_decomposition_all(&tree, &m));
            m.set_weight(4, 0, ratio(3, 5));
            let all_vertices_broken = (0..=5).all(|l| {
                (0..(1u64 << l)).all(|idx| {
                    verify_decomposition(&tree, &m, &vertex_word(idx, l, 2)).unwrap()
                })
            });
            assert!(!all_vertices_broken);
            assert!(!verify_decomposition_all(&tree, &m));
        }
    }

    #[test]
    fn invariance_depends_on_the_group() {
        // a <b>-invariant measure need not be <a,b>-invariant
        let aut = catalog::lamplighter();
        let b_gens = vec![aut.parse_group_word("b").unwrap()];
        let b_tree = OrbitTree::build(&aut, &b_gens, 4, VertexBudget::default()).unwrap();
        let ray = OrbitRayPrefix::through(&b_tree, 4, 1);
        let m = InvariantMeasurePrefix::ray(&b_tree, &ray);
        assert!(check_invariance(&aut, &b_gens, &m, VertexBudget::default()).unwrap());
        let all = aut.state_generators();
        assert!(!check_invariance(&aut, &all, &m, VertexBudget::default()).unwrap());
    }

    #[test]
    fn component_counts() {
        let aut = catalog::lamplighter();
        let all = aut.state_generators();
        let tree = OrbitTree::build(&aut, &all, 6, VertexBudget::default()).unwrap();
        for n in 0..=6 {
            assert_eq!(ergodic_component_count(&tree, n).unwrap(), 1);
        }
        let u = catalog::universal_grigorchuk();
        let utree = OrbitTree::build(&u, &u.state_generators(), 3, VertexBudget::default()).unwrap();
        assert_eq!(ergodic_component_count(&utree, 3).unwrap(), 27);
        let idtree = OrbitTree::build(&aut, &[], 5, VertexBudget::default()).unwrap();
        assert_eq!(ergodic_component_count(&idtree, 5).unwrap(), 32);
        assert!(ergodic_component_count(&idtree, 6).is_err());
    }

    #[test]
    fn distinct_rays_are_separated_by_cylinders() {
        // finite shadow of injectivity: rays differing at level l differ on
        // a cylinder of depth l
        let tree = lamp_a_tree(5);
        let rays: Vec<OrbitRayPrefix> = (0..tree.node_count(5))
            .map(|leaf| OrbitRayPrefix::through(&tree, 5, leaf))
            .collect();
        for (i, r1) in rays.iter().enumerate() {
            for r2 in rays.iter().skip(i + 1) {
                let l = (0..=5).find(|&l| r1.node_at(l) != r2.node_at(l)).unwrap();
                let v_idx = tree.level(l).rep(r1.node_at(l));
                let v = vertex_word(v_idx, l, 2);
                let w1 = ergodic_cylinder_value(&tree, r1, &v).unwrap();
                let w2 = ergodic_cylinder_value(&tree, r2, &v).unwrap();
                assert!(w1.is_positive());
                assert!(w2.is_zero());
            }
        }
    }

    #[test]
    fn measures_reconstruct_from_orbit_masses() {
        // finite shadow of surjectivity: a measure is the convex combination
        // of orbit-uniform measures weighted by total orbit masses
        let tree = lamp_a_tree(6);
        let m = InvariantMeasurePrefix::random(&tree, 6, 99).unwrap();
        for n in 0..=6 {
            let mut mass_total = BigRational::zero();
            for i in 0..tree.node_count(n) {
                let size = tree.level(n).size(i);
                let mass = ratio(size, 1) * m.weight(n, i);
                mass_total += &mass;
                // reconstructing the per-vertex weight from the orbit mass
                let rebuilt = mass * ratio(1, size);
                assert_eq!(&rebuilt, m.weight(n, i));
            }
            assert!(mass_total.is_one());
        }
    }

    #[test]
    fn agreeing_prefixes_give_agreeing_cylinders() {
        // finite shadow of weak convergence: rays equal up to level l agree
        // on all cylinders of depth <= l
        let tree = lamp_a_tree(6);
        let rays: Vec<OrbitRayPrefix> = (0..tree.node_count(6))
            .map(|leaf| OrbitRayPrefix::through(&tree, 6, leaf))
            .collect();
        for r1 in &rays {
            for r2 in &rays {
                let common = (0..=6)
                    .take_while(|&l| r1.node_at(l) == r2.node_at(l))
                    .count();
                for l in 0..common {
                    for idx in 0..(1u64 << l) {
                        let v = vertex_word(idx, l, 2);
                        assert_eq!(
                            ergodic_cylinder_value(&tree, r1, &v).unwrap(),
                            ergodic_cylinder_value(&tree, r2, &v).unwrap()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn sampled_measures_decompose_at_depth_ten() {
        let lamp = catalog::lamplighter();
        let ll2 = catalog::ll2();
        let sus = catalog::sushchansky(&catalog::SushchanskyOrder::lexicographic(3).unwrap());
        let universal = catalog::universal_grigorchuk();
        let fixtures: Vec<(&MealyAutomaton, Vec<GroupWord>, usize)> = vec![
            (&lamp, vec![lamp.parse_group_word("a").unwrap()], 10),
            (&lamp, vec![lamp.parse_group_word("b").unwrap()], 10),
            (&ll2, ll2.state_generators(), 10),
            (&sus.automaton, sus.generators(), 10),
            (&universal, universal.state_generators(), 4),
        ];
        for (aut, gens, depth) in fixtures {
            let tree = OrbitTree::build(aut, &gens, depth, VertexBudget::default()).unwrap();
            for seed in 0..5 {
                let m = InvariantMeasurePrefix::random(&tree, depth, seed).unwrap();
                assert!(check_invariance_on(&tree, &m));
                assert!(verify_decomposition_all(&tree, &m));
            }
        }
    }

    #[test]
    fn json_roundtrip() {
        let tree = lamp_a_tree(4);
        let m = InvariantMeasurePrefix::random(&tree, 4, 5).unwrap();
        let json = m.to_json(&tree);
        assert!(json.starts_with(r#"{"depth":4"#));
        let back = InvariantMeasurePrefix::from_json(&tree, &json).unwrap();
        assert_eq!(m, back);
        assert!(InvariantMeasurePrefix::from_json(&tree, "{}").is_err());
        assert!(InvariantMeasurePrefix::from_json(&tree, r#"{"depth":1,"levels":[]}"#).is_err());
    }
}
