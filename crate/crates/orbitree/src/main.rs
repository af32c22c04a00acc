//! Command-line front end: orbit summaries, orbit trees, verification cases
//! with JSON verdicts, and figure rendering.
//!
//! Exit codes: 0 success / verification passed, 1 verification or shape
//! mismatch, 2 usage error, 3 vertex budget exceeded.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use orbitree::automaton::{vertex_word, GroupWord, MealyAutomaton, TreeWord};
use orbitree::catalog::{self, SushchanskyOrder};
use orbitree::error::Error;
use orbitree::limits::VertexBudget;
use orbitree::measures::{check_invariance_on, verify_decomposition_all, InvariantMeasurePrefix};
use orbitree::orbits::OrbitEngine;
use orbitree::render::{matrix_to_ascii, matrix_to_pbm, SIERPINSKI_32};
use orbitree::series::{self, LampGen};
use orbitree::tree::{match_shape, OrbitTree, ShapeSpec, ShapeVerdict};

#[derive(Parser)]
#[command(
    name = "orbitree",
    version,
    about = "Orbit trees and finite-depth ergodic decompositions of automaton groups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-level orbit summaries
    Orbits(OrbitsArgs),
    /// Build and print the orbit tree, optionally checking its shape
    Tree(TreeArgs),
    /// Run a named verification case and print a JSON verdict
    Verify(VerifyArgs),
    /// Render orbit matrices or orbit trees
    Render(RenderArgs),
}

/// Where the automaton comes from.
#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Automaton description file
    #[arg(long, value_name = "FILE")]
    spec: Option<PathBuf>,
    /// Builtin name: lamplighter | universal | sushchansky:p[:pairs] | ll2 | adding | rootswap
    #[arg(long, value_name = "NAME")]
    builtin: Option<String>,
}

#[derive(Args)]
struct GroupArgs {
    #[command(flatten)]
    source: Source,
    /// Generators as comma-separated group words (default: all states;
    /// sushchansky: its two distinguished generators)
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    gens: Vec<String>,
    /// Per-level vertex cap (overrides ORBITREE_VERTEX_BUDGET; default 2^24)
    #[arg(long, value_name = "N")]
    vertex_budget: Option<u64>,
}

#[derive(Args)]
struct OrbitsArgs {
    #[command(flatten)]
    group: GroupArgs,
    /// Deepest level to enumerate
    #[arg(long, value_name = "N")]
    depth: usize,
    /// Emit one JSON object per level instead of text
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct TreeArgs {
    #[command(flatten)]
    group: GroupArgs,
    /// Tree depth
    #[arg(long, value_name = "N")]
    depth: usize,
    /// Output format
    #[arg(long, value_name = "FMT", default_value = "text")]
    format: TreeFormat,
    /// Expected shape; exits 1 with a diagnostic when the tree differs
    #[arg(long, value_name = "SHAPE")]
    expect: Option<String>,
    /// Write the tree here instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum TreeFormat {
    Text,
    Dot,
}

#[derive(Args)]
struct VerifyArgs {
    /// Case name: lamplighter-a | lamplighter-b | orb-formulas |
    /// block-decomposition | universal | sushchansky:p | decomposition |
    /// sierpinski-figure
    case: String,
    /// Depth override (each case has its own default)
    #[arg(long, value_name = "N")]
    depth: Option<usize>,
    /// Random seed
    #[arg(long, value_name = "S", default_value_t = 7)]
    seed: u64,
    /// Trial count override (random words, orders, or measures)
    #[arg(long, value_name = "T")]
    trials: Option<usize>,
    /// Per-level vertex cap (overrides ORBITREE_VERTEX_BUDGET; default 2^24)
    #[arg(long, value_name = "N")]
    vertex_budget: Option<u64>,
}

#[derive(Args)]
struct RenderArgs {
    #[command(subcommand)]
    what: RenderWhat,
}

#[derive(Subcommand)]
enum RenderWhat {
    /// Orbit matrix of a word under a group element
    Matrix(RenderMatrixArgs),
    /// Orbit tree in DOT or text form
    Tree(RenderTreeArgs),
}

#[derive(Args)]
struct RenderMatrixArgs {
    #[command(flatten)]
    source: Source,
    /// The acting group word
    #[arg(long, value_name = "E")]
    element: String,
    /// Start word, or `random` (with --len and --seed)
    #[arg(long, value_name = "W")]
    word: String,
    /// Length of the random start word
    #[arg(long, value_name = "L")]
    len: Option<usize>,
    /// Seed for --word random
    #[arg(long, value_name = "S", default_value_t = 7)]
    seed: u64,
    /// Number of rows (successive images)
    #[arg(long, value_name = "R")]
    rows: usize,
    /// Output format
    #[arg(long, value_name = "FMT", default_value = "ascii")]
    format: MatrixFormat,
    /// Write the figure here instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum MatrixFormat {
    Ascii,
    Pbm,
}

#[derive(Args)]
struct RenderTreeArgs {
    #[command(flatten)]
    group: GroupArgs,
    /// Tree depth
    #[arg(long, value_name = "N")]
    depth: usize,
    /// Output format
    #[arg(long, value_name = "FMT", default_value = "dot")]
    format: TreeFormat,
    /// Write the figure here instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::BudgetExceeded { .. } | Error::BudgetOutOfRange { .. } => 3,
                _ => 2,
            }
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<i32, Error> {
    match cli.command {
        Command::Orbits(args) => cmd_orbits(args),
        Command::Tree(args) => cmd_tree(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Render(args) => match args.what {
            RenderWhat::Matrix(m) => cmd_render_matrix(m),
            RenderWhat::Tree(t) => cmd_render_tree(t),
        },
    }
}

fn resolve_budget(flag: Option<u64>) -> Result<VertexBudget, Error> {
    if let Some(v) = flag {
        return VertexBudget::new(v);
    }
    if let Ok(text) = std::env::var("ORBITREE_VERTEX_BUDGET") {
        let v: u64 = text.parse().map_err(|_| {
            Error::InvalidWord(format!("ORBITREE_VERTEX_BUDGET `{text}` is not a number"))
        })?;
        return VertexBudget::new(v);
    }
    Ok(VertexBudget::default())
}

fn load_source(source: &Source) -> Result<(MealyAutomaton, Vec<GroupWord>), Error> {
    if let Some(path) = &source.spec {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidWord(format!("cannot read {}: {e}", path.display())))?;
        let aut = orbitree::dsl::parse_automaton(&text)?;
        let gens = aut.state_generators();
        return Ok((aut, gens));
    }
    let name = source.builtin.as_deref().expect("clap enforces the source group");
    let builtin = catalog::builtin(name)?;
    Ok((builtin.automaton, builtin.default_generators))
}

fn load_group(args: &GroupArgs) -> Result<(MealyAutomaton, Vec<GroupWord>, VertexBudget), Error> {
    let (aut, default_gens) = load_source(&args.source)?;
    let gens = if args.gens.is_empty() {
        default_gens
    } else {
        args.gens
            .iter()
            .map(|text| aut.parse_group_word(text))
            .collect::<Result<_, _>>()?
    };
    let budget = resolve_budget(args.vertex_budget)?;
    Ok((aut, gens, budget))
}

fn write_output(out: Option<&Path>, bytes: &[u8]) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| Error::InvalidWord(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| Error::InvalidWord(format!("cannot write to stdout: {e}"))),
    }
}

fn cmd_orbits(args: OrbitsArgs) -> Result<i32, Error> {
    let (aut, gens, budget) = load_group(&args.group)?;
    budget.check_level(aut.arity(), args.depth)?;
    let mut engine = OrbitEngine::new(&aut, &gens, budget);
    for _ in 0..args.depth {
        let orbits = engine.next_level()?;
        let summary = orbits.summary();
        if args.json {
            println!("{}", serde_json::to_string(&summary).expect("summary serializes"));
        } else {
            let sizes = summary
                .sizes
                .iter()
                .map(|(size, count)| format!("{size}: {count}"))
                .collect::<Vec<_>>()
                .join(", ");
            println!("level {}: orbits {}, sizes {{{sizes}}}", summary.level, summary.orbits);
        }
    }
    Ok(0)
}

fn cmd_tree(args: TreeArgs) -> Result<i32, Error> {
    let (aut, gens, budget) = load_group(&args.group)?;
    let tree = OrbitTree::build(&aut, &gens, args.depth, budget)?;
    let rendered = match args.format {
        TreeFormat::Text => tree.to_text(),
        TreeFormat::Dot => tree.to_dot(),
    };
    write_output(args.out.as_deref(), rendered.as_bytes())?;
    if let Some(expect) = &args.expect {
        let spec: ShapeSpec = expect.parse()?;
        match match_shape(&tree, &spec) {
            ShapeVerdict::Ok => {
                eprintln!("shape {expect}: ok (to depth {})", args.depth);
            }
            verdict => {
                eprintln!("shape {expect}: {verdict}");
                return Ok(1);
            }
        }
    }
    Ok(0)
}

fn cmd_render_matrix(args: RenderMatrixArgs) -> Result<i32, Error> {
    let (aut, _) = load_source(&args.source)?;
    let element = aut.parse_group_word(&args.element)?;
    let word = if args.word == "random" {
        let len = args
            .len
            .ok_or_else(|| Error::InvalidWord("--word random needs --len".into()))?;
        random_word(&aut, len, args.seed)
    } else {
        aut.alphabet().parse_word(&args.word)?
    };
    let matrix = series::orbit_matrix_automaton(&aut, &element, &word, args.rows)?;
    match args.format {
        MatrixFormat::Ascii => {
            let mut text = matrix_to_ascii(&matrix);
            text.push('\n');
            write_output(args.out.as_deref(), text.as_bytes())?;
        }
        MatrixFormat::Pbm => {
            write_output(args.out.as_deref(), &matrix_to_pbm(&matrix))?;
        }
    }
    Ok(0)
}

fn random_word(aut: &MealyAutomaton, len: usize, seed: u64) -> TreeWord {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    TreeWord((0..len).map(|_| rng.random_range(0..aut.arity())).collect())
}

fn cmd_render_tree(args: RenderTreeArgs) -> Result<i32, Error> {
    let (aut, gens, budget) = load_group(&args.group)?;
    let tree = OrbitTree::build(&aut, &gens, args.depth, budget)?;
    let rendered = match args.format {
        TreeFormat::Text => tree.to_text(),
        TreeFormat::Dot => tree.to_dot(),
    };
    write_output(args.out.as_deref(), rendered.as_bytes())?;
    Ok(0)
}

// ---- verification cases ------------------------------------------------

fn cmd_verify(args: VerifyArgs) -> Result<i32, Error> {
    let budget = resolve_budget(args.vertex_budget)?;
    let (pass, details) = match args.case.as_str() {
        "lamplighter-a" => verify_lamplighter_tree(
            "a",
            ShapeSpec::LamplighterA,
            args.depth.unwrap_or(16),
            budget,
        )?,
        "lamplighter-b" => verify_lamplighter_tree(
            "b",
            ShapeSpec::LamplighterB,
            args.depth.unwrap_or(14),
            budget,
        )?,
        "orb-formulas" => {
            verify_orb_formulas(args.depth.unwrap_or(13), args.trials.unwrap_or(50), args.seed)?
        }
        "block-decomposition" => verify_blocks(args.depth.unwrap_or(4) as u32, budget)?,
        "universal" => verify_universal(args.depth.unwrap_or(4), budget)?,
        "decomposition" => verify_decomposition_case(
            args.depth.unwrap_or(8),
            args.trials.unwrap_or(100),
            args.seed,
            budget,
        )?,
        "sierpinski-figure" => verify_sierpinski()?,
        other => {
            if let Some(p) = other.strip_prefix("sushchansky:") {
                let p: usize = p.parse().map_err(|_| Error::UnknownBuiltin(other.into()))?;
                verify_sushchansky(
                    p,
                    args.depth.unwrap_or(5),
                    args.trials.unwrap_or(3),
                    args.seed,
                    budget,
                )?
            } else {
                return Err(Error::InvalidWord(format!(
                    "unknown verification case `{other}`"
                )));
            }
        }
    };
    println!("{}", json!({ "case": args.case, "pass": pass, "details": details }));
    Ok(if pass { 0 } else { 1 })
}

type Verdict = (bool, serde_json::Value);

fn verify_lamplighter_tree(
    generator: &str,
    shape: ShapeSpec,
    depth: usize,
    budget: VertexBudget,
) -> Result<Verdict, Error> {
    let aut = catalog::lamplighter();
    let gens = vec![aut.parse_group_word(generator)?];
    let tree = OrbitTree::build(&aut, &gens, depth, budget)?;
    let verdict = match_shape(&tree, &shape);
    let node_counts: Vec<usize> = (0..=depth).map(|n| tree.node_count(n)).collect();
    Ok((
        verdict.is_ok(),
        json!({
            "generator": generator,
            "depth": depth,
            "node_counts": node_counts,
            "verdict": verdict.to_string(),
        }),
    ))
}

/// Orbit size of `v` under repeated application of `g`; the independent
/// route checked against the closed forms.
fn automaton_orbit_size(aut: &MealyAutomaton, g: &GroupWord, v: &TreeWord) -> u64 {
    let mut cur = aut.act(g, v);
    let mut steps = 1;
    while cur != *v {
        cur = aut.act(g, &cur);
        steps += 1;
    }
    steps
}

fn verify_orb_formulas(k_max: usize, trials: usize, seed: u64) -> Result<Verdict, Error> {
    use rand::{Rng, SeedableRng};
    let aut = catalog::lamplighter();
    let ga = aut.parse_group_word("a")?;
    let gb = aut.parse_group_word("b")?;
    let mut checks = 0usize;
    let mut failures: Vec<String> = Vec::new();
    let mut check = |label: String, formula: u64, computed: u64| {
        checks += 1;
        if formula != computed {
            failures.push(format!("{label}: formula {formula} != computed {computed}"));
        }
    };

    for k in 1..=k_max {
        let (formula, computed) = series::orb10_sizes(k);
        check(format!("orb_b(10^{k}) series"), formula, computed);
        let mut letters = vec![0usize; k + 1];
        letters[0] = 1;
        let v = TreeWord(letters);
        check(
            format!("orb_b(10^{k}) automaton"),
            formula,
            automaton_orbit_size(&aut, &gb, &v),
        );
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for t in 0..trials {
        let len = rng.random_range(1..=k_max);
        let w = TreeWord((0..len).map(|_| rng.random_range(0..2usize)).collect());
        let (formula, computed) = series::orb_a_sizes(&w)?;
        check(format!("trial {t}: orb_a series |w|={len}"), formula, computed);
        check(
            format!("trial {t}: orb_a automaton |w|={len}"),
            formula,
            automaton_orbit_size(&aut, &ga, &w),
        );
        for i in 0..=3 {
            let (formula, computed) = series::orb_0i1w_sizes(i, &w)?;
            check(format!("trial {t}: orb_b(0^{i} 1 w)"), formula, computed);
        }
    }
    let pass = failures.is_empty();
    Ok((
        pass,
        json!({
            "k_max": k_max,
            "trials": trials,
            "seed": seed,
            "checks": checks,
            "failures": failures,
        }),
    ))
}

fn verify_blocks(n_max: u32, budget: VertexBudget) -> Result<Verdict, Error> {
    let mut results = Vec::new();
    for n in 0..=n_max {
        results.push(series::verify_block_decomposition(n, budget)?);
    }
    let pass = results.iter().all(|&r| r);
    Ok((pass, json!({ "n_max": n_max, "results": results })))
}

fn verify_universal(depth: usize, budget: VertexBudget) -> Result<Verdict, Error> {
    let aut = catalog::universal_grigorchuk();
    let gens = aut.state_generators();
    let mut engine = OrbitEngine::new(&aut, &gens, budget);
    let mut level_reports = Vec::new();
    let mut pass = true;
    for _ in 0..depth {
        let orbits = engine.next_level()?;
        let n = orbits.level();
        let expected_count = 3usize.pow(n as u32);
        let expected_size = 1u64 << n;
        // the orbit of a vertex must be exactly the Cartesian product of the
        // two-letter classes {1,4}, {2,5}, {3,6} along its word
        let mut class_to_orbit = vec![u64::MAX; expected_count];
        let mut products_ok = orbits.orbit_count() == expected_count;
        for v in 0..orbits.vertex_count() as u64 {
            let word = vertex_word(v, n, 6);
            let key = word
                .letters()
                .iter()
                .fold(0usize, |acc, &x| acc * 3 + (x % 3));
            let id = orbits.orbit_id_of_index(v);
            if class_to_orbit[key] == u64::MAX {
                class_to_orbit[key] = id;
            } else if class_to_orbit[key] != id {
                products_ok = false;
            }
        }
        let sizes_ok = (0..orbits.orbit_count()).all(|i| orbits.size(i) == expected_size);
        let distinct_ok = {
            let mut ids = class_to_orbit.clone();
            ids.sort_unstable();
            ids.dedup();
            ids.len() == expected_count
        };
        let ok = products_ok && sizes_ok && distinct_ok;
        pass &= ok;
        level_reports.push(json!({
            "level": n,
            "orbits": orbits.orbit_count(),
            "expected_orbits": expected_count,
            "ok": ok,
        }));
    }
    Ok((
        pass,
        json!({
            "depth": depth,
            "levels": level_reports,
        }),
    ))
}

fn verify_sushchansky(
    p: usize,
    depth: usize,
    orders: usize,
    seed: u64,
    budget: VertexBudget,
) -> Result<Verdict, Error> {
    let mut shapes: Vec<Vec<Vec<usize>>> = Vec::new();
    let mut verdicts = Vec::new();
    for i in 0..orders {
        let order = SushchanskyOrder::shuffled(p, seed.wrapping_add(i as u64))?;
        let sus = catalog::sushchansky(&order);
        let tree = OrbitTree::build(&sus.automaton, &sus.generators(), depth, budget)?;
        verdicts.push(match_shape(&tree, &ShapeSpec::Sushchansky(p)).to_string());
        shapes.push(tree.child_count_table());
    }
    let all_match = verdicts.iter().all(|v| v == "ok");
    let identical = shapes.windows(2).all(|w| w[0] == w[1]);
    Ok((
        all_match && identical,
        json!({
            "p": p,
            "depth": depth,
            "orders": orders,
            "seed": seed,
            "shape_match": verdicts,
            "shapes_identical_across_orders": identical,
        }),
    ))
}

fn verify_decomposition_case(
    depth: usize,
    trials: usize,
    seed: u64,
    budget: VertexBudget,
) -> Result<Verdict, Error> {
    let lamp = catalog::lamplighter();
    let lamp_gens = vec![lamp.parse_group_word("a")?];
    let universal = catalog::universal_grigorchuk();
    let universal_gens = universal.state_generators();
    let mut reports = Vec::new();
    let mut failures = 0usize;
    for (name, aut, gens) in [
        ("lamplighter <a>", &lamp, &lamp_gens),
        ("universal", &universal, &universal_gens),
    ] {
        let tree = OrbitTree::build(aut, gens, depth, budget)?;
        let mut bad = 0usize;
        for t in 0..trials {
            let measure =
                InvariantMeasurePrefix::random(&tree, depth, seed.wrapping_add(t as u64))?;
            if !check_invariance_on(&tree, &measure) || !verify_decomposition_all(&tree, &measure)
            {
                bad += 1;
            }
        }
        failures += bad;
        reports.push(json!({ "automaton": name, "trials": trials, "failures": bad }));
    }
    Ok((
        failures == 0,
        json!({
            "depth": depth,
            "seed": seed,
            "automata": reports,
            "failures": failures,
        }),
    ))
}

fn verify_sierpinski() -> Result<Verdict, Error> {
    let alphabet = orbitree::Alphabet::binary();
    let word = alphabet.parse_word("10^31")?;
    let matrix = series::orbit_matrix(&word, LampGen::B, 32)?;
    let ascii = matrix_to_ascii(&matrix);
    let matches_golden = ascii == SIERPINSKI_32;
    let expected_rows = ["X", "XX", "X X", "XXXX", "X   X", "XX  XX", "X X X X", "XXXXXXXX"];
    let first_rows: Vec<String> = ascii
        .lines()
        .take(8)
        .map(|l| l.trim_end().to_string())
        .collect();
    let rows_ok = first_rows == expected_rows;
    let ones = matrix.count_ones();
    Ok((
        matches_golden && rows_ok && ones == 243,
        json!({
            "rows": 32,
            "matches_golden": matches_golden,
            "first_rows_ok": rows_ok,
            "ones": ones,
            "expected_ones": 243,
        }),
    ))
}
