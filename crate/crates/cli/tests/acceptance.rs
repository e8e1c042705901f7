//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines reach the console; exits nonzero if any fails.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use symbreak::lab::{points, random_generator, random_nontrivial_group};
use symbreak::layered::{ladder_id, line_id, SyntheticDescription};
use symbreak::motion::{
    bound_check, double_count_check, preserved_count, preserves_partial, search_breaking_coloring, verify_breaks,
    Strategy,
};
use symbreak::perm::{
    automorphisms, check_sphere_action, disjoint_ray_witness, fixed_point_components, GroupMotion, PermSet, Permutation,
};
use symbreak::scheme::{
    block_layout, choose_k, compute_blocks_on, final_verification, first_failure, remainder_requirement,
    DEFAULT_K_CEILING,
};
use symbreak::seed::sub_seed;
use symbreak::{generate, FamilySpec, LayeredGraph, PartialColoring, VertexId};

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($msg)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

// ---------------------------------------------------------------- oracles

/// Colorings of `0..n` fixed by `images`, by enumeration.
fn brute_preserved(images: &[u32]) -> u128 {
    let n = images.len();
    (0u64..1 << n).filter(|&mask| (0..n).all(|i| (mask >> i & 1) == (mask >> images[i] & 1))).count() as u128
}

/// Every permutation of `0..n` (Heap's algorithm).
fn all_permutations(n: usize) -> Vec<Vec<u32>> {
    let mut a: Vec<u32> = (0..n as u32).collect();
    let mut out = vec![a.clone()];
    let mut c = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            out.push(a.clone());
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

fn perm(images: Vec<u32>) -> Permutation {
    let n = images.len();
    Permutation::from_positions(points(n), images).unwrap()
}

/// The four window-length inequalities, typed out separately from the library.
fn all_inequalities_hold(k: u64, c: f64, e: f64) -> bool {
    let kf = k as f64;
    let s = kf.sqrt();
    c.log2() < e * s / 8.0
        && kf.log2() < e * s / 8.0
        && 4.0 * s < e * (1.0 - e / 2.0) * kf / 2.0
        && c * s / 2.0 < e * kf / 4.0
}

fn linear_scan_k(c: f64, e: f64, k0: u64) -> u64 {
    (k0 + 1..).find(|&k| all_inequalities_hold(k, c, e)).unwrap()
}

// ------------------------------------------------------------- cli plumbing

struct CliRun {
    args: Vec<String>,
    report: PathBuf,
    coloring: PathBuf,
}

fn run_cli(args: &[String], dir: &Path, tag: &str) -> Result<CliRun, String> {
    let report = dir.join(format!("{tag}.report.json"));
    let coloring = dir.join(format!("{tag}.coloring.json"));
    let out = Command::new(env!("CARGO_BIN_EXE_symbreak"))
        .args(args)
        .arg("--report")
        .arg(&report)
        .arg("--coloring")
        .arg(&coloring)
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(
        out.status.success(),
        "`symbreak {}` exited with {:?}: {}",
        args.join(" "),
        out.status.code(),
        String::from_utf8_lossy(&out.stderr).trim()
    );
    Ok(CliRun { args: args.to_vec(), report, coloring })
}

fn argv(s: &str) -> Vec<String> {
    s.split_whitespace().map(String::from).collect()
}

fn load(run: &CliRun) -> Result<(Value, PartialColoring), String> {
    let report: Value = ok(serde_json::from_str(&ok(std::fs::read_to_string(&run.report))?))?;
    let coloring = ok(PartialColoring::from_json(&ok(std::fs::read_to_string(&run.coloring))?))?;
    Ok((report, coloring))
}

fn indices(v: &Value) -> Vec<usize> {
    v.as_array().map(|a| a.iter().filter_map(|x| x.as_u64().map(|x| x as usize)).collect()).unwrap_or_default()
}

fn moves_within(p: &Permutation, g: &LayeredGraph, level: usize) -> bool {
    p.positions().iter().enumerate().any(|(v, &w)| v != w as usize && g.level_at(v) <= level)
}

/// Recomputes the survivor list of an ends report from a fresh enumeration.
fn ends_survivors(
    g: &LayeredGraph,
    all: &PermSet,
    coloring: &PartialColoring,
    movers: &[usize],
    m_final: usize,
) -> Vec<usize> {
    all.iter()
        .enumerate()
        .filter(|(i, p)| !p.is_identity() && (movers.contains(i) || moves_within(p, g, m_final)))
        .filter(|(_, p)| preserves_partial(p, coloring))
        .map(|(i, _)| i)
        .collect()
}

fn restrict(c: &PartialColoring, keep: &HashSet<VertexId>) -> PartialColoring {
    let support: Vec<VertexId> = c.support().iter().copied().filter(|v| keep.contains(v)).collect();
    let black: Vec<VertexId> = c.black().iter().copied().filter(|v| keep.contains(v)).collect();
    PartialColoring::new(support, black).unwrap()
}

// ---------------------------------------------------------------- criteria

fn c1_cycle_count() -> Check {
    let mut checked = 0;
    for n in 1..=8 {
        for images in all_permutations(n) {
            let expect = brute_preserved(&images);
            let got = preserved_count(&perm(images.clone()));
            ensure!(got == expect, "n = {n}, {images:?}: formula {got}, enumeration {expect}");
            checked += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..200 {
        let n = rng.gen_range(9..=10);
        let mut images: Vec<u32> = (0..n as u32).collect();
        rand::seq::SliceRandom::shuffle(&mut images[..], &mut rng);
        let expect = brute_preserved(&images);
        let got = preserved_count(&perm(images.clone()));
        ensure!(got == expect, "{images:?}: formula {got}, enumeration {expect}");
        checked += 1;
    }
    Ok(format!("{checked} permutations, all exact"))
}

fn c2_double_counting() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let extra = 3;
    for t in 0..100 {
        let n = rng.gen_range(1..=12);
        // Permutations of n + extra points fixing S' = 0..n setwise.
        let lift = |inner: &[u32], rng: &mut ChaCha8Rng| -> Vec<u32> {
            let outer = random_generator(rng, extra);
            inner.iter().copied().chain(outer.iter().map(|&o| o + n as u32)).collect()
        };
        let inner_set: Vec<Vec<u32>> = if t % 2 == 0 {
            random_nontrivial_group(&mut rng, n.max(2), 2, 512)
                .iter()
                .map(|p| p.positions().to_vec())
                .filter(|p| p.len() == n)
                .collect()
        } else {
            (0..rng.gen_range(1..=6)).map(|_| random_generator(&mut rng, n)).collect()
        };
        let inner_set = if inner_set.is_empty() { vec![(0..n as u32).collect()] } else { inner_set };
        let elements: Vec<Permutation> = inner_set
            .iter()
            .map(|inner| Permutation::from_positions(points(n + extra), lift(inner, &mut rng)).unwrap())
            .collect();
        let set = ok(PermSet::from_elements(elements))?;
        let support: Vec<VertexId> = (0..n as u64).map(VertexId).collect();
        let dc = ok(double_count_check(&set, &support, 16))?;
        ensure!(dc.equal && dc.lhs == dc.rhs, "instance {t}: lhs {} != rhs {}", dc.lhs, dc.rhs);
        let distinct: BTreeSet<Vec<u32>> = inner_set.iter().cloned().collect();
        let oracle: u128 = distinct.iter().map(|p| brute_preserved(p)).sum();
        ensure!(dc.lhs == oracle, "instance {t}: lhs {} but enumeration gives {oracle}", dc.lhs);
    }
    Ok("100 sets, lhs = rhs = enumeration".into())
}

fn c3_motion_bound() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let (mut holding, mut drawn) = (0, 0);
    while holding < 500 {
        drawn += 1;
        ensure!(drawn < 100_000, "only {holding} bound-holding instances in {drawn} draws");
        let n = rng.gen_range(3..=16);
        let set = random_nontrivial_group(&mut rng, n, 2, 4096);
        let support = points(n);
        if !ok(bound_check(&set, &support))?.holds {
            continue;
        }
        holding += 1;
        let found = search_breaking_coloring(&set, &support, Strategy::Exhaustive, false)
            .map_err(|e| format!("instance {drawn} (n = {n}, |A| = {}): {e}", set.len()))?;
        ensure!(verify_breaks(&found.coloring, &set).is_empty(), "instance {drawn}: returned coloring is preserved");
    }
    Ok(format!("{holding} bound-holding instances of {drawn} drawn, 100% success"))
}

fn c4_randomized_failure_rate() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let (instances, per) = (100u64, 100u64);
    let (mut failures, mut expected, mut variance) = (0u64, 0.0f64, 0.0f64);
    let mut i = 0u64;
    while i < instances {
        let n = rng.gen_range(6..=16);
        let set = random_nontrivial_group(&mut rng, n, 2, 4096);
        let support = points(n);
        let b = ok(bound_check(&set, &support))?;
        let GroupMotion::Finite(m) = b.group_motion else { continue };
        if !b.holds {
            continue;
        }
        let p = (b.set_size as f64 * 2f64.powf(-(m as f64) / 2.0)).min(1.0);
        for t in 0..per {
            let single = Strategy::Randomized { seed: sub_seed(404, i, t), max_tries: 1 };
            match search_breaking_coloring(&set, &support, single, false) {
                Ok(_) => {}
                Err(symbreak::Error::RandomizedExhausted { .. }) => failures += 1,
                Err(e) => return Err(e.to_string()),
            }
        }
        expected += p * per as f64;
        variance += p * (1.0 - p) * per as f64;
        i += 1;
    }
    let trials = instances * per;
    let limit = expected + 3.0 * variance.sqrt();
    let detail = format!(
        "{failures}/{trials} failures, bound {:.4} + 3 sigma = {:.4} (rate {:.4} <= {:.4})",
        expected,
        limit,
        failures as f64 / trials as f64,
        limit / trials as f64
    );
    ensure!(failures as f64 <= limit, "{detail}");
    Ok(detail)
}

/// Oracle value of the smallest admissible window for c~ = 4, eps = 1/2.
const GOLDEN_K: u64 = 65_537;

fn c5_choose_k() -> Check {
    ensure!(linear_scan_k(4.0, 0.5, 0) == GOLDEN_K, "oracle no longer gives {GOLDEN_K}");
    let k = ok(choose_k(4.0, 0.5, 0, DEFAULT_K_CEILING))?;
    ensure!(k == GOLDEN_K, "choose_k(4, 0.5, 0) = {k}, expected {GOLDEN_K}");
    ensure!(k > 1024, "choose_k(4, 0.5, 0) = {k} is not above 1024");
    ensure!(first_failure(k - 1, 4.0, 0.5).is_some(), "k - 1 = {} satisfies every inequality", k - 1);
    let mut cells = 0;
    for &e in &[0.1, 0.3, 0.5, 0.7, 0.9] {
        for &c in &[0.5, 1.0, 4.0, 16.0, 64.0] {
            let k = ok(choose_k(c, e, 0, DEFAULT_K_CEILING))?;
            let oracle = linear_scan_k(c, e, 0);
            ensure!(k == oracle, "eps {e}, c~ {c}: choose_k {k}, linear scan {oracle}");
            ensure!(first_failure(k, c, e).is_none(), "eps {e}, c~ {c}: k = {k} fails an inequality");
            ensure!(k == 1 || first_failure(k - 1, c, e).is_some(), "eps {e}, c~ {c}: k - 1 passes");
            cells += 1;
        }
    }
    Ok(format!("choose_k(4, 0.5, 0) = {k}; {cells} grid cells minimal"))
}

fn c6_block_arithmetic() -> Check {
    let mut parts = Vec::new();
    for (k, kappa, r) in [(2500usize, 75usize, 14usize), (10000, 150, 26)] {
        let eps = 0.5;
        ensure!(
            block_layout(k, eps) == (kappa, r),
            "k = {k}: layout {:?}, expected ({kappa}, {r})",
            block_layout(k, eps)
        );
        let need = eps / 2.0 * (1.0 - eps / 2.0) * k as f64;
        ensure!(
            (remainder_requirement(k, eps) - need).abs() < 1e-9,
            "k = {k}: requirement {}",
            remainder_requirement(k, eps)
        );
        let sets = vec![Vec::new(); k + 1];
        let plan = ok(compute_blocks_on(&sets, 0, k, eps, &BTreeSet::new()))?;
        let remainder = k - (r - 1) * kappa;
        ensure!(
            plan.remainder == remainder && remainder as f64 > need,
            "k = {k}: remainder {} vs {need}",
            plan.remainder
        );
        ensure!(plan.blocks.len() == r, "k = {k}: {} blocks", plan.blocks.len());
        parts.push(format!("k={k}: kappa {kappa}, r {r}, remainder {remainder} > {need}"));
    }
    Ok(parts.join("; "))
}

/// A path of length 8 with two pendant 3-vertex paths attached at distance 2.
/// Swapping the pendants moves 6 vertices and nothing beyond sphere 5.
fn finite_motion_example() -> SyntheticDescription {
    SyntheticDescription {
        sphere_sizes: vec![1, 1, 1, 3, 3, 3, 1, 1, 1],
        edges: vec![
            [0, 1],
            [1, 2],
            [2, 3],
            [2, 4],
            [2, 5],
            [3, 6],
            [4, 7],
            [5, 8],
            [6, 9],
            [7, 10],
            [8, 11],
            [9, 12],
            [12, 13],
            [13, 14],
        ],
    }
}

fn c7_sphere_action() -> Check {
    for radius in 5..=20 {
        let g = ok(generate(&FamilySpec::Grid2d, radius))?;
        let stab = ok(ok(automorphisms(&g))?.stabilizer(g.base()))?;
        let rep = ok(check_sphere_action(&stab, &g, 1))?;
        ensure!(rep.violations() == 0, "grid radius {radius}: {} violations", rep.violations());
    }
    let g = ok(generate(&FamilySpec::Synthetic(finite_motion_example()), 8))?;
    let all = ok(automorphisms(&g))?;
    ensure!(all.len() == 2, "counterexample group order {}", all.len());
    let rep = ok(check_sphere_action(&ok(all.stabilizer(g.base()))?, &g, 1))?;
    ensure!(!rep.propagation_violations.is_empty(), "counterexample not flagged");
    let v = &rep.propagation_violations[0];
    Ok(format!(
        "grid radii 5..=20 clean; counterexample flagged (nontrivial from sphere {}, trivial on sphere {})",
        v.from_sphere, v.zero_sphere
    ))
}

fn c8_rays() -> Check {
    let mut elements = 0;
    let mut witnesses = 0;
    for spec in [FamilySpec::Grid2d, FamilySpec::TwoWayLadder] {
        for radius in 1..=15 {
            let g = ok(generate(&spec, radius))?;
            let stab = ok(ok(automorphisms(&g))?.stabilizer(g.base()))?;
            for p in stab.iter().filter(|p| !p.is_identity()) {
                elements += 1;
                let fc = ok(fixed_point_components(p, &g))?;
                for comp in &fc.components {
                    let top = comp.vertices.iter().map(|&v| g.level_of(v).unwrap()).max().unwrap();
                    ensure!(top == radius, "{spec} radius {radius}: component stops at sphere {top}");
                    let w = ok(disjoint_ray_witness(p, &g, &comp.vertices))?
                        .ok_or_else(|| format!("{spec} radius {radius}: no witness"))?;
                    let dist = g.bfs_distances(g.index_of(w.root).unwrap());
                    for (i, &v) in w.path.iter().enumerate() {
                        ensure!(
                            dist[g.index_of(v).unwrap()] as usize == i + 1,
                            "{spec} radius {radius}: path not monotone"
                        );
                        ensure!(w.image[i] == ok(p.apply(v))?, "{spec} radius {radius}: wrong image");
                    }
                    ensure!(p.apply(w.root).is_ok_and(|r| r == w.root), "{spec} radius {radius}: root moved");
                    ensure!(
                        g.level_of(*w.path.last().unwrap()) == Some(radius),
                        "{spec} radius {radius}: path ends early"
                    );
                    let on_path: HashSet<VertexId> = w.path.iter().copied().collect();
                    ensure!(w.image.iter().all(|v| !on_path.contains(v)), "{spec} radius {radius}: image meets path");
                    witnesses += 1;
                }
            }
        }
    }
    Ok(format!("{elements} stabilizer elements, {witnesses} components, all reach the boundary with a witness"))
}

fn c9_grid_pipeline(dir: &Path, runs: &mut Vec<CliRun>) -> Check {
    let run = run_cli(&argv("pipeline --family grid2d --radius 25 --epsilon 0.9 --c auto --seed 2024"), dir, "grid")?;
    let (report, coloring) = load(&run)?;
    runs.push(run);
    let r = &report["report"];
    let survivors = indices(&r["verification"]["survivors"]);
    ensure!(survivors.is_empty(), "survivors {survivors:?}");
    ensure!(r["c_auto"] == Value::Bool(true), "c was not auto-fit");
    let g = ok(generate(&FamilySpec::Grid2d, 25))?;
    let all = ok(automorphisms(&g))?;
    let m_final = r["verification"]["m_final"].as_u64().unwrap_or(0) as usize;
    let fresh = final_verification(&g, &all, &coloring, m_final);
    ensure!(fresh.survivors == survivors, "reloaded coloring gives survivors {:?}", fresh.survivors);
    let margin = r["margin"].as_u64().unwrap_or(1) as usize;
    let within: Vec<usize> = (0..all.len())
        .filter(|&i| !all.elements()[i].is_identity() && moves_within(&all.elements()[i], &g, 25 - margin))
        .collect();
    let preserved = verify_breaks(&coloring, &all);
    ensure!(
        within.iter().all(|i| !preserved.contains(i)),
        "an automorphism moving a vertex within the margin survives"
    );
    Ok(format!(
        "|Aut| = {}, {} nontrivial elements checked, {} colored vertices, survivors []",
        all.len(),
        within.len(),
        coloring.len()
    ))
}

fn c10_synthetic_pipeline(dir: &Path, runs: &mut Vec<CliRun>) -> Check {
    let run = run_cli(&argv("pipeline --family threads:7x130 --radius 130 --epsilon 0.5 --seed 2024"), dir, "threads")?;
    let (report, coloring) = load(&run)?;
    runs.push(run);
    let r = &report["report"];
    let order = r["group_order"].as_u64().unwrap_or(0);
    ensure!((1000..=10_000).contains(&order), "|A| = {order} outside [10^3, 10^4]");
    let mut best_classes = 0;
    let mut bounds_checked = 0;
    for it in r["iterations"].as_array().into_iter().flatten() {
        let nonempty = indices(&it["class_sizes"]).iter().filter(|&&s| s > 0).count();
        best_classes = best_classes.max(nonempty);
        for b in it["block_bounds"].as_array().into_iter().flatten() {
            let motion = b["motion"].as_f64().unwrap_or(f64::INFINITY);
            let two_log = b["two_log_size"].as_f64().unwrap_or(f64::NAN);
            ensure!(
                b["hypothesis_holds"] == Value::Bool(true) && motion > two_log,
                "m = {}, class {}: motion {motion} vs 2 log size {two_log}",
                it["m"],
                b["class"]
            );
            bounds_checked += 1;
        }
    }
    ensure!(best_classes >= 2, "at most {best_classes} nonempty class in any window");
    let g = ok(generate(&FamilySpec::Synthetic(SyntheticDescription::threads(7, 130)), 130))?;
    let all = ok(automorphisms(&g))?;
    let nontrivial: Vec<usize> = (0..all.len()).filter(|&i| !all.elements()[i].is_identity()).collect();
    let preserved = verify_breaks(&coloring, &all);
    ensure!(preserved.iter().all(|i| !nontrivial.contains(i)), "some nontrivial element survives");
    ensure!(indices(&r["verification"]["survivors"]).is_empty(), "report lists survivors");
    Ok(format!(
        "|A| = {order}, up to {best_classes} nonempty classes per window, {bounds_checked} class bounds hold, survivors []"
    ))
}

fn c11_ends(dir: &Path, runs: &mut Vec<CliRun>) -> Check {
    let mut parts = Vec::new();
    for (name, spec, radius) in [
        ("line", FamilySpec::Line, 30),
        ("ladder", FamilySpec::TwoWayLadder, 30),
        ("line", FamilySpec::Line, 40),
        ("ladder", FamilySpec::TwoWayLadder, 40),
    ] {
        let tag = format!("ends-{name}-{radius}");
        let args = argv(&format!("ends --family {name} --radius {radius} --epsilon 0.5 --seed 2024"));
        let run = run_cli(&args, dir, &tag)?;
        let (report, coloring) = load(&run)?;
        runs.push(run);
        let r = &report["report"];
        let g = ok(generate(&spec, radius))?;
        let all = ok(automorphisms(&g))?;
        let r_i = radius as i64;
        let pairs: Vec<(VertexId, VertexId)> = match spec {
            FamilySpec::Line => (-r_i..=r_i).map(|z| (line_id(z), line_id(-z))).collect(),
            _ => (-r_i..=r_i).flat_map(|z| [0u8, 1].map(|s| (ladder_id(z, s), ladder_id(-z, s)))).collect(),
        };
        let reflection: BTreeMap<VertexId, VertexId> =
            pairs.into_iter().filter(|(v, _)| g.index_of(*v).is_some()).collect();
        let reflection = ok(Permutation::from_map(&reflection))?;
        let idx = all.elements().iter().position(|p| *p == reflection).ok_or(format!("{tag}: reflection missing"))?;
        let movers = indices(&r["end_movers"]);
        ensure!(movers.contains(&idx), "{tag}: reflection {idx} not among end movers {movers:?}");
        let mut phase1: BTreeSet<usize> = indices(&r["fixroot"]["colored_spheres"]).into_iter().collect();
        phase1.extend(
            r["tree"]["levels"].as_array().into_iter().flatten().filter_map(|x| x.as_u64()).map(|x| x as usize),
        );
        let keep: HashSet<VertexId> = phase1.iter().flat_map(|&n| g.spheres()[n].iter().copied()).collect();
        ensure!(
            !preserves_partial(&reflection, &restrict(&coloring, &keep)),
            "{tag}: phase 1 coloring keeps the reflection"
        );
        let survivors = indices(&r["verification"]["survivors"]);
        ensure!(survivors.is_empty(), "{tag}: survivors {survivors:?}");
        let m_final = r["verification"]["m_final"].as_u64().unwrap_or(0) as usize;
        let fresh = ends_survivors(&g, &all, &coloring, &movers, m_final);
        ensure!(fresh == survivors, "{tag}: reloaded coloring gives survivors {fresh:?}");
        parts.push(format!("{name} r={radius} ok"));
    }
    Ok(format!("{}; reflection broken on the level spheres", parts.join(", ")))
}

fn c12_determinism(dir: &Path, runs: &[CliRun]) -> Check {
    ensure!(!runs.is_empty(), "no runs from criteria 9-11 to repeat");
    for (i, first) in runs.iter().enumerate() {
        let again = run_cli(&first.args, dir, &format!("rerun-{i}"))?;
        for (a, b) in [(&first.report, &again.report), (&first.coloring, &again.coloring)] {
            let (x, y) = (ok(std::fs::read(a))?, ok(std::fs::read(b))?);
            ensure!(x == y, "`{}`: {} and {} differ", first.args.join(" "), a.display(), b.display());
        }
    }
    Ok(format!("{} runs repeated, reports and colorings byte-identical", runs.len()))
}

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    std::fs::create_dir_all(&first).unwrap();
    std::fs::create_dir_all(&second).unwrap();
    let mut runs = Vec::new();

    let secs = |s| Some(Duration::from_secs(s));
    let mut results: Vec<(usize, &str, Option<Duration>, Duration, Check)> = Vec::new();
    let mut record = |n: usize, name: &'static str, limit: Option<Duration>, f: &mut dyn FnMut() -> Check| {
        let start = Instant::now();
        let out = f();
        let elapsed = start.elapsed();
        let (pass, detail) = match &out {
            Ok(d) => (limit.is_none_or(|l| elapsed <= l), d.clone()),
            Err(d) => (false, d.clone()),
        };
        let limit_text = limit.map_or("none".to_string(), |l| format!("{} s", l.as_secs()));
        println!(
            "criterion {n:>2} {:<4} {name} [{:.2} s, limit {limit_text}] {detail}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
        results.push((n, name, limit, elapsed, if pass { Ok(detail) } else { Err(detail) }));
    };

    record(1, "cycle-count formula", secs(10), &mut c1_cycle_count);
    record(2, "double counting", secs(30), &mut c2_double_counting);
    record(3, "motion bound implies a breaking coloring", secs(120), &mut c3_motion_bound);
    record(4, "randomized single-try failure rate", None, &mut c4_randomized_failure_rate);
    record(5, "window length", secs(10), &mut c5_choose_k);
    record(6, "block arithmetic", secs(1), &mut c6_block_arithmetic);
    record(7, "sphere propagation checks", secs(60), &mut c7_sphere_action);
    record(8, "boundary components and disjoint rays", secs(60), &mut c8_rays);
    record(9, "grid pipeline", secs(60), &mut || c9_grid_pipeline(&first, &mut runs));
    record(10, "synthetic pipeline", secs(300), &mut || c10_synthetic_pipeline(&first, &mut runs));
    record(11, "ends pipeline", secs(60), &mut || c11_ends(&first, &mut runs));
    record(12, "determinism", None, &mut || c12_determinism(&second, &runs));

    let failed: Vec<usize> = results.iter().filter(|r| r.4.is_err()).map(|r| r.0).collect();
    println!("acceptance: {} passed, {} failed", results.len() - failed.len(), failed.len());
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
