//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Time limits are pinned below and count toward the verdict.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_integer::Integer;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use cpsum::cli::doc::{emit_tree, parse_tree};
use cpsum::modular::{matrix_power, Generator, Modulus, Rotation, WeightMatrix};
use cpsum::models::{LinearModel, ModelKind};
use cpsum::realize::{
    enumerate_trees, maximal_elements, necessary_conditions, realize_stable, search_module, ModuleSpec, Rejection,
    SearchBudget, SearchOutcome, Verdict,
};
use cpsum::singular::{permutation_module, singular_profile, ComponentKind, PermutationModule};
use cpsum::tree::{canonical_encode, validate_tree, EquivariantTree, TreeEdge, TreeNode, TreeType};

const SEED: u64 = 0x5eed_c105;

const LIMIT_1: Duration = Duration::from_secs(1);
const LIMIT_2: Duration = Duration::from_secs(1);
const LIMIT_3: Duration = Duration::from_secs(5);
const LIMIT_4: Duration = Duration::from_secs(600);
const LIMIT_5: Duration = Duration::from_secs(1);
const LIMIT_6: Duration = Duration::from_secs(600);
const LIMIT_7: Duration = Duration::from_secs(600);
const LIMIT_8: Duration = Duration::from_secs(60);
const LIMIT_9: Duration = Duration::from_secs(1);
const LIMIT_10: Duration = Duration::from_secs(600);

const MAX_POWER: u64 = 40;
const RANDOM_MODELS: usize = 1000;
const MAX_RANDOM_MODULUS: u64 = 1001;
const RANDOM_SPECS: usize = 50;
const ENUMERATION_MODULI: [u64; 3] = [9, 15, 27];
const ENUMERATION_RANK: u64 = 6;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn m(x: u64) -> Modulus {
    Modulus::new(x).unwrap()
}

fn criterion_1() -> Check {
    let model = LinearModel::cp2(10, 3, 105).map_err(|e| e.to_string())?;
    let types = model.orbit_type_count();
    ensure(types == 5, || format!("{types} orbit types"))?;
    let orders: BTreeSet<u64> = model.spheres().iter().map(|s| s.order).collect();
    ensure(orders == BTreeSet::from([3, 5, 7]), || format!("sphere orders {orders:?}"))?;
    let expected = [(10, 3), (-10, -7), (-3, 7)].map(|(a, b)| Rotation::new(a, b, m(105)));
    let got: Vec<Rotation> = model.fixed_points().iter().map(|p| p.rotation).collect();
    for e in &expected {
        let hits = got.iter().filter(|g| g.equivalent(e)).count();
        ensure(hits == 1, || format!("rotation {e} matched {hits} fixed points of {got:?}"))?;
    }
    Ok("5 orbit types, spheres {3,5,7}, rotations (10,3) (-10,-7) (-3,7)".into())
}

/// Plain 2x2 product in i128, independent of the library's matrix type.
fn mul(x: [[i128; 2]; 2], y: [[i128; 2]; 2]) -> [[i128; 2]; 2] {
    let mut z = [[0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            z[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
        }
    }
    z
}

fn widen(w: &WeightMatrix) -> [[i128; 2]; 2] {
    w.entries.map(|r| r.map(i128::from))
}

fn criterion_2() -> Check {
    let mut fib = vec![0i128, 1];
    while fib.len() < MAX_POWER as usize + 2 {
        fib.push(fib[fib.len() - 1] + fib[fib.len() - 2]);
    }
    for gen in [Generator::L, Generator::R] {
        let base = widen(&gen.matrix());
        let mut iter = [[1, 0], [0, 1]];
        for k in 0..=MAX_POWER {
            let closed = widen(&matrix_power(gen, k).map_err(|e| e.to_string())?);
            ensure(closed == iter, || format!("{gen:?}^{k}: closed form {closed:?}, product {iter:?}"))?;
            let ki = k as i128;
            let printed = match gen {
                Generator::L => {
                    let s = if k % 2 == 0 { 1 } else { -1 };
                    [[s, 0], [-s * ki, s]]
                }
                _ => {
                    let f = |j: i128| if j < 0 { 1 } else { fib[j as usize] };
                    [[f(ki - 1), -f(ki)], [-f(ki), f(ki + 1)]]
                }
            };
            ensure(closed == printed, || format!("{gen:?}^{k}: {closed:?} differs from the printed formula"))?;
            iter = mul(iter, base);
        }
    }
    Ok(format!("L^k and R^k for 0 <= k <= {MAX_POWER}"))
}

fn criterion_3() -> Check {
    let mut rng = StdRng::seed_from_u64(SEED);
    let mut checked = 0;
    while checked < RANDOM_MODELS {
        let n = 2 * rng.gen_range(1..=MAX_RANDOM_MODULUS / 2) + 1;
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a.gcd(&b).gcd(&n) != 1 {
            continue;
        }
        let model = LinearModel::cp2(a as i64, b as i64, n).map_err(|e| e.to_string())?;
        let orders: Vec<u64> = model.spheres().iter().map(|s| s.order).collect();
        // recomputed from the coordinates: the lines through pairs of points
        let direct = [(a + n - b) % n, b, a].map(|x| x.gcd(&n));
        ensure(orders == direct, || format!("({a},{b};{n}): orders {orders:?}, expected {direct:?}"))?;
        for i in 0..3 {
            for j in i + 1..3 {
                ensure(orders[i].gcd(&orders[j]) == 1, || format!("({a},{b};{n}): orders {orders:?}"))?;
            }
        }
        checked += 1;
    }
    Ok(format!("{checked} random models, odd m <= {MAX_RANDOM_MODULUS}"))
}

fn enumerated() -> Result<Vec<EquivariantTree>, String> {
    let mut all = Vec::new();
    for &x in &ENUMERATION_MODULI {
        let e = enumerate_trees(m(x), SearchBudget { n_max: ENUMERATION_RANK, node_cap: u64::MAX });
        ensure(e.complete, || format!("enumeration over C{x} incomplete"))?;
        all.extend(e.trees);
    }
    Ok(all)
}

/// `2 + sum over summands fixed by C_d of k * m/e`.
fn trace_formula(module: &PermutationModule, d: u64) -> i64 {
    let total = module.modulus().get();
    2 + module.entries().iter().filter(|(e, _)| e % d == 0).map(|(e, k)| (k * (total / e)) as i64).sum::<i64>()
}

fn criterion_4(trees: &[EquivariantTree]) -> Check {
    let mut rows = 0;
    for t in trees {
        let v = validate_tree(t).map_err(|e| format!("{e:?}"))?;
        let module = permutation_module(&v);
        let profile = singular_profile(&v);
        let divisors = v.m().nontrivial_divisors();
        ensure(profile.subgroups.iter().map(|s| s.d).eq(divisors.iter().copied()), || "divisors missing".into())?;
        for s in &profile.subgroups {
            let expected = trace_formula(&module, s.d);
            ensure(s.euler() == expected, || {
                format!("d = {}: chi = {}, trace = {expected} on {}", s.d, s.euler(), String::from_utf8_lossy(&canonical_encode(&v)))
            })?;
            rows += 1;
        }
    }
    Ok(format!("{} trees over C9, C15, C27 of rank <= {ENUMERATION_RANK}, {rows} subgroup rows", trees.len()))
}

fn criterion_5() -> Check {
    let bad = ModuleSpec::new(m(105), [(7, 1), (5, 1), (3, 1)]).map_err(|e| e.to_string())?;
    let verdict = necessary_conditions(&bad);
    ensure(matches!(verdict, Verdict::Reject(Rejection::TooManyMaximal { .. })), || format!("{verdict:?}"))?;
    let good = ModuleSpec::new(m(105), [(105, 1), (7, 1), (5, 1), (3, 1)]).map_err(|e| e.to_string())?;
    let t = realize_stable(&good).map_err(|e| e.to_string())?;
    let v = validate_tree(&t).map_err(|e| format!("{e:?}"))?;
    ensure(permutation_module(&v) == good, || format!("module {}", permutation_module(&v)))?;
    ensure(v.rank() == 72, || format!("rank {}", v.rank()))?;
    let root = v.model(v.root()).rotation();
    ensure(root.equivalent(&Rotation::new(10, 3, m(105))), || format!("root {root}"))?;
    Ok(format!("rejected {bad}; realized {good} with n = 72, root {root}"))
}

fn criterion_6() -> Check {
    let spec = ModuleSpec::new(m(27), [(9, 1), (3, 1)]).map_err(|e| e.to_string())?;
    ensure(spec.rank() == 12, || format!("rank {}", spec.rank()))?;
    match search_module(&spec, SearchBudget { n_max: spec.rank(), node_cap: u64::MAX }) {
        Ok(SearchOutcome::NoneWithin { explored }) => {
            Ok(format!("{spec} over C27: complete search at rank 12, none found ({explored} assignments)"))
        }
        Ok(SearchOutcome::Found(t)) => Err(format!("found {:?}", t)),
        Ok(SearchOutcome::Excluded(r)) => Err(format!("excluded by {r}, not searched")),
        Err(e) => Err(e.to_string()),
    }
}

fn criterion_7(trees: &[EquivariantTree]) -> Check {
    let mut discrete = 0;
    for t in trees {
        let v = validate_tree(t).map_err(|e| format!("{e:?}"))?;
        let profile = singular_profile(&v);
        if profile.has_spheres() {
            continue;
        }
        discrete += 1;
        let full = v.m().get();
        for s in &profile.subgroups {
            for c in &s.components {
                ensure(c.kind == ComponentKind::Point && c.isotropy == full, || {
                    format!("isotropy {} on {}", c.isotropy, String::from_utf8_lossy(&canonical_encode(&v)))
                })?;
            }
        }
    }
    Ok(format!("{discrete} trees with discrete singular set, all semi-free"))
}

fn random_spec(rng: &mut StdRng) -> ModuleSpec {
    loop {
        let total = *[15u64, 45, 105].choose(rng).unwrap();
        let proper: Vec<u64> = Modulus::new(total).unwrap().divisors().into_iter().filter(|&d| d > 1 && d < total).collect();
        let chosen: Vec<u64> = proper.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        let n = chosen.iter().copied().max().unwrap_or(1);
        let with_fixed = rng.gen_bool(0.5);
        let top = maximal_elements(&chosen);
        let mut entries: Vec<(u64, u64)> = chosen
            .iter()
            .map(|&d| (d, if !with_fixed && top.contains(&d) { n + rng.gen_range(1..=3) } else { rng.gen_range(1..=3) }))
            .collect();
        if with_fixed {
            entries.push((total, n + rng.gen_range(1..=3)));
        }
        if rng.gen_bool(0.3) {
            entries.push((1, rng.gen_range(1..=3)));
        }
        let Ok(spec) = ModuleSpec::new(m(total), entries) else { continue };
        if !spec.is_empty() && necessary_conditions(&spec) == Verdict::Accept {
            return spec;
        }
    }
}

fn criterion_8() -> Check {
    let mut rng = StdRng::seed_from_u64(SEED ^ 8);
    let mut kinds = [0; 2];
    for _ in 0..RANDOM_SPECS {
        let spec = random_spec(&mut rng);
        let t = realize_stable(&spec).map_err(|e| format!("{spec} over C{}: {e}", spec.modulus()))?;
        let v = validate_tree(&t).map_err(|e| format!("{spec}: {e:?}"))?;
        let got = permutation_module(&v);
        ensure(got == spec, || format!("{spec} realized as {got}"))?;
        kinds[(t.tree_type == TreeType::II) as usize] += 1;
    }
    Ok(format!("{RANDOM_SPECS} random specs over C15, C45, C105 ({} type I, {} type II)", kinds[0], kinds[1]))
}

fn criterion_9() -> Check {
    let node = |id, stab, a| TreeNode { id, kind: ModelKind::Cp2, stab, weight: (a, 0) };
    let edge = |child, parent_site: &str| TreeEdge {
        parent: 0,
        child,
        parent_site: parent_site.parse().unwrap(),
        child_site: "S2".parse().unwrap(),
    };
    let star = EquivariantTree {
        m: 105,
        tree_type: TreeType::I,
        nodes: vec![TreeNode { id: 0, kind: ModelKind::Cp2, stab: 105, weight: (10, 3) }, node(1, 7, 3), node(2, 5, 2), node(3, 3, 1)],
        edges: vec![edge(1, "S1"), edge(2, "S3"), edge(3, "S2")],
    };
    let v = validate_tree(&star).map_err(|e| format!("{e:?}"))?;
    let profile = singular_profile(&v);
    let d7 = profile.get(7).ok_or("no d = 7 row")?;
    let (points, spheres, chi) = (d7.points(), d7.spheres(), d7.euler());
    ensure((points, spheres, chi) == (16, 1, 18), || format!("{points} points, {spheres} spheres, chi {chi}"))?;
    // Z from the root, 105/7 = 15 cosets from the order-7 branch
    let trace = 2 + 1 + 15;
    ensure(trace_formula(&permutation_module(&v), 7) == trace, || "trace".into())?;
    Ok("d = 7: 16 points + 1 sphere, chi = 18 = 2 + 1 + 15".into())
}

fn criterion_10(trees: &[EquivariantTree]) -> Check {
    for t in trees {
        let code = canonical_encode(&validate_tree(t).map_err(|e| format!("{e:?}"))?);
        let back = parse_tree(&emit_tree(t)).map_err(|e| e.to_string())?;
        let again = canonical_encode(&validate_tree(&back).map_err(|e| format!("{e:?}"))?);
        ensure(code == again, || format!("encoding changed: {}", String::from_utf8_lossy(&code)))?;
    }
    Ok(format!("{} enumerated trees", trees.len()))
}

fn run(n: usize, limit: Duration, f: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
    let took = start.elapsed();
    let (ok, detail) = match result {
        Ok(d) if took <= limit => (true, d),
        Ok(d) => (false, format!("{d}; over the time limit")),
        Err(e) => (false, e),
    };
    println!(
        "criterion {n:>2}: {}  {detail}  [{:.3}s, limit {}s]",
        if ok { "PASS" } else { "FAIL" },
        took.as_secs_f64(),
        limit.as_secs()
    );
    ok
}

fn main() {
    let mut ok = true;
    ok &= run(1, LIMIT_1, criterion_1);
    ok &= run(2, LIMIT_2, criterion_2);
    ok &= run(3, LIMIT_3, criterion_3);

    // criteria 4, 7 and 10 share one enumeration; its time is charged to 4
    let start = Instant::now();
    let trees = enumerated();
    let enum_time = start.elapsed();
    let trees = match trees {
        Ok(t) => t,
        Err(e) => {
            for n in [4, 7, 10] {
                println!("criterion {n:>2}: FAIL  {e}");
            }
            std::process::exit(1);
        }
    };
    ok &= run(4, LIMIT_4.saturating_sub(enum_time), || {
        criterion_4(&trees).map(|d| format!("{d}; enumeration {:.3}s", enum_time.as_secs_f64()))
    });
    ok &= run(5, LIMIT_5, criterion_5);
    ok &= run(6, LIMIT_6, criterion_6);
    ok &= run(7, LIMIT_7, || criterion_7(&trees));
    ok &= run(8, LIMIT_8, criterion_8);
    ok &= run(9, LIMIT_9, criterion_9);
    ok &= run(10, LIMIT_10, || criterion_10(&trees));
    if !ok {
        std::process::exit(1);
    }
}
