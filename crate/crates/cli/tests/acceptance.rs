//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

#[path = "../../core/tests/support/oracle.rs"]
mod oracle;

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use gendiv::config::default_lambda_grid;
use gendiv::experiment::{run_single, run_variants, AGGREGATE_HEADER, RAW_HEADER};
use gendiv::{grid_search, run_experiment, RunConfig, Variant};
use gendiv_core::{
    DiversityMetric, Engine, EngineConfig, GenealogyGraph, NodeId, OpKind, RoutingProblem,
    TrashVector,
};
use oracle::{random_dag, spearman, Oracle};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

const TAU: usize = 32;
const DIVERSITY: [DiversityMetric; 3] = [
    DiversityMetric::Domain,
    DiversityMetric::GenealogicalTree,
    DiversityMetric::TrashBits,
];

fn within(elapsed: Duration, limit: Duration, detail: String) -> Outcome {
    if elapsed < limit {
        Ok(format!("{detail}, {elapsed:.2?}"))
    } else {
        Err(format!("{detail}, took {elapsed:.2?} (limit {limit:?})"))
    }
}

fn c1_random_pairs() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let t = Instant::now();
    let n = 10_000;
    let mut sum = 0.0;
    for _ in 0..n {
        let a = TrashVector::random(TAU, &mut rng).map_err(|e| e.to_string())?;
        let b = TrashVector::random(TAU, &mut rng).map_err(|e| e.to_string())?;
        sum += a.tdist(&b).map_err(|e| e.to_string())?;
    }
    let elapsed = t.elapsed();
    let mean = sum / n as f64;
    if !(0.49..=0.51).contains(&mean) {
        return Err(format!("mean tdist {mean:.4} outside [0.49, 0.51]"));
    }
    within(
        elapsed,
        Duration::from_secs(1),
        format!("mean tdist {mean:.4}"),
    )
}

fn c2_mutation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut failures = 0;
    for _ in 0..1000 {
        let v = TrashVector::random(TAU, &mut rng).map_err(|e| e.to_string())?;
        let w = v.flip_one_bit(&mut rng);
        if v.tdist(&w).map_err(|e| e.to_string())? != 1.0 / 32.0 {
            failures += 1;
        }
    }
    if failures == 0 {
        Ok("1000 trials, all exactly 1/32".into())
    } else {
        Err(format!("{failures} of 1000 trials differ from 1/32"))
    }
}

fn c3_recombination() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let t = Instant::now();
    let n = 10_000;
    let mut sum = 0.0;
    for _ in 0..n {
        let a = TrashVector::random(TAU, &mut rng).map_err(|e| e.to_string())?;
        let b = TrashVector::random(TAU, &mut rng).map_err(|e| e.to_string())?;
        let child = a.uniform_cross(&b, &mut rng).map_err(|e| e.to_string())?;
        sum += child.tdist(&a).map_err(|e| e.to_string())?;
    }
    let elapsed = t.elapsed();
    let mean = sum / n as f64;
    if !(0.24..=0.26).contains(&mean) {
        return Err(format!(
            "mean tdist(child, parent) {mean:.4} outside [0.24, 0.26]"
        ));
    }
    within(
        elapsed,
        Duration::from_secs(1),
        format!("mean tdist(child, parent) {mean:.4}"),
    )
}

/// The 1000 random genealogies shared by criteria 4 and 5.
fn dags() -> Vec<GenealogyGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    (0..1000)
        .map(|_| {
            let n = rng.random_range(1..=100);
            random_dag(n, &mut rng)
        })
        .collect()
}

/// All pairs for small graphs, a random subset for larger ones.
fn query_pairs<R: Rng>(n: usize, rng: &mut R) -> Vec<(NodeId, NodeId)> {
    let id = |i: usize| NodeId::new(i as u32);
    if n <= 40 {
        (0..n)
            .flat_map(|a| (0..n).map(move |b| (id(a), id(b))))
            .collect()
    } else {
        (0..400)
            .map(|_| (id(rng.random_range(0..n)), id(rng.random_range(0..n))))
            .collect()
    }
}

fn c4_oracle(dags: &[GenealogyGraph]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let t = Instant::now();
    let mut mismatches = 0u64;
    let mut checks = 0u64;
    let mut first = None;
    let mut check = |ok: bool, what: &dyn Fn() -> String| {
        checks += 1;
        if !ok {
            mismatches += 1;
            first.get_or_insert_with(what);
        }
    };
    for (k, g) in dags.iter().enumerate() {
        let o = Oracle::new(g);
        for x in g.node_ids() {
            let got = g.earliest_ancestor(x).map_err(|e| e.to_string())?;
            check(got == o.earliest(x).0, &|| {
                format!("dag {k}: earliest_ancestor({x})")
            });
        }
        for (a, b) in query_pairs(g.len(), &mut rng) {
            let adist = g.adist(a, b).map_err(|e| e.to_string())?;
            check(adist == o.adist(a, b), &|| {
                format!("dag {k}: adist({a}, {b})")
            });
            let lca = g.latest_common_ancestor(a, b).map_err(|e| e.to_string())?;
            check(lca == o.lca(a, b).map(|p| p.0), &|| {
                format!("dag {k}: lca({a}, {b})")
            });
            let edist = g.edist_oracle(a, b).map_err(|e| e.to_string())?;
            check(edist == o.edist(a, b), &|| {
                format!("dag {k}: edist({a}, {b})")
            });
        }
    }
    let elapsed = t.elapsed();
    if mismatches > 0 {
        return Err(format!(
            "{mismatches} of {checks} queries differ, first: {}",
            first.unwrap()
        ));
    }
    within(
        elapsed,
        Duration::from_secs(30),
        format!("{checks} queries, 0 mismatches"),
    )
}

fn c5_gdist(dags: &[GenealogyGraph]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let mut violations = Vec::new();
    let mut pairs = 0u64;
    for (k, g) in dags.iter().enumerate() {
        let o = Oracle::new(g);
        for (a, b) in query_pairs(g.len(), &mut rng) {
            pairs += 1;
            let ab = g.gdist(a, b).map_err(|e| e.to_string())?;
            let ba = g.gdist(b, a).map_err(|e| e.to_string())?;
            if ab != ba {
                violations.push(format!("dag {k}: gdist({a}, {b}) not symmetric"));
            }
            if !(0.0..=1.0).contains(&ab) {
                violations.push(format!("dag {k}: gdist({a}, {b}) = {ab} out of range"));
            }
            if a == b && ab != 0.0 {
                violations.push(format!("dag {k}: gdist({a}, {a}) = {ab}"));
            }
            if a != b && o.lca(a, b).is_none() && ab != 1.0 {
                violations.push(format!("dag {k}: disjoint gdist({a}, {b}) = {ab}"));
            }
        }
    }

    // Two children of one genesis node, and a parent with its child.
    let mut g = GenealogyGraph::new();
    let root = g
        .record_birth(&[], OpKind::Genesis, 0)
        .map_err(|e| e.to_string())?;
    let s1 = g
        .record_birth(&[root], OpKind::Mutation, 1)
        .map_err(|e| e.to_string())?;
    let s2 = g
        .record_birth(&[root], OpKind::Mutation, 1)
        .map_err(|e| e.to_string())?;
    let c = g
        .record_birth(&[s1], OpKind::Mutation, 2)
        .map_err(|e| e.to_string())?;
    let sibling = g.gdist(s1, s2).map_err(|e| e.to_string())?;
    let chain = g.gdist(s1, c).map_err(|e| e.to_string())?;
    if sibling != 1.0 {
        violations.push(format!("sibling fixture gdist = {sibling}, expected 1.0"));
    }
    if chain != 0.0 {
        violations.push(format!("chain fixture gdist = {chain}, expected 0.0"));
    }

    match violations.first() {
        None => Ok(format!("{pairs} pairs plus fixtures, 0 violations")),
        Some(v) => Err(format!("{} violations, first: {v}", violations.len())),
    }
}

fn c6_correlation() -> Outcome {
    let config = EngineConfig {
        generations: 50,
        ..EngineConfig::default()
    };
    let mut positive = 0;
    let mut rhos = Vec::new();
    for seed in 0..10u64 {
        let mut engine = Engine::new(config.clone(), RoutingProblem::default(), seed)
            .map_err(|e| e.to_string())?;
        engine.run().map_err(|e| e.to_string())?;
        let g = engine.into_graph();
        let n = g.len() as u32;
        let mut rng = ChaCha8Rng::seed_from_u64(600 + seed);
        let (mut gd, mut ed) = (Vec::new(), Vec::new());
        let mut attempts = 0;
        while gd.len() < 500 {
            attempts += 1;
            if attempts > 1_000_000 {
                return Err(format!(
                    "seed {seed}: too few pairs with finite edit distance"
                ));
            }
            let a = NodeId::new(rng.random_range(0..n));
            let b = NodeId::new(rng.random_range(0..n));
            if a == b {
                continue;
            }
            if let Some(e) = g.edist_oracle(a, b).map_err(|e| e.to_string())? {
                gd.push(g.gdist(a, b).map_err(|e| e.to_string())?);
                ed.push(e as f64);
            }
        }
        let rho = spearman(&gd, &ed);
        if rho > 0.0 {
            positive += 1;
        }
        rhos.push(format!("{rho:.2}"));
    }
    let detail = format!("{positive}/10 runs positive, rho = [{}]", rhos.join(", "));
    if positive >= 9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c7_harness() -> Outcome {
    let config = RunConfig::default();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (first, second) = (dir.path().join("a"), dir.path().join("b"));

    let t = Instant::now();
    let out = run_experiment(&config, &first).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    if elapsed >= Duration::from_secs(300) {
        return Err(format!("took {elapsed:.2?} (limit 300s)"));
    }

    let generations = config.engine.generations as usize;
    let seeds: Vec<u64> = config.seeds().collect();
    for (path, variant) in out.raw.iter().zip(&config.variants) {
        check_raw(path, variant, &seeds, generations)?;
    }
    check_aggregate(&out.aggregate, &config.variants, generations)?;

    run_experiment(&config, &second).map_err(|e| e.to_string())?;
    let mut files = 0;
    for entry in fs::read_dir(&first).map_err(|e| e.to_string())? {
        let name = entry.map_err(|e| e.to_string())?.file_name();
        let a = fs::read(first.join(&name)).map_err(|e| e.to_string())?;
        let b = fs::read(second.join(&name)).map_err(|e| e.to_string())?;
        if a != b {
            return Err(format!("{} differs between reruns", name.to_string_lossy()));
        }
        files += 1;
    }
    if files != config.variants.len() + 1 {
        return Err(format!(
            "expected {} files, found {files}",
            config.variants.len() + 1
        ));
    }
    Ok(format!(
        "{files} files, schema ok, rerun byte-identical, first run {elapsed:.2?}"
    ))
}

fn read_csv(path: &Path, header: &[&str]) -> Result<Vec<csv::StringRecord>, String> {
    let name = path.display();
    let mut r = csv::Reader::from_path(path).map_err(|e| format!("{name}: {e}"))?;
    let got = r.headers().map_err(|e| format!("{name}: {e}"))?.clone();
    if got.iter().ne(header.iter().copied()) {
        return Err(format!("{name}: header {got:?}"));
    }
    r.records()
        .collect::<Result<_, _>>()
        .map_err(|e| format!("{name}: {e}"))
}

fn real(field: &str, path: &Path) -> Result<f64, String> {
    let v: f64 = field
        .parse()
        .map_err(|_| format!("{}: `{field}` is not a number", path.display()))?;
    let decimals = field.split('.').nth(1).map_or(0, str::len);
    if !v.is_finite() || decimals != 6 {
        return Err(format!(
            "{}: `{field}` is not a 6-decimal real",
            path.display()
        ));
    }
    Ok(v)
}

fn check_raw(
    path: &Path,
    variant: &Variant,
    seeds: &[u64],
    generations: usize,
) -> Result<(), String> {
    let rows = read_csv(path, &RAW_HEADER)?;
    if rows.len() != seeds.len() * generations {
        return Err(format!("{}: {} rows", path.display(), rows.len()));
    }
    for (i, row) in rows.iter().enumerate() {
        let expected_seed = seeds[i / generations].to_string();
        let expected_gen = (i % generations + 1).to_string();
        if row[0] != *variant.name || row[1] != *expected_seed || row[2] != *expected_gen {
            return Err(format!("{}: row {} keyed {:?}", path.display(), i + 1, row));
        }
        let mean = real(&row[3], path)?;
        let best = real(&row[4], path)?;
        let div = real(&row[5], path)?;
        if mean > best || !(0.0..=1.0).contains(&div) {
            return Err(format!(
                "{}: row {} values {:?}",
                path.display(),
                i + 1,
                row
            ));
        }
    }
    Ok(())
}

fn check_aggregate(path: &Path, variants: &[Variant], generations: usize) -> Result<(), String> {
    let rows = read_csv(path, &AGGREGATE_HEADER)?;
    if rows.len() != variants.len() * generations {
        return Err(format!("{}: {} rows", path.display(), rows.len()));
    }
    let mut names = BTreeSet::new();
    for (i, row) in rows.iter().enumerate() {
        let v = &variants[i / generations];
        if row[0] != *v.name || row[1] != *(i % generations + 1).to_string() {
            return Err(format!("{}: row {} keyed {:?}", path.display(), i + 1, row));
        }
        real(&row[2], path)?;
        if real(&row[3], path)? < 0.0 {
            return Err(format!("{}: negative std on row {}", path.display(), i + 1));
        }
        names.insert(row[0].to_string());
    }
    if names.len() != variants.len() {
        return Err(format!("{}: variants {names:?}", path.display()));
    }
    Ok(())
}

fn c8_variants_vs_baseline() -> Outcome {
    let config = RunConfig::default();
    let baseline = run_variants(
        &config,
        &[Variant::new("baseline", DiversityMetric::None, 0.0)],
    )
    .map_err(|e| e.to_string())?[0]
        .mean_final_fitness();
    let mut parts = vec![format!("baseline {baseline:.3}")];
    let mut any_above = false;
    let mut all_close = true;
    for metric in DIVERSITY {
        let report = grid_search(&config, metric, &default_lambda_grid(metric))
            .map_err(|e| e.to_string())?;
        let best = report
            .rows
            .iter()
            .find(|r| r.lambda == report.best_lambda)
            .map(|r| r.mean_final_fitness)
            .ok_or("best λ missing from grid rows")?;
        any_above |= best > baseline;
        all_close &= best >= baseline - 0.5;
        parts.push(format!("{metric} {best:.3} (λ={})", report.best_lambda));
    }
    let detail = parts.join(", ");
    if any_above && all_close {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c9_lambda_zero() -> Outcome {
    let config = RunConfig::default();
    let mut compared = 0;
    for seed in config.seeds() {
        let base =
            run_single(&config, DiversityMetric::None, 0.0, seed).map_err(|e| e.to_string())?;
        for metric in DIVERSITY {
            let trace = run_single(&config, metric, 0.0, seed).map_err(|e| e.to_string())?;
            if trace != base {
                return Err(format!(
                    "{metric} with λ=0 diverges from baseline at seed {seed}"
                ));
            }
            compared += 1;
        }
    }
    Ok(format!("{compared} traces identical to baseline"))
}

fn main() -> ExitCode {
    let dags = dags();
    let criteria: Vec<Criterion> = vec![
        ("random-pair trash distance", Box::new(c1_random_pairs)),
        ("mutation trash distance", Box::new(c2_mutation)),
        (
            "recombination parent-child trash distance",
            Box::new(c3_recombination),
        ),
        (
            "genealogy oracle equivalence",
            Box::new(|| c4_oracle(&dags)),
        ),
        ("gdist properties", Box::new(|| c5_gdist(&dags))),
        ("gdist/edist rank correlation", Box::new(c6_correlation)),
        ("experiment harness", Box::new(c7_harness)),
        ("diversity variants vs baseline", Box::new(c8_variants_vs_baseline)),
        ("lambda=0 reduction", Box::new(c9_lambda_zero)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("[PASS] C{} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] C{} {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
