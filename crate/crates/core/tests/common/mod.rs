#![allow(dead_code)]

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use adaquery::adapter::mock::{BugEffect, BugInjection, MockSpec, Typing};
use adaquery::adapter::Adapter;
use adaquery::feature::{ids, Catalog, FeatureId};
use adaquery::generator::{GenError, Generator};
use adaquery::schema::SchemaModel;
use adaquery::sql::StatementKind;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Features every oracle check needs; the benchmark never removes them.
const ESSENTIAL: [&str; 9] = [
    ids::CREATE_TABLE,
    ids::INSERT,
    ids::SELECT,
    ids::WHERE,
    ids::INTEGER,
    ids::NOT,
    ids::IS_NULL,
    ids::IS_TRUE,
    ids::IMPLICIT_CAST,
];

/// The standard learning benchmark: a dynamically typed mock lacking 30 of
/// the 100 base features, drawn by `seed` from the non-essential ones.
pub fn benchmark_spec(catalog: &Catalog, seed: u64) -> MockSpec {
    assert_eq!(catalog.base_len(), 100);
    let mut pool: Vec<usize> = (0..catalog.base_len())
        .filter(|&i| !ESSENTIAL.contains(&catalog.id(i).as_str()))
        .collect();
    pool.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut spec = MockSpec::full(catalog);
    for &i in &pool[..30] {
        spec.supported.remove(catalog.id(i));
    }
    spec.typing = Typing::Dynamic;
    spec
}

pub fn bug(catalog: &Catalog, trigger: &[&str], effect: BugEffect, target: &str) -> BugInjection {
    BugInjection {
        trigger: trigger
            .iter()
            .map(|t| catalog.feature(t).unwrap())
            .collect(),
        effect,
        target: catalog.feature(target).unwrap(),
    }
}

/// Three bugs with pairwise distinct trigger sets.
pub fn three_bugs(catalog: &Catalog) -> Vec<BugInjection> {
    vec![
        bug(catalog, &["NULLIF", "!="], BugEffect::FirstArg, "NULLIF"),
        bug(catalog, &["LIKE"], BugEffect::Negate, "LIKE"),
        bug(catalog, &["BETWEEN"], BugEffect::Negate, "BETWEEN"),
    ]
}

/// Writes `spec` next to `dir` and returns the `mock:` target for it.
pub fn mock_target(dir: &Path, name: &str, spec: &MockSpec, catalog: &Catalog) -> String {
    let p = dir.join(name);
    fs::write(&p, spec.to_file_string(catalog)).unwrap();
    format!("mock:{}", p.display())
}

/// Runs a random setup phase, mirroring successes into `schema`.
pub fn populate(
    gen: &mut Generator,
    schema: &mut SchemaModel,
    adapter: &mut dyn Adapter,
    catalog: &Catalog,
) {
    let plan = [
        (StatementKind::CreateTable, 2),
        (StatementKind::Insert, 6),
        (StatementKind::CreateIndex, 1),
        (StatementKind::CreateView, 1),
    ];
    for (kind, n) in plan {
        for _ in 0..n {
            match gen.generate_statement(kind, schema) {
                Ok(g) => {
                    let staged = schema.stage(catalog, &g.ast);
                    let status = adapter.execute(&g.sql);
                    schema.commit(staged, &status);
                }
                Err(
                    GenError::EmptySchema(_) | GenError::Exhausted(_) | GenError::Suppressed(_),
                ) => {}
            }
        }
    }
}

/// Every file under `dir`, as sorted relative paths with contents.
pub fn tree(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        let Ok(rd) = fs::read_dir(&d) else { continue };
        for e in rd.map(Result::unwrap) {
            let p = e.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((
                    p.strip_prefix(dir).unwrap().to_path_buf(),
                    fs::read(&p).unwrap(),
                ));
            }
        }
    }
    out.sort();
    out
}

pub fn read_features(dir: &Path) -> BTreeSet<FeatureId> {
    fs::read_to_string(dir.join("features.txt"))
        .unwrap()
        .lines()
        .filter(|l| !l.is_empty())
        .map(|l| FeatureId::new(l).unwrap())
        .collect()
}
