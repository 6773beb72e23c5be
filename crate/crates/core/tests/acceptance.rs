//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.
//!
//! The embedded-engine campaign runs for ten minutes by default; set
//! `ADAQUERY_SMOKE_SECS` to shorten it during development.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod common;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use adaquery::adapter::mock::{MockAdapter, MockSpec, Typing};
use adaquery::adapter::sqlite::SqliteAdapter;
use adaquery::adapter::{Adapter, AdapterRegistry, ExecutionStatus, QueryError, ResultSet};
use adaquery::campaign::report::{parse_reproducer, replay_reproducer};
use adaquery::campaign::{
    recheck, run_campaign, run_campaign_with, CampaignConfig, OracleChoice, RecheckOutcome,
};
use adaquery::feature::{
    choose_index, classify_query_feature, posterior_params, prob_below_threshold, redistribute,
    Catalog, ChoiceContext, ChoiceError, FeatureId, FeatureState, FeatureStats, InferenceConfig,
};
use adaquery::generator::{current_depth, GenConfig, Generator, TypingMode};
use adaquery::oracle::{check_texts, oracle_queries, OracleKind, VerdictStatus};
use adaquery::prioritizer::{brute_force_classify, classify, Classification, HistoryStore};
use adaquery::schema::SchemaModel;
use adaquery::sql::{
    render_select, statement_features, ColumnDef, Grammar, Statement, StatementKind, Value,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = fn() -> Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn main() {
    let checks: [(&str, Check); 9] = [
        ("posterior exactness", posterior_exactness),
        ("weight redistribution", weight_redistribution),
        ("feature learning convergence", learning_convergence),
        ("oracle soundness", oracle_soundness),
        ("oracle and triage end to end", bugs_end_to_end),
        ("triage differential", triage_differential),
        ("schema mirror", schema_mirror),
        ("determinism", determinism),
        ("depth schedule and warm start", depth_and_warm_start),
    ];
    let smoke = std::thread::spawn(|| timed(embedded_engine_smoke));
    let mut failed = 0;
    for (name, f) in checks {
        failed += report(name, timed(f));
    }
    failed += report(
        "embedded engine smoke campaign",
        smoke.join().expect("smoke thread"),
    );
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}

fn timed(f: Check) -> (Result<String, String>, Duration) {
    let t = Instant::now();
    let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
        Err(format!("panicked: {}", msg.unwrap_or_default()))
    });
    (r, t.elapsed())
}

fn report(name: &str, (r, took): (Result<String, String>, Duration)) -> usize {
    let secs = took.as_secs_f64();
    match r {
        Ok(detail) => {
            println!("PASS  {name} ({secs:.1}s): {detail}");
            0
        }
        Err(why) => {
            println!("FAIL  {name} ({secs:.1}s): {why}");
            1
        }
    }
}

fn catalog() -> Arc<Catalog> {
    Arc::new(Catalog::default_catalog())
}

fn fid(s: &str) -> FeatureId {
    FeatureId::new(s).unwrap()
}

// Posterior CDF against an independently computed binomial tail, and a
// quadrature of the Beta density for small N.
fn posterior_exactness() -> Result<String, String> {
    const MAX_N: u64 = 1000;
    let mut ln_fact = vec![0.0f64; MAX_N as usize + 2];
    for i in 1..ln_fact.len() {
        ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
    }
    let f = fid("F");
    let mut worst = 0.0f64;
    let mut evaluated = 0u64;
    for p in [0.01f64, 0.05, 0.5] {
        for n in 0..=MAX_N {
            let m = (n + 1) as usize;
            let pmf: Vec<f64> = (0..=m)
                .map(|j| {
                    (ln_fact[m] - ln_fact[j] - ln_fact[m - j]
                        + j as f64 * p.ln()
                        + (m - j) as f64 * (1.0 - p).ln())
                    .exp()
                })
                .collect();
            // P[X >= y + 1] accumulated from the top.
            let mut tail = 0.0;
            for y in (0..=n).rev() {
                tail += pmf[y as usize + 1];
                let got = prob_below_threshold(&FeatureStats::new(f.clone(), n, y), p);
                worst = worst.max((got - tail).abs());
                evaluated += 1;
            }
        }
    }
    ensure!(
        worst <= 1e-9,
        "max deviation from the binomial tail {worst:e}"
    );

    let mut quad_worst = 0.0f64;
    for n in 0..=30u64 {
        for y in 0..=n {
            let (a, b) = posterior_params(&FeatureStats::new(f.clone(), n, y));
            let ln_beta =
                ln_fact[a as usize - 1] + ln_fact[b as usize - 1] - ln_fact[(a + b) as usize - 1];
            for p in [0.01, 0.3] {
                let pdf = |x: f64| {
                    if x <= 0.0 {
                        if a == 1 {
                            (-ln_beta).exp()
                        } else {
                            0.0
                        }
                    } else {
                        ((a - 1) as f64 * x.ln() + (b - 1) as f64 * (1.0 - x).ln() - ln_beta).exp()
                    }
                };
                let steps = 20_000;
                let h = p / steps as f64;
                let mut s = pdf(0.0) + pdf(p);
                for i in 1..steps {
                    s += pdf(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
                }
                let integral = s * h / 3.0;
                let got = prob_below_threshold(&FeatureStats::new(f.clone(), n, y), p);
                quad_worst = quad_worst.max((got - integral).abs());
            }
        }
    }
    ensure!(
        quad_worst <= 1e-9,
        "max deviation from quadrature {quad_worst:e}"
    );

    let example = FeatureStats::new(f, 400, 0);
    ensure!(
        posterior_params(&example) == (1, 401),
        "posterior of y=0, N=400 is not Beta(1, 401)"
    );
    let mass = prob_below_threshold(&example, 0.01);
    let exact = 1.0 - 0.99f64.powi(401);
    ensure!(
        (mass - exact).abs() <= 1e-12,
        "worked example mass {mass} != {exact}"
    );
    let state = classify_query_feature(&example, &InferenceConfig::default());
    ensure!(
        state == FeatureState::Unsupported,
        "worked example classified {state:?}"
    );
    Ok(format!(
        "{evaluated} (N, y, p) points, max error {worst:.1e} (tail), {quad_worst:.1e} (quadrature); y=0, N=400: mass {mass:.6}"
    ))
}

fn weight_redistribution() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut exhausted = 0;
    for ctx_no in 0..10_000 {
        let k = rng.gen_range(1..=20);
        let alts: Vec<FeatureId> = (0..k).map(|i| fid(&format!("F{i}"))).collect();
        let mut states = HashMap::new();
        for a in &alts {
            let s = match rng.gen_range(0..10) {
                0..=2 => FeatureState::Unsupported,
                3..=6 => FeatureState::Supported,
                _ => FeatureState::Unknown,
            };
            states.insert(a.clone(), s);
        }
        let ctx = ChoiceContext::uniform(format!("rule{ctx_no}"), alts.clone());
        let live = alts
            .iter()
            .filter(|a| states[*a] != FeatureState::Unsupported)
            .count();
        let out = match redistribute(&ctx, &states) {
            Err(ChoiceError::RuleExhausted(_)) => {
                ensure!(
                    live == 0,
                    "context {ctx_no}: exhausted with {live} live alternatives"
                );
                exhausted += 1;
                continue;
            }
            Ok(c) => c,
        };
        ensure!(
            live > 0,
            "context {ctx_no}: no live alternative but no error"
        );
        let sum: f64 = out.weights.iter().sum();
        ensure!(
            (sum - 1.0).abs() <= 1e-12,
            "context {ctx_no}: weights sum to {sum}"
        );
        let nonzero: Vec<f64> = out.weights.iter().copied().filter(|w| *w != 0.0).collect();
        ensure!(
            nonzero.len() == live,
            "context {ctx_no}: {} nonzero weights for {live} live",
            nonzero.len()
        );
        ensure!(
            nonzero.iter().all(|w| *w == nonzero[0]),
            "context {ctx_no}: unequal weights {nonzero:?}"
        );
        ensure!(
            (nonzero[0] - 1.0 / live as f64).abs() <= 1e-15,
            "context {ctx_no}: weight {}",
            nonzero[0]
        );
        for (a, w) in alts.iter().zip(&out.weights) {
            ensure!(
                states[a] != FeatureState::Unsupported || *w == 0.0,
                "context {ctx_no}: {a} has weight {w}"
            );
        }
        for _ in 0..5 {
            let i = choose_index(&out, &mut rng).map_err(|e| e.to_string())?;
            ensure!(
                states[&alts[i]] != FeatureState::Unsupported,
                "context {ctx_no}: sampled {}",
                alts[i]
            );
        }
    }
    Ok(format!("10000 contexts ({exhausted} fully unsupported)"))
}

fn learning_convergence() -> Result<String, String> {
    let c = catalog();
    let dir = tempfile::tempdir().unwrap();
    let mut with = Vec::new();
    let mut without = Vec::new();
    let mut exposed = 0;
    let mut learned = 0;
    for seed in 1..=5u64 {
        let spec = common::benchmark_spec(&c, seed);
        let target = common::mock_target(dir.path(), &format!("bench{seed}.spec"), &spec, &c);
        for feedback in [true, false] {
            let mut cfg = CampaignConfig::new(
                target.clone(),
                dir.path().join(format!("out{seed}{feedback}")),
            )
            .with_interval(2000);
            cfg.budget = Some(20_000);
            cfg.gen.seed = seed;
            cfg.feedback = feedback;
            cfg.catalog = Arc::clone(&c);
            let m = run_campaign(&cfg).map_err(|e| e.to_string())?;
            ensure!(m.fatal.is_none(), "seed {seed}: fatal {:?}", m.fatal);
            let last = m.windows.last().ok_or("no windows")?.validity();
            if !feedback {
                without.push(last);
                continue;
            }
            with.push(last);
            learned += m.unsupported().len();
            for (i, r) in m.stats.iter().enumerate() {
                let supported = spec.supports(&c, i);
                if !supported && r.n >= 400 {
                    exposed += 1;
                    ensure!(
                        r.state == FeatureState::Unsupported,
                        "seed {seed}: {} executed {} times ({} ok) is {:?}",
                        r.feature,
                        r.n,
                        r.y,
                        r.state
                    );
                }
                ensure!(
                    !(supported && r.state == FeatureState::Unsupported),
                    "seed {seed}: supported {} classified Unsupported (N={}, y={})",
                    r.feature,
                    r.n,
                    r.y
                );
            }
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (a, b) = (mean(&with), mean(&without));
    ensure!(
        a - b >= 0.20,
        "final-window validity {a:.3} with feedback vs {b:.3} without"
    );
    Ok(format!(
        "{learned} of 150 removed features learned Unsupported; {exposed} reached 400 executions, all Unsupported; 0 false positives; final validity {a:.3} vs {b:.3} without feedback"
    ))
}

fn sorted_rows(r: &ResultSet) -> Vec<String> {
    let mut v: Vec<String> = r.rows.iter().map(|row| format!("{row:?}")).collect();
    v.sort();
    v
}

fn oracle_soundness() -> Result<String, String> {
    let c = catalog();
    let mut decided = [0u64; 2];
    let mut db_no = 0u64;
    while decided.iter().any(|d| *d < 10_000) {
        db_no += 1;
        let (typing, mode) = if db_no.is_multiple_of(2) {
            (Typing::Static, TypingMode::Static)
        } else {
            (Typing::Dynamic, TypingMode::Dynamic)
        };
        let mut spec = MockSpec::full(&c);
        spec.typing = typing;
        let mut mock = MockAdapter::new(spec, Arc::clone(&c));
        let gen_cfg = GenConfig {
            seed: db_no,
            typing_mode: mode,
            ..GenConfig::default()
        };
        let mut gen = Generator::new(Arc::clone(&c), gen_cfg, 0);
        gen.sync(&vec![FeatureState::Unknown; c.len()], 3);
        let mut schema = SchemaModel::new();
        common::populate(&mut gen, &mut schema, &mut mock, &c);
        if schema.tables().is_empty() {
            continue;
        }
        for _ in 0..200 {
            let case = gen.generate_case(&schema).map_err(|e| e.to_string())?;
            for (slot, kind) in [OracleKind::Tlp, OracleKind::Norec].into_iter().enumerate() {
                let queries = oracle_queries(kind, &c, &case.base, &case.predicate);
                let texts: Vec<String> = queries.iter().map(|q| render_select(&c, q)).collect();
                let run = check_texts(kind, &texts, &mut mock).map_err(|e| e.to_string())?;
                match run.verdict.status {
                    VerdictStatus::Skip(_) => continue,
                    VerdictStatus::Fail => {
                        return Err(format!("false alarm on a bug-free mock:\n{}", run.verdict))
                    }
                    VerdictStatus::Pass => decided[slot] += 1,
                }
                let reference: Vec<ResultSet> = queries
                    .iter()
                    .map(|q| mock.reference_eval(q))
                    .collect::<Result<_, _>>()?;
                match kind {
                    OracleKind::Tlp => {
                        let mut union: Vec<String> =
                            reference[1..].iter().flat_map(sorted_rows).collect();
                        union.sort();
                        ensure!(
                            sorted_rows(&reference[0]) == union,
                            "reference partition mismatch:\n{}",
                            texts.join("\n")
                        );
                    }
                    OracleKind::Norec => {
                        let counted = reference[1]
                            .rows
                            .iter()
                            .filter(|r| matches!(r[0], Value::Bool(true) | Value::Int(1)))
                            .count();
                        ensure!(
                            reference[0].rows.len() == counted,
                            "reference count mismatch:\n{}",
                            texts.join("\n")
                        );
                    }
                }
            }
        }
    }
    Ok(format!("{} TLP and {} NoREC checks over {db_no} databases, 0 Fail; partitions verified by reference evaluation", decided[0], decided[1]))
}

fn bugs_end_to_end() -> Result<String, String> {
    let c = catalog();
    let dir = tempfile::tempdir().unwrap();
    let bugs = common::three_bugs(&c);
    let mut spec = MockSpec::full(&c);
    spec.bugs = bugs.clone();
    let target = common::mock_target(dir.path(), "bugs.spec", &spec, &c);
    let out = dir.path().join("out");
    let mut cfg = CampaignConfig::new(target, &out).with_interval(10_000);
    cfg.budget = Some(100_000);
    cfg.gen.seed = 5;
    cfg.oracle = OracleChoice::Both;
    cfg.catalog = Arc::clone(&c);
    let m = run_campaign(&cfg).map_err(|e| e.to_string())?;
    ensure!(m.fatal.is_none(), "fatal {:?}", m.fatal);
    let new = m.bugs_new();
    ensure!(
        new <= 2 * bugs.len(),
        "{new} New records for {} bugs",
        bugs.len()
    );

    // Attribute each New record to the bugs that make it fail on their own.
    let mut found = vec![false; bugs.len()];
    let mut history = HistoryStore::new();
    let mut dups = 0;
    for b in &m.bugs {
        let features = common::read_features(&b.dir);
        let written =
            Classification::parse(&fs::read_to_string(b.dir.join("classification.txt")).unwrap())
                .ok_or("unreadable classification")?;
        let expected = brute_force_classify(&features, b.id, &mut history);
        ensure!(
            written == expected,
            "bug {}: {written} but the subset scan says {expected}",
            b.id
        );
        ensure!(
            written == b.classification,
            "bug {}: file and metrics disagree",
            b.id
        );
        if written != Classification::New {
            dups += 1;
            continue;
        }
        let rep = parse_reproducer(&fs::read_to_string(b.dir.join("reproduce.sql")).unwrap())?;
        for (i, bug) in bugs.iter().enumerate() {
            let mut only = MockSpec::full(&c);
            only.bugs = vec![bug.clone()];
            let mut mock = MockAdapter::new(only, Arc::clone(&c));
            if replay_reproducer(&mut mock, &rep)
                .map_err(|e| e.to_string())?
                .is_fail()
            {
                found[i] = true;
            }
        }
    }
    // Every later record containing an earlier New set must be a duplicate.
    let news: Vec<(u64, BTreeSet<FeatureId>)> = history.sets().to_vec();
    for b in &m.bugs {
        let s = common::read_features(&b.dir);
        if news.iter().any(|(id, n)| *id < b.id && n.is_subset(&s)) {
            ensure!(
                b.classification != Classification::New,
                "bug {} contains an earlier New set",
                b.id
            );
        }
    }
    for (i, f) in found.iter().enumerate() {
        ensure!(*f, "injected bug `{}` has no New record", bugs[i]);
    }
    Ok(format!(
        "{} records: {new} New covering all {} bugs, {dups} potential duplicates",
        m.bugs.len(),
        bugs.len()
    ))
}

fn triage_differential() -> Result<String, String> {
    let set = |ids: &[&str]| ids.iter().map(|i| fid(i)).collect::<BTreeSet<_>>();
    let mut h = HistoryStore::new();
    let walk = [
        (set(&["NULLIF", "!="]), Classification::New),
        (
            set(&["NULLIF", "!=", "CASE"]),
            Classification::PotentialDuplicate(1),
        ),
        (
            set(&["NULLIF", "!=", "WHERE"]),
            Classification::PotentialDuplicate(1),
        ),
        (set(&["NULLIF", "<>"]), Classification::New),
    ];
    for (i, (s, want)) in walk.iter().enumerate() {
        let got = classify(s, i as u64 + 1, &mut h);
        ensure!(
            got == *want,
            "walkthrough step {}: {got} instead of {want}",
            i + 1
        );
    }

    let universe: Vec<FeatureId> = (0..24).map(|i| fid(&format!("F{i}"))).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut decisions = 0u64;
    let mut dup_count = 0u64;
    for h_no in 0..10_000 {
        let mut fast = HistoryStore::new();
        let mut slow = HistoryStore::new();
        let len = rng.gen_range(1..=40);
        let density = rng.gen_range(0.05..0.4);
        for id in 0..len {
            let s: BTreeSet<FeatureId> = universe
                .iter()
                .filter(|_| rng.gen_bool(density))
                .cloned()
                .collect();
            let a = classify(&s, id, &mut fast);
            let b = brute_force_classify(&s, id, &mut slow);
            ensure!(a == b, "history {h_no}, step {id}: {a} vs {b}");
            dup_count += u64::from(a != Classification::New);
            decisions += 1;
        }
        ensure!(
            fast.sets() == slow.sets(),
            "history {h_no}: stores diverged"
        );
    }
    Ok(format!("walkthrough reproduced; 10000 histories, {decisions} decisions ({dup_count} duplicates) identical"))
}

fn schema_mirror() -> Result<String, String> {
    let c = catalog();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let kinds = [
        StatementKind::CreateTable,
        StatementKind::CreateIndex,
        StatementKind::CreateView,
        StatementKind::Insert,
    ];
    let (mut ok, mut rejected) = (0u64, 0u64);
    for seq in 0..1000u64 {
        let mut spec = MockSpec::full(&c);
        spec.typing = if seq % 2 == 0 {
            Typing::Static
        } else {
            Typing::Dynamic
        };
        for id in ["BOOLEAN", "UNIQUE", "LIKE", "RIGHT_JOIN"] {
            if rng.gen_bool(0.5) {
                spec.supported.remove(&fid(id));
            }
        }
        let mut mock = MockAdapter::new(spec, Arc::clone(&c));
        let mut gen = Generator::new(
            Arc::clone(&c),
            GenConfig {
                seed: seq,
                typing_mode: TypingMode::Dynamic,
                ..GenConfig::default()
            },
            0,
        );
        gen.sync(&vec![FeatureState::Unknown; c.len()], 2);
        let mut schema = SchemaModel::new();
        for _ in 0..rng.gen_range(5..25) {
            let stmt = if rng.gen_bool(0.1) && !schema.tables().is_empty() {
                // Reuse a taken name: must be rejected and leave both catalogs alone.
                let taken = schema.tables()[rng.gen_range(0..schema.tables().len())]
                    .name
                    .clone();
                Statement::CreateTable {
                    name: taken,
                    columns: vec![ColumnDef {
                        name: "c0".into(),
                        dtype: adaquery::feature::SqlType::Int,
                    }],
                }
            } else {
                match gen.generate_statement(kinds[rng.gen_range(0..kinds.len())], &mut schema) {
                    Ok(g) => g.ast,
                    Err(_) => continue,
                }
            };
            let sql = adaquery::sql::render_statement(&c, &stmt);
            let staged = schema.stage(&c, &stmt);
            let status = mock.execute(&sql);
            if status.is_success() {
                ok += 1;
            } else {
                rejected += 1;
            }
            schema.commit(staged, &status);
            let (model, actual) = (schema.snapshot(), mock.catalog_snapshot());
            ensure!(model == actual, "sequence {seq} diverged after `{sql}` ({status:?}):\nmodel {model:?}\nmock {actual:?}");
        }
    }
    ensure!(rejected > 0, "no statement was rejected");
    Ok(format!(
        "1000 sequences, {ok} accepted and {rejected} rejected statements, catalogs always equal"
    ))
}

fn determinism() -> Result<String, String> {
    let c = catalog();
    let dir = tempfile::tempdir().unwrap();
    let mut spec = common::benchmark_spec(&c, 3);
    spec.typing = Typing::Static;
    spec.supported.extend(["LIKE", "NULLIF", "!="].map(fid));
    spec.bugs = vec![
        common::bug(
            &c,
            &["LIKE"],
            adaquery::adapter::mock::BugEffect::Negate,
            "LIKE",
        ),
        common::bug(
            &c,
            &["NULLIF", "!="],
            adaquery::adapter::mock::BugEffect::FirstArg,
            "NULLIF",
        ),
    ];
    let target = common::mock_target(dir.path(), "det.spec", &spec, &c);
    let run = |name: &str| {
        let mut cfg =
            CampaignConfig::new(target.clone(), dir.path().join(name)).with_interval(2000);
        cfg.budget = Some(20_000);
        cfg.gen.seed = 42;
        cfg.workers = 3;
        cfg.oracle = OracleChoice::Both;
        cfg.stats_path = Some(dir.path().join(format!("{name}.stats")));
        cfg.catalog = Arc::clone(&c);
        run_campaign(&cfg)
    };
    let a = run("a").map_err(|e| e.to_string())?;
    let b = run("b").map_err(|e| e.to_string())?;
    ensure!(a.fatal.is_none() && b.fatal.is_none(), "fatal error");
    let (ta, tb) = (
        common::tree(&dir.path().join("a")),
        common::tree(&dir.path().join("b")),
    );
    ensure!(ta == tb, "output trees differ");
    let sa = fs::read(dir.path().join("a.stats")).unwrap();
    ensure!(
        sa == fs::read(dir.path().join("b.stats")).unwrap(),
        "stats files differ"
    );
    ensure!(!a.bugs.is_empty(), "no bug reports to compare");
    Ok(format!(
        "{} files byte-identical across two 3-worker runs ({} bug reports)",
        ta.len(),
        a.bugs.len()
    ))
}

/// Mock wrapper that mirrors the schema and flags any statement using a banned feature.
struct Spy {
    inner: MockAdapter,
    catalog: Arc<Catalog>,
    grammar: Grammar,
    schema: SchemaModel,
    banned: BTreeSet<usize>,
    seen: Arc<Mutex<(u64, Vec<String>)>>,
}

impl Spy {
    fn inspect(&mut self, sql: &str) -> Option<adaquery::schema::StagedObject> {
        let stmt = self.grammar.parse_statement(sql).ok()?;
        let features = statement_features(&self.catalog, &stmt, &self.schema);
        let mut seen = self.seen.lock().unwrap();
        seen.0 += 1;
        if features.iter().any(|f| self.banned.contains(f)) {
            seen.1.push(sql.to_string());
        }
        Some(self.schema.stage(&self.catalog, &stmt))
    }
}

impl Adapter for Spy {
    fn execute(&mut self, sql: &str) -> ExecutionStatus {
        let staged = self.inspect(sql);
        let status = self.inner.execute(sql);
        if let Some(s) = staged {
            self.schema.commit(s, &status);
        }
        status
    }

    fn query(&mut self, sql: &str) -> Result<ResultSet, QueryError> {
        self.inspect(sql);
        self.inner.query(sql)
    }

    fn reset(&mut self) -> Result<(), QueryError> {
        self.schema = SchemaModel::new();
        self.inner.reset()
    }

    fn normalization(&self) -> adaquery::adapter::Normalization {
        self.inner.normalization()
    }
}

fn depth_and_warm_start() -> Result<String, String> {
    let cfg = GenConfig {
        depth_schedule_interval: 2000,
        max_depth: 3,
        ..GenConfig::default()
    };
    let expect = [
        (0, 1),
        (1999, 1),
        (2000, 2),
        (3999, 2),
        (4000, 3),
        (5999, 3),
        (6000, 3),
        (1_000_000, 3),
    ];
    for (executed, depth) in expect {
        let got = current_depth(executed, &cfg);
        ensure!(
            got == depth,
            "depth after {executed} statements is {got}, not {depth}"
        );
    }

    let c = catalog();
    let dir = tempfile::tempdir().unwrap();
    let spec = common::benchmark_spec(&c, 9);
    let target = common::mock_target(dir.path(), "warm.spec", &spec, &c);
    let stats = dir.path().join("stats.tsv");
    let mut first = CampaignConfig::new(target, dir.path().join("cold")).with_interval(2000);
    first.budget = Some(20_000);
    first.stats_path = Some(stats.clone());
    first.catalog = Arc::clone(&c);
    let cold = run_campaign(&first).map_err(|e| e.to_string())?;
    let depths: Vec<u32> = cold.windows.iter().map(|w| w.depth).collect();
    ensure!(
        depths == [1, 2, 3, 3, 3, 3, 3, 3, 3, 3],
        "campaign window depths {depths:?}"
    );
    let banned: BTreeSet<usize> = cold
        .stats
        .iter()
        .enumerate()
        .filter(|(_, r)| r.state == FeatureState::Unsupported)
        .map(|(i, _)| i)
        .collect();
    ensure!(!banned.is_empty(), "the cold run learned nothing");

    let seen = Arc::new(Mutex::new((0u64, Vec::new())));
    let mut registry = AdapterRegistry::default();
    let (spy_spec, spy_seen, spy_banned) = (spec.clone(), Arc::clone(&seen), banned.clone());
    registry.register("spy", move |_, _, catalog| {
        Ok(Box::new(Spy {
            inner: MockAdapter::new(spy_spec.clone(), Arc::clone(catalog)),
            catalog: Arc::clone(catalog),
            grammar: Grammar::new(catalog),
            schema: SchemaModel::new(),
            banned: spy_banned.clone(),
            seen: Arc::clone(&spy_seen),
        }) as Box<dyn Adapter>)
    });
    let mut warm = first.clone();
    warm.target = "spy:".into();
    warm.out_dir = dir.path().join("warm");
    warm.gen.seed = 77;
    warm.workers = 2;
    let m = run_campaign_with(&warm, &registry).map_err(|e| e.to_string())?;
    ensure!(m.fatal.is_none(), "fatal {:?}", m.fatal);
    let (count, offending) = seen.lock().unwrap().clone();
    ensure!(
        offending.is_empty(),
        "{} statements used a learned-Unsupported feature, e.g. {}",
        offending.len(),
        offending[0]
    );
    let before: BTreeMap<usize, u64> = banned.iter().map(|&i| (i, cold.stats[i].n)).collect();
    for (&i, &n) in &before {
        ensure!(
            m.stats[i].n == n,
            "{} executed again after the warm start",
            c.id(i)
        );
    }
    Ok(format!("depth 1/2/3 at 0/2000/4000; warm start: {count} statements, none using the {} learned-Unsupported features", banned.len()))
}

fn embedded_engine_smoke() -> Result<String, String> {
    let secs: u64 = std::env::var("ADAQUERY_SMOKE_SECS")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(600);
    let dir = tempfile::tempdir().unwrap();
    let db = dir.path().join("smoke.db");
    let out = dir.path().join("out");
    let mut cfg =
        CampaignConfig::new(format!("sqlite:{}", db.display()), &out).with_interval(100_000);
    cfg.duration = Some(Duration::from_secs(secs));
    cfg.stats_path = Some(dir.path().join("stats.tsv"));
    let m = run_campaign(&cfg).map_err(|e| e.to_string())?;
    ensure!(m.fatal.is_none(), "fatal error: {:?}", m.fatal);
    let last = m.windows.last().ok_or("no windows")?;
    ensure!(
        last.validity() >= 0.80,
        "final-window validity {:.3} over {} checks",
        last.validity(),
        last.executed
    );
    let mut fresh = SqliteAdapter::open(&dir.path().join("recheck.db").display().to_string(), 0)
        .map_err(|e| e.to_string())?;
    let entries = recheck(Path::new(&out), &mut fresh).map_err(|e| e.to_string())?;
    ensure!(
        entries.len() == m.bugs.len(),
        "{} reports rechecked for {} bugs",
        entries.len(),
        m.bugs.len()
    );
    for e in &entries {
        ensure!(
            e.outcome == RecheckOutcome::Fail,
            "{} does not reproduce: {:?}",
            e.name,
            e.outcome
        );
    }
    Ok(format!(
        "{secs}s, {} statements, {} windows, final validity {:.3}, {} unsupported features learned, {} reports all reproduce",
        m.statements_executed,
        m.windows.len(),
        last.validity(),
        m.unsupported().len(),
        entries.len()
    ))
}
