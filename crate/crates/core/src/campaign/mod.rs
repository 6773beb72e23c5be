//! End-to-end campaigns: build a database, run oracle checks against it, and
//! feed every statement's outcome back into the feature statistics.
//!
//! Work is split into windows of `update_interval` statements. Within a window
//! each worker runs on its own database in a scoped thread, recording outcomes
//! into the shared [`StatsStore`]. Between windows the coordinator reduces and
//! triages candidate bugs, reclassifies features, advances the depth schedule
//! and writes one metrics line. Given the same seed, config and target, two
//! budget-bounded runs produce identical output regardless of thread timing.

pub mod report;

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::Rng;
use thiserror::Error;

use crate::adapter::{Adapter, AdapterError, AdapterRegistry, ExecutionStatus};
use crate::feature::{
    load_stats, persist_stats, Catalog, Category, FeatureId, FeatureState, FeatureStats,
    InferenceConfig, StatsError, StatsStore,
};
use crate::generator::{current_depth, GenConfig, GenError, Generator};
use crate::oracle::{
    check_texts, oracle_queries, OracleError, OracleKind, OracleVerdict, VerdictStatus,
};
use crate::prioritizer::{classify, Classification, HistoryStore};
use crate::reducer::{reduce, replay, TestCase, REPLAY_BUDGET};
use crate::schema::SchemaModel;
use crate::sql::{render_select, statement_features, Statement, StatementKind};

pub use report::{recheck, RecheckEntry, RecheckOutcome};

pub const METRICS_HEADER: &str = "window\texecuted\tsucceeded\tvalidity\tbugs_new\tbugs_dup";

/// Consecutive loop turns without a single executed statement before a worker gives up.
const STALL_LIMIT: u32 = 100;
const ANALYZE_PROBABILITY: f64 = 0.3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleChoice {
    Tlp,
    Norec,
    /// Alternates per check, starting with TLP.
    Both,
}

impl OracleChoice {
    pub fn from_token(t: &str) -> Option<OracleChoice> {
        match t {
            "tlp" => Some(OracleChoice::Tlp),
            "norec" => Some(OracleChoice::Norec),
            "both" => Some(OracleChoice::Both),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CampaignConfig {
    /// `scheme:config`, e.g. `sqlite::memory:` or `mock:dialect.spec`.
    pub target: String,
    pub oracle: OracleChoice,
    /// `update_interval` is the window size in statements.
    pub inference: InferenceConfig,
    pub gen: GenConfig,
    /// Statements to execute, setup included.
    pub budget: Option<u64>,
    pub duration: Option<Duration>,
    pub workers: usize,
    pub out_dir: PathBuf,
    /// Loaded at start when present, written at the end.
    pub stats_path: Option<PathBuf>,
    /// When false, outcomes are still recorded but features are never reclassified.
    pub feedback: bool,
    /// Give each worker its own statistics, merged at the end.
    pub isolate_stats: bool,
    /// Oracle checks before a worker's database is rebuilt.
    pub checks_per_database: u64,
    pub catalog: Arc<Catalog>,
}

impl CampaignConfig {
    pub fn new(target: impl Into<String>, out_dir: impl Into<PathBuf>) -> CampaignConfig {
        CampaignConfig {
            target: target.into(),
            oracle: OracleChoice::Tlp,
            inference: InferenceConfig::default(),
            gen: GenConfig::default(),
            budget: None,
            duration: None,
            workers: 1,
            out_dir: out_dir.into(),
            stats_path: None,
            feedback: true,
            isolate_stats: false,
            checks_per_database: 2000,
            catalog: Arc::new(Catalog::default_catalog()),
        }
    }

    /// Sets both the feedback window and the depth schedule interval.
    pub fn with_interval(mut self, interval: u64) -> CampaignConfig {
        self.inference.update_interval = interval;
        self.gen.depth_schedule_interval = interval;
        self
    }
}

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Adapter(#[from] AdapterError),
    #[error("stats: {0}")]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct WindowMetrics {
    pub window: u64,
    /// Oracle checks run in the window.
    pub executed: u64,
    /// Checks whose queries all succeeded.
    pub succeeded: u64,
    pub statements: u64,
    pub statements_succeeded: u64,
    pub bugs_new: u64,
    pub bugs_dup: u64,
    /// Expression depth in effect during the window.
    pub depth: u32,
}

impl WindowMetrics {
    pub fn validity(&self) -> f64 {
        if self.executed == 0 {
            0.0
        } else {
            self.succeeded as f64 / self.executed as f64
        }
    }

    pub fn tsv_line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{:.6}\t{}\t{}",
            self.window,
            self.executed,
            self.succeeded,
            self.validity(),
            self.bugs_new,
            self.bugs_dup
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BugSummary {
    pub id: u64,
    pub classification: Classification,
    pub reduced: bool,
    pub dir: PathBuf,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CampaignMetrics {
    pub windows: Vec<WindowMetrics>,
    pub statements_executed: u64,
    pub statements_succeeded: u64,
    pub checks_executed: u64,
    pub checks_succeeded: u64,
    pub bugs: Vec<BugSummary>,
    /// Final statistics, one record per catalog feature.
    pub stats: Vec<FeatureStats>,
    /// Set when a Fatal error ended the campaign early.
    pub fatal: Option<String>,
}

impl CampaignMetrics {
    pub fn bugs_new(&self) -> usize {
        self.bugs
            .iter()
            .filter(|b| b.classification == Classification::New)
            .count()
    }

    pub fn features_by_state(&self) -> BTreeMap<&'static str, usize> {
        let mut out = BTreeMap::new();
        for r in &self.stats {
            *out.entry(r.state.token()).or_default() += 1;
        }
        out
    }

    pub fn unsupported(&self) -> Vec<&FeatureId> {
        self.stats
            .iter()
            .filter(|r| r.state == FeatureState::Unsupported)
            .map(|r| &r.feature)
            .collect()
    }
}

pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignMetrics, CampaignError> {
    run_campaign_with(cfg, &AdapterRegistry::default())
}

/// Runs a campaign, opening targets through `registry`.
pub fn run_campaign_with(
    cfg: &CampaignConfig,
    registry: &AdapterRegistry,
) -> Result<CampaignMetrics, CampaignError> {
    if cfg.workers == 0 {
        return Err(CampaignError::Config("workers must be at least 1".into()));
    }
    if cfg.budget.is_none() && cfg.duration.is_none() {
        return Err(CampaignError::Config(
            "a statement budget or a duration is required".into(),
        ));
    }
    if cfg.inference.update_interval == 0 {
        return Err(CampaignError::Config(
            "the update interval must be positive".into(),
        ));
    }
    let catalog = Arc::clone(&cfg.catalog);
    let mut store = match &cfg.stats_path {
        Some(p) if p.exists() => StatsStore::from_records(Arc::clone(&catalog), &load_stats(p)?)?,
        _ => StatsStore::new(Arc::clone(&catalog)),
    };
    fs::create_dir_all(&cfg.out_dir)?;
    let bugs_dir = report::bugs_dir(&cfg.out_dir);
    if bugs_dir.exists() {
        fs::remove_dir_all(&bugs_dir)?;
    }
    let mut metrics_file = io::BufWriter::new(fs::File::create(cfg.out_dir.join("metrics.tsv"))?);
    writeln!(metrics_file, "{METRICS_HEADER}")?;
    metrics_file.flush()?;

    let mut workers = Vec::with_capacity(cfg.workers);
    for i in 0..cfg.workers {
        let adapter = registry.open(&cfg.target, i, &catalog)?;
        let isolated = cfg.isolate_stats.then(|| blank_copy(&store));
        workers.push(Worker::new(
            i,
            adapter,
            Generator::new(Arc::clone(&catalog), cfg.gen.clone(), i as u64),
            isolated,
        ));
    }
    let mut coord = Coordinator {
        cfg,
        catalog: Arc::clone(&catalog),
        registry,
        reducer: None,
        history: HistoryStore::new(),
        next_id: 1,
        metrics: CampaignMetrics::default(),
    };

    let deadline = cfg.duration.map(|d| Instant::now() + d);
    let interval = cfg.inference.update_interval;
    let mut depth = current_depth(0, &cfg.gen);
    for w in &mut workers {
        let states = w.stats.as_ref().unwrap_or(&store).states().to_vec();
        w.gen.sync(&states, depth);
    }
    let mut total = 0u64;
    let mut window = 0u64;
    loop {
        let target = match cfg.budget {
            Some(b) => b.min((window + 1) * interval),
            None => (window + 1) * interval,
        };
        if target <= total || deadline.is_some_and(|d| Instant::now() >= d) {
            break;
        }
        let outputs = run_window(&mut workers, &store, &catalog, cfg, target, deadline);
        let mut wm = WindowMetrics {
            window: window + 1,
            depth,
            ..WindowMetrics::default()
        };
        let mut fatal = None;
        let mut candidates = Vec::new();
        for out in outputs {
            wm.executed += out.checks;
            wm.succeeded += out.checks_ok;
            wm.statements += out.statements;
            wm.statements_succeeded += out.statements_ok;
            candidates.extend(out.candidates);
            if fatal.is_none() {
                fatal = out.fatal;
            }
        }
        total += wm.statements;
        for cand in candidates {
            if fatal.is_some() {
                break;
            }
            match coord.process(cand) {
                Ok(Classification::New) => wm.bugs_new += 1,
                Ok(Classification::PotentialDuplicate(_)) => wm.bugs_dup += 1,
                Err(CampaignFailure::Fatal(m)) => fatal = Some(m),
                Err(CampaignFailure::Io(e)) => return Err(e.into()),
            }
        }
        if cfg.feedback {
            match workers.first().and_then(|w| w.stats.as_ref()) {
                Some(_) => workers
                    .iter_mut()
                    .flat_map(|w| w.stats.as_mut())
                    .for_each(|s| {
                        s.classify_all(&cfg.inference);
                    }),
                None => {
                    store.classify_all(&cfg.inference);
                }
            }
        }
        depth = current_depth(total, &cfg.gen);
        for w in &mut workers {
            let states = w.stats.as_ref().unwrap_or(&store).states().to_vec();
            w.gen.sync(&states, depth);
        }
        if wm.statements > 0 {
            writeln!(metrics_file, "{}", wm.tsv_line())?;
            metrics_file.flush()?;
            log::info!(
                "window {}: {} checks, validity {:.3}, depth {}, {} new / {} duplicate",
                wm.window,
                wm.executed,
                wm.validity(),
                wm.depth,
                wm.bugs_new,
                wm.bugs_dup
            );
            coord.metrics.windows.push(wm);
        }
        window += 1;
        if let Some(m) = fatal {
            log::error!("fatal: {m}");
            coord.metrics.fatal = Some(m);
            break;
        }
    }

    for w in &mut workers {
        if let Some(s) = &w.stats {
            store.absorb(s);
        }
        w.adapter.close();
    }
    if let Some((_, a)) = coord.reducer.as_mut() {
        a.close();
    }
    if cfg.feedback {
        store.classify_all(&cfg.inference);
    }
    let mut metrics = coord.metrics;
    for w in &metrics.windows {
        metrics.statements_executed += w.statements;
        metrics.statements_succeeded += w.statements_succeeded;
        metrics.checks_executed += w.executed;
        metrics.checks_succeeded += w.succeeded;
    }
    metrics.stats = store.records();
    if let Some(p) = &cfg.stats_path {
        persist_stats(&metrics.stats, p)?;
    }
    Ok(metrics)
}

/// Same states, zero counters.
fn blank_copy(store: &StatsStore) -> StatsStore {
    let records: Vec<FeatureStats> = store
        .records()
        .into_iter()
        .map(|r| FeatureStats { n: 0, y: 0, ..r })
        .collect();
    StatsStore::from_records(Arc::clone(store.catalog()), &records)
        .expect("records come from the same catalog")
}

/// Runs every worker up to its share of `target` cumulative statements.
fn run_window(
    workers: &mut [Worker],
    shared: &StatsStore,
    catalog: &Arc<Catalog>,
    cfg: &CampaignConfig,
    target: u64,
    deadline: Option<Instant>,
) -> Vec<WindowOutput> {
    let n = workers.len() as u64;
    let share = |i: usize| target / n + u64::from((i as u64) < target % n);
    if workers.len() == 1 {
        let w = &mut workers[0];
        return vec![w.run(shared, catalog, cfg, share(0), deadline)];
    }
    std::thread::scope(|s| {
        let handles: Vec<_> = workers
            .iter_mut()
            .enumerate()
            .map(|(i, w)| {
                let quota = share(i);
                s.spawn(move || w.run(shared, catalog, cfg, quota, deadline))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    })
}

/// A failing check as found, with what is needed to reduce and triage it.
struct Candidate {
    case: TestCase,
    verdict: OracleVerdict,
    schema: SchemaModel,
}

#[derive(Default)]
struct WindowOutput {
    checks: u64,
    checks_ok: u64,
    statements: u64,
    statements_ok: u64,
    candidates: Vec<Candidate>,
    fatal: Option<String>,
}

struct Worker {
    index: usize,
    adapter: Box<dyn Adapter>,
    gen: Generator,
    /// Present with isolated statistics.
    stats: Option<StatsStore>,
    schema: SchemaModel,
    /// Successful setup statements of the current database, for reproducers.
    setup_log: Vec<String>,
    checks_on_db: u64,
    needs_setup: bool,
    next_tlp: bool,
    /// Cumulative statements executed.
    statements: u64,
}

enum Step {
    Ran,
    Idle,
}

impl Worker {
    fn new(
        index: usize,
        adapter: Box<dyn Adapter>,
        gen: Generator,
        stats: Option<StatsStore>,
    ) -> Worker {
        Worker {
            index,
            adapter,
            gen,
            stats,
            schema: SchemaModel::new(),
            setup_log: Vec::new(),
            checks_on_db: 0,
            needs_setup: true,
            next_tlp: true,
            statements: 0,
        }
    }

    fn run(
        &mut self,
        shared: &StatsStore,
        catalog: &Catalog,
        cfg: &CampaignConfig,
        quota: u64,
        deadline: Option<Instant>,
    ) -> WindowOutput {
        let mut out = WindowOutput::default();
        let mut stalled = 0;
        while self.statements < quota && !deadline.is_some_and(|d| Instant::now() >= d) {
            let step = if self.needs_setup {
                self.setup(shared, catalog, cfg, &mut out)
            } else {
                self.check(shared, catalog, cfg, &mut out)
            };
            match step {
                Ok(Step::Ran) => stalled = 0,
                Ok(Step::Idle) => {
                    stalled += 1;
                    if stalled >= STALL_LIMIT {
                        out.fatal = Some(format!(
                            "worker {}: no statement can be generated",
                            self.index
                        ));
                        break;
                    }
                }
                Err(m) => {
                    out.fatal = Some(m);
                    break;
                }
            }
        }
        out
    }

    fn record(&self, shared: &StatsStore, features: &[usize], ok: bool, out: &mut WindowOutput) {
        self.stats
            .as_ref()
            .unwrap_or(shared)
            .record_indices(features, ok);
        out.statements += 1;
        out.statements_ok += u64::from(ok);
    }

    /// Builds a fresh database: tables, rows, indexes, a view, maybe ANALYZE.
    fn setup(
        &mut self,
        shared: &StatsStore,
        catalog: &Catalog,
        cfg: &CampaignConfig,
        out: &mut WindowOutput,
    ) -> Result<Step, String> {
        self.adapter.reset().map_err(|e| e.to_string())?;
        self.schema = SchemaModel::new();
        self.setup_log.clear();
        self.checks_on_db = 0;
        let before = out.statements;
        let tables = self.gen.rng().gen_range(1..=cfg.gen.max_tables.max(1));
        for _ in 0..tables {
            self.ddl(StatementKind::CreateTable, shared, catalog, out)?;
        }
        let base = self.schema.tables().len();
        let inserts: usize = (0..base).map(|_| self.gen.rng().gen_range(1..=3)).sum();
        for _ in 0..inserts {
            self.ddl(StatementKind::Insert, shared, catalog, out)?;
        }
        let indexes = self.gen.rng().gen_range(0..=2);
        for _ in 0..indexes {
            self.ddl(StatementKind::CreateIndex, shared, catalog, out)?;
        }
        let views = self.gen.rng().gen_range(0..=cfg.gen.max_views);
        for _ in 0..views {
            self.ddl(StatementKind::CreateView, shared, catalog, out)?;
        }
        if self.gen.rng().gen_bool(ANALYZE_PROBABILITY) {
            self.ddl(StatementKind::Analyze, shared, catalog, out)?;
        }
        if let ExecutionStatus::Fatal(m) = self.adapter.post_setup() {
            return Err(m);
        }
        let ran = out.statements > before;
        if self.schema.tables().is_empty() {
            if !ran {
                return Err("no table can be created: CREATE TABLE is suppressed".into());
            }
            return Ok(Step::Ran);
        }
        self.needs_setup = false;
        Ok(if ran { Step::Ran } else { Step::Idle })
    }

    fn ddl(
        &mut self,
        kind: StatementKind,
        shared: &StatsStore,
        catalog: &Catalog,
        out: &mut WindowOutput,
    ) -> Result<(), String> {
        let g = match self.gen.generate_statement(kind, &mut self.schema) {
            Ok(g) => g,
            Err(GenError::Suppressed(_) | GenError::Exhausted(_) | GenError::EmptySchema(_)) => {
                return Ok(())
            }
        };
        let staged = self.schema.stage(catalog, &g.ast);
        let status = self.adapter.execute(&g.sql);
        if let ExecutionStatus::Fatal(m) = status {
            return Err(m);
        }
        let features: Vec<usize> = g.features.into_iter().collect();
        self.record(shared, &features, status.is_success(), out);
        if status.is_success() {
            self.setup_log.push(g.sql);
        }
        self.schema.commit(staged, &status);
        self.statements += 1;
        Ok(())
    }

    fn check(
        &mut self,
        shared: &StatsStore,
        catalog: &Catalog,
        cfg: &CampaignConfig,
        out: &mut WindowOutput,
    ) -> Result<Step, String> {
        let case = match self.gen.generate_case(&self.schema) {
            Ok(c) => c,
            Err(GenError::Suppressed(_)) => return Err("SELECT is suppressed".into()),
            Err(GenError::Exhausted(_) | GenError::EmptySchema(_)) => {
                self.needs_setup = true;
                return Ok(Step::Idle);
            }
        };
        let oracle = match cfg.oracle {
            OracleChoice::Tlp => OracleKind::Tlp,
            OracleChoice::Norec => OracleKind::Norec,
            OracleChoice::Both => {
                self.next_tlp = !self.next_tlp;
                if self.next_tlp {
                    OracleKind::Norec
                } else {
                    OracleKind::Tlp
                }
            }
        };
        let queries = oracle_queries(oracle, catalog, &case.base, &case.predicate);
        let texts: Vec<String> = queries.iter().map(|q| render_select(catalog, q)).collect();
        let run = match check_texts(oracle, &texts, &mut *self.adapter) {
            Ok(r) => r,
            Err(OracleError::Fatal(m)) => return Err(m),
            Err(e) => return Err(e.to_string()),
        };
        for (q, ok) in queries.into_iter().zip(&run.succeeded) {
            let features: Vec<usize> =
                statement_features(catalog, &Statement::Select(q), &self.schema)
                    .into_iter()
                    .collect();
            self.record(shared, &features, *ok, out);
        }
        self.statements += run.succeeded.len() as u64;
        out.checks += 1;
        out.checks_ok += u64::from(!matches!(run.verdict.status, VerdictStatus::Skip(_)));
        if run.verdict.is_fail() {
            out.candidates.push(Candidate {
                case: TestCase {
                    oracle,
                    setup: self.setup_log.clone(),
                    base: case.base,
                    predicate: case.predicate,
                },
                verdict: run.verdict,
                schema: self.schema.clone(),
            });
        }
        self.checks_on_db += 1;
        if self.checks_on_db >= cfg.checks_per_database {
            self.needs_setup = true;
        }
        Ok(Step::Ran)
    }
}

enum CampaignFailure {
    Fatal(String),
    Io(io::Error),
}

/// Owns reduction, triage and reporting.
struct Coordinator<'a> {
    cfg: &'a CampaignConfig,
    catalog: Arc<Catalog>,
    registry: &'a AdapterRegistry,
    /// Opened on first use, as session number `workers`.
    reducer: Option<(usize, Box<dyn Adapter>)>,
    history: HistoryStore,
    next_id: u64,
    metrics: CampaignMetrics,
}

impl Coordinator<'_> {
    fn process(&mut self, cand: Candidate) -> Result<Classification, CampaignFailure> {
        if self.reducer.is_none() {
            let session = self.cfg.workers;
            let a = self
                .registry
                .open(&self.cfg.target, session, &self.catalog)
                .map_err(|e| CampaignFailure::Fatal(e.to_string()))?;
            self.reducer = Some((session, a));
        }
        let (_, adapter) = self.reducer.as_mut().expect("opened above");
        let catalog = &*self.catalog;
        let mut check = |c: &TestCase| Ok(replay(catalog, &mut **adapter, c)?.verdict.is_fail());
        let red = reduce(catalog, &cand.case, &mut check, REPLAY_BUDGET)
            .map_err(|e| CampaignFailure::Fatal(e.to_string()))?;
        let features = signature(catalog, &red.case, &cand.schema);
        let id = self.next_id;
        self.next_id += 1;
        let set = features.iter().cloned().collect();
        let classification = classify(&set, id, &mut self.history);
        let r = report::BugReport {
            id,
            original: cand.case,
            case: red.case,
            reduced: red.reduced,
            verdict: cand.verdict,
            features,
            classification,
        };
        let dir =
            report::write_report(&self.cfg.out_dir, catalog, &r).map_err(CampaignFailure::Io)?;
        log::info!("bug {id}: {classification} ({} replays)", red.replays);
        self.metrics.bugs.push(BugSummary {
            id,
            classification,
            reduced: r.reduced,
            dir,
        });
        Ok(classification)
    }
}

/// Triage signature of a case: the features of `base WHERE p`, without
/// composite argument types and abstract properties, which mostly restate
/// the functions and operators already in the set.
pub fn signature(catalog: &Catalog, case: &TestCase, schema: &SchemaModel) -> Vec<FeatureId> {
    statement_features(catalog, &Statement::Select(case.filtered_query()), schema)
        .into_iter()
        .filter(|&i| {
            !matches!(
                catalog.category(i),
                Category::CompositeArgType | Category::AbstractProperty
            )
        })
        .map(|i| catalog.id(i).clone())
        .collect()
}

/// One parsed metrics line: window, executed, succeeded, validity, new bugs, duplicates.
pub type MetricsRow = (u64, u64, u64, f64, u64, u64);

/// Reads the metrics lines written by a campaign.
pub fn read_metrics(path: &Path) -> io::Result<Vec<MetricsRow>> {
    let text = fs::read_to_string(path)?;
    let bad = |l: &str| {
        io::Error::new(
            io::ErrorKind::InvalidData,
            format!("bad metrics line `{l}`"),
        )
    };
    text.lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            if f.len() != 6 {
                return Err(bad(l));
            }
            let int = |s: &str| s.parse::<u64>().map_err(|_| bad(l));
            Ok((
                int(f[0])?,
                int(f[1])?,
                int(f[2])?,
                f[3].parse().map_err(|_| bad(l))?,
                int(f[4])?,
                int(f[5])?,
            ))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adapter::mock::MockSpec;

    fn mock_target(dir: &Path, spec: &MockSpec, c: &Catalog) -> String {
        let p = dir.join("dialect.spec");
        fs::write(&p, spec.to_file_string(c)).unwrap();
        format!("mock:{}", p.display())
    }

    #[test]
    fn zero_budget_writes_header_and_stats() {
        let dir = tempfile::tempdir().unwrap();
        let c = Arc::new(Catalog::default_catalog());
        let mut cfg = CampaignConfig::new(
            mock_target(dir.path(), &MockSpec::full(&c), &c),
            dir.path().join("out"),
        );
        cfg.budget = Some(0);
        cfg.stats_path = Some(dir.path().join("stats.tsv"));
        let m = run_campaign(&cfg).unwrap();
        assert!(m.windows.is_empty());
        assert_eq!(
            fs::read_to_string(dir.path().join("out/metrics.tsv")).unwrap(),
            format!("{METRICS_HEADER}\n")
        );
        assert!(dir.path().join("stats.tsv").exists());
    }

    #[test]
    fn windows_partition_the_budget() {
        let dir = tempfile::tempdir().unwrap();
        let c = Arc::new(Catalog::default_catalog());
        let mut cfg = CampaignConfig::new(
            mock_target(dir.path(), &MockSpec::full(&c), &c),
            dir.path().join("out"),
        )
        .with_interval(500);
        cfg.budget = Some(1800);
        cfg.workers = 3;
        cfg.oracle = OracleChoice::Both;
        let m = run_campaign(&cfg).unwrap();
        assert_eq!(m.windows.len(), 4);
        assert!(m.statements_executed >= 1800 && m.statements_executed < 1800 + 3 * 4);
        assert_eq!(m.fatal, None);
        assert!(m.bugs.is_empty());
        // The mock is statically typed: once implicit casts are learned to be
        // Unsupported the generator turns typed and every check is valid.
        let unsupported: Vec<&str> = m.unsupported().iter().map(|f| f.as_str()).collect();
        assert_eq!(unsupported, [crate::feature::ids::IMPLICIT_CAST]);
        assert_eq!(m.windows[3].validity(), 1.0);
        let lines = read_metrics(&dir.path().join("out/metrics.tsv")).unwrap();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0].1, m.windows[0].executed);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = CampaignConfig::new("mock:x", "/nonexistent");
        assert!(matches!(run_campaign(&cfg), Err(CampaignError::Config(_))));
        cfg.budget = Some(1);
        cfg.workers = 0;
        assert!(matches!(run_campaign(&cfg), Err(CampaignError::Config(_))));
    }
}
