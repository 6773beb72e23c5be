//! Bug report directories and the recheck command.
//!
//! ```text
//! DIR/bugs/bug-0001/
//!   reproduce.sql        reduced statements, then the check's queries
//!   reproduce.orig.sql   the case as found
//!   oracle.txt           queries and both observed results
//!   features.txt         feature ids, sorted, one per line
//!   classification.txt   `new` or `potential-duplicate-of <id>`
//! ```

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::adapter::{Adapter, ExecutionStatus};
use crate::feature::{Catalog, FeatureId};
use crate::oracle::{check_texts, OracleError, OracleKind, OracleVerdict, VerdictStatus};
use crate::prioritizer::Classification;
use crate::reducer::TestCase;

const ORACLE_PREFIX: &str = "-- oracle: ";
const CHECK_MARKER: &str = "-- check";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BugReport {
    pub id: u64,
    pub original: TestCase,
    pub case: TestCase,
    pub reduced: bool,
    pub verdict: OracleVerdict,
    pub features: Vec<FeatureId>,
    pub classification: Classification,
}

pub fn bugs_dir(out: &Path) -> PathBuf {
    out.join("bugs")
}

pub fn report_dir(out: &Path, id: u64) -> PathBuf {
    bugs_dir(out).join(format!("bug-{id:04}"))
}

/// A replayable script: setup statements, a marker, then the check's queries.
pub fn render_reproducer(catalog: &Catalog, case: &TestCase) -> String {
    let mut out = format!("{ORACLE_PREFIX}{}\n", case.oracle.token());
    for s in &case.setup {
        out.push_str(s);
        out.push_str(";\n");
    }
    out.push_str(CHECK_MARKER);
    out.push('\n');
    for q in case.queries(catalog) {
        out.push_str(&q);
        out.push_str(";\n");
    }
    out
}

/// A parsed reproducer script.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reproducer {
    pub oracle: OracleKind,
    pub setup: Vec<String>,
    pub queries: Vec<String>,
}

pub fn parse_reproducer(text: &str) -> Result<Reproducer, String> {
    let mut lines = text.lines();
    let oracle = lines
        .next()
        .and_then(|l| l.strip_prefix(ORACLE_PREFIX))
        .and_then(|t| OracleKind::from_token(t.trim()))
        .ok_or("first line must name the oracle")?;
    let strip = |l: &str| l.trim_end().trim_end_matches(';').to_string();
    let mut setup = Vec::new();
    let mut queries = Vec::new();
    let mut in_check = false;
    for l in lines {
        if l.trim() == CHECK_MARKER {
            in_check = true;
        } else if !l.trim().is_empty() {
            if in_check { &mut queries } else { &mut setup }.push(strip(l));
        }
    }
    if !in_check {
        return Err(format!("missing `{CHECK_MARKER}` line"));
    }
    if queries.len() != oracle.query_count() {
        return Err(format!(
            "{} needs {} queries, found {}",
            oracle.token(),
            oracle.query_count(),
            queries.len()
        ));
    }
    Ok(Reproducer {
        oracle,
        setup,
        queries,
    })
}

pub fn write_report(out: &Path, catalog: &Catalog, r: &BugReport) -> io::Result<PathBuf> {
    let dir = report_dir(out, r.id);
    fs::create_dir_all(&dir)?;
    fs::write(
        dir.join("reproduce.sql"),
        render_reproducer(catalog, &r.case),
    )?;
    fs::write(
        dir.join("reproduce.orig.sql"),
        render_reproducer(catalog, &r.original),
    )?;
    let note = if r.reduced {
        "reduced: yes\n"
    } else {
        "reduced: no (failure did not reproduce reliably)\n"
    };
    fs::write(dir.join("oracle.txt"), format!("{note}{}", r.verdict))?;
    let mut ids: Vec<&str> = r.features.iter().map(FeatureId::as_str).collect();
    ids.sort_unstable();
    let mut features = ids.join("\n");
    features.push('\n');
    fs::write(dir.join("features.txt"), features)?;
    fs::write(
        dir.join("classification.txt"),
        format!("{}\n", r.classification),
    )?;
    Ok(dir)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RecheckOutcome {
    Fail,
    Pass,
    Skip(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecheckEntry {
    pub name: String,
    pub outcome: RecheckOutcome,
}

/// Replays one reproducer on a fresh database.
pub fn replay_reproducer(
    adapter: &mut dyn Adapter,
    rep: &Reproducer,
) -> Result<OracleVerdict, OracleError> {
    adapter
        .reset()
        .map_err(|e| OracleError::Fatal(e.to_string()))?;
    for s in &rep.setup {
        if let ExecutionStatus::Fatal(m) = adapter.execute(s) {
            return Err(OracleError::Fatal(m));
        }
    }
    Ok(check_texts(rep.oracle, &rep.queries, adapter)?.verdict)
}

/// Replays every report under `out`, in directory-name order.
pub fn recheck(out: &Path, adapter: &mut dyn Adapter) -> Result<Vec<RecheckEntry>, OracleError> {
    let mut dirs: Vec<PathBuf> = match fs::read_dir(bugs_dir(out)) {
        Ok(rd) => rd
            .filter_map(Result::ok)
            .map(|e| e.path())
            .filter(|p| p.is_dir())
            .collect(),
        Err(_) => Vec::new(),
    };
    dirs.sort();
    let mut out = Vec::with_capacity(dirs.len());
    for dir in dirs {
        let name = dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let outcome = match fs::read_to_string(dir.join("reproduce.sql")) {
            Err(e) => RecheckOutcome::Skip(format!("cannot read reproduce.sql: {e}")),
            Ok(text) => match parse_reproducer(&text) {
                Err(e) => RecheckOutcome::Skip(e),
                Ok(rep) => match replay_reproducer(adapter, &rep)?.status {
                    VerdictStatus::Fail => RecheckOutcome::Fail,
                    VerdictStatus::Pass => RecheckOutcome::Pass,
                    VerdictStatus::Skip(why) => RecheckOutcome::Skip(why),
                },
            },
        };
        out.push(RecheckEntry { name, outcome });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sql::{Grammar, Statement};

    #[test]
    fn reproducer_roundtrip() {
        let c = Catalog::default_catalog();
        let g = Grammar::new(&c);
        let Statement::Select(base) = g.parse_statement("SELECT t0.c0 FROM t0").unwrap() else {
            unreachable!()
        };
        let case = TestCase {
            oracle: OracleKind::Norec,
            setup: vec![
                "CREATE TABLE t0(c0 INT)".into(),
                "INSERT INTO t0(c0) VALUES ('a;b')".into(),
            ],
            base,
            predicate: g.parse_expr("(t0.c0 = 1)").unwrap(),
        };
        let text = render_reproducer(&c, &case);
        assert!(text.starts_with("-- oracle: norec\nCREATE TABLE t0(c0 INT);\n"));
        let rep = parse_reproducer(&text).unwrap();
        assert_eq!(rep.setup, case.setup);
        assert_eq!(rep.queries, case.queries(&c));
        assert!(parse_reproducer("CREATE TABLE t0(c0 INT);\n").is_err());
        assert!(parse_reproducer("-- oracle: tlp\n-- check\nSELECT 1;\n").is_err());
    }

    #[test]
    fn empty_directory_rechecks_to_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let c = std::sync::Arc::new(Catalog::default_catalog());
        let spec = crate::adapter::mock::MockSpec::full(&c);
        let mut m = crate::adapter::mock::MockAdapter::new(spec, c);
        assert!(recheck(dir.path(), &mut m).unwrap().is_empty());
        std::fs::create_dir_all(dir.path().join("bugs/bug-0001")).unwrap();
        let r = recheck(dir.path(), &mut m).unwrap();
        assert!(matches!(&r[0].outcome, RecheckOutcome::Skip(_)));
    }
}
