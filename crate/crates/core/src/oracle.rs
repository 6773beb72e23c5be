//! Metamorphic test oracles: ternary logic partitioning (TLP) and
//! non-optimizing reference engine construction (NoREC).
//!
//! Both issue every query of a check even after one fails, so each query's
//! outcome can be fed back as a separate execution.

use std::fmt;

use thiserror::Error;

use crate::adapter::{Adapter, Normalization, QueryError, ResultSet};
use crate::feature::{ids, Catalog};
use crate::sql::{render_select, Expr, Projection, Select, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OracleKind {
    Tlp,
    Norec,
}

impl OracleKind {
    pub fn token(self) -> &'static str {
        match self {
            OracleKind::Tlp => "tlp",
            OracleKind::Norec => "norec",
        }
    }

    pub fn from_token(t: &str) -> Option<OracleKind> {
        match t {
            "tlp" => Some(OracleKind::Tlp),
            "norec" => Some(OracleKind::Norec),
            _ => None,
        }
    }

    /// Queries per check.
    pub fn query_count(self) -> usize {
        match self {
            OracleKind::Tlp => 4,
            OracleKind::Norec => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VerdictStatus {
    Pass,
    Fail,
    Skip(String),
}

/// What one side of a check observed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Observed {
    Rows(ResultSet),
    Count(u64),
    Nothing,
}

impl fmt::Display for Observed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observed::Rows(r) => write!(f, "{} row(s)\n{r}", r.rows.len()),
            Observed::Count(n) => writeln!(f, "count {n}"),
            Observed::Nothing => writeln!(f, "(not available)"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleVerdict {
    pub oracle: OracleKind,
    pub original_query: String,
    pub derived_queries: Vec<String>,
    pub original_result: Observed,
    pub derived_result: Observed,
    pub status: VerdictStatus,
}

impl OracleVerdict {
    pub fn is_fail(&self) -> bool {
        self.status == VerdictStatus::Fail
    }

    /// Every query in issue order.
    pub fn queries(&self) -> Vec<String> {
        std::iter::once(self.original_query.clone())
            .chain(self.derived_queries.iter().cloned())
            .collect()
    }
}

impl fmt::Display for OracleVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "oracle: {}", self.oracle.token())?;
        let status = match &self.status {
            VerdictStatus::Pass => "pass".to_string(),
            VerdictStatus::Fail => "fail".to_string(),
            VerdictStatus::Skip(why) => format!("skip ({why})"),
        };
        writeln!(f, "status: {status}")?;
        writeln!(f, "original query:\n{}", self.original_query)?;
        writeln!(f, "derived queries:")?;
        for q in &self.derived_queries {
            writeln!(f, "{q}")?;
        }
        write!(f, "original result: {}", self.original_result)?;
        write!(f, "derived result: {}", self.derived_result)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("fatal: {0}")]
    Fatal(String),
    #[error("expected {expected} queries, got {got}")]
    Arity { expected: usize, got: usize },
}

/// A finished check: the verdict and whether each issued query succeeded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckRun {
    pub verdict: OracleVerdict,
    pub succeeded: Vec<bool>,
}

fn call(catalog: &Catalog, id: &str, arg: Expr) -> Expr {
    let feature = catalog
        .index_of(id)
        .unwrap_or_else(|| panic!("catalog lacks {id}"));
    Expr::Call {
        feature,
        args: vec![arg],
        dtype: Some(crate::feature::SqlType::Bool),
    }
}

/// Q0 = base; Q1..Q3 = base WHERE p, WHERE NOT p, WHERE p IS NULL.
pub fn tlp_queries(catalog: &Catalog, base: &Select, p: &Expr) -> Vec<Select> {
    let with = |filter: Expr| Select {
        filter: Some(filter),
        ..base.clone()
    };
    vec![
        base.clone(),
        with(p.clone()),
        with(call(catalog, ids::NOT, p.clone())),
        with(call(catalog, ids::IS_NULL, p.clone())),
    ]
}

/// `SELECT * FROM f WHERE p` and `SELECT (p IS TRUE) FROM f` over the base's FROM.
pub fn norec_queries(catalog: &Catalog, base: &Select, p: &Expr) -> Vec<Select> {
    vec![
        Select {
            distinct: false,
            projection: Projection::Star,
            from: base.from.clone(),
            filter: Some(p.clone()),
        },
        Select {
            distinct: false,
            projection: Projection::Exprs(vec![call(catalog, ids::IS_TRUE, p.clone())]),
            from: base.from.clone(),
            filter: None,
        },
    ]
}

pub fn oracle_queries(kind: OracleKind, catalog: &Catalog, base: &Select, p: &Expr) -> Vec<Select> {
    match kind {
        OracleKind::Tlp => tlp_queries(catalog, base, p),
        OracleKind::Norec => norec_queries(catalog, base, p),
    }
}

pub fn tlp_check(
    catalog: &Catalog,
    base: &Select,
    p: &Expr,
    adapter: &mut dyn Adapter,
) -> Result<CheckRun, OracleError> {
    let texts: Vec<String> = tlp_queries(catalog, base, p)
        .iter()
        .map(|q| render_select(catalog, q))
        .collect();
    check_texts(OracleKind::Tlp, &texts, adapter)
}

pub fn norec_check(
    catalog: &Catalog,
    base: &Select,
    p: &Expr,
    adapter: &mut dyn Adapter,
) -> Result<CheckRun, OracleError> {
    let texts: Vec<String> = norec_queries(catalog, base, p)
        .iter()
        .map(|q| render_select(catalog, q))
        .collect();
    check_texts(OracleKind::Norec, &texts, adapter)
}

/// Runs a check from already rendered queries, as stored in a bug report.
pub fn check_texts(
    kind: OracleKind,
    texts: &[String],
    adapter: &mut dyn Adapter,
) -> Result<CheckRun, OracleError> {
    if texts.len() != kind.query_count() {
        return Err(OracleError::Arity {
            expected: kind.query_count(),
            got: texts.len(),
        });
    }
    let mut results = Vec::with_capacity(texts.len());
    for t in texts {
        match adapter.query(t) {
            Ok(r) => results.push(Ok(r)),
            Err(QueryError::Fatal(m)) => return Err(OracleError::Fatal(m)),
            Err(QueryError::Error(m)) => results.push(Err(m)),
        }
    }
    let succeeded = results.iter().map(Result::is_ok).collect();
    let norm = adapter.normalization();
    let mut verdict = OracleVerdict {
        oracle: kind,
        original_query: texts[0].clone(),
        derived_queries: texts[1..].to_vec(),
        original_result: Observed::Nothing,
        derived_result: Observed::Nothing,
        status: VerdictStatus::Pass,
    };
    if let Some((i, e)) = results
        .iter()
        .enumerate()
        .find_map(|(i, r)| r.as_ref().err().map(|e| (i, e)))
    {
        verdict.status = VerdictStatus::Skip(format!("query {i} failed: {e}"));
        return Ok(CheckRun { verdict, succeeded });
    }
    let mut results: Vec<ResultSet> = results
        .into_iter()
        .map(|r| r.expect("errors handled above"))
        .collect();
    match kind {
        OracleKind::Tlp => {
            let mut union = ResultSet {
                columns: results[1].columns,
                rows: Vec::new(),
            };
            for r in &mut results[1..] {
                if r.columns != union.columns {
                    union.columns = usize::MAX;
                }
                union.rows.append(&mut r.rows);
            }
            let same = union.columns != usize::MAX && compare_multisets(&results[0], &union, norm);
            verdict.status = if same {
                VerdictStatus::Pass
            } else {
                VerdictStatus::Fail
            };
            verdict.derived_result = Observed::Rows(union);
            verdict.original_result = Observed::Rows(results.swap_remove(0));
        }
        OracleKind::Norec => {
            let optimized = results[0].rows.len() as u64;
            let unoptimized = results[1]
                .rows
                .iter()
                .filter(|r| r.first().is_some_and(is_true))
                .count() as u64;
            verdict.status = if optimized == unoptimized {
                VerdictStatus::Pass
            } else {
                VerdictStatus::Fail
            };
            verdict.original_result = Observed::Count(optimized);
            verdict.derived_result = Observed::Count(unoptimized);
        }
    }
    Ok(CheckRun { verdict, succeeded })
}

/// Engines without a boolean type report `x IS TRUE` as 1.
fn is_true(v: &Value) -> bool {
    matches!(v, Value::Bool(true) | Value::Int(1))
}

fn normalize(v: &Value, norm: Normalization) -> Value {
    match (v, norm) {
        (Value::Int(i), Normalization::Dynamic) => Value::Text(i.to_string()),
        _ => v.clone(),
    }
}

/// Order-insensitive multiset equality after cell normalization.
pub fn compare_multisets(a: &ResultSet, b: &ResultSet, norm: Normalization) -> bool {
    if a.columns != b.columns || a.rows.len() != b.rows.len() {
        return false;
    }
    let sorted = |r: &ResultSet| {
        let mut rows: Vec<Vec<Value>> = r
            .rows
            .iter()
            .map(|row| row.iter().map(|v| normalize(v, norm)).collect())
            .collect();
        rows.sort_unstable();
        rows
    };
    sorted(a) == sorted(b)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::adapter::mock::{MockAdapter, MockSpec};
    use crate::sql::Grammar;

    fn rs(rows: &[&[Value]]) -> ResultSet {
        ResultSet::new(
            rows.first().map_or(1, |r| r.len()),
            rows.iter().map(|r| r.to_vec()).collect(),
        )
    }

    #[test]
    fn multiset_comparison() {
        use Normalization::*;
        let one = Value::Int(1);
        let two = Value::Int(2);
        assert!(compare_multisets(
            &rs(&[std::slice::from_ref(&one), std::slice::from_ref(&two)]),
            &rs(&[&[two], std::slice::from_ref(&one)]),
            Static
        ));
        assert!(!compare_multisets(
            &rs(&[std::slice::from_ref(&one), std::slice::from_ref(&one)]),
            &rs(&[std::slice::from_ref(&one)]),
            Static
        ));
        let text = rs(&[&[Value::Text("1".into())]]);
        assert!(!compare_multisets(
            &rs(&[std::slice::from_ref(&one)]),
            &text,
            Static
        ));
        assert!(compare_multisets(
            &rs(&[std::slice::from_ref(&one)]),
            &text,
            Dynamic
        ));
        assert!(compare_multisets(
            &rs(&[&[Value::Null]]),
            &rs(&[&[Value::Null]]),
            Static
        ));
        assert!(!compare_multisets(
            &ResultSet::new(1, vec![]),
            &ResultSet::new(2, vec![]),
            Static
        ));
    }

    fn setup(spec: &str) -> (Arc<Catalog>, Grammar, MockAdapter) {
        let c = Arc::new(Catalog::default_catalog());
        let mut m = MockAdapter::new(MockSpec::parse(spec, &c).unwrap(), Arc::clone(&c));
        for s in [
            "CREATE TABLE t0(c0 INT)",
            "INSERT INTO t0(c0) VALUES (0), (1), (NULL), (2)",
        ] {
            assert!(crate::adapter::Adapter::execute(&mut m, s).is_success());
        }
        let g = Grammar::new(&c);
        (c, g, m)
    }

    fn base(g: &Grammar) -> Select {
        match g.parse_statement("SELECT t0.c0 FROM t0").unwrap() {
            crate::sql::Statement::Select(s) => s,
            _ => unreachable!(),
        }
    }

    #[test]
    fn tlp_partitions_on_a_correct_target() {
        let (c, g, mut m) = setup("[supported]\n*\n");
        for p in ["(t0.c0 > 0)", "TRUE", "NULL", "(NULLIF(t0.c0, 2) != 1)"] {
            let run = tlp_check(&c, &base(&g), &g.parse_expr(p).unwrap(), &mut m).unwrap();
            assert_eq!(run.verdict.status, VerdictStatus::Pass, "{p}");
            assert_eq!(run.succeeded, vec![true; 4]);
        }
        let run = tlp_check(&c, &base(&g), &g.parse_expr("(t0.c0 > 0)").unwrap(), &mut m).unwrap();
        assert_eq!(
            run.verdict.derived_queries[1],
            "SELECT t0.c0 FROM t0 WHERE (NOT (t0.c0 > 0))"
        );
        assert!(matches!(&run.verdict.original_result, Observed::Rows(r) if r.rows.len() == 4));
    }

    #[test]
    fn norec_counts_on_a_correct_target() {
        let (c, g, mut m) = setup("[supported]\n*\n");
        let run =
            norec_check(&c, &base(&g), &g.parse_expr("(t0.c0 = 1)").unwrap(), &mut m).unwrap();
        assert_eq!(run.verdict.status, VerdictStatus::Pass);
        assert_eq!(run.verdict.original_result, Observed::Count(1));
        assert_eq!(
            run.verdict.derived_queries[0],
            "SELECT ((t0.c0 = 1) IS TRUE) FROM t0"
        );
    }

    #[test]
    fn injected_bug_fails_both_oracles() {
        let (c, g, mut m) = setup("[supported]\n*\n[bugs]\nNULLIF,!=\tfirst-arg NULLIF\n");
        let p = g.parse_expr("(NULLIF(t0.c0, 2) != 1)").unwrap();
        assert_eq!(
            tlp_check(&c, &base(&g), &p, &mut m).unwrap().verdict.status,
            VerdictStatus::Fail
        );
        assert_eq!(
            norec_check(&c, &base(&g), &p, &mut m)
                .unwrap()
                .verdict
                .status,
            VerdictStatus::Fail
        );
    }

    #[test]
    fn errors_skip_and_fatal_propagates() {
        let (c, g, mut m) = setup("[supported]\n*\n-IS_TRUE\n");
        let p = g.parse_expr("(t0.c0 = 1)").unwrap();
        let run = norec_check(&c, &base(&g), &p, &mut m).unwrap();
        assert!(matches!(run.verdict.status, VerdictStatus::Skip(_)));
        assert_eq!(run.succeeded, vec![true, false]);
        m.kill();
        assert!(matches!(
            tlp_check(&c, &base(&g), &p, &mut m),
            Err(OracleError::Fatal(_))
        ));
    }
}
