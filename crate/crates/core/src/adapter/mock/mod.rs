//! The mock dialect: an in-process SQL interpreter with declared feature
//! support and injectable logic bugs. It reads the same SQL text any other
//! target would receive.

mod eval;
mod spec;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use eval::{cmp_values, glob, like, to_bool, to_int, to_text, CExpr, Op};
pub use spec::{BugEffect, BugInjection, MockSpec, SpecError, Typing};

use super::{Adapter, ExecutionStatus, Normalization, QueryError, ResultSet, Row};
use crate::feature::{ids, Catalog, SqlType};
use crate::schema::{SchemaObject, TableKind};
use crate::sql::{
    expr_features, infer_expr, statement_features, ColumnDef, ColumnTypes, Expr, FromClause,
    Grammar, JoinKind, Projection, Select, Statement, Value,
};

#[derive(Clone, Debug, Default)]
struct TableData {
    columns: Vec<ColumnDef>,
    rows: Vec<Row>,
}

#[derive(Clone, Debug)]
struct ViewData {
    columns: Vec<ColumnDef>,
    select: Select,
}

#[derive(Clone, Debug)]
struct IndexData {
    table: String,
    columns: Vec<String>,
    unique: bool,
}

#[derive(Clone, Debug, Default)]
struct Db {
    tables: BTreeMap<String, TableData>,
    views: BTreeMap<String, ViewData>,
    indexes: BTreeMap<String, IndexData>,
}

impl Db {
    fn exists(&self, name: &str) -> bool {
        self.tables.contains_key(name)
            || self.views.contains_key(name)
            || self.indexes.contains_key(name)
    }
}

impl ColumnTypes for Db {
    fn columns_of(&self, table: &str) -> Option<Vec<(String, SqlType)>> {
        let cols = self
            .tables
            .get(table)
            .map(|t| &t.columns)
            .or_else(|| self.views.get(table).map(|v| &v.columns))?;
        Some(cols.iter().map(|c| (c.name.clone(), c.dtype)).collect())
    }
}

/// Columns of an intermediate result, qualified by their source table.
type Scope = Vec<(String, String)>;

struct Bug {
    trigger: BTreeSet<usize>,
    effect: BugEffect,
    target: usize,
}

pub struct MockAdapter {
    catalog: Arc<Catalog>,
    grammar: Grammar,
    spec: MockSpec,
    ops: Vec<Option<Op>>,
    supported: Vec<bool>,
    flaky: Vec<(usize, f64)>,
    bugs: Vec<Bug>,
    db: Db,
    rng: ChaCha8Rng,
    alive: bool,
}

type EvalResult<T> = Result<T, String>;

impl MockAdapter {
    pub fn new(spec: MockSpec, catalog: Arc<Catalog>) -> MockAdapter {
        let ops = (0..catalog.len())
            .map(|i| Op::for_feature(catalog.id(i).as_str()))
            .collect();
        let supported = (0..catalog.len())
            .map(|i| spec.supports(&catalog, i))
            .collect();
        let index = |id: &crate::feature::FeatureId| {
            catalog
                .index_of_id(id)
                .expect("spec features come from the catalog")
        };
        let flaky = spec.flaky.iter().map(|(id, p)| (index(id), *p)).collect();
        let bugs = spec
            .bugs
            .iter()
            .map(|b| Bug {
                trigger: b.trigger.iter().map(index).collect(),
                effect: b.effect,
                target: index(&b.target),
            })
            .collect();
        MockAdapter {
            grammar: Grammar::new(&catalog),
            rng: ChaCha8Rng::seed_from_u64(spec.seed),
            catalog,
            spec,
            ops,
            supported,
            flaky,
            bugs,
            db: Db::default(),
            alive: true,
        }
    }

    pub fn spec(&self) -> &MockSpec {
        &self.spec
    }

    /// Simulates losing the session; every later call is Fatal.
    pub fn kill(&mut self) {
        self.alive = false;
    }

    /// The interpreter's own catalog, in the schema model's terms.
    pub fn catalog_snapshot(&self) -> BTreeMap<String, SchemaObject> {
        let cols = |c: &[ColumnDef]| c.iter().map(|c| (c.name.clone(), c.dtype)).collect();
        let mut out = BTreeMap::new();
        for (n, t) in &self.db.tables {
            out.insert(
                n.clone(),
                SchemaObject::Table {
                    kind: TableKind::BaseTable,
                    columns: cols(&t.columns),
                },
            );
        }
        for (n, v) in &self.db.views {
            out.insert(
                n.clone(),
                SchemaObject::Table {
                    kind: TableKind::View,
                    columns: cols(&v.columns),
                },
            );
        }
        for (n, i) in &self.db.indexes {
            out.insert(
                n.clone(),
                SchemaObject::Index {
                    table: i.table.clone(),
                    columns: i.columns.clone(),
                    unique: i.unique,
                },
            );
        }
        out
    }

    /// Evaluates a query with no injected bugs. Ground truth for oracle tests.
    pub fn reference_eval(&self, select: &Select) -> Result<ResultSet, String> {
        self.check_support(&Statement::Select(select.clone()))?;
        self.eval_select(select, false)
    }

    pub fn reference_query(&self, sql: &str) -> Result<ResultSet, String> {
        match self
            .grammar
            .parse_statement(sql)
            .map_err(|e| e.to_string())?
        {
            Statement::Select(sel) => self.reference_eval(&sel),
            _ => Err("not a query".into()),
        }
    }

    fn check_support(&self, stmt: &Statement) -> Result<Vec<usize>, String> {
        let features = statement_features(&self.catalog, stmt, &self.db);
        for &f in &features {
            if !self.supported[f] {
                return Err(format!("unsupported: {}", self.catalog.id(f)));
            }
        }
        Ok(features.into_iter().collect())
    }

    fn admit(&mut self, sql: &str) -> Result<Statement, String> {
        if !self.alive {
            return Err(String::new());
        }
        let stmt = self
            .grammar
            .parse_statement(sql)
            .map_err(|e| e.to_string())?;
        let features = self.check_support(&stmt)?;
        for &(f, p) in &self.flaky {
            if features.binary_search(&f).is_ok() && !self.rng.gen_bool(p) {
                return Err(format!("transient failure in {}", self.catalog.id(f)));
            }
        }
        Ok(stmt)
    }

    fn relation(&self, name: &str) -> EvalResult<(Scope, Vec<Row>)> {
        if let Some(t) = self.db.tables.get(name) {
            let scope = t
                .columns
                .iter()
                .map(|c| (name.to_string(), c.name.clone()))
                .collect();
            return Ok((scope, t.rows.clone()));
        }
        if let Some(v) = self.db.views.get(name) {
            let rows = self.eval_select(&v.select, false)?.rows;
            let scope = v
                .columns
                .iter()
                .map(|c| (name.to_string(), c.name.clone()))
                .collect();
            return Ok((scope, rows));
        }
        Err(format!("no such table: {name}"))
    }

    fn from(&self, from: &FromClause) -> EvalResult<(Scope, Vec<Row>)> {
        let mut seen = HashSet::new();
        for t in from.tables() {
            if !seen.insert(t) {
                return Err(format!("table {t} appears twice"));
            }
        }
        let (mut scope, mut rows) = self.relation(&from.first)?;
        for join in &from.joins {
            let (rscope, rrows) = self.relation(&join.table)?;
            let lw = scope.len();
            let mut joined_scope = scope.clone();
            joined_scope.extend(rscope.iter().cloned());
            let rw = rscope.len();
            let matches: Box<dyn Fn(&Row) -> bool> = match join.kind {
                JoinKind::Cross => Box::new(|_| true),
                JoinKind::Natural => {
                    let mut pairs = Vec::new();
                    for (ri, (_, rc)) in rscope.iter().enumerate() {
                        let left: Vec<usize> = scope
                            .iter()
                            .enumerate()
                            .filter(|(_, (_, c))| c == rc)
                            .map(|(i, _)| i)
                            .collect();
                        match left.as_slice() {
                            [] => {}
                            [li] => pairs.push((*li, lw + ri)),
                            _ => return Err(format!("ambiguous natural join column {rc}")),
                        }
                    }
                    Box::new(move |row: &Row| {
                        pairs.iter().all(|&(a, b)| {
                            !row[a].is_null()
                                && !row[b].is_null()
                                && cmp_values(&row[a], &row[b]).is_eq()
                        })
                    })
                }
                _ => {
                    let on = join.on.as_ref().ok_or("join needs ON")?;
                    let cond = self.compile(on, &joined_scope, &[])?;
                    Box::new(move |row: &Row| to_bool(&cond.eval(row)) == Some(true))
                }
            };
            let mut out = Vec::new();
            let mut right_used = vec![false; rrows.len()];
            for l in &rows {
                let mut any = false;
                for (ri, r) in rrows.iter().enumerate() {
                    let mut row = l.clone();
                    row.extend(r.iter().cloned());
                    if matches(&row) {
                        any = true;
                        right_used[ri] = true;
                        out.push(row);
                    }
                }
                if !any && matches!(join.kind, JoinKind::Left | JoinKind::Full) {
                    let mut row = l.clone();
                    row.extend(std::iter::repeat_n(Value::Null, rw));
                    out.push(row);
                }
            }
            if matches!(join.kind, JoinKind::Right | JoinKind::Full) {
                for (ri, r) in rrows.iter().enumerate() {
                    if !right_used[ri] {
                        let mut row = vec![Value::Null; lw];
                        row.extend(r.iter().cloned());
                        out.push(row);
                    }
                }
            }
            scope = joined_scope;
            rows = out;
        }
        Ok((scope, rows))
    }

    fn compile(&self, e: &Expr, scope: &Scope, bugs: &[(usize, BugEffect)]) -> EvalResult<CExpr> {
        Ok(match e {
            Expr::Constant { value, .. } => CExpr::Const(value.clone()),
            Expr::Column { col, .. } => CExpr::Col(
                scope
                    .iter()
                    .position(|(t, c)| *t == col.table && *c == col.column)
                    .ok_or_else(|| format!("no such column: {}.{}", col.table, col.column))?,
            ),
            Expr::Call { feature, args, .. } => {
                let op = self.ops[*feature]
                    .ok_or_else(|| format!("unsupported: {}", self.catalog.id(*feature)))?;
                if op.arity() != args.len() {
                    return Err(format!(
                        "wrong number of arguments to {}",
                        self.catalog.id(*feature)
                    ));
                }
                let args = args
                    .iter()
                    .map(|a| self.compile(a, scope, bugs))
                    .collect::<EvalResult<Vec<_>>>()?;
                let bug = bugs.iter().find(|(t, _)| t == feature).map(|(_, eff)| *eff);
                CExpr::Call { op, args, bug }
            }
            // Subqueries never see the outer row, so they fold to a constant.
            Expr::Exists(sel) => {
                CExpr::Const(Value::Bool(!self.eval_select(sel, false)?.rows.is_empty()))
            }
        })
    }

    fn active_bugs(&self, pred: &Expr) -> Vec<(usize, BugEffect)> {
        if self.bugs.is_empty() {
            return Vec::new();
        }
        if let Expr::Call { feature, .. } = pred {
            let id = self.catalog.id(*feature).as_str();
            if id == ids::NOT || id == ids::IS_NULL {
                return Vec::new();
            }
        }
        let features = expr_features(&self.catalog, pred, &self.db);
        self.bugs
            .iter()
            .filter(|b| b.trigger.is_subset(&features))
            .map(|b| (b.target, b.effect))
            .collect()
    }

    fn eval_select(&self, sel: &Select, with_bugs: bool) -> EvalResult<ResultSet> {
        let (scope, rows) = self.from(&sel.from)?;
        let rows = match &sel.filter {
            None => rows,
            Some(p) => {
                let bugs = if with_bugs {
                    self.active_bugs(p)
                } else {
                    Vec::new()
                };
                let cond = self.compile(p, &scope, &bugs)?;
                rows.into_iter()
                    .filter(|r| to_bool(&cond.eval(r)) == Some(true))
                    .collect()
            }
        };
        let (columns, mut out) = match &sel.projection {
            Projection::Star => (scope.len(), rows),
            Projection::Exprs(items) => {
                let exprs = items
                    .iter()
                    .map(|e| self.compile(e, &scope, &[]))
                    .collect::<EvalResult<Vec<_>>>()?;
                let out = rows
                    .iter()
                    .map(|r| exprs.iter().map(|e| e.eval(r)).collect())
                    .collect();
                (exprs.len(), out)
            }
        };
        if sel.distinct {
            let mut seen = HashSet::new();
            out.retain(|r: &Row| seen.insert(r.clone()));
        }
        Ok(ResultSet::new(columns, out))
    }

    fn unique_violation(&self, table: &str, rows: &[Row]) -> Option<String> {
        let t = &self.db.tables[table];
        for (name, idx) in self
            .db
            .indexes
            .iter()
            .filter(|(_, i)| i.unique && i.table == table)
        {
            let pos: Vec<usize> = idx
                .columns
                .iter()
                .map(|c| {
                    t.columns
                        .iter()
                        .position(|d| d.name == *c)
                        .expect("index columns exist")
                })
                .collect();
            let mut seen = HashSet::new();
            for r in rows {
                let key: Vec<&Value> = pos.iter().map(|&p| &r[p]).collect();
                if key.iter().any(|v| v.is_null()) {
                    continue;
                }
                if !seen.insert(key) {
                    return Some(format!("UNIQUE constraint failed: {name}"));
                }
            }
        }
        None
    }

    fn apply(&mut self, stmt: Statement) -> Result<(), String> {
        match stmt {
            Statement::CreateTable { name, columns } => {
                if self.db.exists(&name) {
                    return Err(format!("object {name} already exists"));
                }
                let mut names = HashSet::new();
                if let Some(c) = columns.iter().find(|c| !names.insert(&c.name)) {
                    return Err(format!("duplicate column {}", c.name));
                }
                self.db.tables.insert(
                    name,
                    TableData {
                        columns,
                        rows: Vec::new(),
                    },
                );
            }
            Statement::CreateIndex {
                name,
                table,
                columns,
                unique,
            } => {
                if self.db.exists(&name) {
                    return Err(format!("object {name} already exists"));
                }
                let t = self
                    .db
                    .tables
                    .get(&table)
                    .ok_or_else(|| format!("no such table: {table}"))?;
                if let Some(c) = columns
                    .iter()
                    .find(|c| !t.columns.iter().any(|d| d.name == **c))
                {
                    return Err(format!("no such column: {c}"));
                }
                self.db.indexes.insert(
                    name.clone(),
                    IndexData {
                        table: table.clone(),
                        columns,
                        unique,
                    },
                );
                if let Some(e) = self.unique_violation(&table, &self.db.tables[&table].rows) {
                    self.db.indexes.remove(&name);
                    return Err(e);
                }
            }
            Statement::CreateView {
                name,
                columns,
                select,
            } => {
                if self.db.exists(&name) {
                    return Err(format!("object {name} already exists"));
                }
                let width = self.eval_select(&select, false)?.columns;
                if width != columns.len() {
                    return Err(format!(
                        "view {name} has {} column names for {width} columns",
                        columns.len()
                    ));
                }
                let mut names = HashSet::new();
                if let Some(c) = columns.iter().find(|c| !names.insert(*c)) {
                    return Err(format!("duplicate column {c}"));
                }
                let types: Vec<SqlType> = match &select.projection {
                    Projection::Exprs(items) => items
                        .iter()
                        .map(|e| {
                            infer_expr(&self.catalog, e, &self.db)
                                .ok()
                                .flatten()
                                .unwrap_or(SqlType::Int)
                        })
                        .collect(),
                    Projection::Star => select
                        .from
                        .tables()
                        .filter_map(|t| self.db.columns_of(t))
                        .flat_map(|cols| cols.into_iter().map(|(_, t)| t))
                        .collect(),
                };
                let columns = columns
                    .into_iter()
                    .zip(types)
                    .map(|(name, dtype)| ColumnDef { name, dtype })
                    .collect();
                self.db.views.insert(name, ViewData { columns, select });
            }
            Statement::Insert {
                table,
                columns,
                rows,
            } => {
                let t = self
                    .db
                    .tables
                    .get(&table)
                    .ok_or_else(|| format!("no such table: {table}"))?;
                let mut pos = Vec::with_capacity(columns.len());
                for c in &columns {
                    let p = t
                        .columns
                        .iter()
                        .position(|d| d.name == *c)
                        .ok_or_else(|| format!("no such column: {c}"))?;
                    if pos.contains(&p) {
                        return Err(format!("column {c} listed twice"));
                    }
                    pos.push(p);
                }
                let width = t.columns.len();
                let mut new_rows = Vec::with_capacity(rows.len());
                for r in &rows {
                    if r.len() != columns.len() {
                        return Err(format!("{} values for {} columns", r.len(), columns.len()));
                    }
                    let mut row = vec![Value::Null; width];
                    for (p, e) in pos.iter().zip(r) {
                        row[*p] = self.compile(e, &Vec::new(), &[])?.eval(&[]);
                    }
                    new_rows.push(row);
                }
                let mut all = self.db.tables[&table].rows.clone();
                all.extend(new_rows);
                if let Some(e) = self.unique_violation(&table, &all) {
                    return Err(e);
                }
                self.db.tables.get_mut(&table).expect("checked above").rows = all;
            }
            Statement::Analyze => {}
            Statement::Select(sel) => {
                self.eval_select(&sel, true)?;
            }
        }
        Ok(())
    }
}

impl Adapter for MockAdapter {
    fn execute(&mut self, sql: &str) -> ExecutionStatus {
        if !self.alive {
            return ExecutionStatus::Fatal("session killed".into());
        }
        match self.admit(sql).and_then(|stmt| self.apply(stmt)) {
            Ok(()) => ExecutionStatus::Success,
            Err(e) => ExecutionStatus::Error(e),
        }
    }

    fn query(&mut self, sql: &str) -> Result<ResultSet, QueryError> {
        if !self.alive {
            return Err(QueryError::Fatal("session killed".into()));
        }
        match self.admit(sql).map_err(QueryError::Error)? {
            Statement::Select(sel) => self.eval_select(&sel, true).map_err(QueryError::Error),
            _ => Err(QueryError::Error("not a query".into())),
        }
    }

    fn reset(&mut self) -> Result<(), QueryError> {
        if !self.alive {
            return Err(QueryError::Fatal("session killed".into()));
        }
        self.db = Db::default();
        self.rng = ChaCha8Rng::seed_from_u64(self.spec.seed);
        Ok(())
    }

    fn normalization(&self) -> Normalization {
        match self.spec.typing {
            Typing::Static => Normalization::Static,
            Typing::Dynamic => Normalization::Dynamic,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mock(text: &str) -> MockAdapter {
        let c = Arc::new(Catalog::default_catalog());
        MockAdapter::new(MockSpec::parse(text, &c).unwrap(), c)
    }

    fn ints(r: &ResultSet) -> Vec<Option<i64>> {
        let mut v: Vec<Option<i64>> = r.rows.iter().map(|row| to_int(&row[0])).collect();
        v.sort();
        v
    }

    #[test]
    fn unsupported_feature_is_an_error() {
        let mut m = mock("[supported]\n*\n-INDEX\n");
        assert!(m.execute("CREATE TABLE t0(c0 INT)").is_success());
        assert_eq!(
            m.execute("CREATE INDEX i0 ON t0(c0)"),
            ExecutionStatus::Error("unsupported: INDEX".into())
        );
        assert!(matches!(
            m.query("SELECT * FROM t9"),
            Err(QueryError::Error(_))
        ));
    }

    #[test]
    fn select_semantics() {
        let mut m = mock("[supported]\n*\n");
        assert!(m.execute("CREATE TABLE t0(c0 INT)").is_success());
        assert!(m
            .execute("INSERT INTO t0(c0) VALUES (0), (1), (NULL)")
            .is_success());
        assert_eq!(
            m.query("SELECT t0.c0 FROM t0 WHERE NULL")
                .unwrap()
                .rows
                .len(),
            0
        );
        assert_eq!(
            ints(&m.query("SELECT t0.c0 FROM t0 WHERE (t0.c0 > 0)").unwrap()),
            vec![Some(1)]
        );
        let r = m.query("SELECT 1 FROM t0").unwrap();
        assert_eq!(r.rows, vec![vec![Value::Int(1)]; 3]);
        assert_eq!(m.query("SELECT DISTINCT 1 FROM t0").unwrap().rows.len(), 1);
    }

    #[test]
    fn joins() {
        let mut m = mock("[supported]\n*\n");
        for s in [
            "CREATE TABLE t0(c0 INT)",
            "CREATE TABLE t1(c1 INT)",
            "INSERT INTO t0(c0) VALUES (1), (2)",
            "INSERT INTO t1(c1) VALUES (2), (3)",
            "CREATE VIEW v0(c0) AS SELECT t1.c1 FROM t1",
        ] {
            assert!(m.execute(s).is_success(), "{s}");
        }
        let count = |m: &mut MockAdapter, sql: &str| m.query(sql).unwrap().rows.len();
        assert_eq!(
            count(&mut m, "SELECT * FROM t0 INNER JOIN t1 ON (t0.c0 = t1.c1)"),
            1
        );
        assert_eq!(
            count(&mut m, "SELECT * FROM t0 LEFT JOIN t1 ON (t0.c0 = t1.c1)"),
            2
        );
        assert_eq!(
            count(&mut m, "SELECT * FROM t0 RIGHT JOIN t1 ON (t0.c0 = t1.c1)"),
            2
        );
        assert_eq!(
            count(
                &mut m,
                "SELECT * FROM t0 FULL OUTER JOIN t1 ON (t0.c0 = t1.c1)"
            ),
            3
        );
        assert_eq!(count(&mut m, "SELECT * FROM t0 CROSS JOIN t1"), 4);
        assert_eq!(count(&mut m, "SELECT * FROM t0 NATURAL JOIN v0"), 1);
        assert_eq!(
            count(
                &mut m,
                "SELECT * FROM t0 WHERE (EXISTS (SELECT 1 FROM t1 WHERE (t1.c1 > 2)))"
            ),
            2
        );
        assert!(m.query("SELECT * FROM t0 CROSS JOIN t0").is_err());
    }

    #[test]
    fn static_typing_rejects_implicit_casts() {
        let mut s = mock("[supported]\n*\n[typing]\nstatic\n");
        let mut d = mock("[supported]\n*\n[typing]\ndynamic\n");
        for m in [&mut s, &mut d] {
            assert!(m.execute("CREATE TABLE t0(c0 INT)").is_success());
        }
        assert_eq!(
            s.execute("INSERT INTO t0(c0) VALUES ('a')"),
            ExecutionStatus::Error("unsupported: IMPLICIT_CAST".into())
        );
        assert!(d.execute("INSERT INTO t0(c0) VALUES ('a')").is_success());
        assert_eq!(d.normalization(), Normalization::Dynamic);
    }

    #[test]
    fn unique_index_is_enforced_atomically() {
        let mut m = mock("[supported]\n*\n");
        assert!(m.execute("CREATE TABLE t0(c0 INT)").is_success());
        assert!(m
            .execute("INSERT INTO t0(c0) VALUES (1), (1), (NULL), (NULL)")
            .is_success());
        assert!(!m.execute("CREATE UNIQUE INDEX i0 ON t0(c0)").is_success());
        assert!(!m.catalog_snapshot().contains_key("i0"));
        assert!(m.execute("CREATE INDEX i0 ON t0(c0)").is_success());
        assert!(m.execute("CREATE TABLE t1(c1 INT)").is_success());
        assert!(m.execute("CREATE UNIQUE INDEX i1 ON t1(c1)").is_success());
        assert!(!m.execute("INSERT INTO t1(c1) VALUES (5), (5)").is_success());
        assert_eq!(m.query("SELECT * FROM t1").unwrap().rows.len(), 0);
    }

    #[test]
    fn injected_bug_only_in_plain_where() {
        let mut m = mock("[supported]\n*\n[bugs]\nNULLIF,!=\tfirst-arg NULLIF\n");
        assert!(m.execute("CREATE TABLE t0(c0 INT)").is_success());
        assert!(m
            .execute("INSERT INTO t0(c0) VALUES (1), (2), (NULL)")
            .is_success());
        let q = "SELECT t0.c0 FROM t0 WHERE (NULLIF(t0.c0, 2) != 1)";
        // Correct answer is empty: NULLIF(2, 2) is NULL. The bug yields 2 != 1.
        assert_eq!(m.reference_query(q).unwrap().rows.len(), 0);
        assert_eq!(ints(&m.query(q).unwrap()), vec![Some(2)]);
        assert_eq!(ints(&m.query(q).unwrap()), vec![Some(2)]);
        assert_eq!(
            m.query("SELECT t0.c0 FROM t0 WHERE (NOT (NULLIF(t0.c0, 2) != 1))")
                .unwrap()
                .rows
                .len(),
            1
        );
        let plain = "SELECT ((NULLIF(t0.c0, 2) != 1) IS TRUE) FROM t0";
        assert_eq!(m.query(plain).unwrap(), m.reference_query(plain).unwrap());
    }

    #[test]
    fn flakiness_is_deterministic_per_database() {
        let mut m = mock("[supported]\n*\n[flaky]\nCREATE_TABLE\t0.5\n[seed]\n3\n");
        let run = |m: &mut MockAdapter| -> Vec<bool> {
            m.reset().unwrap();
            (0..20)
                .map(|i| {
                    m.execute(&format!("CREATE TABLE t{i}(c0 INT)"))
                        .is_success()
                })
                .collect()
        };
        let a = run(&mut m);
        assert_eq!(a, run(&mut m));
        assert!(a.iter().any(|x| *x) && a.iter().any(|x| !*x));
    }

    #[test]
    fn killed_session_is_fatal() {
        let mut m = mock("[supported]\n*\n");
        m.kill();
        assert!(matches!(m.execute("ANALYZE"), ExecutionStatus::Fatal(_)));
        assert!(matches!(
            m.query("SELECT 1 FROM t0"),
            Err(QueryError::Fatal(_))
        ));
    }
}
