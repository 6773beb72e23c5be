//! Test-case reduction: delta debugging over the setup statements, then
//! greedy subtree hoisting in the query, repeated to a fixpoint.

use std::collections::HashSet;

use crate::adapter::Adapter;
use crate::feature::Catalog;
use crate::oracle::{check_texts, oracle_queries, CheckRun, OracleError, OracleKind};
use crate::sql::{render_select, Expr, Grammar, Projection, Select, Value};

/// Replays allowed per reduction.
pub const REPLAY_BUDGET: usize = 1000;

/// A self-contained bug reproducer: statements that build the database, and
/// one oracle check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestCase {
    pub oracle: OracleKind,
    pub setup: Vec<String>,
    pub base: Select,
    pub predicate: Expr,
}

impl TestCase {
    pub fn queries(&self, catalog: &Catalog) -> Vec<String> {
        oracle_queries(self.oracle, catalog, &self.base, &self.predicate)
            .iter()
            .map(|q| render_select(catalog, q))
            .collect()
    }

    /// The partitioned query `base WHERE p`.
    pub fn filtered_query(&self) -> Select {
        Select {
            filter: Some(self.predicate.clone()),
            ..self.base.clone()
        }
    }

    /// Size used to accept simplifications: a strictly smaller value is simpler.
    pub fn measure(&self) -> usize {
        self.setup.len() + select_weight(&self.base) + expr_weight(&self.predicate)
    }
}

fn expr_weight(e: &Expr) -> usize {
    match e {
        Expr::Constant { .. } => 1,
        Expr::Column { .. } => 2,
        Expr::Call { args, .. } => 1 + args.iter().map(expr_weight).sum::<usize>(),
        Expr::Exists(sel) => 2 + select_weight(sel),
    }
}

fn select_weight(s: &Select) -> usize {
    let projection = match &s.projection {
        Projection::Star => 1,
        Projection::Exprs(items) => items.iter().map(expr_weight).sum(),
    };
    projection
        + s.from
            .joins
            .iter()
            .map(|j| 1 + j.on.as_ref().map_or(0, expr_weight))
            .sum::<usize>()
        + s.filter.as_ref().map_or(0, expr_weight)
}

/// Runs `case` on a fresh database.
pub fn replay(
    catalog: &Catalog,
    adapter: &mut dyn Adapter,
    case: &TestCase,
) -> Result<CheckRun, OracleError> {
    adapter
        .reset()
        .map_err(|e| OracleError::Fatal(e.to_string()))?;
    for s in &case.setup {
        if let crate::adapter::ExecutionStatus::Fatal(m) = adapter.execute(s) {
            return Err(OracleError::Fatal(m));
        }
    }
    check_texts(case.oracle, &case.queries(catalog), adapter)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reduction {
    pub case: TestCase,
    /// False when the original did not fail reliably and was left alone.
    pub reduced: bool,
    pub replays: usize,
}

struct Budget<'a> {
    check: &'a mut dyn FnMut(&TestCase) -> Result<bool, OracleError>,
    used: usize,
    limit: usize,
}

impl Budget<'_> {
    /// `None` once the budget is spent.
    fn test(&mut self, case: &TestCase) -> Result<Option<bool>, OracleError> {
        if self.used >= self.limit {
            return Ok(None);
        }
        self.used += 1;
        (self.check)(case).map(Some)
    }
}

/// Shrinks `case` while `check` keeps reporting a failure. `check` must run
/// each candidate on a fresh database.
pub fn reduce(
    catalog: &Catalog,
    case: &TestCase,
    check: &mut dyn FnMut(&TestCase) -> Result<bool, OracleError>,
    limit: usize,
) -> Result<Reduction, OracleError> {
    let mut b = Budget {
        check,
        used: 0,
        limit: limit.max(2),
    };
    let stable = b.test(case)? == Some(true) && b.test(case)? == Some(true);
    if !stable {
        return Ok(Reduction {
            case: case.clone(),
            reduced: false,
            replays: b.used,
        });
    }
    let conflicts = Grammar::new(catalog).keyword_conflicts();
    let mut cur = case.clone();
    loop {
        cur.setup = ddmin(&cur, &mut b)?;
        match hoist(&cur, &conflicts, &mut b)? {
            Some(next) if next.measure() < cur.measure() => cur = next,
            _ => break,
        }
    }
    Ok(Reduction {
        case: cur,
        reduced: true,
        replays: b.used,
    })
}

/// Delta debugging over `case.setup`. Every intermediate list has been
/// checked, so running out of budget just stops early.
fn ddmin(case: &TestCase, b: &mut Budget<'_>) -> Result<Vec<String>, OracleError> {
    let mut items = case.setup.clone();
    let with = |setup: Vec<String>| TestCase {
        setup,
        ..case.clone()
    };
    let mut n = 2usize;
    while items.len() >= 2 {
        let size = items.len().div_ceil(n);
        let chunks: Vec<Vec<String>> = items.chunks(size).map(<[String]>::to_vec).collect();
        let mut progressed = false;
        for (i, chunk) in chunks.iter().enumerate() {
            match b.test(&with(chunk.clone()))? {
                None => return Ok(items),
                Some(true) => {
                    items = chunk.clone();
                    n = 2;
                    progressed = true;
                    break;
                }
                Some(false) => {}
            }
            if chunks.len() == 2 {
                // With two chunks the complements are the chunks themselves.
                continue;
            }
            let complement: Vec<String> = chunks
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .flat_map(|(_, c)| c.iter().cloned())
                .collect();
            match b.test(&with(complement.clone()))? {
                None => return Ok(items),
                Some(true) => {
                    items = complement;
                    n = (n - 1).max(2);
                    progressed = true;
                    break;
                }
                Some(false) => {}
            }
        }
        if !progressed {
            if n >= items.len() {
                break;
            }
            n = (n * 2).min(items.len());
        }
    }
    if items.len() == 1 && b.test(&with(Vec::new()))? == Some(true) {
        items.clear();
    }
    Ok(items)
}

/// Where an expression sits inside the query.
#[derive(Clone, Copy, Debug)]
enum Site {
    Predicate,
    On(usize),
    Item(usize),
}

fn site_expr(case: &mut TestCase, site: Site) -> Option<&mut Expr> {
    match site {
        Site::Predicate => Some(&mut case.predicate),
        Site::On(j) => case.base.from.joins.get_mut(j)?.on.as_mut(),
        Site::Item(i) => match &mut case.base.projection {
            Projection::Exprs(items) => items.get_mut(i),
            Projection::Star => None,
        },
    }
}

fn node_at<'a>(e: &'a mut Expr, path: &[usize]) -> &'a mut Expr {
    match path.split_first() {
        None => e,
        Some((&i, rest)) => match e {
            Expr::Call { args, .. } => node_at(&mut args[i], rest),
            _ => unreachable!("paths only descend through calls"),
        },
    }
}

fn paths(e: &Expr, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    out.push(prefix.clone());
    if let Expr::Call { args, .. } = e {
        for (i, a) in args.iter().enumerate() {
            prefix.push(i);
            paths(a, prefix, out);
            prefix.pop();
        }
    }
}

const LITERALS: [Value; 6] = [
    Value::Int(0),
    Value::Int(1),
    Value::Text(String::new()),
    Value::Bool(true),
    Value::Bool(false),
    Value::Null,
];

/// All single-step simplifications of the query, most aggressive first.
fn candidates(case: &TestCase, conflicts: &HashSet<(usize, usize, Value)>) -> Vec<TestCase> {
    let mut out = Vec::new();
    for j in (0..case.base.from.joins.len()).rev() {
        let mut c = case.clone();
        c.base.from.joins.remove(j);
        out.push(c);
    }
    if let Projection::Exprs(items) = &case.base.projection {
        if items.len() > 1 {
            for i in 0..items.len() {
                let mut c = case.clone();
                if let Projection::Exprs(items) = &mut c.base.projection {
                    items.remove(i);
                }
                out.push(c);
            }
        }
    }
    let mut sites = vec![Site::Predicate];
    sites.extend(
        (0..case.base.from.joins.len())
            .filter(|&j| case.base.from.joins[j].on.is_some())
            .map(Site::On),
    );
    if let Projection::Exprs(items) = &case.base.projection {
        sites.extend((0..items.len()).map(Site::Item));
    }
    for site in sites {
        let mut probe = case.clone();
        let Some(root) = site_expr(&mut probe, site) else {
            continue;
        };
        let mut ps = Vec::new();
        paths(root, &mut Vec::new(), &mut ps);
        for path in ps {
            let node = node_at(root, &path).clone();
            let parent_slot = path.split_last().map(|(last, parent)| {
                let Expr::Call { feature, .. } = node_at(root, parent) else {
                    unreachable!()
                };
                (*feature, *last)
            });
            let mut replacements: Vec<Expr> = node.children().to_vec();
            if !matches!(node, Expr::Constant { .. }) {
                for v in LITERALS {
                    if parent_slot.is_some_and(|(f, s)| conflicts.contains(&(f, s, v.clone()))) {
                        continue;
                    }
                    replacements.push(Expr::Constant {
                        dtype: v.sql_type(),
                        value: v,
                    });
                }
            }
            for r in replacements {
                if expr_weight(&r) >= expr_weight(&node) {
                    continue;
                }
                let mut c = case.clone();
                let root = site_expr(&mut c, site).expect("site exists in the clone");
                *node_at(root, &path) = r;
                out.push(c);
            }
        }
    }
    out
}

/// Greedily applies simplifications that keep the failure. `None` when nothing applied.
fn hoist(
    case: &TestCase,
    conflicts: &HashSet<(usize, usize, Value)>,
    b: &mut Budget<'_>,
) -> Result<Option<TestCase>, OracleError> {
    let mut cur = case.clone();
    let mut changed = false;
    'outer: loop {
        for c in candidates(&cur, conflicts) {
            match b.test(&c)? {
                None => break 'outer,
                Some(true) => {
                    cur = c;
                    changed = true;
                    continue 'outer;
                }
                Some(false) => {}
            }
        }
        break;
    }
    Ok(changed.then_some(cur))
}
