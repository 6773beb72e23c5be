//! Recovers the feature set of a statement from its AST.

use std::collections::BTreeSet;

use crate::feature::{ids, Catalog, Category};

use super::ast::{Expr, Select, Statement};
use super::types::{infer_expr, needs_implicit_cast, ColumnTypes};

struct Walker<'a> {
    catalog: &'a Catalog,
    cols: &'a dyn ColumnTypes,
    out: BTreeSet<usize>,
}

impl Walker<'_> {
    fn add(&mut self, id: &str) {
        if let Some(i) = self.catalog.index_of(id) {
            self.out.insert(i);
        }
    }

    fn expr(&mut self, e: &Expr) {
        match e {
            Expr::Constant { .. } | Expr::Column { .. } => {}
            Expr::Call { feature, args, .. } => {
                self.out.insert(*feature);
                let is_function = self.catalog.category(*feature) == Category::Function;
                for (pos, arg) in args.iter().enumerate() {
                    if is_function {
                        if let Ok(Some(t)) = infer_expr(self.catalog, arg, self.cols) {
                            if let Some(c) = self.catalog.composite(*feature, pos, t) {
                                self.out.insert(c);
                            }
                        }
                    }
                    self.expr(arg);
                }
            }
            Expr::Exists(sel) => {
                self.add(ids::SUBQUERY);
                self.select(sel);
            }
        }
    }

    fn select(&mut self, sel: &Select) {
        if sel.distinct {
            self.add(ids::DISTINCT);
        }
        for j in &sel.from.joins {
            self.add(j.kind.feature());
        }
        if sel.filter.is_some() {
            self.add(ids::WHERE);
        }
        for e in sel.exprs() {
            self.expr(e);
        }
    }
}

/// Every feature the statement exercises, as catalog indices.
pub fn statement_features(
    catalog: &Catalog,
    stmt: &Statement,
    cols: &dyn ColumnTypes,
) -> BTreeSet<usize> {
    let mut w = Walker {
        catalog,
        cols,
        out: BTreeSet::new(),
    };
    w.add(stmt.kind().feature());
    match stmt {
        Statement::CreateTable { columns, .. } => {
            for c in columns {
                w.add(c.dtype.data_type_feature());
            }
        }
        Statement::CreateIndex { unique, .. } => {
            if *unique {
                w.add(ids::UNIQUE);
            }
        }
        Statement::CreateView { select, .. } | Statement::Select(select) => w.select(select),
        Statement::Insert { rows, .. } => {
            for e in rows.iter().flatten() {
                w.expr(e);
            }
        }
        Statement::Analyze => {}
    }
    if needs_implicit_cast(catalog, stmt, cols) {
        w.add(ids::IMPLICIT_CAST);
    }
    w.out
}

/// Features of a single expression, as they would be recorded inside a statement.
pub fn expr_features(catalog: &Catalog, e: &Expr, cols: &dyn ColumnTypes) -> BTreeSet<usize> {
    let mut w = Walker {
        catalog,
        cols,
        out: BTreeSet::new(),
    };
    w.expr(e);
    w.out
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;
    use crate::feature::SqlType;
    use crate::sql::parse::Grammar;

    fn names(c: &Catalog, set: &BTreeSet<usize>) -> Vec<String> {
        set.iter().map(|&i| c.id(i).to_string()).collect()
    }

    #[test]
    fn composite_features_follow_argument_types() {
        let c = Catalog::default_catalog();
        let g = Grammar::new(&c);
        let m: HashMap<String, Vec<(String, SqlType)>> = HashMap::new();
        assert_eq!(
            names(&c, &expr_features(&c, &g.parse_expr("SIN(1)").unwrap(), &m)),
            ["SIN", "SIN1INT"]
        );
        assert_eq!(
            names(
                &c,
                &expr_features(&c, &g.parse_expr("SIN('a')").unwrap(), &m)
            ),
            ["SIN", "SIN1STRING"]
        );
        assert_eq!(
            names(
                &c,
                &expr_features(&c, &g.parse_expr("SIN(NULL)").unwrap(), &m)
            ),
            ["SIN"]
        );
    }

    #[test]
    fn statement_level_features() {
        let c = Catalog::default_catalog();
        let g = Grammar::new(&c);
        let mut m = HashMap::new();
        m.insert("t0".to_string(), vec![("c0".to_string(), SqlType::Int)]);
        m.insert("t1".to_string(), vec![("c1".to_string(), SqlType::Int)]);
        let s = g
            .parse_statement("SELECT DISTINCT t0.c0 FROM t0 RIGHT JOIN t1 ON (t0.c0 = t1.c1) WHERE (NULLIF(t0.c0, 2) != 1)")
            .unwrap();
        let f = names(&c, &statement_features(&c, &s, &m));
        for want in [
            "SELECT",
            "DISTINCT",
            "RIGHT_JOIN",
            "WHERE",
            "=",
            "NULLIF",
            "NULLIF1INT",
            "NULLIF2INT",
            "!=",
        ] {
            assert!(f.iter().any(|x| x == want), "{want} missing from {f:?}");
        }
        assert!(!f.iter().any(|x| x == "IMPLICIT_CAST"));
        let s = g
            .parse_statement("CREATE UNIQUE INDEX i0 ON t0(c0)")
            .unwrap();
        assert_eq!(
            names(&c, &statement_features(&c, &s, &m)),
            ["INDEX", "UNIQUE"]
        );
        let s = g.parse_statement("SELECT * FROM t0 WHERE t0.c0").unwrap();
        assert_eq!(
            names(&c, &statement_features(&c, &s, &m)),
            ["SELECT", "WHERE", "IMPLICIT_CAST"]
        );
    }
}
