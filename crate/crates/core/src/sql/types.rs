//! Static type rules shared by the generator, the feature walker and the
//! mock dialect. NULL literals are untyped and fit any slot.

use std::collections::HashMap;

use thiserror::Error;

use crate::feature::{Catalog, ParamType, SqlType};

use super::ast::{Expr, JoinKind, Projection, Select, Statement};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TypeError {
    #[error("type mismatch: {0}")]
    Mismatch(String),
    #[error("no such column: {0}")]
    Unresolved(String),
}

/// Resolves column types of tables and views.
pub trait ColumnTypes {
    fn columns_of(&self, table: &str) -> Option<Vec<(String, SqlType)>>;

    fn column_type(&self, table: &str, column: &str) -> Option<SqlType> {
        self.columns_of(table)?
            .into_iter()
            .find(|(c, _)| c == column)
            .map(|(_, t)| t)
    }
}

impl ColumnTypes for HashMap<String, Vec<(String, SqlType)>> {
    fn columns_of(&self, table: &str) -> Option<Vec<(String, SqlType)>> {
        self.get(table).cloned()
    }
}

fn mismatch(what: String) -> TypeError {
    TypeError::Mismatch(what)
}

/// Infers the type of an expression; `None` means untyped NULL.
pub fn infer_expr(
    catalog: &Catalog,
    expr: &Expr,
    cols: &dyn ColumnTypes,
) -> Result<Option<SqlType>, TypeError> {
    match expr {
        Expr::Constant { value, .. } => Ok(value.sql_type()),
        Expr::Column { col, .. } => cols
            .column_type(&col.table, &col.column)
            .map(Some)
            .ok_or_else(|| TypeError::Unresolved(format!("{}.{}", col.table, col.column))),
        Expr::Call { feature, args, .. } => {
            let template = catalog
                .template(*feature)
                .ok_or_else(|| mismatch(format!("{} is not callable", catalog.id(*feature))))?;
            if template.arity() != args.len() {
                return Err(mismatch(format!(
                    "{} takes {} arguments",
                    catalog.id(*feature),
                    template.arity()
                )));
            }
            let mut poly: Option<SqlType> = None;
            for (i, arg) in args.iter().enumerate() {
                let t = infer_expr(catalog, arg, cols)?;
                let Some(t) = t else { continue };
                match template.slot(i) {
                    ParamType::Fixed(want) if want != t => {
                        return Err(mismatch(format!(
                            "{} argument {} expects {want}, got {t}",
                            catalog.id(*feature),
                            i + 1
                        )))
                    }
                    ParamType::Fixed(_) => {}
                    ParamType::Poly => match poly {
                        None => poly = Some(t),
                        Some(p) if p != t => {
                            return Err(mismatch(format!(
                                "{} mixes {p} and {t}",
                                catalog.id(*feature)
                            )));
                        }
                        Some(_) => {}
                    },
                }
            }
            Ok(match template.result {
                ParamType::Fixed(t) => Some(t),
                ParamType::Poly => poly,
            })
        }
        Expr::Exists(sel) => {
            check_select(catalog, sel, cols)?;
            Ok(Some(SqlType::Bool))
        }
    }
}

fn expect_bool(
    catalog: &Catalog,
    e: &Expr,
    cols: &dyn ColumnTypes,
    what: &str,
) -> Result<(), TypeError> {
    match infer_expr(catalog, e, cols)? {
        None | Some(SqlType::Bool) => Ok(()),
        Some(t) => Err(mismatch(format!("{what} must be BOOL, got {t}"))),
    }
}

pub fn check_select(
    catalog: &Catalog,
    sel: &Select,
    cols: &dyn ColumnTypes,
) -> Result<(), TypeError> {
    let mut seen: Vec<(String, SqlType)> = cols.columns_of(&sel.from.first).unwrap_or_default();
    for join in &sel.from.joins {
        let right = cols.columns_of(&join.table).unwrap_or_default();
        if join.kind == JoinKind::Natural {
            for (name, t) in &right {
                if let Some((_, lt)) = seen.iter().find(|(n, _)| n == name) {
                    if lt != t {
                        return Err(mismatch(format!(
                            "natural join column {name} is {lt} and {t}"
                        )));
                    }
                }
            }
        }
        seen.extend(right);
        if let Some(on) = &join.on {
            expect_bool(catalog, on, cols, "ON")?;
        }
    }
    if let Projection::Exprs(items) = &sel.projection {
        for e in items {
            infer_expr(catalog, e, cols)?;
        }
    }
    if let Some(f) = &sel.filter {
        expect_bool(catalog, f, cols, "WHERE")?;
    }
    Ok(())
}

pub fn check_statement(
    catalog: &Catalog,
    stmt: &Statement,
    cols: &dyn ColumnTypes,
) -> Result<(), TypeError> {
    match stmt {
        Statement::Select(sel) | Statement::CreateView { select: sel, .. } => {
            check_select(catalog, sel, cols)
        }
        Statement::Insert {
            table,
            columns,
            rows,
        } => {
            for row in rows {
                for (name, e) in columns.iter().zip(row) {
                    let want = cols
                        .column_type(table, name)
                        .ok_or_else(|| TypeError::Unresolved(format!("{table}.{name}")))?;
                    match infer_expr(catalog, e, cols)? {
                        Some(t) if t != want => {
                            return Err(mismatch(format!("{table}.{name} is {want}, got {t}")))
                        }
                        _ => {}
                    }
                }
            }
            Ok(())
        }
        Statement::CreateTable { .. } | Statement::CreateIndex { .. } | Statement::Analyze => {
            Ok(())
        }
    }
}

/// True when the statement needs an implicit cast to run, i.e. it is ill-typed
/// under the static rules. Unresolvable names are not a typing question.
pub fn needs_implicit_cast(catalog: &Catalog, stmt: &Statement, cols: &dyn ColumnTypes) -> bool {
    matches!(
        check_statement(catalog, stmt, cols),
        Err(TypeError::Mismatch(_))
    )
}
