//! AST to SQL text. Operators render parenthesized, so the output never
//! depends on a target's precedence rules.

use crate::feature::{ids, Catalog, Category, SqlType};

use super::ast::{Expr, FromClause, JoinKind, Projection, Select, Statement};

pub fn join_keyword(catalog: &Catalog, kind: JoinKind) -> String {
    catalog
        .index_of(kind.feature())
        .map(|i| catalog.entry(i).template_text.clone())
        .unwrap_or_else(|| match kind {
            JoinKind::Inner => "INNER JOIN".into(),
            JoinKind::Left => "LEFT JOIN".into(),
            JoinKind::Right => "RIGHT JOIN".into(),
            JoinKind::Full => "FULL OUTER JOIN".into(),
            JoinKind::Cross => "CROSS JOIN".into(),
            JoinKind::Natural => "NATURAL JOIN".into(),
        })
}

pub fn exists_keyword(catalog: &Catalog) -> String {
    catalog
        .index_of(ids::SUBQUERY)
        .map(|i| catalog.entry(i).template_text.clone())
        .unwrap_or_else(|| "EXISTS".into())
}

pub fn type_keyword(catalog: &Catalog, ty: SqlType) -> String {
    catalog
        .index_of(ty.data_type_feature())
        .map(|i| catalog.entry(i).template_text.clone())
        .unwrap_or_else(|| ty.data_type_feature().to_string())
}

pub fn render_expr(catalog: &Catalog, expr: &Expr) -> String {
    let mut out = String::new();
    write_expr(catalog, expr, &mut out);
    out
}

fn write_expr(catalog: &Catalog, expr: &Expr, out: &mut String) {
    match expr {
        Expr::Constant { value, .. } => out.push_str(&value.to_string()),
        Expr::Column { col, .. } => {
            out.push_str(&col.table);
            out.push('.');
            out.push_str(&col.column);
        }
        Expr::Call { feature, args, .. } => {
            let template = catalog
                .template(*feature)
                .expect("call node refers to an operator or function");
            let rendered: Vec<String> = args.iter().map(|a| render_expr(catalog, a)).collect();
            let body = template.render(&rendered);
            if catalog.category(*feature) == Category::Operator {
                out.push('(');
                out.push_str(&body);
                out.push(')');
            } else {
                out.push_str(&body);
            }
        }
        Expr::Exists(select) => {
            out.push('(');
            out.push_str(&exists_keyword(catalog));
            out.push_str(" (");
            write_select(catalog, select, out);
            out.push_str("))");
        }
    }
}

pub fn render_select(catalog: &Catalog, select: &Select) -> String {
    let mut out = String::new();
    write_select(catalog, select, &mut out);
    out
}

fn write_from(catalog: &Catalog, from: &FromClause, out: &mut String) {
    out.push_str(&from.first);
    for join in &from.joins {
        out.push(' ');
        out.push_str(&join_keyword(catalog, join.kind));
        out.push(' ');
        out.push_str(&join.table);
        if let Some(on) = &join.on {
            out.push_str(" ON ");
            write_expr(catalog, on, out);
        }
    }
}

fn write_select(catalog: &Catalog, select: &Select, out: &mut String) {
    out.push_str("SELECT ");
    if select.distinct {
        out.push_str("DISTINCT ");
    }
    match &select.projection {
        Projection::Star => out.push('*'),
        Projection::Exprs(items) => {
            for (i, e) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(catalog, e, out);
            }
        }
    }
    out.push_str(" FROM ");
    write_from(catalog, &select.from, out);
    if let Some(filter) = &select.filter {
        out.push_str(" WHERE ");
        write_expr(catalog, filter, out);
    }
}

pub fn render_statement(catalog: &Catalog, stmt: &Statement) -> String {
    match stmt {
        Statement::CreateTable { name, columns } => {
            let cols: Vec<String> = columns
                .iter()
                .map(|c| format!("{} {}", c.name, type_keyword(catalog, c.dtype)))
                .collect();
            format!("CREATE TABLE {name}({})", cols.join(", "))
        }
        Statement::CreateIndex {
            name,
            table,
            columns,
            unique,
        } => {
            let unique = if *unique { "UNIQUE " } else { "" };
            format!(
                "CREATE {unique}INDEX {name} ON {table}({})",
                columns.join(", ")
            )
        }
        Statement::CreateView {
            name,
            columns,
            select,
        } => {
            format!(
                "CREATE VIEW {name}({}) AS {}",
                columns.join(", "),
                render_select(catalog, select)
            )
        }
        Statement::Insert {
            table,
            columns,
            rows,
        } => {
            let rows: Vec<String> = rows
                .iter()
                .map(|r| {
                    let vals: Vec<String> = r.iter().map(|e| render_expr(catalog, e)).collect();
                    format!("({})", vals.join(", "))
                })
                .collect();
            format!(
                "INSERT INTO {table}({}) VALUES {}",
                columns.join(", "),
                rows.join(", ")
            )
        }
        Statement::Analyze => "ANALYZE".to_string(),
        Statement::Select(select) => render_select(catalog, select),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sql::ast::{ColumnDef, ColumnRef, Value};

    #[test]
    fn renders_figure_style_statements() {
        let c = Catalog::default_catalog();
        let t = Statement::CreateTable {
            name: "t0".into(),
            columns: vec![ColumnDef {
                name: "c0".into(),
                dtype: SqlType::Int,
            }],
        };
        assert_eq!(render_statement(&c, &t), "CREATE TABLE t0(c0 INT)");
        let nullif = c.index_of("NULLIF").unwrap();
        let ne = c.index_of("!=").unwrap();
        let col = Expr::Column {
            col: ColumnRef {
                table: "t0".into(),
                column: "c0".into(),
            },
            dtype: Some(SqlType::Int),
        };
        let pred = Expr::Call {
            feature: ne,
            args: vec![
                Expr::Call {
                    feature: nullif,
                    args: vec![col, Expr::constant(Value::Int(2), SqlType::Int)],
                    dtype: Some(SqlType::Int),
                },
                Expr::constant(Value::Int(1), SqlType::Int),
            ],
            dtype: Some(SqlType::Bool),
        };
        assert_eq!(render_expr(&c, &pred), "(NULLIF(t0.c0, 2) != 1)");
        let neg = Expr::Call {
            feature: c.index_of("NEG").unwrap(),
            args: vec![Expr::constant(Value::Int(-3), SqlType::Int)],
            dtype: Some(SqlType::Int),
        };
        assert_eq!(render_expr(&c, &neg), "(- -3)");
        assert_eq!(Value::Text("it's".into()).to_string(), "'it''s'");
    }
}
