//! Statement trees, rendering, parsing, typing and feature extraction.

pub mod ast;
pub mod features;
pub mod parse;
pub mod render;
pub mod types;

pub use ast::{
    ColumnDef, ColumnRef, Expr, FromClause, Join, JoinKind, Projection, Select, Statement,
    StatementKind, Value,
};
pub use features::{expr_features, statement_features};
pub use parse::{Grammar, ParseError};
pub use render::{render_expr, render_select, render_statement};
pub use types::{check_statement, infer_expr, needs_implicit_cast, ColumnTypes, TypeError};
