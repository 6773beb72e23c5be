use std::fmt;

use crate::feature::SqlType;

/// A SQL value, used both for literals and for result cells.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Null,
    Int(i64),
    Text(String),
    Bool(bool),
}

impl Value {
    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }

    pub fn sql_type(&self) -> Option<SqlType> {
        match self {
            Value::Null => None,
            Value::Int(_) => Some(SqlType::Int),
            Value::Text(_) => Some(SqlType::Str),
            Value::Bool(_) => Some(SqlType::Bool),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Null => f.write_str("NULL"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Text(s) => write!(f, "'{}'", s.replace('\'', "''")),
            Value::Bool(true) => f.write_str("TRUE"),
            Value::Bool(false) => f.write_str("FALSE"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColumnRef {
    pub table: String,
    pub column: String,
}

/// Expression tree. `Call` covers operators and functions alike; the catalog
/// entry at `feature` says how it renders and what it means.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    /// `dtype` is the type the generator intended; parsed NULLs carry `None`.
    Constant {
        value: Value,
        dtype: Option<SqlType>,
    },
    Column {
        col: ColumnRef,
        dtype: Option<SqlType>,
    },
    Call {
        feature: usize,
        args: Vec<Expr>,
        dtype: Option<SqlType>,
    },
    Exists(Box<Select>),
}

impl Expr {
    pub fn constant(value: Value, dtype: SqlType) -> Expr {
        Expr::Constant {
            value,
            dtype: Some(dtype),
        }
    }

    pub fn dtype(&self) -> Option<SqlType> {
        match self {
            Expr::Constant { dtype, .. }
            | Expr::Column { dtype, .. }
            | Expr::Call { dtype, .. } => *dtype,
            Expr::Exists(_) => Some(SqlType::Bool),
        }
    }

    /// Nesting depth; a leaf has depth 1. Subqueries count their own predicate depth.
    pub fn depth(&self) -> u32 {
        match self {
            Expr::Constant { .. } | Expr::Column { .. } => 1,
            Expr::Call { args, .. } => 1 + args.iter().map(Expr::depth).max().unwrap_or(0),
            Expr::Exists(sel) => 1 + sel.max_expr_depth(),
        }
    }

    pub fn children(&self) -> &[Expr] {
        match self {
            Expr::Call { args, .. } => args,
            _ => &[],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum JoinKind {
    Inner,
    Left,
    Right,
    Full,
    Cross,
    Natural,
}

impl JoinKind {
    pub const ALL: [JoinKind; 6] = [
        JoinKind::Inner,
        JoinKind::Left,
        JoinKind::Right,
        JoinKind::Full,
        JoinKind::Cross,
        JoinKind::Natural,
    ];

    pub fn feature(self) -> &'static str {
        match self {
            JoinKind::Inner => "INNER_JOIN",
            JoinKind::Left => "LEFT_JOIN",
            JoinKind::Right => "RIGHT_JOIN",
            JoinKind::Full => "FULL_JOIN",
            JoinKind::Cross => "CROSS_JOIN",
            JoinKind::Natural => "NATURAL_JOIN",
        }
    }

    pub fn from_feature(id: &str) -> Option<JoinKind> {
        JoinKind::ALL.into_iter().find(|k| k.feature() == id)
    }

    pub fn has_condition(self) -> bool {
        !matches!(self, JoinKind::Cross | JoinKind::Natural)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Join {
    pub kind: JoinKind,
    pub table: String,
    pub on: Option<Expr>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FromClause {
    pub first: String,
    pub joins: Vec<Join>,
}

impl FromClause {
    pub fn tables(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.first.as_str()).chain(self.joins.iter().map(|j| j.table.as_str()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Projection {
    Star,
    Exprs(Vec<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Select {
    pub distinct: bool,
    pub projection: Projection,
    pub from: FromClause,
    pub filter: Option<Expr>,
}

impl Select {
    /// Every expression directly owned by this select (not descending into subqueries).
    pub fn exprs(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        if let Projection::Exprs(items) = &self.projection {
            out.extend(items.iter());
        }
        out.extend(self.from.joins.iter().filter_map(|j| j.on.as_ref()));
        out.extend(self.filter.iter());
        out
    }

    pub fn max_expr_depth(&self) -> u32 {
        self.exprs().into_iter().map(Expr::depth).max().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColumnDef {
    pub name: String,
    pub dtype: SqlType,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StatementKind {
    CreateTable,
    CreateIndex,
    CreateView,
    Insert,
    Analyze,
    Select,
}

impl StatementKind {
    pub const ALL: [StatementKind; 6] = [
        StatementKind::CreateTable,
        StatementKind::CreateIndex,
        StatementKind::CreateView,
        StatementKind::Insert,
        StatementKind::Analyze,
        StatementKind::Select,
    ];

    pub fn feature(self) -> &'static str {
        use crate::feature::ids;
        match self {
            StatementKind::CreateTable => ids::CREATE_TABLE,
            StatementKind::CreateIndex => ids::INDEX,
            StatementKind::CreateView => ids::VIEW,
            StatementKind::Insert => ids::INSERT,
            StatementKind::Analyze => ids::ANALYZE,
            StatementKind::Select => ids::SELECT,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Statement {
    CreateTable {
        name: String,
        columns: Vec<ColumnDef>,
    },
    CreateIndex {
        name: String,
        table: String,
        columns: Vec<String>,
        unique: bool,
    },
    CreateView {
        name: String,
        columns: Vec<String>,
        select: Select,
    },
    Insert {
        table: String,
        columns: Vec<String>,
        rows: Vec<Vec<Expr>>,
    },
    Analyze,
    Select(Select),
}

impl Statement {
    pub fn kind(&self) -> StatementKind {
        match self {
            Statement::CreateTable { .. } => StatementKind::CreateTable,
            Statement::CreateIndex { .. } => StatementKind::CreateIndex,
            Statement::CreateView { .. } => StatementKind::CreateView,
            Statement::Insert { .. } => StatementKind::Insert,
            Statement::Analyze => StatementKind::Analyze,
            Statement::Select(_) => StatementKind::Select,
        }
    }
}
