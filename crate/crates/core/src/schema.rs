//! The generator's mirror of the target catalog. Objects enter the model only
//! after the statement that creates them succeeds, so no metadata queries are
//! ever needed.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::adapter::ExecutionStatus;
use crate::feature::{Catalog, SqlType};
use crate::sql::{infer_expr, ColumnDef, ColumnTypes, Projection, Statement};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchemaError {
    #[error("the schema has no tables")]
    Empty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TableKind {
    BaseTable,
    View,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableDef {
    pub name: String,
    pub columns: Vec<ColumnDef>,
    pub kind: TableKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexDef {
    pub name: String,
    pub table: String,
    pub columns: Vec<String>,
    pub unique: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObjectClass {
    Table,
    View,
    Index,
    Column,
}

impl ObjectClass {
    fn prefix(self) -> char {
        match self {
            ObjectClass::Table => 't',
            ObjectClass::View => 'v',
            ObjectClass::Index => 'i',
            ObjectClass::Column => 'c',
        }
    }

    fn slot(self) -> usize {
        match self {
            ObjectClass::Table => 0,
            ObjectClass::View => 1,
            ObjectClass::Index => 2,
            ObjectClass::Column => 3,
        }
    }
}

/// What a DDL statement would add to the model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StagedObject {
    Table(TableDef),
    Index(IndexDef),
    Nothing,
}

/// Catalog entry in a form both the model and the mock can produce, for
/// comparing the two.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum SchemaObject {
    Table {
        kind: TableKind,
        columns: Vec<(String, SqlType)>,
    },
    Index {
        table: String,
        columns: Vec<String>,
        unique: bool,
    },
}

#[derive(Clone, Debug, Default)]
pub struct SchemaModel {
    tables: Vec<TableDef>,
    indexes: Vec<IndexDef>,
    counters: [u32; 4],
}

impl SchemaModel {
    pub fn new() -> SchemaModel {
        SchemaModel::default()
    }

    pub fn tables(&self) -> &[TableDef] {
        &self.tables
    }

    pub fn indexes(&self) -> &[IndexDef] {
        &self.indexes
    }

    pub fn table(&self, name: &str) -> Option<&TableDef> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn count(&self, kind: TableKind) -> usize {
        self.tables.iter().filter(|t| t.kind == kind).count()
    }

    fn name_taken(&self, name: &str) -> bool {
        self.tables.iter().any(|t| t.name == name)
            || self.indexes.iter().any(|i| i.name == name)
            || self
                .tables
                .iter()
                .any(|t| t.columns.iter().any(|c| c.name == name))
    }

    /// Next unused `t<k>`/`v<k>`/`i<k>`/`c<k>`. Counters only move forward, so a
    /// name handed out for a statement that later failed is never reused.
    pub fn fresh_name(&mut self, class: ObjectClass) -> String {
        loop {
            let k = &mut self.counters[class.slot()];
            let name = format!("{}{}", class.prefix(), *k);
            *k += 1;
            if !self.name_taken(&name) {
                return name;
            }
        }
    }

    /// The object `stmt` would create, without touching the model.
    pub fn stage(&self, catalog: &Catalog, stmt: &Statement) -> StagedObject {
        match stmt {
            Statement::CreateTable { name, columns } => StagedObject::Table(TableDef {
                name: name.clone(),
                columns: columns.clone(),
                kind: TableKind::BaseTable,
            }),
            Statement::CreateView {
                name,
                columns,
                select,
            } => {
                let types: Vec<SqlType> = match &select.projection {
                    Projection::Exprs(items) => items
                        .iter()
                        .map(|e| {
                            infer_expr(catalog, e, self)
                                .ok()
                                .flatten()
                                .unwrap_or(SqlType::Int)
                        })
                        .collect(),
                    Projection::Star => select
                        .from
                        .tables()
                        .filter_map(|t| self.table(t))
                        .flat_map(|t| t.columns.iter().map(|c| c.dtype))
                        .collect(),
                };
                StagedObject::Table(TableDef {
                    name: name.clone(),
                    columns: columns
                        .iter()
                        .zip(types.into_iter().chain(std::iter::repeat(SqlType::Int)))
                        .map(|(n, t)| ColumnDef {
                            name: n.clone(),
                            dtype: t,
                        })
                        .collect(),
                    kind: TableKind::View,
                })
            }
            Statement::CreateIndex {
                name,
                table,
                columns,
                unique,
            } => StagedObject::Index(IndexDef {
                name: name.clone(),
                table: table.clone(),
                columns: columns.clone(),
                unique: *unique,
            }),
            _ => StagedObject::Nothing,
        }
    }

    /// Adds the staged object if its statement succeeded.
    pub fn commit(&mut self, staged: StagedObject, status: &ExecutionStatus) {
        if !status.is_success() {
            return;
        }
        match staged {
            StagedObject::Table(t) => self.tables.push(t),
            StagedObject::Index(i) => self.indexes.push(i),
            StagedObject::Nothing => {}
        }
    }

    pub fn random_table<R: Rng>(&self, rng: &mut R) -> Result<&TableDef, SchemaError> {
        self.tables.choose(rng).ok_or(SchemaError::Empty)
    }

    /// Base tables only, for statements that cannot target a view.
    pub fn random_base_table<R: Rng>(&self, rng: &mut R) -> Result<&TableDef, SchemaError> {
        let base: Vec<&TableDef> = self
            .tables
            .iter()
            .filter(|t| t.kind == TableKind::BaseTable)
            .collect();
        base.choose(rng).copied().ok_or(SchemaError::Empty)
    }

    pub fn random_column<'a, R: Rng>(table: &'a TableDef, rng: &mut R) -> &'a ColumnDef {
        table
            .columns
            .choose(rng)
            .expect("tables have at least one column")
    }

    pub fn snapshot(&self) -> BTreeMap<String, SchemaObject> {
        let mut out = BTreeMap::new();
        for t in &self.tables {
            out.insert(
                t.name.clone(),
                SchemaObject::Table {
                    kind: t.kind,
                    columns: t
                        .columns
                        .iter()
                        .map(|c| (c.name.clone(), c.dtype))
                        .collect(),
                },
            );
        }
        for i in &self.indexes {
            out.insert(
                i.name.clone(),
                SchemaObject::Index {
                    table: i.table.clone(),
                    columns: i.columns.clone(),
                    unique: i.unique,
                },
            );
        }
        out
    }
}

impl ColumnTypes for SchemaModel {
    fn columns_of(&self, table: &str) -> Option<Vec<(String, SqlType)>> {
        self.table(table).map(|t| {
            t.columns
                .iter()
                .map(|c| (c.name.clone(), c.dtype))
                .collect()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sql::Grammar;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fresh_names_count_up_per_class() {
        let mut s = SchemaModel::new();
        assert_eq!(s.fresh_name(ObjectClass::Table), "t0");
        assert_eq!(s.fresh_name(ObjectClass::Table), "t1");
        assert_eq!(s.fresh_name(ObjectClass::View), "v0");
        assert_eq!(s.fresh_name(ObjectClass::Column), "c0");
    }

    #[test]
    fn commit_only_on_success() {
        let c = Catalog::default_catalog();
        let g = Grammar::new(&c);
        let mut s = SchemaModel::new();
        let stmt = g.parse_statement("CREATE TABLE t0(c0 INT)").unwrap();
        let staged = s.stage(&c, &stmt);
        assert_eq!(
            staged,
            StagedObject::Table(TableDef {
                name: "t0".into(),
                columns: vec![ColumnDef {
                    name: "c0".into(),
                    dtype: SqlType::Int
                }],
                kind: TableKind::BaseTable
            })
        );
        s.commit(staged.clone(), &ExecutionStatus::Error("nope".into()));
        assert!(s.tables().is_empty());
        s.commit(staged, &ExecutionStatus::Success);
        assert_eq!(s.tables().len(), 1);
        let v = g
            .parse_statement("CREATE VIEW v0(c0) AS SELECT t0.c0 FROM t0")
            .unwrap();
        let staged = s.stage(&c, &v);
        assert!(
            matches!(&staged, StagedObject::Table(t) if t.kind == TableKind::View && t.columns[0].dtype == SqlType::Int)
        );
        s.commit(staged, &ExecutionStatus::Success);
        let i = g.parse_statement("CREATE INDEX i0 ON t0(c0)").unwrap();
        s.commit(s.stage(&c, &i), &ExecutionStatus::Success);
        assert_eq!(s.snapshot().len(), 3);
        assert_eq!(s.fresh_name(ObjectClass::Table), "t1");
    }

    #[test]
    fn random_choice_is_seeded() {
        let mut s = SchemaModel::new();
        for n in ["t0", "t1", "t2"] {
            s.commit(
                StagedObject::Table(TableDef {
                    name: n.into(),
                    columns: vec![ColumnDef {
                        name: "c0".into(),
                        dtype: SqlType::Int,
                    }],
                    kind: TableKind::BaseTable,
                }),
                &ExecutionStatus::Success,
            );
        }
        let pick = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..10)
                .map(|_| s.random_table(&mut rng).unwrap().name.clone())
                .collect::<Vec<_>>()
        };
        assert_eq!(pick(3), pick(3));
        assert_eq!(
            SchemaModel::new().random_table(&mut ChaCha8Rng::seed_from_u64(0)),
            Err(SchemaError::Empty)
        );
    }
}
