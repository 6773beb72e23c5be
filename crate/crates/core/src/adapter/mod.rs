//! Uniform execution interface over test targets.
//!
//! Two targets ship: an embedded SQLite engine (`sqlite:<path>`) and the mock
//! dialect (`mock:<spec-path>`). Other targets plug in through
//! [`AdapterRegistry::register`].

pub mod mock;
pub mod sqlite;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::feature::Catalog;
use crate::sql::Value;

/// Outcome of one statement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExecutionStatus {
    Success,
    Error(String),
    /// The session is gone; the campaign cannot continue.
    Fatal(String),
}

impl ExecutionStatus {
    pub fn is_success(&self) -> bool {
        matches!(self, ExecutionStatus::Success)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("{0}")]
    Error(String),
    #[error("fatal: {0}")]
    Fatal(String),
}

impl From<QueryError> for ExecutionStatus {
    fn from(e: QueryError) -> Self {
        match e {
            QueryError::Error(m) => ExecutionStatus::Error(m),
            QueryError::Fatal(m) => ExecutionStatus::Fatal(m),
        }
    }
}

pub type Row = Vec<Value>;

/// Rows of a query result. Order is whatever the target produced.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ResultSet {
    pub columns: usize,
    pub rows: Vec<Row>,
}

impl ResultSet {
    pub fn new(columns: usize, rows: Vec<Row>) -> ResultSet {
        debug_assert!(rows.iter().all(|r| r.len() == columns));
        ResultSet { columns, rows }
    }
}

impl fmt::Display for ResultSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Value::to_string).collect();
            writeln!(f, "{}", cells.join("\t"))?;
        }
        Ok(())
    }
}

/// How result cells are compared across queries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    /// Values compare by type and value.
    Static,
    /// Integers and text compare by their textual form.
    Dynamic,
}

/// A live session on one database.
pub trait Adapter: Send {
    fn execute(&mut self, sql: &str) -> ExecutionStatus;

    fn query(&mut self, sql: &str) -> Result<ResultSet, QueryError>;

    /// Drops all state and starts over on an empty database.
    fn reset(&mut self) -> Result<(), QueryError>;

    /// Runs after the setup phase, e.g. to commit or refresh.
    fn post_setup(&mut self) -> ExecutionStatus {
        ExecutionStatus::Success
    }

    fn normalization(&self) -> Normalization {
        Normalization::Static
    }

    fn close(&mut self) {}
}

#[derive(Debug, Error)]
pub enum AdapterError {
    #[error("target `{0}` lacks a `scheme:` prefix")]
    MissingScheme(String),
    #[error("no adapter registered for scheme `{0}`")]
    UnknownScheme(String),
    #[error("cannot open target: {0}")]
    Open(String),
}

/// Opens session number `worker` for a target's config string (the part after `scheme:`).
pub type OpenFn =
    dyn Fn(&str, usize, &Arc<Catalog>) -> Result<Box<dyn Adapter>, String> + Send + Sync;

/// Scheme-keyed adapter constructors.
#[derive(Clone)]
pub struct AdapterRegistry {
    schemes: BTreeMap<String, Arc<OpenFn>>,
}

impl Default for AdapterRegistry {
    fn default() -> Self {
        let mut r = AdapterRegistry {
            schemes: BTreeMap::new(),
        };
        r.register("sqlite", |cfg, worker, _| {
            sqlite::SqliteAdapter::open(cfg, worker)
                .map(|a| Box::new(a) as Box<dyn Adapter>)
                .map_err(|e| e.to_string())
        });
        r.register("mock", |cfg, _, catalog| {
            let spec = mock::MockSpec::load(std::path::Path::new(cfg), catalog)
                .map_err(|e| e.to_string())?;
            Ok(Box::new(mock::MockAdapter::new(spec, Arc::clone(catalog))) as Box<dyn Adapter>)
        });
        r
    }
}

impl AdapterRegistry {
    pub fn register(
        &mut self,
        scheme: &str,
        open: impl Fn(&str, usize, &Arc<Catalog>) -> Result<Box<dyn Adapter>, String>
            + Send
            + Sync
            + 'static,
    ) {
        self.schemes.insert(scheme.to_string(), Arc::new(open));
    }

    pub fn schemes(&self) -> impl Iterator<Item = &str> {
        self.schemes.keys().map(String::as_str)
    }

    pub fn open(
        &self,
        target: &str,
        worker: usize,
        catalog: &Arc<Catalog>,
    ) -> Result<Box<dyn Adapter>, AdapterError> {
        let (scheme, cfg) = target
            .split_once(':')
            .ok_or_else(|| AdapterError::MissingScheme(target.to_string()))?;
        let open = self
            .schemes
            .get(scheme)
            .ok_or_else(|| AdapterError::UnknownScheme(scheme.to_string()))?;
        open(cfg, worker, catalog).map_err(AdapterError::Open)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_dispatches_on_scheme() {
        let catalog = Arc::new(Catalog::default_catalog());
        let reg = AdapterRegistry::default();
        assert!(matches!(
            reg.open("nope", 0, &catalog),
            Err(AdapterError::MissingScheme(_))
        ));
        assert!(matches!(
            reg.open("pg:host=x", 0, &catalog),
            Err(AdapterError::UnknownScheme(_))
        ));
        let mut a = reg.open("sqlite::memory:", 0, &catalog).unwrap();
        assert_eq!(a.query("SELECT 1").unwrap().rows, vec![vec![Value::Int(1)]]);
    }
}
