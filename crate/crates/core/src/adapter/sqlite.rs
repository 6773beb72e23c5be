//! The embedded engine: bundled SQLite through rusqlite.

use std::path::PathBuf;

use rusqlite::types::ValueRef;
use rusqlite::{ffi, Connection, OpenFlags};

use super::{Adapter, ExecutionStatus, QueryError, ResultSet};
use crate::sql::Value;

/// VM steps between progress callbacks, and callbacks before a statement is interrupted.
const PROGRESS_PERIOD: i32 = 10_000;
const PROGRESS_LIMIT: u32 = 2_000;
const MAX_LENGTH: i32 = 1_000_000;

pub struct SqliteAdapter {
    path: Option<PathBuf>,
    conn: Option<Connection>,
}

impl SqliteAdapter {
    /// `cfg` is `:memory:` or a file path; each worker gets its own file
    /// (`<path>.w<worker>`).
    pub fn open(cfg: &str, worker: usize) -> Result<SqliteAdapter, rusqlite::Error> {
        let path = if cfg.is_empty() || cfg == ":memory:" {
            None
        } else {
            Some(PathBuf::from(format!("{cfg}.w{worker}")))
        };
        let mut a = SqliteAdapter { path, conn: None };
        a.connect()?;
        Ok(a)
    }

    fn connect(&mut self) -> Result<(), rusqlite::Error> {
        self.conn = None;
        let conn = match &self.path {
            None => Connection::open_in_memory()?,
            Some(p) => {
                for suffix in ["", "-journal", "-wal", "-shm"] {
                    let _ = std::fs::remove_file(format!("{}{suffix}", p.display()));
                }
                Connection::open_with_flags(
                    p,
                    OpenFlags::SQLITE_OPEN_READ_WRITE | OpenFlags::SQLITE_OPEN_CREATE,
                )?
            }
        };
        conn.set_limit(rusqlite::limits::Limit::SQLITE_LIMIT_LENGTH, MAX_LENGTH)?;
        self.conn = Some(conn);
        Ok(())
    }

    /// Simulates losing the session; every later call is Fatal.
    pub fn kill(&mut self) {
        self.conn = None;
    }

    fn conn(&mut self) -> Result<&mut Connection, QueryError> {
        self.conn
            .as_mut()
            .ok_or_else(|| QueryError::Fatal("connection lost".into()))
    }
}

fn classify(e: rusqlite::Error) -> QueryError {
    if let rusqlite::Error::SqliteFailure(f, _) = &e {
        if matches!(
            f.code,
            ffi::ErrorCode::CannotOpen
                | ffi::ErrorCode::NotADatabase
                | ffi::ErrorCode::SystemIoFailure
        ) {
            return QueryError::Fatal(e.to_string());
        }
    }
    QueryError::Error(e.to_string())
}

fn cell(v: ValueRef<'_>) -> Value {
    match v {
        ValueRef::Null => Value::Null,
        ValueRef::Integer(i) => Value::Int(i),
        ValueRef::Real(r) => Value::Text(format!("{r:?}")),
        ValueRef::Text(t) => Value::Text(String::from_utf8_lossy(t).into_owned()),
        ValueRef::Blob(b) => Value::Text(b.iter().map(|x| format!("{x:02X}")).collect()),
    }
}

impl Adapter for SqliteAdapter {
    fn execute(&mut self, sql: &str) -> ExecutionStatus {
        // The progress handler counts per connection; restart the budget per statement.
        if let Err(e) = self.reset_progress() {
            return e.into();
        }
        match self.conn() {
            Ok(c) => match c.execute_batch(sql) {
                Ok(()) => ExecutionStatus::Success,
                Err(e) => classify(e).into(),
            },
            Err(e) => e.into(),
        }
    }

    fn query(&mut self, sql: &str) -> Result<ResultSet, QueryError> {
        self.reset_progress()?;
        let conn = self.conn()?;
        let mut stmt = conn.prepare(sql).map_err(classify)?;
        let columns = stmt.column_count();
        let mut rows = stmt.query([]).map_err(classify)?;
        let mut out = Vec::new();
        while let Some(row) = rows.next().map_err(classify)? {
            let mut r = Vec::with_capacity(columns);
            for i in 0..columns {
                r.push(cell(row.get_ref(i).map_err(classify)?));
            }
            out.push(r);
        }
        Ok(ResultSet::new(columns, out))
    }

    fn reset(&mut self) -> Result<(), QueryError> {
        self.connect().map_err(|e| QueryError::Fatal(e.to_string()))
    }

    fn close(&mut self) {
        self.conn = None;
        if let Some(p) = &self.path {
            let _ = std::fs::remove_file(p);
        }
    }
}

impl SqliteAdapter {
    fn reset_progress(&mut self) -> Result<(), QueryError> {
        let conn = self.conn()?;
        let mut ticks = 0u32;
        conn.progress_handler(
            PROGRESS_PERIOD,
            Some(move || {
                ticks += 1;
                ticks > PROGRESS_LIMIT
            }),
        )
        .map_err(classify)
    }
}
