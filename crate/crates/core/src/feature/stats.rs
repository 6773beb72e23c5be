use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use thiserror::Error;

use super::inference::{classify_ddl_feature, classify_query_feature, InferenceConfig};
use super::{Catalog, FeatureId, FeatureState, Phase};

pub const STATS_HEADER: &str = "adaquery-stats v1";

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Execution counters for one feature plus its inferred state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureStats {
    pub feature: FeatureId,
    /// Executions of statements containing the feature.
    pub n: u64,
    /// Of those, how many succeeded.
    pub y: u64,
    pub state: FeatureState,
}

impl FeatureStats {
    pub fn new(feature: FeatureId, n: u64, y: u64) -> FeatureStats {
        assert!(y <= n, "y must not exceed N");
        FeatureStats {
            feature,
            n,
            y,
            state: FeatureState::Unknown,
        }
    }
}

// N lives in the high half, y in the low half, so one fetch_add updates both.
const Y_MASK: u64 = 0xFFFF_FFFF;
const N_ONE: u64 = 1 << 32;

fn pack(n: u64, y: u64) -> u64 {
    assert!(n <= Y_MASK && y <= n, "counter out of range");
    (n << 32) | y
}

fn unpack(v: u64) -> (u64, u64) {
    (v >> 32, v & Y_MASK)
}

/// Shared per-feature counters over a catalog.
///
/// `record_outcome` takes `&self` and may run from many workers at once; each
/// feature's (N, y) pair is a single packed atomic, so readers never observe
/// y > N. Counters saturate at 2³²−1. States change only through `&mut self`.
#[derive(Debug)]
pub struct StatsStore {
    catalog: Arc<Catalog>,
    counts: Vec<AtomicU64>,
    states: Vec<FeatureState>,
}

impl StatsStore {
    pub fn new(catalog: Arc<Catalog>) -> StatsStore {
        let len = catalog.len();
        StatsStore {
            catalog,
            counts: (0..len).map(|_| AtomicU64::new(0)).collect(),
            states: vec![FeatureState::Unknown; len],
        }
    }

    /// Builds a store from persisted records; every record must name a catalog feature.
    pub fn from_records(
        catalog: Arc<Catalog>,
        records: &[FeatureStats],
    ) -> Result<StatsStore, StatsError> {
        let mut store = StatsStore::new(catalog);
        for r in records {
            let idx = store
                .catalog
                .index_of_id(&r.feature)
                .ok_or_else(|| StatsError::UnknownFeature(r.feature.to_string()))?;
            store.counts[idx] = AtomicU64::new(pack(r.n, r.y));
            store.states[idx] = r.state;
        }
        Ok(store)
    }

    pub fn catalog(&self) -> &Arc<Catalog> {
        &self.catalog
    }

    /// Counts one execution for every feature in the set.
    pub fn record_outcome<'a>(
        &self,
        features: impl IntoIterator<Item = &'a FeatureId>,
        success: bool,
    ) -> Result<(), StatsError> {
        let idx: Vec<usize> = features
            .into_iter()
            .map(|f| {
                self.catalog
                    .index_of_id(f)
                    .ok_or_else(|| StatsError::UnknownFeature(f.to_string()))
            })
            .collect::<Result<_, _>>()?;
        self.record_indices(&idx, success);
        Ok(())
    }

    /// Index-based variant for callers that already resolved the catalog.
    pub fn record_indices(&self, features: &[usize], success: bool) {
        let delta = N_ONE + u64::from(success);
        for &i in features {
            let cell = &self.counts[i];
            let mut cur = cell.load(Ordering::Relaxed);
            loop {
                let (n, _) = unpack(cur);
                if n >= Y_MASK {
                    break;
                }
                match cell.compare_exchange_weak(
                    cur,
                    cur + delta,
                    Ordering::AcqRel,
                    Ordering::Relaxed,
                ) {
                    Ok(_) => break,
                    Err(actual) => cur = actual,
                }
            }
        }
    }

    pub fn counts(&self, idx: usize) -> (u64, u64) {
        unpack(self.counts[idx].load(Ordering::Acquire))
    }

    pub fn state(&self, idx: usize) -> FeatureState {
        self.states[idx]
    }

    pub fn states(&self) -> &[FeatureState] {
        &self.states
    }

    pub fn stats(&self, idx: usize) -> FeatureStats {
        let (n, y) = self.counts(idx);
        FeatureStats {
            feature: self.catalog.id(idx).clone(),
            n,
            y,
            state: self.states[idx],
        }
    }

    pub fn get(&self, id: &str) -> Option<FeatureStats> {
        self.catalog.index_of(id).map(|i| self.stats(i))
    }

    /// Re-runs classification for every feature. Unsupported is sticky.
    /// Returns the indices that became Unsupported in this pass.
    pub fn classify_all(&mut self, cfg: &InferenceConfig) -> Vec<usize> {
        let mut newly = Vec::new();
        for idx in 0..self.states.len() {
            if self.states[idx] == FeatureState::Unsupported {
                continue;
            }
            let stats = self.stats(idx);
            let next = match self.catalog.phase(idx) {
                Phase::Ddl => classify_ddl_feature(&stats, cfg),
                Phase::Query => classify_query_feature(&stats, cfg),
            };
            if next == FeatureState::Unsupported {
                newly.push(idx);
            }
            self.states[idx] = next;
        }
        newly
    }

    /// Adds another store's counters into this one (used when workers kept isolated stats).
    pub fn absorb(&mut self, other: &StatsStore) {
        for idx in 0..self.counts.len() {
            let (n0, y0) = self.counts(idx);
            let (n1, y1) = other.counts(idx);
            let n = (n0 + n1).min(Y_MASK);
            let y = (y0 + y1).min(n);
            self.counts[idx] = AtomicU64::new(pack(n, y));
            if other.states[idx] == FeatureState::Unsupported {
                self.states[idx] = FeatureState::Unsupported;
            }
        }
    }

    pub fn records(&self) -> Vec<FeatureStats> {
        (0..self.counts.len()).map(|i| self.stats(i)).collect()
    }
}

impl Clone for StatsStore {
    fn clone(&self) -> Self {
        StatsStore {
            catalog: Arc::clone(&self.catalog),
            counts: (0..self.counts.len())
                .map(|i| AtomicU64::new(self.counts[i].load(Ordering::Acquire)))
                .collect(),
            states: self.states.clone(),
        }
    }
}

pub fn write_stats(records: &[FeatureStats], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "{STATS_HEADER}")?;
    for r in records {
        writeln!(out, "{}\t{}\t{}\t{}", r.feature, r.n, r.y, r.state.token())?;
    }
    Ok(())
}

pub fn read_stats(input: impl BufRead) -> Result<Vec<FeatureStats>, StatsError> {
    let mut records = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut lines = input.lines();
    match lines.next().transpose()? {
        Some(first) if first == STATS_HEADER => {}
        _ => {
            return Err(StatsError::Parse {
                line: 1,
                message: format!("expected header `{STATS_HEADER}`"),
            })
        }
    }
    for (n, line) in lines.enumerate() {
        let line_no = n + 2;
        let line = line?;
        let err = |message: String| StatsError::Parse {
            line: line_no,
            message,
        };
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 4 {
            return Err(err(format!(
                "expected 4 tab-separated columns, found {}",
                cols.len()
            )));
        }
        let feature = FeatureId::new(cols[0])
            .ok_or_else(|| err(format!("invalid feature id `{}`", cols[0])))?;
        let count = |s: &str| -> Result<u64, StatsError> {
            // Canonical decimal only, so a file reads back to the same bytes.
            if s.is_empty()
                || (s.len() > 1 && s.starts_with('0'))
                || !s.bytes().all(|b| b.is_ascii_digit())
            {
                return Err(err(format!("bad count `{s}`")));
            }
            s.parse::<u64>()
                .map_err(|e| err(format!("bad count `{s}`: {e}")))
        };
        let total = count(cols[1])?;
        let succeeded = count(cols[2])?;
        if succeeded > total {
            return Err(err(format!("y = {succeeded} exceeds N = {total}")));
        }
        if total > Y_MASK {
            return Err(err(format!("N = {total} exceeds the counter range")));
        }
        let state = FeatureState::from_token(cols[3])
            .ok_or_else(|| err(format!("bad state `{}`", cols[3])))?;
        if !seen.insert(feature.clone()) {
            return Err(err(format!("duplicate feature `{feature}`")));
        }
        records.push(FeatureStats {
            feature,
            n: total,
            y: succeeded,
            state,
        });
    }
    Ok(records)
}

pub fn persist_stats(records: &[FeatureStats], path: &Path) -> Result<(), StatsError> {
    let mut buf = Vec::new();
    write_stats(records, &mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}

pub fn load_stats(path: &Path) -> Result<Vec<FeatureStats>, StatsError> {
    let file = std::fs::File::open(path)?;
    read_stats(std::io::BufReader::new(file))
}
