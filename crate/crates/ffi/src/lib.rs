//! C ABI for adaquery.
//!
//! Objects cross the boundary as opaque handles created by `aq_*_new` or
//! `aq_*_load` and released by the matching `aq_*_free`. Every fallible call
//! returns an [`AqStatus`]; on failure, [`aq_last_error`] describes the most
//! recent error on the calling thread. Results are written through out
//! pointers, which are left untouched on failure. Panics never cross the
//! boundary: they surface as `AQ_STATUS_PANIC`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use adaquery::campaign::{run_campaign, CampaignConfig, OracleChoice};
use adaquery::feature::{
    load_stats, persist_stats, prob_below_threshold, Catalog, FeatureId, FeatureState,
    FeatureStats, InferenceConfig, StatsStore,
};
use adaquery::prioritizer::{classify, Classification, HistoryStore};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AqStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    UnknownFeature = 3,
    Io = 4,
    /// The campaign stopped on a Fatal target error; partial results were written.
    Fatal = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AqFeatureState {
    Unknown = 0,
    Supported = 1,
    Unsupported = 2,
}

impl From<FeatureState> for AqFeatureState {
    fn from(s: FeatureState) -> Self {
        match s {
            FeatureState::Unknown => AqFeatureState::Unknown,
            FeatureState::Supported => AqFeatureState::Supported,
            FeatureState::Unsupported => AqFeatureState::Unsupported,
        }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AqOracle {
    Tlp = 0,
    Norec = 1,
    Both = 2,
}

/// Feature catalog.
pub struct AqCatalog(Arc<Catalog>);

/// Per-feature execution counters and states.
pub struct AqStats(StatsStore);

/// Feature sets of bugs classified New so far.
pub struct AqHistory(HistoryStore);

/// Result of triaging one bug.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AqClassification {
    pub is_new: bool,
    /// Id of the earlier bug when `is_new` is false.
    pub duplicate_of: u64,
}

/// Campaign settings. Start from [`aq_campaign_options_default`].
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct AqCampaignOptions {
    /// `scheme:config`, e.g. `sqlite::memory:`.
    pub target: *const c_char,
    pub out_dir: *const c_char,
    /// May be null.
    pub stats_path: *const c_char,
    pub oracle: AqOracle,
    pub seed: u64,
    pub threshold_p: f64,
    pub interval: u64,
    pub max_depth: u32,
    pub workers: u32,
    /// Statements to run; 0 means unbounded, in which case `duration_secs` must be set.
    pub budget: u64,
    pub duration_secs: u64,
    pub feedback: bool,
    pub isolate_stats: bool,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AqCampaignSummary {
    pub statements: u64,
    pub statements_succeeded: u64,
    pub checks: u64,
    pub checks_succeeded: u64,
    pub windows: u64,
    pub bugs: u64,
    pub bugs_new: u64,
    pub unsupported_features: u64,
    /// Validity of the last window, or 0 without windows.
    pub final_validity: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("NULs replaced"));
}

struct Failure(AqStatus, String);

impl Failure {
    fn null(what: &str) -> Failure {
        Failure(AqStatus::NullArgument, format!("`{what}` is null"))
    }
}

/// Runs `f`, translating failures and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> AqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AqStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            AqStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(AqStatus::InvalidArgument, format!("`{what}` is not UTF-8")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| Failure::null(what))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::null(what))
}

unsafe fn feature_list(
    ids: *const *const c_char,
    len: usize,
) -> Result<Vec<&'static str>, Failure> {
    if len == 0 {
        return Ok(Vec::new());
    }
    if ids.is_null() {
        return Err(Failure::null("ids"));
    }
    std::slice::from_raw_parts(ids, len)
        .iter()
        .map(|&p| str_arg(p, "ids[i]"))
        .collect()
}

/// Message for the last failed call on this thread; empty if none. Valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn aq_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Probability that a feature's success rate lies below `p`, given `y`
/// successes in `n` executions.
#[no_mangle]
pub unsafe extern "C" fn aq_prob_below_threshold(
    n: u64,
    y: u64,
    p: f64,
    out: *mut f64,
) -> AqStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        if y > n || !(p > 0.0 && p < 1.0) {
            return Err(Failure(
                AqStatus::InvalidArgument,
                "need y <= n and 0 < p < 1".into(),
            ));
        }
        let fid = FeatureId::new("F").expect("valid id");
        *out = prob_below_threshold(&FeatureStats::new(fid, n, y), p);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn aq_catalog_default(out: *mut *mut AqCatalog) -> AqStatus {
    guard(|| {
        *out_arg(out, "out")? =
            Box::into_raw(Box::new(AqCatalog(Arc::new(Catalog::default_catalog()))));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn aq_catalog_load(
    path: *const c_char,
    out: *mut *mut AqCatalog,
) -> AqStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let path = str_arg(path, "path")?;
        let c = Catalog::load(path.as_ref()).map_err(|e| Failure(AqStatus::Io, e.to_string()))?;
        *out = Box::into_raw(Box::new(AqCatalog(Arc::new(c))));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn aq_catalog_len(catalog: *const AqCatalog, out: *mut usize) -> AqStatus {
    guard(|| {
        *out_arg(out, "out")? = ref_arg(catalog, "catalog")?.0.len();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn aq_catalog_free(catalog: *mut AqCatalog) {
    if !catalog.is_null() {
        drop(Box::from_raw(catalog));
    }
}

/// Empty statistics over `catalog`. The catalog handle may be freed afterwards.
#[no_mangle]
pub unsafe extern "C" fn aq_stats_new(
    catalog: *const AqCatalog,
    out: *mut *mut AqStats,
) -> AqStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let c = ref_arg(catalog, "catalog")?;
        *out = Box::into_raw(Box::new(AqStats(StatsStore::new(Arc::clone(&c.0)))));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn aq_stats_load(
    catalog: *const AqCatalog,
    path: *const c_char,
    out: *mut *mut AqStats,
) -> AqStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let c = ref_arg(catalog, "catalog")?;
        let path = str_arg(path, "path")?;
        let records =
            load_stats(path.as_ref()).map_err(|e| Failure(AqStatus::Io, e.to_string()))?;
        let store = StatsStore::from_records(Arc::clone(&c.0), &records)
            .map_err(|e| Failure(AqStatus::UnknownFeature, e.to_string()))?;
        *out = Box::into_raw(Box::new(AqStats(store)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn aq_stats_save(stats: *const AqStats, path: *const c_char) -> AqStatus {
    guard(|| {
        let s = ref_arg(stats, "stats")?;
        let path = str_arg(path, "path")?;
        persist_stats(&s.0.records(), path.as_ref())
            .map_err(|e| Failure(AqStatus::Io, e.to_string()))
    })
}

/// Counts one execution of a statement exercising the `len` features in `ids`.
#[no_mangle]
pub unsafe extern "C" fn aq_stats_record(
    stats: *const AqStats,
    ids: *const *const c_char,
    len: usize,
    success: bool,
) -> AqStatus {
    guard(|| {
        let s = ref_arg(stats, "stats")?;
        let ids = feature_list(ids, len)?;
        let fids: Vec<FeatureId> = ids
            .iter()
            .map(|i| {
                FeatureId::new(i).ok_or_else(|| {
                    Failure(
                        AqStatus::UnknownFeature,
                        format!("invalid feature id `{i}`"),
                    )
                })
            })
            .collect::<Result<_, _>>()?;
        s.0.record_outcome(&fids, success)
            .map_err(|e| Failure(AqStatus::UnknownFeature, e.to_string()))
    })
}

/// Reclassifies every feature; writes how many became Unsupported.
#[no_mangle]
pub unsafe extern "C" fn aq_stats_classify(
    stats: *mut AqStats,
    threshold_p: f64,
    newly_unsupported: *mut usize,
) -> AqStatus {
    guard(|| {
        let s = out_arg(stats, "stats")?;
        let cfg = InferenceConfig::with_threshold(threshold_p).ok_or_else(|| {
            Failure(
                AqStatus::InvalidArgument,
                "threshold must lie in (0, 1)".into(),
            )
        })?;
        let n = s.0.classify_all(&cfg).len();
        if let Some(out) = newly_unsupported.as_mut() {
            *out = n;
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn aq_stats_get(
    stats: *const AqStats,
    id: *const c_char,
    n: *mut u64,
    y: *mut u64,
    state: *mut AqFeatureState,
) -> AqStatus {
    guard(|| {
        let s = ref_arg(stats, "stats")?;
        let id = str_arg(id, "id")?;
        let (n, y, state) = (out_arg(n, "n")?, out_arg(y, "y")?, out_arg(state, "state")?);
        let r = s
            .0
            .get(id)
            .ok_or_else(|| Failure(AqStatus::UnknownFeature, format!("unknown feature `{id}`")))?;
        (*n, *y, *state) = (r.n, r.y, r.state.into());
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn aq_stats_free(stats: *mut AqStats) {
    if !stats.is_null() {
        drop(Box::from_raw(stats));
    }
}

#[no_mangle]
pub unsafe extern "C" fn aq_history_new(out: *mut *mut AqHistory) -> AqStatus {
    guard(|| {
        *out_arg(out, "out")? = Box::into_raw(Box::new(AqHistory(HistoryStore::new())));
        Ok(())
    })
}

/// Triages bug `bug_id` with the given feature set, recording it when New.
#[no_mangle]
pub unsafe extern "C" fn aq_history_classify(
    history: *mut AqHistory,
    ids: *const *const c_char,
    len: usize,
    bug_id: u64,
    out: *mut AqClassification,
) -> AqStatus {
    guard(|| {
        let h = out_arg(history, "history")?;
        let out = out_arg(out, "out")?;
        let set: BTreeSet<FeatureId> = feature_list(ids, len)?
            .into_iter()
            .map(|i| {
                FeatureId::new(i).ok_or_else(|| {
                    Failure(
                        AqStatus::InvalidArgument,
                        format!("invalid feature id `{i}`"),
                    )
                })
            })
            .collect::<Result<_, _>>()?;
        *out = match classify(&set, bug_id, &mut h.0) {
            Classification::New => AqClassification {
                is_new: true,
                duplicate_of: 0,
            },
            Classification::PotentialDuplicate(d) => AqClassification {
                is_new: false,
                duplicate_of: d,
            },
        };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn aq_history_len(history: *const AqHistory, out: *mut usize) -> AqStatus {
    guard(|| {
        *out_arg(out, "out")? = ref_arg(history, "history")?.0.len();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn aq_history_free(history: *mut AqHistory) {
    if !history.is_null() {
        drop(Box::from_raw(history));
    }
}

#[no_mangle]
pub extern "C" fn aq_campaign_options_default() -> AqCampaignOptions {
    AqCampaignOptions {
        target: std::ptr::null(),
        out_dir: std::ptr::null(),
        stats_path: std::ptr::null(),
        oracle: AqOracle::Tlp,
        seed: 0,
        threshold_p: InferenceConfig::default().threshold_p,
        interval: 100_000,
        max_depth: 3,
        workers: 1,
        budget: 0,
        duration_secs: 0,
        feedback: true,
        isolate_stats: false,
    }
}

/// Runs a campaign with the default catalog and target registry.
#[no_mangle]
pub unsafe extern "C" fn aq_campaign_run(
    options: *const AqCampaignOptions,
    out: *mut AqCampaignSummary,
) -> AqStatus {
    guard(|| {
        let o = ref_arg(options, "options")?;
        let out = out_arg(out, "out")?;
        let mut cfg =
            CampaignConfig::new(str_arg(o.target, "target")?, str_arg(o.out_dir, "out_dir")?);
        if !o.stats_path.is_null() {
            cfg.stats_path = Some(PathBuf::from(str_arg(o.stats_path, "stats_path")?));
        }
        cfg.oracle = match o.oracle {
            AqOracle::Tlp => OracleChoice::Tlp,
            AqOracle::Norec => OracleChoice::Norec,
            AqOracle::Both => OracleChoice::Both,
        };
        cfg.inference = InferenceConfig::with_threshold(o.threshold_p).ok_or_else(|| {
            Failure(
                AqStatus::InvalidArgument,
                "threshold must lie in (0, 1)".into(),
            )
        })?;
        cfg = cfg.with_interval(o.interval);
        cfg.gen.seed = o.seed;
        cfg.gen.max_depth = o.max_depth;
        cfg.workers = o.workers as usize;
        cfg.budget = (o.budget > 0).then_some(o.budget);
        cfg.duration = (o.duration_secs > 0).then(|| Duration::from_secs(o.duration_secs));
        cfg.feedback = o.feedback;
        cfg.isolate_stats = o.isolate_stats;
        let m = run_campaign(&cfg).map_err(|e| {
            let status = match e {
                adaquery::campaign::CampaignError::Config(_) => AqStatus::InvalidArgument,
                _ => AqStatus::Io,
            };
            Failure(status, e.to_string())
        })?;
        *out = AqCampaignSummary {
            statements: m.statements_executed,
            statements_succeeded: m.statements_succeeded,
            checks: m.checks_executed,
            checks_succeeded: m.checks_succeeded,
            windows: m.windows.len() as u64,
            bugs: m.bugs.len() as u64,
            bugs_new: m.bugs_new() as u64,
            unsupported_features: m.unsupported().len() as u64,
            final_validity: m.windows.last().map_or(0.0, |w| w.validity()),
        };
        match m.fatal {
            Some(f) => Err(Failure(AqStatus::Fatal, f)),
            None => Ok(()),
        }
    })
}
