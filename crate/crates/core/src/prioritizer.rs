//! Duplicate triage for bug-inducing test cases by feature-set inclusion.
//!
//! A new case is a potential duplicate of the earliest recorded bug whose
//! feature set it contains. Only New sets enter the history.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::feature::FeatureId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Classification {
    New,
    PotentialDuplicate(u64),
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Classification::New => f.write_str("new"),
            Classification::PotentialDuplicate(id) => write!(f, "potential-duplicate-of {id}"),
        }
    }
}

impl Classification {
    pub fn parse(text: &str) -> Option<Classification> {
        let text = text.trim();
        if text == "new" {
            return Some(Classification::New);
        }
        text.strip_prefix("potential-duplicate-of ")?
            .parse()
            .ok()
            .map(Classification::PotentialDuplicate)
    }
}

/// Feature sets of New records, in insertion order, with an inverted index
/// from feature to the positions of the sets containing it.
#[derive(Clone, Debug, Default)]
pub struct HistoryStore {
    sets: Vec<(u64, BTreeSet<FeatureId>)>,
    postings: HashMap<FeatureId, Vec<usize>>,
    empty: Option<usize>,
}

impl HistoryStore {
    pub fn new() -> HistoryStore {
        HistoryStore::default()
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn sets(&self) -> &[(u64, BTreeSet<FeatureId>)] {
        &self.sets
    }

    fn push(&mut self, id: u64, set: &BTreeSet<FeatureId>) {
        let pos = self.sets.len();
        for f in set {
            self.postings.entry(f.clone()).or_default().push(pos);
        }
        if set.is_empty() && self.empty.is_none() {
            self.empty = Some(pos);
        }
        self.sets.push((id, set.clone()));
    }

    /// Position of the earliest stored set contained in `s`.
    fn first_subset(&self, s: &BTreeSet<FeatureId>) -> Option<usize> {
        let mut hits: HashMap<usize, usize> = HashMap::new();
        for f in s {
            for &pos in self.postings.get(f).map(Vec::as_slice).unwrap_or(&[]) {
                *hits.entry(pos).or_default() += 1;
            }
        }
        hits.into_iter()
            .filter(|&(pos, n)| n == self.sets[pos].1.len())
            .map(|(pos, _)| pos)
            .chain(self.empty)
            .min()
    }
}

/// Classifies `s_new` for the record `id`, adding it to the history when New.
pub fn classify(
    s_new: &BTreeSet<FeatureId>,
    id: u64,
    history: &mut HistoryStore,
) -> Classification {
    match history.first_subset(s_new) {
        Some(pos) => Classification::PotentialDuplicate(history.sets[pos].0),
        None => {
            history.push(id, s_new);
            Classification::New
        }
    }
}

/// Reference implementation: a linear subset scan.
pub fn brute_force_classify(
    s_new: &BTreeSet<FeatureId>,
    id: u64,
    history: &mut HistoryStore,
) -> Classification {
    match history.sets.iter().find(|(_, s)| s.is_subset(s_new)) {
        Some((prev, _)) => Classification::PotentialDuplicate(*prev),
        None => {
            history.push(id, s_new);
            Classification::New
        }
    }
}
