//! SQL features: the catalog of markable grammar elements, their execution
//! statistics, and the Bayesian support classifier.

mod catalog;
mod choice;
mod inference;
mod stats;

use std::fmt;
use std::sync::Arc;

pub use catalog::{
    Catalog, CatalogError, FeatureEntry, ParamType, SqlType, Template, TemplatePart,
};
pub use choice::{
    choose_alternative, choose_index, redistribute, ChoiceContext, ChoiceError, StateLookup,
};
pub use inference::{
    classify_ddl_feature, classify_query_feature, posterior_params, prob_below_threshold,
    InferenceConfig, CONFIDENCE,
};
pub use stats::{
    load_stats, persist_stats, read_stats, write_stats, FeatureStats, StatsError, StatsStore,
    STATS_HEADER,
};

/// Identifier of a SQL feature, e.g. `NULLIF`, `RIGHT_JOIN` or `SIN1INT`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeatureId(Arc<str>);

impl FeatureId {
    /// Builds an identifier, checking it against `[A-Z0-9_<>=!+~*/%-]+`.
    pub fn new(id: &str) -> Option<FeatureId> {
        if Self::is_valid(id) {
            Some(FeatureId(Arc::from(id)))
        } else {
            None
        }
    }

    pub fn is_valid(id: &str) -> bool {
        !id.is_empty()
            && id.bytes().all(|b| {
                b.is_ascii_uppercase()
                    || b.is_ascii_digit()
                    || matches!(
                        b,
                        b'_' | b'<' | b'>' | b'=' | b'!' | b'+' | b'~' | b'*' | b'/' | b'%' | b'-'
                    )
            })
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    Statement,
    ClauseKeyword,
    Function,
    Operator,
    DataType,
    CompositeArgType,
    AbstractProperty,
}

impl Category {
    pub fn token(self) -> &'static str {
        match self {
            Category::Statement => "STATEMENT",
            Category::ClauseKeyword => "CLAUSE",
            Category::Function => "FUNCTION",
            Category::Operator => "OPERATOR",
            Category::DataType => "DATATYPE",
            Category::CompositeArgType => "COMPOSITE",
            Category::AbstractProperty => "PROPERTY",
        }
    }

    pub fn from_token(token: &str) -> Option<Category> {
        Some(match token {
            "STATEMENT" => Category::Statement,
            "CLAUSE" => Category::ClauseKeyword,
            "FUNCTION" => Category::Function,
            "OPERATOR" => Category::Operator,
            "DATATYPE" => Category::DataType,
            "COMPOSITE" => Category::CompositeArgType,
            "PROPERTY" => Category::AbstractProperty,
            _ => return None,
        })
    }
}

/// Inferred support state of a feature.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum FeatureState {
    #[default]
    Unknown,
    Supported,
    Unsupported,
}

impl FeatureState {
    pub fn token(self) -> &'static str {
        match self {
            FeatureState::Unknown => "UNKNOWN",
            FeatureState::Supported => "SUPPORTED",
            FeatureState::Unsupported => "UNSUPPORTED",
        }
    }

    pub fn from_token(token: &str) -> Option<FeatureState> {
        Some(match token {
            "UNKNOWN" => FeatureState::Unknown,
            "SUPPORTED" => FeatureState::Supported,
            "UNSUPPORTED" => FeatureState::Unsupported,
            _ => return None,
        })
    }
}

/// Which classification rule a feature is judged by.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    /// Database-state statements: fail-count rule.
    Ddl,
    /// Query features: posterior rule.
    Query,
}

/// Well-known identifiers the engine itself refers to.
pub mod ids {
    pub const CREATE_TABLE: &str = "CREATE_TABLE";
    pub const INDEX: &str = "INDEX";
    pub const VIEW: &str = "VIEW";
    pub const INSERT: &str = "INSERT";
    pub const ANALYZE: &str = "ANALYZE";
    pub const SELECT: &str = "SELECT";
    pub const WHERE: &str = "WHERE";
    pub const DISTINCT: &str = "DISTINCT";
    pub const UNIQUE: &str = "UNIQUE";
    pub const SUBQUERY: &str = "SUBQUERY";
    pub const NOT: &str = "NOT";
    pub const IS_NULL: &str = "IS_NULL";
    pub const IS_TRUE: &str = "IS_TRUE";
    pub const IMPLICIT_CAST: &str = "IMPLICIT_CAST";
    pub const INTEGER: &str = "INTEGER";
    pub const TEXT: &str = "TEXT";
    pub const BOOLEAN: &str = "BOOLEAN";
    pub const JOINS: [&str; 6] = [
        "INNER_JOIN",
        "LEFT_JOIN",
        "RIGHT_JOIN",
        "FULL_JOIN",
        "CROSS_JOIN",
        "NATURAL_JOIN",
    ];
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feature_id_charset() {
        assert!(FeatureId::new("SIN1INT").is_some());
        assert!(FeatureId::new("<=>").is_some());
        assert!(FeatureId::new("!=").is_some());
        assert!(FeatureId::new("||").is_none());
        assert!(FeatureId::new("sin").is_none());
        assert!(FeatureId::new("").is_none());
    }

    #[test]
    fn tokens_roundtrip() {
        for s in [
            FeatureState::Unknown,
            FeatureState::Supported,
            FeatureState::Unsupported,
        ] {
            assert_eq!(FeatureState::from_token(s.token()), Some(s));
        }
        assert_eq!(
            Category::from_token("CLAUSE"),
            Some(Category::ClauseKeyword)
        );
    }
}
