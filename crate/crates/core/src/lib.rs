pub mod adapter;
pub mod campaign;
pub mod feature;
pub mod generator;
pub mod oracle;
pub mod prioritizer;
pub mod reducer;
pub mod schema;
pub mod sql;
