//! Dialogue relation extraction toolkit: relation schema, corpus handling,
//! standard and conversational evaluation, model input construction, a
//! majority baseline and corpus statistics.

pub mod baselines;
pub mod corpus;
pub mod io;
pub mod metrics;
pub mod preprocess;
pub mod schema;
pub mod stats;
pub mod text;
