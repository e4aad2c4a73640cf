pub mod agents;
pub mod backend;
pub mod embedding;
pub mod gazetteer;
pub mod harness;
pub mod metrics;
pub mod schema;
