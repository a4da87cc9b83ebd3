//! Pipeline from a per-user post corpus to per-user Granger tests of
//! activity against happiness.

pub mod corpus;
pub mod textproc;
pub mod embed;
pub mod graph;
pub mod granger;
pub mod series;
pub mod synth;
pub mod models;
pub mod config;
