//! File formats, command-line front end, and report emission for the
//! `overlook-core` simulator.

pub mod cli;
pub mod experiment;
pub mod ingest;
pub mod report;
